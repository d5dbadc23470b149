#include "gin/analytics/isomap.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <string>

#include "gin/error.hpp"

namespace gin::analytics {

Matrix to_points(const FeatureMatrix& features) {
  Matrix p(features.rows, features.cols);
  std::copy(features.values.begin(), features.values.end(), p.values.begin());
  return p;
}

namespace {

struct Edge {
  std::size_t to;
  double weight;
};

double euclidean(const Matrix& p, std::size_t a, std::size_t b) {
  double s = 0.0;
  for (std::size_t c = 0; c < p.cols; ++c) {
    const double d = p.at(a, c) - p.at(b, c);
    s += d * d;
  }
  return std::sqrt(s);
}

std::vector<std::vector<Edge>> knn_graph(const Matrix& p, std::size_t k) {
  const std::size_t n = p.rows;
  std::vector<std::vector<char>> linked(n, std::vector<char>(n, 0));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> dist(n);
    for (std::size_t j = 0; j < n; ++j) dist[j] = euclidean(p, i, j);
    std::iota(order.begin(), order.end(), std::size_t{0});
    // Nearest first; index breaks distance ties so the graph is deterministic.
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return dist[a] != dist[b] ? dist[a] < dist[b] : a < b;
    });
    std::size_t taken = 0;
    for (std::size_t j : order) {
      if (taken == k) break;
      if (j == i) continue;
      linked[i][j] = linked[j][i] = 1;
      ++taken;
    }
  }
  std::vector<std::vector<Edge>> graph(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (linked[i][j]) graph[i].push_back({j, euclidean(p, i, j)});
    }
  }
  return graph;
}

std::size_t count_components(const std::vector<std::vector<Edge>>& graph) {
  std::vector<char> seen(graph.size(), 0);
  std::size_t components = 0;
  for (std::size_t s = 0; s < graph.size(); ++s) {
    if (seen[s]) continue;
    ++components;
    std::vector<std::size_t> stack{s};
    seen[s] = 1;
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      for (const Edge& e : graph[v]) {
        if (!seen[e.to]) {
          seen[e.to] = 1;
          stack.push_back(e.to);
        }
      }
    }
  }
  return components;
}

}  // namespace

Matrix geodesic_distances(const Matrix& points, std::size_t k) {
  const std::size_t n = points.rows;
  if (k < 1) throw ValidationError("isomap k must be >= 1");
  if (n <= k) throw ValidationError("isomap needs more than k = " + std::to_string(k) + " points, got " + std::to_string(n));
  for (double v : points.values) {
    if (!std::isfinite(v)) throw ValidationError("isomap input contains a non-finite value");
  }
  const auto graph = knn_graph(points, k);
  if (const std::size_t c = count_components(graph); c > 1) {
    throw NumericalError("isomap neighbour graph with k = " + std::to_string(k) + " has " + std::to_string(c) +
                         " connected components");
  }

  Matrix dist(n, n, std::numeric_limits<double>::infinity());
  const auto rows = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t si = 0; si < rows; ++si) {
    const auto s = static_cast<std::size_t>(si);
    double* d = dist.values.data() + s * n;
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    d[s] = 0.0;
    queue.push({0.0, s});
    while (!queue.empty()) {
      const auto [dv, v] = queue.top();
      queue.pop();
      if (dv > d[v]) continue;
      for (const Edge& e : graph[v]) {
        const double cand = dv + e.weight;
        if (cand < d[e.to]) {
          d[e.to] = cand;
          queue.push({cand, e.to});
        }
      }
    }
  }
  // Shortest paths found from either end can differ in the last bit.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double m = std::min(dist.at(i, j), dist.at(j, i));
      dist.at(i, j) = dist.at(j, i) = m;
    }
  }
  return dist;
}

EmbeddingCoords classical_mds(const Matrix& distances, std::size_t out_dim) {
  const std::size_t n = distances.rows;
  if (distances.cols != n) throw ValidationError("MDS needs a square distance matrix");
  if (out_dim < 1 || out_dim > n) throw ValidationError("MDS out_dim must be in [1, n]");

  Eigen::MatrixXd sq(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double d = distances.at(i, j);
      sq(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = d * d;
    }
  }
  const Eigen::VectorXd row_mean = sq.rowwise().mean();
  const Eigen::RowVectorXd col_mean = sq.colwise().mean();
  const double grand = sq.mean();
  Eigen::MatrixXd b = -0.5 * ((sq.colwise() - row_mean).rowwise() - col_mean);
  b.array() -= 0.5 * grand;
  b = 0.5 * (b + b.transpose()).eval();

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(b);
  if (solver.info() != Eigen::Success) throw NumericalError("MDS eigen-decomposition did not converge");

  EmbeddingCoords coords(n, out_dim);
  for (std::size_t a = 0; a < out_dim; ++a) {
    // Eigen sorts ascending.
    const auto col = static_cast<Eigen::Index>(n - 1 - a);
    const double lambda = std::max(solver.eigenvalues()(col), 0.0);
    Eigen::VectorXd v = solver.eigenvectors().col(col);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    const double scale = std::sqrt(lambda);
    for (std::size_t i = 0; i < n; ++i) coords.at(i, a) = v(static_cast<Eigen::Index>(i)) * scale;
  }
  return coords;
}

EmbeddingCoords isomap(const Matrix& points, std::size_t k, std::size_t out_dim) {
  if (out_dim < 1 || out_dim > k) throw ValidationError("isomap out_dim must be in [1, k]");
  return classical_mds(geodesic_distances(points, k), out_dim);
}

EmbeddingCoords isomap(const FeatureMatrix& features, std::size_t k, std::size_t out_dim) {
  features.validate();
  return isomap(to_points(features), k, out_dim);
}

}  // namespace gin::analytics
