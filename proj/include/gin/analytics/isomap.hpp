#pragma once

#include <cstddef>
#include <vector>

#include "gin/analytics/features.hpp"

namespace gin::analytics {

// Dense row-major double matrix; used for point sets, distance matrices and
// embeddings.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), values(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

using EmbeddingCoords = Matrix;

Matrix to_points(const FeatureMatrix& features);

// Symmetrized k-nearest-neighbour graph (edge if either endpoint picks the
// other), then all-pairs shortest paths. Throws NumericalError naming the
// component count when the graph is disconnected.
Matrix geodesic_distances(const Matrix& points, std::size_t k);

// Classical MDS: B = -1/2 J D^2 J, top out_dim eigenpairs in descending order,
// coordinates = eigenvector * sqrt(max(eigenvalue, 0)). Each axis is signed so
// that its largest-magnitude coordinate is positive.
EmbeddingCoords classical_mds(const Matrix& distances, std::size_t out_dim);

EmbeddingCoords isomap(const Matrix& points, std::size_t k, std::size_t out_dim);
EmbeddingCoords isomap(const FeatureMatrix& features, std::size_t k, std::size_t out_dim);

}  // namespace gin::analytics
