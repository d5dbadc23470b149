#include "gin/io/model_file.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#include "gin/error.hpp"
#include "gin/io/csv.hpp"

namespace gin::io {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::gan: return "gan";
    case ModelKind::inverse: return "inverse";
    case ModelKind::forest: return "forest";
  }
  return "unknown";
}

namespace {

constexpr char kMagic[4] = {'G', 'I', 'N', 'M'};

class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void size(std::size_t v) {
    if (v > 0xffffffffu) throw ValidationError("value too large for the model format");
    u32(static_cast<std::uint32_t>(v));
  }
  void text(const std::string& s) {
    size(s.size());
    out_ += s;
  }
  void raw(const char* p, std::size_t n) { out_.append(p, n); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  std::uint32_t u32() {
    need(4, "integer");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  float f32() { return std::bit_cast<float>(u32()); }
  std::string text() {
    const std::uint32_t n = u32();
    need(n, "string");
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  void magic() {
    need(4, "magic");
    if (std::memcmp(bytes_.data(), kMagic, 4) != 0) throw FormatError("not a model file (bad magic)");
    pos_ += 4;
  }
  void finish() const {
    if (pos_ != bytes_.size()) {
      throw FormatError("model file has " + std::to_string(bytes_.size() - pos_) + " unexpected trailing bytes");
    }
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      throw FormatError(std::string("model file truncated while reading ") + what + " at byte " + std::to_string(pos_));
    }
  }

  const std::string& bytes_;
  std::size_t pos_ = 0;
};

struct Header {
  ModelKind kind{};
  std::uint32_t latent_dim = 0;
  std::uint32_t image_size = 0;
  std::map<std::string, std::string> descriptor;
};

void write_header(Writer& w, ModelKind kind, std::size_t latent_dim, std::size_t image_size,
                  const std::vector<std::pair<std::string, std::string>>& descriptor) {
  w.raw(kMagic, 4);
  w.u32(kModelFormatVersion);
  w.u32(static_cast<std::uint32_t>(kind));
  w.size(latent_dim);
  w.size(image_size);
  std::string text;
  for (const auto& [k, v] : descriptor) text += k + ": " + v + "\n";
  w.text(text);
}

Header read_header(Reader& r) {
  r.magic();
  const std::uint32_t version = r.u32();
  if (version != kModelFormatVersion) {
    throw FormatError("unsupported model file version " + std::to_string(version) + " (expected " +
                      std::to_string(kModelFormatVersion) + ")");
  }
  Header h;
  const std::uint32_t kind = r.u32();
  if (kind < 1 || kind > 3) throw FormatError("unknown model kind tag " + std::to_string(kind));
  h.kind = static_cast<ModelKind>(kind);
  h.latent_dim = r.u32();
  h.image_size = r.u32();
  std::istringstream lines(r.text());
  for (std::string line; std::getline(lines, line);) {
    const auto colon = line.find(": ");
    if (colon == std::string::npos) throw FormatError("malformed descriptor line '" + line + "'");
    h.descriptor[line.substr(0, colon)] = line.substr(colon + 2);
  }
  return h;
}

void expect_kind(const Header& h, ModelKind kind) {
  if (h.kind != kind) throw FormatError("expected a " + to_string(kind) + " model, file holds a " + to_string(h.kind) + " model");
}

const std::string& descriptor_field(const Header& h, const std::string& key) {
  const auto it = h.descriptor.find(key);
  if (it == h.descriptor.end()) throw FormatError("model descriptor lacks '" + key + "'");
  return it->second;
}

void write_tensors(Writer& w, const std::vector<std::pair<std::string, const nn::Params*>>& groups) {
  std::size_t count = 0;
  for (const auto& g : groups) count += g.second->size();
  w.size(count);
  for (const auto& [prefix, params] : groups) {
    for (const auto& p : *params) {
      w.text(prefix + p.name);
      w.size(p.value.rank());
      for (std::size_t d : p.value.shape()) w.size(d);
      for (float v : p.value.data()) w.f32(v);
    }
  }
}

// Tensors must appear in exactly the order and shapes the rebuilt networks expect.
void read_tensors(Reader& r, const std::vector<std::pair<std::string, nn::Params*>>& groups) {
  std::size_t expected = 0;
  for (const auto& g : groups) expected += g.second->size();
  const std::uint32_t count = r.u32();
  if (count != expected) {
    throw FormatError("model file has " + std::to_string(count) + " tensors, architecture needs " + std::to_string(expected));
  }
  for (const auto& [prefix, params] : groups) {
    for (auto& p : *params) {
      const std::string name = r.text();
      if (name != prefix + p.name) throw FormatError("expected tensor '" + prefix + p.name + "', found '" + name + "'");
      const std::uint32_t rank = r.u32();
      nn::Shape shape(rank);
      for (auto& d : shape) d = r.u32();
      if (shape != p.value.shape()) {
        throw FormatError("tensor '" + name + "' has shape " + nn::shape_string(shape) + ", expected " +
                          nn::shape_string(p.value.shape()));
      }
      for (float& v : p.value.data()) v = r.f32();
    }
  }
}

gan::GanModel gan_from_header(const Header& h) {
  gan::GanModel m;
  m.latent_dim = h.latent_dim;
  m.image_size = h.image_size;
  gan::validate_latent_dim(m.latent_dim);
  m.clip_c = static_cast<float>(parse_double(descriptor_field(h, "clip_c"), "clip_c"));
  m.generator = nn::Network(nn::parse_layers(descriptor_field(h, "generator")), {m.latent_dim});
  m.critic = nn::Network(nn::parse_layers(descriptor_field(h, "critic")), {m.image_size * m.image_size});
  if (m.generator.output_shape() != nn::Shape{m.image_size * m.image_size} || m.critic.output_shape() != nn::Shape{1}) {
    throw FormatError("GAN architecture does not match its declared image size");
  }
  return m;
}

template <typename F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const FormatError&) {
    throw;
  } catch (const std::exception& e) {
    // Architecture strings that fail validation are a property of the file.
    throw FormatError(std::string("invalid model file: ") + e.what());
  }
}

}  // namespace

std::string serialize(const gan::GanModel& model) {
  Writer w;
  write_header(w, ModelKind::gan, model.latent_dim, model.image_size,
               {{"generator", nn::describe_layers(model.generator.layers())},
                {"critic", nn::describe_layers(model.critic.layers())},
                {"clip_c", format_number(model.clip_c)}});
  write_tensors(w, {{"generator.", &model.generator.params()}, {"critic.", &model.critic.params()}});
  return w.take();
}

std::string serialize(const gan::InverseModel& model) {
  Writer w;
  write_header(w, ModelKind::inverse, model.latent_dim, model.image_size,
               {{"network", nn::describe_layers(model.network.layers())}});
  write_tensors(w, {{"network.", &model.network.params()}});
  return w.take();
}

std::string serialize(const analytics::ForestModel& model) {
  Writer w;
  write_header(w, ModelKind::forest, model.n_features, 0, {{"seed", std::to_string(model.seed)}});
  w.u32(0);
  w.size(model.trees.size());
  for (const auto& tree : model.trees) {
    w.size(tree.nodes.size());
    for (const auto& n : tree.nodes) {
      w.i32(n.feature);
      w.f32(n.threshold);
      w.u32(n.left);
      w.u32(n.right);
      w.u32(n.count_low);
      w.u32(n.count_high);
    }
    w.size(tree.out_of_bag.size());
    for (auto i : tree.out_of_bag) w.u32(i);
  }
  return w.take();
}

ModelKind peek_kind(const std::string& bytes) {
  Reader r(bytes);
  return read_header(r).kind;
}

gan::GanModel deserialize_gan(const std::string& bytes) {
  return guarded([&] {
    Reader r(bytes);
    const Header h = read_header(r);
    expect_kind(h, ModelKind::gan);
    gan::GanModel m = gan_from_header(h);
    read_tensors(r, {{"generator.", &m.generator.params()}, {"critic.", &m.critic.params()}});
    r.finish();
    return m;
  });
}

gan::InverseModel deserialize_inverse(const std::string& bytes) {
  return guarded([&] {
    Reader r(bytes);
    const Header h = read_header(r);
    expect_kind(h, ModelKind::inverse);
    gan::InverseModel m;
    m.latent_dim = h.latent_dim;
    m.image_size = h.image_size;
    gan::validate_latent_dim(m.latent_dim);
    m.network = nn::Network(nn::parse_layers(descriptor_field(h, "network")), {1, m.image_size, m.image_size});
    if (m.network.output_shape() != nn::Shape{m.latent_dim}) {
      throw FormatError("inverse architecture does not match its declared latent dimension");
    }
    read_tensors(r, {{"network.", &m.network.params()}});
    r.finish();
    return m;
  });
}

analytics::ForestModel deserialize_forest(const std::string& bytes) {
  return guarded([&] {
    Reader r(bytes);
    const Header h = read_header(r);
    expect_kind(h, ModelKind::forest);
    analytics::ForestModel m;
    m.n_features = h.latent_dim;
    m.seed = static_cast<std::uint64_t>(std::stoull(descriptor_field(h, "seed")));
    if (r.u32() != 0) throw FormatError("forest model files carry no tensors");
    const std::uint32_t n_trees = r.u32();
    // Each tree needs at least 8 bytes of counts; reject absurd counts before allocating.
    if (n_trees == 0 || static_cast<std::size_t>(n_trees) * 8 > r.remaining()) {
      throw FormatError("forest tree count " + std::to_string(n_trees) + " is inconsistent with the file size");
    }
    m.trees.resize(n_trees);
    for (auto& tree : m.trees) {
      const std::uint32_t n_nodes = r.u32();
      if (n_nodes == 0 || static_cast<std::size_t>(n_nodes) * 24 > r.remaining()) {
        throw FormatError("forest node count inconsistent with the file size");
      }
      tree.nodes.resize(n_nodes);
      for (std::uint32_t i = 0; i < n_nodes; ++i) {
        auto& n = tree.nodes[i];
        n.feature = r.i32();
        n.threshold = r.f32();
        n.left = r.u32();
        n.right = r.u32();
        n.count_low = r.u32();
        n.count_high = r.u32();
        if (n.is_leaf()) {
          if (n.count_low + n.count_high == 0) throw FormatError("forest leaf without samples");
        } else if (static_cast<std::size_t>(n.feature) >= m.n_features || n.left <= i || n.right <= i ||
                   n.left >= n_nodes || n.right >= n_nodes) {
          throw FormatError("forest node " + std::to_string(i) + " has invalid feature or child offsets");
        }
      }
      const std::uint32_t n_oob = r.u32();
      if (static_cast<std::size_t>(n_oob) * 4 > r.remaining()) throw FormatError("forest out-of-bag list truncated");
      tree.out_of_bag.resize(n_oob);
      for (auto& i : tree.out_of_bag) i = r.u32();
    }
    r.finish();
    return m;
  });
}

std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, const std::string& bytes) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write '" + path.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw ValidationError("write to '" + path.string() + "' failed");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace gin::io
