#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "gin/analytics/forest.hpp"
#include "gin/gan/model.hpp"

namespace gin::io {

// Binary model container, little-endian throughout:
//
//   "GINM" | u32 version | u32 kind
//   u32 latent_dim | u32 image_size | u32 length + descriptor text
//   u32 tensor count, then per tensor:
//     u32 length + name | u32 rank | u32 dims[rank] | f32 values[]
//   forest only: u32 tree count, then per tree:
//     u32 node count | nodes (i32 feature, f32 threshold, u32 left, u32 right,
//     u32 count_low, u32 count_high) | u32 oob count | u32 oob[]
//
// The descriptor holds "key: value" lines (layer stacks, clip constant,
// forest seed). Loading is all-or-nothing: any mismatch, truncation or
// trailing byte raises FormatError.
inline constexpr std::uint32_t kModelFormatVersion = 1;

enum class ModelKind : std::uint32_t { gan = 1, inverse = 2, forest = 3 };

std::string to_string(ModelKind kind);

std::string serialize(const gan::GanModel& model);
std::string serialize(const gan::InverseModel& model);
std::string serialize(const analytics::ForestModel& model);

// Reads only the header.
ModelKind peek_kind(const std::string& bytes);

gan::GanModel deserialize_gan(const std::string& bytes);
gan::InverseModel deserialize_inverse(const std::string& bytes);
analytics::ForestModel deserialize_forest(const std::string& bytes);

std::string read_file_bytes(const std::filesystem::path& path);
// Writes via a temporary file and rename so a failed write leaves no partial file.
void write_file_bytes(const std::filesystem::path& path, const std::string& bytes);

}  // namespace gin::io
