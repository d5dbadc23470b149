#pragma once

#include <filesystem>

#include "gin/synth/valve.hpp"

namespace gin::io {

inline constexpr const char* kManifestHeader =
    "id,file,pvl_label,theta,eccentricity,radius,calcification,nodule_angle,noise_sigma,augmented_from";

// One PGM per record (images/NNNNN.pgm) plus manifest.csv. The seed and the
// augmentation flag are not part of the manifest; the loader recovers the
// flag from the augmented_from column.
void write_dataset(const std::filesystem::path& dir, const synth::Dataset& data);
synth::Dataset read_dataset(const std::filesystem::path& dir);

}  // namespace gin::io
