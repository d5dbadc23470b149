#include "gin/io/dataset_io.hpp"

#include <cstdio>
#include <fstream>

#include "gin/io/csv.hpp"
#include "gin/io/pgm.hpp"

namespace gin::io {

namespace {

std::string image_name(std::size_t id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "images/%06zu.pgm", id);
  return buf;
}

}  // namespace

void write_dataset(const std::filesystem::path& dir, const synth::Dataset& data) {
  std::filesystem::create_directories(dir / "images");
  std::ofstream manifest(dir / "manifest.csv", std::ios::binary);
  if (!manifest) throw ValidationError("cannot write manifest in '" + dir.string() + "'");
  manifest << kManifestHeader << '\n';
  for (const auto& r : data.records) {
    const std::string file = image_name(r.id);
    write_pgm(dir / file, r.image);
    const auto& p = r.params;
    manifest << r.id << ',' << file << ',' << static_cast<int>(r.pvl_label) << ',' << format_number(p.theta) << ','
             << format_number(p.eccentricity) << ',' << format_number(p.radius) << ','
             << format_number(p.calcification) << ',' << format_number(p.nodule_angle) << ','
             << format_number(p.noise_sigma) << ',';
    if (r.augmented_from) manifest << *r.augmented_from;
    manifest << '\n';
  }
  if (!manifest) throw ValidationError("failed writing manifest in '" + dir.string() + "'");
}

synth::Dataset read_dataset(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.csv";
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in) throw FormatError("missing manifest '" + manifest_path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || split_csv_line(line) != split_csv_line(kManifestHeader)) {
    throw FormatError(manifest_path.string() + ": unexpected header");
  }

  synth::Dataset data;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = manifest_path.string() + ":" + std::to_string(line_no);
    const auto f = split_csv_line(line);
    if (f.size() != 10) throw FormatError(where + ": expected 10 fields, got " + std::to_string(f.size()));
    synth::PatientRecord r;
    r.id = static_cast<std::size_t>(parse_int(f[0], where));
    const long long label = parse_int(f[2], where);
    if (label != 0 && label != 1) throw FormatError(where + ": pvl_label must be 0 or 1");
    r.pvl_label = static_cast<synth::Pvl>(label);
    r.params.theta = parse_double(f[3], where);
    r.params.eccentricity = parse_double(f[4], where);
    r.params.radius = parse_double(f[5], where);
    r.params.calcification = parse_double(f[6], where);
    r.params.nodule_angle = parse_double(f[7], where);
    r.params.noise_sigma = parse_double(f[8], where);
    if (!f[9].empty()) r.augmented_from = static_cast<std::size_t>(parse_int(f[9], where));
    r.image = read_pgm(dir / f[1]);
    if (!data.records.empty() && r.image.height != data.records.front().image.height) {
      throw FormatError(where + ": image size differs from the first record");
    }
    data.augmented = data.augmented || r.augmented_from.has_value();
    data.records.push_back(std::move(r));
  }
  if (data.records.empty()) throw FormatError(manifest_path.string() + ": no records");
  return data;
}

}  // namespace gin::io
