#pragma once

/// @file snapshot_io.hpp
/// @brief FPME1 binary snapshots.
///
/// Layout (all little-endian): magic "FPME", u32 version = 1, u32 dim,
/// u32 cells_per_axis, f64 L, f64 s, f64 time, then cells^dim f64 values in
/// row-major order. Nothing precedes or follows.

#include <filesystem>
#include <vector>

#include "fpme/grid.hpp"

namespace fpme {

struct Snapshot {
  Field field;
  double s;
  double time;
};

std::vector<unsigned char> encode_snapshot(const Field& field, double s, double time);
/// Throws FormatError on wrong magic, version, truncation or trailing bytes.
Snapshot decode_snapshot(std::span<const unsigned char> bytes);

/// Writes through a temporary file and renames, so readers never see a
/// partial snapshot.
void write_snapshot(const std::filesystem::path& path, const Field& field, double s, double time);
Snapshot read_snapshot(const std::filesystem::path& path);

/// Atomic text write (temp file + rename) shared by every report writer.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace fpme
