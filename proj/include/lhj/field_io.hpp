#pragma once

#include <filesystem>

#include "lhj/grid.hpp"

namespace lhj {

// Binary snapshot format "LHJ1": magic bytes, little-endian u32 dimension,
// u32 points per axis, f64 period, f64 time stamp, then n^d f64 values in
// row-major order.
struct Snapshot {
  Field field;
  double time;
};

void write_snapshot(const std::filesystem::path& path, const Field& f, double time);
Snapshot read_snapshot(const std::filesystem::path& path);

}  // namespace lhj
