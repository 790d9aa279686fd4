#include "lhj/field_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "lhj/errors.hpp"

namespace lhj {

namespace {

static_assert(std::endian::native == std::endian::little,
              "snapshot format is little-endian; byte swapping not implemented");

constexpr char kMagic[4] = {'L', 'H', 'J', '1'};

template <typename T>
void write_raw(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T read_raw(std::istream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw IoError("snapshot truncated");
  return v;
}

}  // namespace

void write_snapshot(const std::filesystem::path& path, const Field& f, double time) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open snapshot for writing: " + path.string());
  out.write(kMagic, 4);
  write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(f.grid.dim));
  write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(f.grid.n));
  write_raw<double>(out, f.grid.period);
  write_raw<double>(out, time);
  out.write(reinterpret_cast<const char*>(f.values.data()),
            static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  if (!out) throw IoError("snapshot write failed: " + path.string());
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open snapshot: " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw IoError("not an LHJ1 snapshot: " + path.string());
  auto dim = read_raw<std::uint32_t>(in);
  auto n = read_raw<std::uint32_t>(in);
  auto period = read_raw<double>(in);
  auto time = read_raw<double>(in);
  PeriodicGrid grid(static_cast<int>(dim), static_cast<int>(n), period);
  std::vector<double> values(grid.size());
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!in) throw IoError("snapshot truncated: " + path.string());
  return Snapshot{Field(grid, std::move(values)), time};
}

}  // namespace lhj
