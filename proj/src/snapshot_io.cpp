#include "fpme/snapshot_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "fpme/error.hpp"

namespace fpme {

namespace {

constexpr unsigned char kMagic[4] = {'F', 'P', 'M', 'E'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 4 + 3 * 4 + 3 * 8;

template <typename T>
void put_le(std::vector<unsigned char>& out, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  U bits = std::bit_cast<U>(value);
  for (std::size_t b = 0; b < sizeof(U); ++b) out.push_back(static_cast<unsigned char>((bits >> (8 * b)) & 0xFFu));
}

template <typename T>
T get_le(std::span<const unsigned char> in, std::size_t& pos) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  if (pos + sizeof(U) > in.size()) fail(ErrorCode::FormatError, "truncated snapshot");
  U bits = 0;
  for (std::size_t b = 0; b < sizeof(U); ++b) bits |= static_cast<U>(in[pos + b]) << (8 * b);
  pos += sizeof(U);
  return std::bit_cast<T>(bits);
}

}  // namespace

std::vector<unsigned char> encode_snapshot(const Field& field, double s, double time) {
  const Grid& g = field.grid();
  std::vector<unsigned char> out;
  out.reserve(kHeaderBytes + 8 * field.size());
  for (unsigned char c : kMagic) out.push_back(c);
  put_le<std::uint32_t>(out, kVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.dim()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.cells()));
  put_le<double>(out, g.half_width());
  put_le<double>(out, s);
  put_le<double>(out, time);
  for (double v : field.values()) put_le<double>(out, v);
  return out;
}

Snapshot decode_snapshot(std::span<const unsigned char> bytes) {
  if (bytes.size() < kHeaderBytes || std::memcmp(bytes.data(), kMagic, 4) != 0)
    fail(ErrorCode::FormatError, "bad snapshot magic");
  std::size_t pos = 4;
  auto version = get_le<std::uint32_t>(bytes, pos);
  if (version != kVersion) fail(ErrorCode::FormatError, "unsupported snapshot version " + std::to_string(version));
  auto dim = get_le<std::uint32_t>(bytes, pos);
  auto cells = get_le<std::uint32_t>(bytes, pos);
  double L = get_le<double>(bytes, pos);
  double s = get_le<double>(bytes, pos);
  double time = get_le<double>(bytes, pos);
  if (dim < 1 || dim > 2 || cells > (1u << 20)) fail(ErrorCode::FormatError, "implausible snapshot header");
  Grid grid(static_cast<int>(dim), static_cast<int>(cells), L);
  if (bytes.size() != kHeaderBytes + 8 * grid.size()) fail(ErrorCode::FormatError, "snapshot payload size mismatch");
  std::vector<double> values(grid.size());
  for (auto& v : values) v = get_le<double>(bytes, pos);
  return Snapshot{Field(grid, std::move(values)), s, time};
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) fail(ErrorCode::IoError, "cannot open " + tmp.string());
    os.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!os) fail(ErrorCode::IoError, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_snapshot(const std::filesystem::path& path, const Field& field, double s, double time) {
  auto bytes = encode_snapshot(field, s, time);
  write_text_atomic(path, std::string(bytes.begin(), bytes.end()));
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::IoError, "cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return decode_snapshot(bytes);
}

}  // namespace fpme
