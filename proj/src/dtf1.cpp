#include "tdcif/dtf1.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

#include "tdcif/error.hpp"

namespace tdcif::dtf1 {

namespace {

constexpr char kMagic[4] = {'D', 'T', 'F', '1'};

template <typename U>
void put_le(std::vector<std::uint8_t>& out, U v) {
  for (std::size_t b = 0; b < sizeof(U); ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

template <typename U>
U get_le(std::span<const std::uint8_t> in, std::size_t pos) {
  U v = 0;
  for (std::size_t b = 0; b < sizeof(U); ++b) v |= static_cast<U>(in[pos + b]) << (8 * b);
  return v;
}

}  // namespace

std::vector<std::uint8_t> encode(const DenseTensor& t) {
  std::vector<std::uint8_t> out;
  out.reserve(8 + 8 * t.order() + 8 * t.size());
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.order()));
  for (std::size_t e : t.shape()) put_le<std::uint64_t>(out, e);
  for (double v : t.data()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

DenseTensor decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw IoError("DTF1: bad magic");
  const auto order = get_le<std::uint32_t>(bytes, 4);
  if (order == 0 || order > kMaxOrder)
    throw IoError("DTF1: unsupported order " + std::to_string(order));
  std::size_t pos = 8;
  if (bytes.size() < pos + 8 * std::size_t{order}) throw IoError("DTF1: truncated header");
  Shape shape(order);
  std::size_t count = 1;
  for (auto& e : shape) {
    const auto v = get_le<std::uint64_t>(bytes, pos);
    pos += 8;
    if (v == 0) throw IoError("DTF1: zero extent");
    if (v > std::numeric_limits<std::size_t>::max() / 8 / count)
      throw IoError("DTF1: extents overflow");
    e = static_cast<std::size_t>(v);
    count *= e;
  }
  const std::size_t remaining = bytes.size() - pos;
  if (remaining < 8 * count)
    throw IoError("DTF1: truncated payload (" + std::to_string(remaining) + " of " +
                  std::to_string(8 * count) + " bytes)");
  if (remaining > 8 * count) throw IoError("DTF1: trailing bytes after payload");
  std::vector<double> data(count);
  for (std::size_t i = 0; i < count; ++i, pos += 8)
    data[i] = std::bit_cast<double>(get_le<std::uint64_t>(bytes, pos));
  return DenseTensor(std::move(shape), std::move(data));
}

void write(const std::filesystem::path& path, const DenseTensor& t) {
  const auto bytes = encode(t);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("failed writing " + path.string());
}

DenseTensor read(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode(bytes);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace tdcif::dtf1
