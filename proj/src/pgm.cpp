#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "tdcif/dataset.hpp"
#include "tdcif/error.hpp"

namespace tdcif {

namespace {

class PgmCursor {
 public:
  explicit PgmCursor(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  unsigned long read_uint(const char* field) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    unsigned long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + static_cast<unsigned long>(bytes_[pos_] - '0');
      if (v > 0xffffffffUL) throw IoError(std::string("PGM: ") + field + " too large");
      ++pos_;
    }
    if (pos_ == start) throw IoError(std::string("PGM: malformed header, expected ") + field);
    return v;
  }

  std::size_t pos() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::uint8_t at(std::size_t i) const { return bytes_[pos_ + i]; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

Matrix decode_pgm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '2'))
    throw IoError("PGM: expected magic P5 or P2");
  const bool binary = bytes[1] == '5';
  PgmCursor cur(bytes);
  cur.advance(2);
  const auto width = cur.read_uint("width");
  const auto height = cur.read_uint("height");
  const auto maxval = cur.read_uint("maxval");
  if (width == 0 || height == 0) throw IoError("PGM: zero image dimension");
  if (maxval == 0 || maxval > 65535) throw IoError("PGM: maxval must be in 1..65535");

  Matrix image(height, width);
  const double inv = 1.0 / static_cast<double>(maxval);
  auto store = [&](std::size_t idx, unsigned long v) {
    if (v > maxval) throw IoError("PGM: sample exceeds maxval");
    // file order is row-major
    image(idx / width, idx % width) = static_cast<double>(v) * inv;
  };

  const std::size_t count = static_cast<std::size_t>(width) * height;
  if (binary) {
    if (cur.remaining() == 0 || !std::isspace(cur.at(0)))
      throw IoError("PGM: malformed header, missing separator before raster");
    cur.advance(1);
    const std::size_t bpp = maxval > 255 ? 2 : 1;
    if (cur.remaining() < count * bpp)
      throw IoError("PGM: truncated pixel data (" + std::to_string(cur.remaining()) + " of " +
                    std::to_string(count * bpp) + " bytes)");
    for (std::size_t i = 0; i < count; ++i) {
      unsigned long v = cur.at(i * bpp);
      if (bpp == 2) v = (v << 8) | cur.at(i * bpp + 1);
      store(i, v);
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      cur.skip_space_and_comments();
      if (cur.remaining() == 0)
        throw IoError("PGM: truncated pixel data (" + std::to_string(i) + " of " +
                      std::to_string(count) + " samples)");
      store(i, cur.read_uint("sample"));
    }
  }
  return image;
}

Matrix read_pgm(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_pgm(bytes);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_pgm(const std::filesystem::path& path, const Matrix& image, int maxval) {
  if (maxval < 1 || maxval > 65535) throw InvalidArgument("write_pgm: maxval out of range");
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << "P5\n" << image.cols() << " " << image.rows() << "\n" << maxval << "\n";
  for (std::size_t r = 0; r < image.rows(); ++r)
    for (std::size_t c = 0; c < image.cols(); ++c) {
      const double v = std::clamp(image(r, c), 0.0, 1.0);
      const auto q = static_cast<unsigned>(std::lround(v * maxval));
      if (maxval > 255) f.put(static_cast<char>(q >> 8));
      f.put(static_cast<char>(q & 0xff));
    }
  if (!f) throw IoError("failed writing " + path.string());
}

}  // namespace tdcif
