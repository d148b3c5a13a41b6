#include "core/pgm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <vector>

namespace litesr {

namespace {

// Skips whitespace and '#' comment lines between header tokens.
std::uint64_t read_header_int(std::istream& is, const std::string& path) {
  int c = is.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = is.get();
    } else if (!std::isspace(c)) {
      break;
    }
    c = is.get();
  }
  if (c == EOF || !std::isdigit(c)) {
    fail(ErrorCode::parse, "malformed PGM header in " + path);
  }
  std::uint64_t v = 0;
  while (c != EOF && std::isdigit(c)) {
    v = v * 10 + std::uint64_t(c - '0');
    c = is.get();
  }
  if (c != EOF) is.unget();
  return v;
}

}  // namespace

PgmImage read_pgm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::io, "cannot open: " + path);
  char m0 = 0, m1 = 0;
  is.get(m0);
  is.get(m1);
  const bool binary = m0 == 'P' && m1 == '5';
  const bool ascii = m0 == 'P' && m1 == '2';
  if (!binary && !ascii) {
    fail(ErrorCode::parse, path + " is not a P2/P5 PGM file");
  }
  const std::uint64_t w = read_header_int(is, path);
  const std::uint64_t h = read_header_int(is, path);
  const std::uint64_t maxval = read_header_int(is, path);
  if (w == 0 || h == 0 || maxval == 0 || maxval > 65535) {
    fail(ErrorCode::parse, "unsupported PGM geometry in " + path);
  }

  std::vector<float> data(std::size_t(w) * h);
  if (binary) {
    is.get();  // single whitespace after maxval
    const int bytes = maxval > 255 ? 2 : 1;
    std::vector<std::uint8_t> raw(data.size() * bytes);
    is.read(reinterpret_cast<char*>(raw.data()), std::streamsize(raw.size()));
    if (std::size_t(is.gcount()) != raw.size()) {
      fail(ErrorCode::parse, "truncated PGM payload in " + path);
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
      const std::uint32_t v =
          bytes == 2 ? std::uint32_t(raw[2 * i]) << 8 | raw[2 * i + 1]
                     : raw[i];
      data[i] = float(v);
    }
  } else {
    for (std::size_t i = 0; i < data.size(); ++i) {
      data[i] = float(read_header_int(is, path));
    }
  }

  PgmImage img;
  img.maxval = std::uint32_t(maxval);
  img.pixels = Tensor::from_data({1, 1, std::uint32_t(h), std::uint32_t(w)},
                                 std::move(data));
  return img;
}

std::string pgm_to_bytes(const Tensor& img, std::uint32_t maxval) {
  const Shape& s = img.shape();
  if (img.dtype() != DType::f32 || s.n != 1 || s.c != 1) {
    fail(ErrorCode::shape, "write_pgm expects a (1,1,h,w) FP32 tensor");
  }
  if (maxval == 0 || maxval > 65535) {
    fail(ErrorCode::argument, "PGM maxval must be in [1, 65535]");
  }
  std::string out = "P5\n" + std::to_string(s.w) + " " + std::to_string(s.h) +
                    "\n" + std::to_string(maxval) + "\n";
  auto v = img.f32();
  const bool wide = maxval > 255;
  out.reserve(out.size() + v.size() * (wide ? 2 : 1));
  for (float f : v) {
    long q = std::lround(double(f));
    q = std::clamp<long>(q, 0, maxval);
    if (wide) out.push_back(char((q >> 8) & 0xFF));
    out.push_back(char(q & 0xFF));
  }
  return out;
}

void write_pgm(const std::string& path, const Tensor& img,
               std::uint32_t maxval) {
  const std::string bytes = pgm_to_bytes(img, maxval);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) fail(ErrorCode::io, "cannot open for write: " + path);
  os.write(bytes.data(), std::streamsize(bytes.size()));
  if (!os) fail(ErrorCode::io, "write failed: " + path);
}

}  // namespace litesr
