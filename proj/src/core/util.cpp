#include "core/util.hpp"

#include <fstream>

#include "core/error.hpp"

namespace litesr {

namespace {
constexpr char kAlphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
}

std::string base64_encode(const std::uint8_t* data, std::size_t len) {
  std::string out;
  out.reserve((len + 2) / 3 * 4);
  for (std::size_t i = 0; i < len; i += 3) {
    std::uint32_t chunk = std::uint32_t(data[i]) << 16;
    if (i + 1 < len) chunk |= std::uint32_t(data[i + 1]) << 8;
    if (i + 2 < len) chunk |= std::uint32_t(data[i + 2]);
    out.push_back(kAlphabet[(chunk >> 18) & 0x3F]);
    out.push_back(kAlphabet[(chunk >> 12) & 0x3F]);
    out.push_back(i + 1 < len ? kAlphabet[(chunk >> 6) & 0x3F] : '=');
    out.push_back(i + 2 < len ? kAlphabet[chunk & 0x3F] : '=');
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
  auto value_of = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  std::vector<std::uint8_t> out;
  std::uint32_t chunk = 0;
  int bits = 0;
  for (char c : text) {
    if (c == '=' || c == '\n' || c == '\r') continue;
    const int v = value_of(c);
    if (v < 0) fail(ErrorCode::parse, "invalid base64 character");
    chunk = (chunk << 6) | std::uint32_t(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(std::uint8_t((chunk >> bits) & 0xFF));
    }
  }
  return out;
}

std::string read_file_bytes(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::io, "cannot open: " + path);
  return std::string((std::istreambuf_iterator<char>(is)),
                     std::istreambuf_iterator<char>());
}

void write_file_bytes(const std::string& path, const void* data,
                      std::size_t len) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) fail(ErrorCode::io, "cannot open for write: " + path);
  os.write(static_cast<const char*>(data), std::streamsize(len));
  if (!os) fail(ErrorCode::io, "write failed: " + path);
}

}  // namespace litesr
