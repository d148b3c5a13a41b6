#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace litesr {

std::string base64_encode(const std::uint8_t* data, std::size_t len);
std::vector<std::uint8_t> base64_decode(const std::string& text);

std::string read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const void* data,
                      std::size_t len);

}  // namespace litesr
