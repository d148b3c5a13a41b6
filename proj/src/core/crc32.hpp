#pragma once

#include <cstddef>
#include <cstdint>

namespace litesr {

// CRC-32/ISO-HDLC (the zlib/PNG polynomial 0xEDB88320, reflected,
// init and xorout 0xFFFFFFFF).
std::uint32_t crc32(const void* data, std::size_t len,
                    std::uint32_t seed = 0);

}  // namespace litesr
