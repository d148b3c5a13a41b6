#pragma once

#include <cstdint>
#include <string>

#include "core/tensor.hpp"

namespace litesr {

// Binary (P5) and ASCII (P2) PGM, 8- or 16-bit. Multi-byte samples are
// big-endian per the Netpbm spec. Images load as (1, 1, h, w) FP32 tensors
// of raw sample values; writing rounds and clamps to [0, maxval].
struct PgmImage {
  Tensor pixels;
  std::uint32_t maxval = 65535;
};

PgmImage read_pgm(const std::string& path);
void write_pgm(const std::string& path, const Tensor& img,
               std::uint32_t maxval = 65535);
std::string pgm_to_bytes(const Tensor& img, std::uint32_t maxval = 65535);

}  // namespace litesr
