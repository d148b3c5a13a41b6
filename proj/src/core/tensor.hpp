#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "core/error.hpp"

namespace litesr {

enum class DType : std::uint8_t { f32 = 0, i8 = 1 };

// Rank-4 (n, c, h, w) shape, row-major with w fastest. An "empty" tensor has
// all four components zero; no other zero-dimension mixture is valid.
struct Shape {
  std::uint32_t n = 0, c = 0, h = 0, w = 0;

  std::size_t count() const {
    return std::size_t(n) * c * h * w;
  }
  bool operator==(const Shape&) const = default;
  std::string str() const;
};

// The universal compute value: a flat FP32 or INT8(+scale) buffer with an
// (n, c, h, w) shape. Values are cheap to move and safe to share once built;
// every kernel below is a pure function over const inputs.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape s);
  static Tensor full(Shape s, float value);
  static Tensor from_data(Shape s, std::vector<float> data);
  static Tensor from_i8(Shape s, std::vector<std::int8_t> data, float scale,
                        int zero_point = 0);

  const Shape& shape() const { return shape_; }
  DType dtype() const { return dtype_; }
  bool empty() const { return shape_.count() == 0; }

  std::span<const float> f32() const;
  std::span<float> f32_mut();
  std::span<const std::int8_t> i8() const;

  float scale() const { return scale_; }
  int zero_point() const { return zero_point_; }

  // Unchecked element access for the FP32 payload.
  float at(std::uint32_t n, std::uint32_t c, std::uint32_t y,
           std::uint32_t x) const {
    return fdata_[index(n, c, y, x)];
  }
  float& at(std::uint32_t n, std::uint32_t c, std::uint32_t y,
            std::uint32_t x) {
    return fdata_[index(n, c, y, x)];
  }
  std::size_t index(std::uint32_t n, std::uint32_t c, std::uint32_t y,
                    std::uint32_t x) const {
    return ((std::size_t(n) * shape_.c + c) * shape_.h + y) * shape_.w + x;
  }

 private:
  Shape shape_;
  DType dtype_ = DType::f32;
  std::vector<float> fdata_;
  std::vector<std::int8_t> qdata_;
  float scale_ = 1.0f;
  int zero_point_ = 0;
};

struct ConvSpec {
  std::uint32_t in_channels = 1;
  std::uint32_t out_channels = 1;
  std::uint32_t kh = 3, kw = 3;
  std::uint32_t stride = 1;
  std::uint32_t dilation = 1;
  std::uint32_t padding = 0;
  bool has_bias = true;

  // Spatial output extent; throws if the arithmetic does not yield a
  // positive integer.
  std::uint32_t out_extent(std::uint32_t in, std::uint32_t k) const;
};

enum class Activation { identity, relu, sigmoid };

// Cross-correlation (no kernel flip) with zero padding; matches mainstream
// framework semantics so exported weights need no flipping.
Tensor conv2d(const Tensor& input, const Tensor& weights,
              std::span<const float> bias, const ConvSpec& spec);

// (n, c, h, w) -> (n, c/r^2, h*r, w*r); output(n, c, h*r+a, w*r+b) ==
// input(n, c*r^2 + a*r + b, h, w).
Tensor pixel_shuffle(const Tensor& input, std::uint32_t r);

// Catmull-Rom bicubic (a = -0.5), half-pixel-center mapping, edge-clamped
// sampling. Frozen as the reference resampler for the whole toolkit.
Tensor bicubic_upsample(const Tensor& input, std::uint32_t out_h,
                        std::uint32_t out_w);

Tensor activation(const Tensor& input, Activation kind);

// Channels stacked a-first; a fully-empty tensor acts as the zero-channel
// identity operand.
Tensor concat_channels(const Tensor& a, const Tensor& b);

struct SobelPair {
  Tensor gx;
  Tensor gy;
};

// 3x3 Sobel with zero padding (border rows/cols are computed over the
// zero-extended support and are nonzero even for constant images).
SobelPair sobel_gradients(const Tensor& input);

double sigmoid(double x);

}  // namespace litesr
