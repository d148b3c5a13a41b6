#include "core/tensor.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace litesr {

std::string Shape::str() const {
  std::ostringstream os;
  os << "(" << n << ", " << c << ", " << h << ", " << w << ")";
  return os.str();
}

namespace {

void check_shape_valid(const Shape& s) {
  const bool any_zero = s.n == 0 || s.c == 0 || s.h == 0 || s.w == 0;
  const bool all_zero = s.n == 0 && s.c == 0 && s.h == 0 && s.w == 0;
  if (any_zero && !all_zero) {
    fail(ErrorCode::shape,
         "invalid shape " + s.str() +
             ": zero dimensions are only allowed for the empty tensor");
  }
}

}  // namespace

Tensor Tensor::zeros(Shape s) {
  check_shape_valid(s);
  Tensor t;
  t.shape_ = s;
  t.fdata_.assign(s.count(), 0.0f);
  return t;
}

Tensor Tensor::full(Shape s, float value) {
  Tensor t = zeros(s);
  std::fill(t.fdata_.begin(), t.fdata_.end(), value);
  return t;
}

Tensor Tensor::from_data(Shape s, std::vector<float> data) {
  check_shape_valid(s);
  if (data.size() != s.count()) {
    fail(ErrorCode::shape, "data length " + std::to_string(data.size()) +
                               " does not match shape " + s.str());
  }
  Tensor t;
  t.shape_ = s;
  t.fdata_ = std::move(data);
  return t;
}

Tensor Tensor::from_i8(Shape s, std::vector<std::int8_t> data, float scale,
                       int zero_point) {
  check_shape_valid(s);
  if (data.size() != s.count()) {
    fail(ErrorCode::shape, "data length " + std::to_string(data.size()) +
                               " does not match shape " + s.str());
  }
  if (!(scale > 0.0f)) {
    fail(ErrorCode::argument, "INT8 tensor requires a strictly positive scale");
  }
  Tensor t;
  t.shape_ = s;
  t.dtype_ = DType::i8;
  t.qdata_ = std::move(data);
  t.scale_ = scale;
  t.zero_point_ = zero_point;
  return t;
}

std::span<const float> Tensor::f32() const {
  if (dtype_ != DType::f32) {
    fail(ErrorCode::dtype, "tensor is not FP32");
  }
  return fdata_;
}

std::span<float> Tensor::f32_mut() {
  if (dtype_ != DType::f32) {
    fail(ErrorCode::dtype, "tensor is not FP32");
  }
  return fdata_;
}

std::span<const std::int8_t> Tensor::i8() const {
  if (dtype_ != DType::i8) {
    fail(ErrorCode::dtype, "tensor is not INT8");
  }
  return qdata_;
}

std::uint32_t ConvSpec::out_extent(std::uint32_t in, std::uint32_t k) const {
  const std::int64_t span =
      std::int64_t(in) + 2 * std::int64_t(padding) -
      std::int64_t(dilation) * (std::int64_t(k) - 1) - 1;
  if (span < 0 || span % stride != 0) {
    fail(ErrorCode::shape,
         "conv output extent for input " + std::to_string(in) + ", kernel " +
             std::to_string(k) + ", stride " + std::to_string(stride) +
             ", dilation " + std::to_string(dilation) + ", padding " +
             std::to_string(padding) + " is not a positive integer");
  }
  return std::uint32_t(span / stride + 1);
}

Tensor conv2d(const Tensor& input, const Tensor& weights,
              std::span<const float> bias, const ConvSpec& spec) {
  if (input.dtype() != DType::f32 || weights.dtype() != DType::f32) {
    fail(ErrorCode::dtype, "conv2d expects FP32 input and weights");
  }
  const Shape& is = input.shape();
  const Shape& ws = weights.shape();
  if (is.c != spec.in_channels) {
    fail(ErrorCode::shape, "conv2d input has " + std::to_string(is.c) +
                               " channels, spec expects " +
                               std::to_string(spec.in_channels));
  }
  if (ws.n != spec.out_channels || ws.c != spec.in_channels ||
      ws.h != spec.kh || ws.w != spec.kw) {
    fail(ErrorCode::shape, "conv2d weight shape " + ws.str() +
                               " does not match spec (out=" +
                               std::to_string(spec.out_channels) + ", in=" +
                               std::to_string(spec.in_channels) + ", k=" +
                               std::to_string(spec.kh) + "x" +
                               std::to_string(spec.kw) + ")");
  }
  if (!bias.empty() && bias.size() != spec.out_channels) {
    fail(ErrorCode::shape, "conv2d bias length " + std::to_string(bias.size()) +
                               " != out_channels " +
                               std::to_string(spec.out_channels));
  }

  const std::uint32_t oh = spec.out_extent(is.h, spec.kh);
  const std::uint32_t ow = spec.out_extent(is.w, spec.kw);
  Tensor out = Tensor::zeros({is.n, spec.out_channels, oh, ow});

  const float* in = input.f32().data();
  const float* wt = weights.f32().data();
  float* dst = out.f32_mut().data();

  const std::size_t in_plane = std::size_t(is.h) * is.w;
  const std::size_t out_plane = std::size_t(oh) * ow;

  for (std::uint32_t n = 0; n < is.n; ++n) {
    const float* in_n = in + std::size_t(n) * is.c * in_plane;
    float* out_n = dst + std::size_t(n) * spec.out_channels * out_plane;
    for (std::uint32_t co = 0; co < spec.out_channels; ++co) {
      float* out_c = out_n + std::size_t(co) * out_plane;
      if (!bias.empty()) {
        std::fill(out_c, out_c + out_plane, bias[co]);
      }
      for (std::uint32_t ci = 0; ci < spec.in_channels; ++ci) {
        const float* in_c = in_n + std::size_t(ci) * in_plane;
        const float* wt_c =
            wt + (std::size_t(co) * spec.in_channels + ci) * spec.kh * spec.kw;
        for (std::uint32_t ky = 0; ky < spec.kh; ++ky) {
          for (std::uint32_t kx = 0; kx < spec.kw; ++kx) {
            const float wv = wt_c[ky * spec.kw + kx];
            if (wv == 0.0f) continue;
            const std::int64_t off_y =
                std::int64_t(ky) * spec.dilation - spec.padding;
            const std::int64_t off_x =
                std::int64_t(kx) * spec.dilation - spec.padding;
            for (std::uint32_t oy = 0; oy < oh; ++oy) {
              const std::int64_t iy = std::int64_t(oy) * spec.stride + off_y;
              if (iy < 0 || iy >= is.h) continue;
              const float* in_row = in_c + std::size_t(iy) * is.w;
              float* out_row = out_c + std::size_t(oy) * ow;
              // Valid ox range so that ix = ox*stride + off_x stays in-image;
              // zero padding is implicit in the skipped taps.
              std::int64_t lo = 0, hi = std::int64_t(ow) - 1;
              if (off_x < 0) {
                lo = (-off_x + spec.stride - 1) / spec.stride;
              }
              const std::int64_t max_ix = std::int64_t(is.w) - 1 - off_x;
              if (max_ix < 0) continue;
              hi = std::min<std::int64_t>(hi, max_ix / spec.stride);
              for (std::int64_t ox = lo; ox <= hi; ++ox) {
                out_row[ox] += wv * in_row[ox * spec.stride + off_x];
              }
            }
          }
        }
      }
    }
  }
  return out;
}

Tensor pixel_shuffle(const Tensor& input, std::uint32_t r) {
  if (input.dtype() != DType::f32) {
    fail(ErrorCode::dtype, "pixel_shuffle expects FP32 input");
  }
  if (r == 0) fail(ErrorCode::argument, "pixel_shuffle requires r >= 1");
  const Shape& s = input.shape();
  const std::uint32_t r2 = r * r;
  if (s.c % r2 != 0) {
    fail(ErrorCode::shape, "pixel_shuffle: " + std::to_string(s.c) +
                               " channels not divisible by r^2 = " +
                               std::to_string(r2));
  }
  const Shape os{s.n, s.c / r2, s.h * r, s.w * r};
  Tensor out = Tensor::zeros(os);
  for (std::uint32_t n = 0; n < s.n; ++n) {
    for (std::uint32_t c = 0; c < os.c; ++c) {
      for (std::uint32_t a = 0; a < r; ++a) {
        for (std::uint32_t b = 0; b < r; ++b) {
          const std::uint32_t ci = c * r2 + a * r + b;
          for (std::uint32_t y = 0; y < s.h; ++y) {
            for (std::uint32_t x = 0; x < s.w; ++x) {
              out.at(n, c, y * r + a, x * r + b) = input.at(n, ci, y, x);
            }
          }
        }
      }
    }
  }
  return out;
}

namespace {

// Catmull-Rom basis (a = -0.5) for |t| in [0, 1); taps at t+1, t, 1-t, 2-t.
inline void catmull_rom_weights(double t, double w[4]) {
  constexpr double a = -0.5;
  const double t2 = t * t;
  const double t3 = t2 * t;
  w[0] = a * (t3 - 2.0 * t2 + t);
  w[1] = (a + 2.0) * t3 - (a + 3.0) * t2 + 1.0;
  w[2] = -(a + 2.0) * t3 + (2.0 * a + 3.0) * t2 - a * t;
  w[3] = a * (t3 - t2);
}

struct AxisTaps {
  std::array<std::int32_t, 4> idx;
  std::array<double, 4> w;
};

std::vector<AxisTaps> make_axis_taps(std::uint32_t in, std::uint32_t out) {
  std::vector<AxisTaps> taps(out);
  const double scale = double(in) / double(out);
  for (std::uint32_t o = 0; o < out; ++o) {
    const double src = (double(o) + 0.5) * scale - 0.5;
    const double base = std::floor(src);
    const double t = src - base;
    double w[4];
    catmull_rom_weights(t, w);
    for (int k = 0; k < 4; ++k) {
      std::int32_t i = std::int32_t(base) - 1 + k;
      i = std::clamp<std::int32_t>(i, 0, std::int32_t(in) - 1);
      taps[o].idx[k] = i;
      taps[o].w[k] = w[k];
    }
  }
  return taps;
}

}  // namespace

Tensor bicubic_upsample(const Tensor& input, std::uint32_t out_h,
                        std::uint32_t out_w) {
  if (input.dtype() != DType::f32) {
    fail(ErrorCode::dtype, "bicubic_upsample expects FP32 input");
  }
  const Shape& s = input.shape();
  if (out_h == 0 || out_w == 0) {
    fail(ErrorCode::shape, "bicubic_upsample target size must be positive");
  }
  if (s.h < 2 || s.w < 2) {
    fail(ErrorCode::shape, "bicubic_upsample requires input of at least 2x2");
  }

  const auto ytaps = make_axis_taps(s.h, out_h);
  const auto xtaps = make_axis_taps(s.w, out_w);

  Tensor out = Tensor::zeros({s.n, s.c, out_h, out_w});
  // Separable two-pass: rows first into a (h, out_w) scratch, then columns.
  std::vector<double> scratch(std::size_t(s.h) * out_w);
  for (std::uint32_t n = 0; n < s.n; ++n) {
    for (std::uint32_t c = 0; c < s.c; ++c) {
      for (std::uint32_t y = 0; y < s.h; ++y) {
        for (std::uint32_t ox = 0; ox < out_w; ++ox) {
          const AxisTaps& tx = xtaps[ox];
          double acc = 0.0;
          for (int k = 0; k < 4; ++k) {
            acc += tx.w[k] * input.at(n, c, y, std::uint32_t(tx.idx[k]));
          }
          scratch[std::size_t(y) * out_w + ox] = acc;
        }
      }
      for (std::uint32_t oy = 0; oy < out_h; ++oy) {
        const AxisTaps& ty = ytaps[oy];
        for (std::uint32_t ox = 0; ox < out_w; ++ox) {
          double acc = 0.0;
          for (int k = 0; k < 4; ++k) {
            acc += ty.w[k] * scratch[std::size_t(ty.idx[k]) * out_w + ox];
          }
          out.at(n, c, oy, ox) = float(acc);
        }
      }
    }
  }
  return out;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Tensor activation(const Tensor& input, Activation kind) {
  if (input.dtype() != DType::f32) {
    fail(ErrorCode::dtype, "activation expects FP32 input");
  }
  Tensor out = input;
  auto data = out.f32_mut();
  switch (kind) {
    case Activation::identity:
      break;
    case Activation::relu:
      for (float& v : data) v = v > 0.0f ? v : 0.0f;
      break;
    case Activation::sigmoid:
      for (float& v : data) v = float(sigmoid(double(v)));
      break;
  }
  return out;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  if (a.dtype() != b.dtype()) {
    fail(ErrorCode::dtype, "concat_channels dtype mismatch");
  }
  if (a.dtype() != DType::f32) {
    fail(ErrorCode::dtype, "concat_channels expects FP32 operands");
  }
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sa.n != sb.n || sa.h != sb.h || sa.w != sb.w) {
    fail(ErrorCode::shape, "concat_channels spatial mismatch: " + sa.str() +
                               " vs " + sb.str());
  }
  Tensor out = Tensor::zeros({sa.n, sa.c + sb.c, sa.h, sa.w});
  const std::size_t plane = std::size_t(sa.h) * sa.w;
  const float* pa = a.f32().data();
  const float* pb = b.f32().data();
  float* po = out.f32_mut().data();
  for (std::uint32_t n = 0; n < sa.n; ++n) {
    std::copy(pa + std::size_t(n) * sa.c * plane,
              pa + std::size_t(n + 1) * sa.c * plane,
              po + std::size_t(n) * (sa.c + sb.c) * plane);
    std::copy(pb + std::size_t(n) * sb.c * plane,
              pb + std::size_t(n + 1) * sb.c * plane,
              po + (std::size_t(n) * (sa.c + sb.c) + sa.c) * plane);
  }
  return out;
}

SobelPair sobel_gradients(const Tensor& input) {
  if (input.dtype() != DType::f32) {
    fail(ErrorCode::dtype, "sobel_gradients expects FP32 input");
  }
  const Shape& s = input.shape();
  if (s.c != 1) {
    fail(ErrorCode::shape, "sobel_gradients expects single-channel input, got " +
                               s.str());
  }
  static const float kx[9] = {-1, 0, 1, -2, 0, 2, -1, 0, 1};
  static const float ky[9] = {-1, -2, -1, 0, 0, 0, 1, 2, 1};

  SobelPair out{Tensor::zeros(s), Tensor::zeros(s)};
  for (std::uint32_t n = 0; n < s.n; ++n) {
    for (std::uint32_t y = 0; y < s.h; ++y) {
      for (std::uint32_t x = 0; x < s.w; ++x) {
        double gx = 0.0, gy = 0.0;
        for (int dy = -1; dy <= 1; ++dy) {
          const std::int64_t iy = std::int64_t(y) + dy;
          if (iy < 0 || iy >= s.h) continue;
          for (int dx = -1; dx <= 1; ++dx) {
            const std::int64_t ix = std::int64_t(x) + dx;
            if (ix < 0 || ix >= s.w) continue;
            const float v = input.at(n, 0, std::uint32_t(iy), std::uint32_t(ix));
            const int k = (dy + 1) * 3 + (dx + 1);
            gx += kx[k] * v;
            gy += ky[k] * v;
          }
        }
        out.gx.at(n, 0, y, x) = float(gx);
        out.gy.at(n, 0, y, x) = float(gy);
      }
    }
  }
  return out;
}

}  // namespace litesr
