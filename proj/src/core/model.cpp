#include "core/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace litesr {

namespace {

Tensor add(const Tensor& a, const Tensor& b) {
  if (!(a.shape() == b.shape())) {
    fail(ErrorCode::shape,
         "elementwise add shape mismatch: " + a.shape().str() + " vs " +
             b.shape().str());
  }
  Tensor out = a;
  auto o = out.f32_mut();
  auto pb = b.f32();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += pb[i];
  return out;
}

Tensor gated_sum(const Tensor& base, double gate_logit, const Tensor& res) {
  const float g = float(sigmoid(gate_logit));
  Tensor out = base;
  auto o = out.f32_mut();
  auto r = res.f32();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += g * r[i];
  return out;
}

void check_lr_input(const Tensor& t, const char* name) {
  if (t.dtype() != DType::f32) {
    fail(ErrorCode::dtype, std::string(name) + " input must be FP32");
  }
  const Shape& s = t.shape();
  if (s.c != 1 || s.h != kLrHeight || s.w != kLrWidth || s.n == 0) {
    fail(ErrorCode::shape, std::string(name) + " input must be (n, 1, " +
                               std::to_string(kLrHeight) + ", " +
                               std::to_string(kLrWidth) + "), got " + s.str());
  }
}

}  // namespace

QuantParams activation_quant_params(const ActRange& r) {
  const float lo = std::min(r.lo, 0.0f);
  const float hi = std::max(r.hi, 0.0f);
  if (!(hi > lo)) return {1.0f, 0};
  QuantParams q;
  q.scale = (hi - lo) / 255.0f;
  q.zero_point = -128 - int(std::lround(lo / q.scale));
  q.zero_point = std::clamp(q.zero_point, -128, 127);
  return q;
}

Tensor guidance_mask(const Tensor& intensity_lr) {
  SobelPair g = sobel_gradients(intensity_lr);
  const Shape& s = intensity_lr.shape();
  Tensor mask = Tensor::zeros(s);
  const std::size_t plane = std::size_t(s.h) * s.w;
  auto gx = g.gx.f32();
  auto gy = g.gy.f32();
  auto m = mask.f32_mut();
  for (std::uint32_t n = 0; n < s.n; ++n) {
    const std::size_t off = std::size_t(n) * plane;
    float lo = std::numeric_limits<float>::max();
    float hi = std::numeric_limits<float>::lowest();
    for (std::size_t i = 0; i < plane; ++i) {
      const float v = std::hypot(gx[off + i], gy[off + i]);
      m[off + i] = v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const float span = hi - lo;
    if (span < 1e-12f) {
      std::fill(m.begin() + off, m.begin() + off + plane, 0.0f);
    } else {
      for (std::size_t i = 0; i < plane; ++i) {
        m[off + i] = (m[off + i] - lo) / span;
      }
    }
  }
  return mask;
}

Model Model::build(ModelWeights weights) {
  weights.config.validate();
  Model m;
  m.config_ = weights.config;
  m.dtype_ = weights.dtype;
  m.layers_ = enumerate_layers(weights.config);
  m.gate_logit_depth_ = weights.gate_logit_depth;
  m.gate_logit_intensity_ = weights.gate_logit_intensity;

  std::map<std::string, WeightEntry> entries = std::move(weights.entries);
  m.states_.reserve(m.layers_.size());
  for (const LayerDef& layer : m.layers_) {
    auto it = entries.find(layer.path);
    if (it == entries.end()) {
      fail(ErrorCode::validation, "missing weight entry: " + layer.path);
    }
    WeightEntry& e = it->second;
    const Shape expected{layer.spec.out_channels, layer.spec.in_channels,
                         layer.spec.kh, layer.spec.kw};
    if (!(e.weight.shape() == expected)) {
      fail(ErrorCode::validation,
           "weight entry " + layer.path + " has shape " +
               e.weight.shape().str() + ", expected " + expected.str());
    }
    if (e.weight.dtype() != weights.dtype) {
      fail(ErrorCode::validation,
           "weight entry " + layer.path + " dtype does not match container");
    }
    if (e.bias.size() != layer.spec.out_channels) {
      fail(ErrorCode::validation,
           "bias for " + layer.path + " has length " +
               std::to_string(e.bias.size()) + ", expected " +
               std::to_string(layer.spec.out_channels));
    }
    LayerState st;
    st.weight = std::move(e.weight);
    st.bias = std::move(e.bias);
    m.states_.push_back(std::move(st));
    entries.erase(it);
  }
  if (!entries.empty()) {
    fail(ErrorCode::validation,
         "unexpected weight entry for this config: " + entries.begin()->first);
  }

  if (!weights.act_ranges.empty()) {
    if (weights.dtype != DType::i8) {
      fail(ErrorCode::validation,
           "activation ranges are only valid for INT8 containers");
    }
    if (weights.act_ranges.size() != m.layers_.size()) {
      fail(ErrorCode::validation,
           "act.ranges has " + std::to_string(weights.act_ranges.size()) +
               " sites, model has " + std::to_string(m.layers_.size()));
    }
    m.act_params_.resize(m.layers_.size());
    for (std::size_t i = 0; i < m.layers_.size(); ++i) {
      m.act_params_[i] = activation_quant_params(weights.act_ranges[i]);
      LayerState& st = m.states_[i];
      const double s_in = m.act_params_[i].scale;
      const double s_w = st.weight.scale();
      st.bias_q.resize(st.bias.size());
      for (std::size_t k = 0; k < st.bias.size(); ++k) {
        st.bias_q[k] = std::int32_t(std::lround(st.bias[k] / (s_w * s_in)));
      }
      st.input_q = m.act_params_[i];
    }
  }
  return m;
}

Tensor Model::conv_int8(std::size_t idx, const Tensor& input) const {
  const LayerDef& layer = layers_[idx];
  const LayerState& st = states_[idx];
  const ConvSpec& spec = layer.spec;
  const Shape& is = input.shape();
  if (is.c != spec.in_channels) {
    fail(ErrorCode::shape, "conv input has " + std::to_string(is.c) +
                               " channels, layer " + layer.path + " expects " +
                               std::to_string(spec.in_channels));
  }

  const QuantParams q = st.input_q;
  auto in = input.f32();
  std::vector<std::int16_t> xq(in.size());  // holds (x_q - zp) in [-255, 255]
  const float inv_scale = 1.0f / q.scale;
  for (std::size_t i = 0; i < in.size(); ++i) {
    int v = int(std::lround(in[i] * inv_scale)) + q.zero_point;
    v = std::clamp(v, -128, 127);
    xq[i] = std::int16_t(v - q.zero_point);
  }

  const std::uint32_t oh = spec.out_extent(is.h, spec.kh);
  const std::uint32_t ow = spec.out_extent(is.w, spec.kw);
  Tensor out = Tensor::zeros({is.n, spec.out_channels, oh, ow});
  float* dst = out.f32_mut().data();
  auto wq = st.weight.i8();
  const double dequant = double(q.scale) * st.weight.scale();

  const std::size_t in_plane = std::size_t(is.h) * is.w;
  const std::size_t out_plane = std::size_t(oh) * ow;
  std::vector<std::int32_t> acc(out_plane);

  for (std::uint32_t n = 0; n < is.n; ++n) {
    const std::int16_t* in_n = xq.data() + std::size_t(n) * is.c * in_plane;
    for (std::uint32_t co = 0; co < spec.out_channels; ++co) {
      std::fill(acc.begin(), acc.end(),
                st.bias_q.empty() ? 0 : st.bias_q[co]);
      for (std::uint32_t ci = 0; ci < spec.in_channels; ++ci) {
        const std::int16_t* in_c = in_n + std::size_t(ci) * in_plane;
        const std::int8_t* wt_c =
            wq.data() +
            (std::size_t(co) * spec.in_channels + ci) * spec.kh * spec.kw;
        for (std::uint32_t ky = 0; ky < spec.kh; ++ky) {
          for (std::uint32_t kx = 0; kx < spec.kw; ++kx) {
            const std::int32_t wv = wt_c[ky * spec.kw + kx];
            if (wv == 0) continue;
            const std::int64_t off_y =
                std::int64_t(ky) * spec.dilation - spec.padding;
            const std::int64_t off_x =
                std::int64_t(kx) * spec.dilation - spec.padding;
            for (std::uint32_t oy = 0; oy < oh; ++oy) {
              const std::int64_t iy = std::int64_t(oy) * spec.stride + off_y;
              if (iy < 0 || iy >= is.h) continue;
              const std::int16_t* in_row = in_c + std::size_t(iy) * is.w;
              std::int32_t* acc_row = acc.data() + std::size_t(oy) * ow;
              std::int64_t lo = 0, hi = std::int64_t(ow) - 1;
              if (off_x < 0) lo = (-off_x + spec.stride - 1) / spec.stride;
              const std::int64_t max_ix = std::int64_t(is.w) - 1 - off_x;
              if (max_ix < 0) continue;
              hi = std::min<std::int64_t>(hi, max_ix / spec.stride);
              for (std::int64_t ox = lo; ox <= hi; ++ox) {
                acc_row[ox] += wv * in_row[ox * spec.stride + off_x];
              }
            }
          }
        }
      }
      float* out_c =
          dst + (std::size_t(n) * spec.out_channels + co) * out_plane;
      for (std::size_t i = 0; i < out_plane; ++i) {
        out_c[i] = float(acc[i] * dequant);
      }
    }
  }
  return out;
}

Tensor Model::run_layer(std::size_t idx, const Tensor& input,
                        std::vector<ActRange>* recorder) const {
  if (recorder) {
    auto in = input.f32();
    ActRange& r = (*recorder)[idx];
    for (float v : in) {
      r.lo = std::min(r.lo, v);
      r.hi = std::max(r.hi, v);
    }
  }
  const LayerDef& layer = layers_[idx];
  Tensor out;
  if (dtype_ == DType::f32) {
    out = conv2d(input, states_[idx].weight, states_[idx].bias, layer.spec);
  } else {
    out = conv_int8(idx, input);
  }
  if (layer.shuffle_r > 1) out = pixel_shuffle(out, layer.shuffle_r);
  if (layer.relu_after) out = activation(out, Activation::relu);
  return out;
}

SRResult Model::run(const Tensor& depth_lr, const Tensor& intensity_lr,
                    std::vector<ActRange>* recorder) const {
  check_lr_input(depth_lr, "depth");
  check_lr_input(intensity_lr, "intensity");
  if (depth_lr.shape().n != intensity_lr.shape().n) {
    fail(ErrorCode::shape, "depth/intensity batch sizes differ");
  }
  if (dtype_ == DType::i8 && !calibrated()) {
    fail(ErrorCode::state,
         "INT8 model is uncalibrated: no activation ranges; run calibration "
         "before forward");
  }
  if (recorder && recorder->size() != layers_.size()) {
    recorder->assign(layers_.size(),
                     ActRange{std::numeric_limits<float>::max(),
                              std::numeric_limits<float>::lowest()});
  }

  const std::uint32_t target = config_.target_size();
  std::size_t idx = 0;

  // Depth branch. The guidance path and everything outside the convs stays
  // FP32 in both precisions.
  Tensor mask = guidance_mask(intensity_lr);
  Tensor x = run_layer(idx++, depth_lr, recorder);  // depth.feat
  x = concat_channels(x, mask);
  x = run_layer(idx++, x, recorder);  // depth.fuse
  for (std::uint32_t b = 0; b < config_.n_earb; ++b) {
    if (!config_.ablate_earb) {
      Tensor y = run_layer(idx++, x, recorder);
      y = run_layer(idx++, y, recorder);
      y = run_layer(idx++, y, recorder);
      x = add(x, y);
    } else {
      x = run_layer(idx++, x, recorder);
      x = run_layer(idx++, x, recorder);
      x = run_layer(idx++, x, recorder);
    }
  }
  for (std::uint32_t s = 0; s < config_.shuffle_stages(); ++s) {
    x = run_layer(idx++, x, recorder);
  }
  x = run_layer(idx++, x, recorder);  // depth.head.out
  Tensor residual_depth = bicubic_upsample(x, target, target);

  // Intensity branch.
  Tensor y = run_layer(idx++, intensity_lr, recorder);  // intensity.feat
  for (std::uint32_t b = 0; b < config_.n_rlfb; ++b) {
    if (!config_.ablate_rlfb) {
      Tensor z = run_layer(idx++, y, recorder);
      z = run_layer(idx++, z, recorder);
      z = run_layer(idx++, z, recorder);
      z = run_layer(idx++, z, recorder);
      y = add(y, z);
    } else {
      y = run_layer(idx++, y, recorder);
      y = run_layer(idx++, y, recorder);
      y = run_layer(idx++, y, recorder);
      y = run_layer(idx++, y, recorder);
    }
  }
  for (std::uint32_t s = 0; s < config_.shuffle_stages(); ++s) {
    y = run_layer(idx++, y, recorder);
  }
  y = run_layer(idx++, y, recorder);  // intensity.head.out
  Tensor residual_intensity = bicubic_upsample(y, target, target);

  SRResult r;
  r.base_depth = bicubic_upsample(depth_lr, target, target);
  r.base_intensity = bicubic_upsample(intensity_lr, target, target);
  r.depth_hr = gated_sum(r.base_depth, gate_logit_depth_, residual_depth);
  r.intensity_hr =
      gated_sum(r.base_intensity, gate_logit_intensity_, residual_intensity);
  r.residual_depth = std::move(residual_depth);
  r.residual_intensity = std::move(residual_intensity);
  return r;
}

SRResult Model::forward(const Tensor& depth_lr,
                        const Tensor& intensity_lr) const {
  return run(depth_lr, intensity_lr, nullptr);
}

SRResult Model::forward_recording(const Tensor& depth_lr,
                                  const Tensor& intensity_lr,
                                  std::vector<ActRange>& ranges) const {
  if (dtype_ != DType::f32) {
    fail(ErrorCode::state, "activation recording requires an FP32 model");
  }
  if (ranges.size() != layers_.size()) {
    ranges.assign(layers_.size(),
                  ActRange{std::numeric_limits<float>::max(),
                           std::numeric_limits<float>::lowest()});
  }
  return run(depth_lr, intensity_lr, &ranges);
}

ParamCounts Model::count_params() const {
  ParamCounts pc;
  std::uint32_t h = kLrHeight, w = kLrWidth;
  const std::size_t ioff = intensity_branch_offset(config_);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (i == ioff) {  // spatial walk restarts for the intensity branch
      h = kLrHeight;
      w = kLrWidth;
    }
    const ConvSpec& s = layers_[i].spec;
    const std::uint64_t wcount =
        std::uint64_t(s.out_channels) * s.in_channels * s.kh * s.kw;
    pc.params += wcount + s.out_channels;
    pc.bytes += wcount * (dtype_ == DType::f32 ? 4 : 1) + 4ull * s.out_channels;
    pc.macs += std::uint64_t(h) * w * wcount;
    if (layers_[i].shuffle_r > 1) {
      h *= layers_[i].shuffle_r;
      w *= layers_[i].shuffle_r;
    }
  }
  pc.params += 2;  // gate logits
  pc.bytes += 8;
  return pc;
}

}  // namespace litesr
