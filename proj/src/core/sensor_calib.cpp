#include "core/sensor_calib.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include <json.hpp>

#include "core/util.hpp"

namespace litesr {

namespace {

void check_frame(const Tensor& t, std::uint32_t h, std::uint32_t w,
                 const char* what) {
  const Shape& s = t.shape();
  if (t.dtype() != DType::f32 || s.n != 1 || s.c != 1 || s.h != h ||
      s.w != w) {
    fail(ErrorCode::shape, std::string(what) + " expects a (1,1," +
                               std::to_string(h) + "," + std::to_string(w) +
                               ") FP32 frame, got " + s.str());
  }
}

float median_of(std::vector<float>& v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return 0.5f * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::size_t HotPixelMask::flagged_count() const {
  return std::size_t(std::count(mask.begin(), mask.end(), std::uint8_t(1)));
}

NonUniformityMap NonUniformityMap::identity(std::uint32_t h, std::uint32_t w) {
  NonUniformityMap m;
  m.height = h;
  m.width = w;
  m.depth_gain.assign(std::size_t(h) * w, 1.0f);
  m.intensity_gain.assign(std::size_t(h) * w, 1.0f);
  return m;
}

void NonUniformityMap::check_band() {
  out_of_band = false;
  auto scan = [this](const std::vector<float>& g) {
    for (float v : g) {
      if (!(v > 0.0f)) {
        fail(ErrorCode::validation,
             "non-uniformity gain entries must be positive");
      }
      if (v <= 0.5f || v >= 2.0f) out_of_band = true;
    }
  };
  scan(depth_gain);
  scan(intensity_gain);
}

HotPixelMask detect_hot_pixels(const std::vector<Tensor>& flat_frames,
                               double threshold) {
  if (flat_frames.empty()) {
    fail(ErrorCode::argument, "hot-pixel detection needs at least one frame");
  }
  const Shape& s = flat_frames.front().shape();
  HotPixelMask out;
  out.height = s.h;
  out.width = s.w;
  out.threshold_counts = threshold;
  const std::size_t count = std::size_t(s.h) * s.w;
  std::vector<double> mean(count, 0.0);
  for (const Tensor& f : flat_frames) {
    check_frame(f, s.h, s.w, "detect_hot_pixels");
    auto v = f.f32();
    for (std::size_t i = 0; i < count; ++i) mean[i] += v[i];
  }
  std::vector<float> mean_f(count);
  out.mask.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    mean[i] /= double(flat_frames.size());
    mean_f[i] = float(mean[i]);
    out.mask[i] = mean[i] > threshold ? 1 : 0;
  }
  out.source_mean_frame = Tensor::from_data({1, 1, s.h, s.w}, std::move(mean_f));
  out.all_flagged = out.flagged_count() == count;
  return out;
}

Tensor compensate_hot_pixels(const Tensor& frame, const HotPixelMask& mask,
                             HotPixelFill fill) {
  check_frame(frame, mask.height, mask.width, "compensate_hot_pixels");
  if (mask.mask.size() != std::size_t(mask.height) * mask.width) {
    fail(ErrorCode::shape, "hot-pixel mask size mismatch");
  }
  Tensor out = frame;
  if (mask.flagged_count() == 0) return out;

  // Global fallback for flagged pixels whose whole neighbourhood is flagged.
  std::vector<float> clean;
  auto src = frame.f32();
  for (std::size_t i = 0; i < mask.mask.size(); ++i) {
    if (!mask.mask[i]) clean.push_back(src[i]);
  }
  const bool have_global = !clean.empty();
  float global_fill = 0.0f;
  if (have_global) {
    global_fill = fill == HotPixelFill::median
                      ? median_of(clean)
                      : float(std::accumulate(clean.begin(), clean.end(), 0.0) /
                              double(clean.size()));
  }

  auto dst = out.f32_mut();
  for (std::uint32_t y = 0; y < mask.height; ++y) {
    for (std::uint32_t x = 0; x < mask.width; ++x) {
      if (!mask.at(y, x)) continue;
      std::vector<float> neigh;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dy == 0 && dx == 0) continue;
          const std::int64_t ny = std::int64_t(y) + dy;
          const std::int64_t nx = std::int64_t(x) + dx;
          if (ny < 0 || ny >= mask.height || nx < 0 || nx >= mask.width) {
            continue;
          }
          if (mask.at(std::uint32_t(ny), std::uint32_t(nx))) continue;
          neigh.push_back(src[std::size_t(ny) * mask.width + std::size_t(nx)]);
        }
      }
      float value;
      if (!neigh.empty()) {
        value = fill == HotPixelFill::median
                    ? median_of(neigh)
                    : float(std::accumulate(neigh.begin(), neigh.end(), 0.0) /
                            double(neigh.size()));
      } else if (have_global) {
        value = global_fill;
      } else {
        continue;  // every pixel flagged: nothing usable, leave as-is
      }
      dst[std::size_t(y) * mask.width + x] = value;
    }
  }
  return out;
}

Tensor apply_nonuniformity(const Tensor& frame, std::span<const float> gain,
                           GainDirection direction) {
  const Shape& s = frame.shape();
  if (frame.dtype() != DType::f32 || s.n != 1 || s.c != 1) {
    fail(ErrorCode::shape, "apply_nonuniformity expects a (1,1,h,w) frame");
  }
  if (gain.size() != std::size_t(s.h) * s.w) {
    fail(ErrorCode::shape, "gain map size does not match frame");
  }
  Tensor out = frame;
  auto dst = out.f32_mut();
  for (std::size_t i = 0; i < gain.size(); ++i) {
    if (!(gain[i] > 0.0f)) {
      fail(ErrorCode::validation, "non-positive gain entry at index " +
                                      std::to_string(i));
    }
    dst[i] = direction == GainDirection::correct ? dst[i] * gain[i]
                                                 : dst[i] / gain[i];
  }
  return out;
}

NonUniformityMap gains_from_flat(const Tensor& mean_intensity,
                                 const Tensor* mean_depth,
                                 const HotPixelMask& mask) {
  check_frame(mean_intensity, mask.height, mask.width, "gains_from_flat");
  NonUniformityMap out = NonUniformityMap::identity(mask.height, mask.width);

  auto derive = [&mask](const Tensor& mean_frame, std::vector<float>& gain) {
    auto v = mean_frame.f32();
    double global = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (mask.mask[i]) continue;
      global += v[i];
      ++n;
    }
    if (n == 0) return;  // everything flagged: keep identity
    global /= double(n);
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (mask.mask[i] || !(v[i] > 0.0f) || !(global > 0.0)) continue;
      gain[i] = float(global / v[i]);
    }
  };
  derive(mean_intensity, out.intensity_gain);
  if (mean_depth) {
    check_frame(*mean_depth, mask.height, mask.width, "gains_from_flat depth");
    derive(*mean_depth, out.depth_gain);
  }
  out.check_band();
  return out;
}

namespace {

std::string floats_b64(std::span<const float> v) {
  return base64_encode(reinterpret_cast<const std::uint8_t*>(v.data()),
                       v.size() * sizeof(float));
}

std::vector<float> b64_floats(const std::string& text, std::size_t expected) {
  const auto bytes = base64_decode(text);
  if (bytes.size() != expected * sizeof(float)) {
    fail(ErrorCode::parse, "calibration payload has unexpected size");
  }
  std::vector<float> v(expected);
  std::memcpy(v.data(), bytes.data(), bytes.size());
  return v;
}

}  // namespace

void save_bundle(const CalibrationBundle& b, const std::string& path) {
  const std::size_t count = std::size_t(b.hot.height) * b.hot.width;
  if (b.hot.mask.size() != count ||
      b.gains.depth_gain.size() != count ||
      b.gains.intensity_gain.size() != count) {
    fail(ErrorCode::shape, "calibration bundle payload sizes disagree");
  }
  nlohmann::json j;
  j["format"] = "litesr-calibration";
  j["version"] = 1;
  j["height"] = b.hot.height;
  j["width"] = b.hot.width;
  j["threshold_counts"] = b.hot.threshold_counts;
  j["hot_pixel_count"] = b.hot.flagged_count();
  j["all_flagged"] = b.hot.all_flagged;
  j["out_of_band_gains"] = b.gains.out_of_band;
  j["hot_mask_b64"] = base64_encode(b.hot.mask.data(), b.hot.mask.size());
  j["mean_frame_b64"] = floats_b64(b.hot.source_mean_frame.f32());
  j["depth_gain_b64"] = floats_b64(b.gains.depth_gain);
  j["intensity_gain_b64"] = floats_b64(b.gains.intensity_gain);
  const std::string text = j.dump(2) + "\n";
  write_file_bytes(path, text.data(), text.size());
}

CalibrationBundle load_bundle(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file_bytes(path));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::parse, "calibration bundle is not valid JSON: " +
                               std::string(e.what()));
  }
  if (j.value("format", "") != "litesr-calibration") {
    fail(ErrorCode::parse, "not a calibration bundle: " + path);
  }
  CalibrationBundle b;
  b.hot.height = j.at("height").get<std::uint32_t>();
  b.hot.width = j.at("width").get<std::uint32_t>();
  b.hot.threshold_counts = j.at("threshold_counts").get<double>();
  const std::size_t count = std::size_t(b.hot.height) * b.hot.width;
  b.hot.mask = base64_decode(j.at("hot_mask_b64").get<std::string>());
  if (b.hot.mask.size() != count) {
    fail(ErrorCode::parse, "hot mask payload has unexpected size");
  }
  b.hot.source_mean_frame = Tensor::from_data(
      {1, 1, b.hot.height, b.hot.width},
      b64_floats(j.at("mean_frame_b64").get<std::string>(), count));
  b.hot.all_flagged = b.hot.flagged_count() == count;
  b.gains.height = b.hot.height;
  b.gains.width = b.hot.width;
  b.gains.depth_gain =
      b64_floats(j.at("depth_gain_b64").get<std::string>(), count);
  b.gains.intensity_gain =
      b64_floats(j.at("intensity_gain_b64").get<std::string>(), count);
  b.gains.check_band();
  return b;
}

}  // namespace litesr
