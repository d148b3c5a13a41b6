#include "core/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "core/pgm.hpp"
#include "core/rng.hpp"

namespace fs = std::filesystem;

namespace litesr {

void DatasetStats::validate() const {
  if (!(std_depth > 0.0) || !(std_intensity > 0.0)) {
    fail(ErrorCode::validation, "dataset std values must be strictly positive");
  }
}

void PairSample::validate() const {
  auto check_lr = [](const Tensor& t, const char* what) {
    const Shape& s = t.shape();
    if (s.n != 1 || s.c != 1 || s.h != kLrHeight || s.w != kLrWidth) {
      fail(ErrorCode::shape, std::string(what) + " must be 32x48, got " +
                                 s.str());
    }
  };
  check_lr(lr_depth, "lr_depth");
  check_lr(lr_intensity, "lr_intensity");
  auto check_hr = [](const Tensor& t, const char* what) {
    const Shape& s = t.shape();
    if (s.n != 1 || s.c != 1 || s.h != s.w || (s.h != 256 && s.h != 512)) {
      fail(ErrorCode::shape, std::string(what) +
                                 " must be square 256 or 512, got " + s.str());
    }
  };
  check_hr(hr_depth, "hr_depth");
  check_hr(hr_intensity, "hr_intensity");
}

Tensor area_downsample(const Tensor& img, std::uint32_t out_h,
                       std::uint32_t out_w) {
  if (img.dtype() != DType::f32) {
    fail(ErrorCode::dtype, "area_downsample expects FP32 input");
  }
  const Shape& s = img.shape();
  if (out_h == 0 || out_w == 0 || s.h < out_h || s.w < out_w) {
    fail(ErrorCode::shape, "area_downsample: target " + std::to_string(out_h) +
                               "x" + std::to_string(out_w) +
                               " exceeds input " + s.str());
  }
  const double ry = double(s.h) / out_h;
  const double rx = double(s.w) / out_w;
  Tensor out = Tensor::zeros({s.n, s.c, out_h, out_w});
  for (std::uint32_t n = 0; n < s.n; ++n) {
    for (std::uint32_t c = 0; c < s.c; ++c) {
      for (std::uint32_t oy = 0; oy < out_h; ++oy) {
        const double y0 = oy * ry, y1 = (oy + 1) * ry;
        const std::uint32_t iy0 = std::uint32_t(std::floor(y0));
        const std::uint32_t iy1 =
            std::min<std::uint32_t>(s.h, std::uint32_t(std::ceil(y1)));
        for (std::uint32_t ox = 0; ox < out_w; ++ox) {
          const double x0 = ox * rx, x1 = (ox + 1) * rx;
          const std::uint32_t ix0 = std::uint32_t(std::floor(x0));
          const std::uint32_t ix1 =
              std::min<std::uint32_t>(s.w, std::uint32_t(std::ceil(x1)));
          double acc = 0.0;
          for (std::uint32_t iy = iy0; iy < iy1; ++iy) {
            const double wy =
                std::min<double>(y1, iy + 1) - std::max<double>(y0, iy);
            for (std::uint32_t ix = ix0; ix < ix1; ++ix) {
              const double wx =
                  std::min<double>(x1, ix + 1) - std::max<double>(x0, ix);
              acc += wy * wx * img.at(n, c, iy, ix);
            }
          }
          out.at(n, c, oy, ox) = float(acc / (ry * rx));
        }
      }
    }
  }
  return out;
}

PairSample make_pair(const Tensor& hr_depth, const Tensor& hr_intensity,
                     const DatagenConfig& config, const std::string& scene_id) {
  if (config.target != 256 && config.target != 512) {
    fail(ErrorCode::argument, "HR target must be 256 or 512");
  }
  const Shape& sd = hr_depth.shape();
  const Shape& si = hr_intensity.shape();
  if (!(sd == si)) {
    fail(ErrorCode::shape, "HR depth/intensity sizes differ: " + sd.str() +
                               " vs " + si.str());
  }
  if (sd.h < kLrHeight || sd.w < kLrWidth) {
    fail(ErrorCode::shape,
         "HR input smaller than the 32x48 LR footprint: " + sd.str());
  }

  PairSample s;
  s.scene_id = scene_id;
  s.lr_depth = area_downsample(hr_depth, kLrHeight, kLrWidth);
  s.lr_intensity = area_downsample(hr_intensity, kLrHeight, kLrWidth);
  if (config.corrupt) {
    const NonUniformityMap& g =
        config.gains ? *config.gains : NonUniformityMap::identity();
    s.lr_depth =
        apply_nonuniformity(s.lr_depth, g.depth_gain, GainDirection::corrupt);
    s.lr_intensity = apply_nonuniformity(s.lr_intensity, g.intensity_gain,
                                         GainDirection::corrupt);
  }
  const bool resize_d = sd.h != config.target || sd.w != config.target;
  s.hr_depth = resize_d ? bicubic_upsample(hr_depth, config.target, config.target)
                        : hr_depth;
  s.hr_intensity = resize_d ? bicubic_upsample(hr_intensity, config.target,
                                               config.target)
                            : hr_intensity;
  s.validate();
  return s;
}

Tensor normalize(const Tensor& img, double mean, double stddev) {
  if (!(stddev > 0.0)) {
    fail(ErrorCode::argument, "normalize requires a positive std");
  }
  Tensor out = img;
  for (float& v : out.f32_mut()) {
    v = float((double(v) - mean) / stddev);
  }
  return out;
}

Tensor denormalize(const Tensor& img, double mean, double stddev) {
  if (!(stddev > 0.0)) {
    fail(ErrorCode::argument, "denormalize requires a positive std");
  }
  Tensor out = img;
  for (float& v : out.f32_mut()) {
    v = float(double(v) * stddev + mean);
  }
  return out;
}

PairSample normalize_sample(const PairSample& s, const DatasetStats& stats) {
  stats.validate();
  PairSample out = s;
  out.lr_depth = normalize(s.lr_depth, stats.mean_depth, stats.std_depth);
  out.hr_depth = normalize(s.hr_depth, stats.mean_depth, stats.std_depth);
  out.lr_intensity =
      normalize(s.lr_intensity, stats.mean_intensity, stats.std_intensity);
  out.hr_intensity =
      normalize(s.hr_intensity, stats.mean_intensity, stats.std_intensity);
  return out;
}

PairSample denormalize_sample(const PairSample& s, const DatasetStats& stats) {
  stats.validate();
  PairSample out = s;
  out.lr_depth = denormalize(s.lr_depth, stats.mean_depth, stats.std_depth);
  out.hr_depth = denormalize(s.hr_depth, stats.mean_depth, stats.std_depth);
  out.lr_intensity =
      denormalize(s.lr_intensity, stats.mean_intensity, stats.std_intensity);
  out.hr_intensity =
      denormalize(s.hr_intensity, stats.mean_intensity, stats.std_intensity);
  return out;
}

Tensor flip(const Tensor& img, Augment mode) {
  if (mode == Augment::none) return img;
  const Shape& s = img.shape();
  const bool fh = mode == Augment::hflip || mode == Augment::hvflip;
  const bool fv = mode == Augment::vflip || mode == Augment::hvflip;
  Tensor out = Tensor::zeros(s);
  for (std::uint32_t n = 0; n < s.n; ++n) {
    for (std::uint32_t c = 0; c < s.c; ++c) {
      for (std::uint32_t y = 0; y < s.h; ++y) {
        const std::uint32_t sy = fv ? s.h - 1 - y : y;
        for (std::uint32_t x = 0; x < s.w; ++x) {
          const std::uint32_t sx = fh ? s.w - 1 - x : x;
          out.at(n, c, y, x) = img.at(n, c, sy, sx);
        }
      }
    }
  }
  return out;
}

PairSample augment(const PairSample& s, Augment mode) {
  PairSample out = s;
  out.lr_depth = flip(s.lr_depth, mode);
  out.lr_intensity = flip(s.lr_intensity, mode);
  out.hr_depth = flip(s.hr_depth, mode);
  out.hr_intensity = flip(s.hr_intensity, mode);
  out.augmentation = mode;
  return out;
}

DatasetStats compute_stats(const std::vector<PairSample>& samples) {
  if (samples.empty()) {
    fail(ErrorCode::argument, "compute_stats needs at least one sample");
  }
  double sum_d = 0.0, sum2_d = 0.0, sum_i = 0.0, sum2_i = 0.0;
  std::size_t count_d = 0, count_i = 0;
  auto fold = [](const Tensor& t, double& sum, double& sum2,
                 std::size_t& count) {
    for (float v : t.f32()) {
      sum += v;
      sum2 += double(v) * v;
    }
    count += t.shape().count();
  };
  for (const PairSample& s : samples) {
    fold(s.lr_depth, sum_d, sum2_d, count_d);
    fold(s.hr_depth, sum_d, sum2_d, count_d);
    fold(s.lr_intensity, sum_i, sum2_i, count_i);
    fold(s.hr_intensity, sum_i, sum2_i, count_i);
  }
  DatasetStats st;
  st.mean_depth = sum_d / double(count_d);
  st.std_depth =
      std::sqrt(std::max(0.0, sum2_d / double(count_d) -
                                  st.mean_depth * st.mean_depth));
  st.mean_intensity = sum_i / double(count_i);
  st.std_intensity =
      std::sqrt(std::max(0.0, sum2_i / double(count_i) -
                                  st.mean_intensity * st.mean_intensity));
  return st;
}

SplitResult split_indices(std::size_t count, double ratio,
                          std::uint64_t seed) {
  if (count == 0) fail(ErrorCode::argument, "cannot split an empty list");
  if (ratio < 0.0 || ratio > 1.0) {
    fail(ErrorCode::argument, "split ratio must be in [0, 1]");
  }
  std::vector<std::size_t> order(count);
  for (std::size_t i = 0; i < count; ++i) order[i] = i;
  std::mt19937 rng{std::uint32_t(seed)};
  fisher_yates(order, rng);
  const std::size_t n_train = std::size_t(std::floor(ratio * double(count)));
  SplitResult r;
  r.train.assign(order.begin(), order.begin() + n_train);
  r.val.assign(order.begin() + n_train, order.end());
  return r;
}

void write_sample_dir(const std::string& dir, const PairSample& s,
                      std::uint32_t intensity_maxval) {
  s.validate();
  fs::create_directories(dir);
  auto meters_to_mm = [](const Tensor& t) {
    Tensor out = t;
    for (float& v : out.f32_mut()) v *= float(kDepthMmPerMeter);
    return out;
  };
  write_pgm(dir + "/lr_depth.pgm", meters_to_mm(s.lr_depth));
  write_pgm(dir + "/hr_depth.pgm", meters_to_mm(s.hr_depth));
  write_pgm(dir + "/lr_intensity.pgm", s.lr_intensity, intensity_maxval);
  write_pgm(dir + "/hr_intensity.pgm", s.hr_intensity, intensity_maxval);
}

PairSample load_sample_dir(const std::string& dir,
                           const std::string& scene_id) {
  auto mm_to_meters = [](Tensor t) {
    for (float& v : t.f32_mut()) v /= float(kDepthMmPerMeter);
    return t;
  };
  PairSample s;
  s.scene_id = scene_id;
  s.lr_depth = mm_to_meters(read_pgm(dir + "/lr_depth.pgm").pixels);
  s.lr_intensity = read_pgm(dir + "/lr_intensity.pgm").pixels;
  s.hr_depth = mm_to_meters(read_pgm(dir + "/hr_depth.pgm").pixels);
  s.hr_intensity = read_pgm(dir + "/hr_intensity.pgm").pixels;
  s.validate();
  return s;
}

std::vector<std::string> list_scene_dirs(const std::string& root) {
  if (!fs::is_directory(root)) {
    fail(ErrorCode::io, "not a directory: " + root);
  }
  std::vector<std::string> dirs;
  for (const auto& e : fs::directory_iterator(root)) {
    if (e.is_directory() && fs::exists(e.path() / "lr_depth.pgm")) {
      dirs.push_back(e.path().string());
    }
  }
  std::sort(dirs.begin(), dirs.end());
  return dirs;
}

}  // namespace litesr
