#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/sensor_calib.hpp"
#include "core/tensor.hpp"

namespace litesr {

// Per-role normalization statistics computed over a training set.
struct DatasetStats {
  double mean_depth = 0.0;
  double std_depth = 1.0;
  double mean_intensity = 0.0;
  double std_intensity = 1.0;

  void validate() const;
};

enum class Augment : std::uint8_t { none = 0, hflip = 1, vflip = 2, hvflip = 3 };

// One training/eval sample: 32x48 LR pair plus the square HR pair it was
// generated from.
struct PairSample {
  Tensor lr_depth;
  Tensor lr_intensity;
  Tensor hr_depth;
  Tensor hr_intensity;
  std::string scene_id;
  Augment augmentation = Augment::none;

  void validate() const;
};

struct DatagenConfig {
  std::uint32_t target = 256;  // square HR target (256 or 512)
  bool corrupt = false;        // divide LR by the non-uniformity gains
  const NonUniformityMap* gains = nullptr;
};

// Area-average downsampling (handles fractional box edges exactly); used for
// HR -> 32x48 LR generation.
Tensor area_downsample(const Tensor& img, std::uint32_t out_h,
                       std::uint32_t out_w);

PairSample make_pair(const Tensor& hr_depth, const Tensor& hr_intensity,
                     const DatagenConfig& config,
                     const std::string& scene_id = "");

Tensor normalize(const Tensor& img, double mean, double stddev);
Tensor denormalize(const Tensor& img, double mean, double stddev);
PairSample normalize_sample(const PairSample& s, const DatasetStats& stats);
PairSample denormalize_sample(const PairSample& s, const DatasetStats& stats);

Tensor flip(const Tensor& img, Augment mode);
PairSample augment(const PairSample& s, Augment mode);

// Mean/std over all depth (resp. intensity) pixels, LR and HR together.
DatasetStats compute_stats(const std::vector<PairSample>& samples);

struct SplitResult {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
};

// Deterministic seeded shuffle (explicit Fisher-Yates over mt19937), then
// the first floor(ratio * N) indices train, remainder validate.
SplitResult split_indices(std::size_t count, double ratio, std::uint64_t seed);

// Scene directory layout: <dir>/<scene>/{lr_depth,lr_intensity,hr_depth,
// hr_intensity}.pgm. Depth PGMs are u16 millimeters, tensors hold meters.
void write_sample_dir(const std::string& dir, const PairSample& s,
                      std::uint32_t intensity_maxval = 65535);
PairSample load_sample_dir(const std::string& dir, const std::string& scene_id);
std::vector<std::string> list_scene_dirs(const std::string& root);

inline constexpr double kDepthMmPerMeter = 1000.0;

}  // namespace litesr
