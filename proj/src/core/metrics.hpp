#pragma once

#include <optional>
#include <string>

#include "core/tensor.hpp"

namespace litesr {

// Branch/term weights of the composite losses, defaults as published.
struct LossWeights {
  double w_d = 0.05;
  double w_i = 0.1;
  double w_ssim = 0.2;
  double w_edge = 0.2;
  double w_tv = 1e-5;
  double w_ms_ssim = 0.15;
  double w_grad = 0.02;
  double eps = 0.001;
};

struct MetricReport {
  std::optional<double> psnr_db;
  std::optional<double> ssim;
  std::optional<double> ms_ssim;
  std::optional<double> gmsd;
  std::optional<double> ngmsd;
  std::optional<double> rmse;
  std::optional<double> delta_125;
  std::optional<double> lv;
  std::optional<double> depth_smoothness;
  double data_range = 1.0;

  // Flat JSON object with fixed field names; absent metrics are omitted and
  // non-finite values (the identical-image PSNR sentinel) serialize as null.
  std::string to_json() const;
};

// All evaluators take single-image (1, 1, h, w) FP32 tensors and compute in
// double precision. Pairwise metrics require equal shapes.

double psnr(const Tensor& a, const Tensor& b, double data_range);
double ssim(const Tensor& a, const Tensor& b, double data_range);

// Standard 5-scale MS-SSIM with 2x average-pool downsampling. Fewer scales
// are selected automatically when the image is too small; the exponent
// prefix is renormalized to sum to one. `max_scales` = 1 collapses to ssim.
double ms_ssim(const Tensor& a, const Tensor& b, double data_range,
               int max_scales = 5);

// Gradient magnitude similarity deviation (Prewitt, c = 170 on [0,255] data;
// [0,1] inputs are scaled by 255). ngmsd min-max normalizes each image to
// [0,1] first, which makes it invariant to per-pair affine rescaling.
double gmsd(const Tensor& a, const Tensor& b);
double ngmsd(const Tensor& a, const Tensor& b);

double rmse(const Tensor& a, const Tensor& b);

// Fraction of pixels with max(pred/gt, gt/pred) < t. Pixels with gt <= 0 are
// excluded (and counted via `excluded`); pred <= 0 on a valid pixel fails
// the ratio test.
double delta_threshold(const Tensor& pred, const Tensor& gt, double t = 1.25,
                       std::size_t* excluded = nullptr);

// Variance of the 4-neighbour Laplacian response over the interior.
double laplacian_variance(const Tensor& img);

// Mean squared Sobel gradient magnitude over masked interior pixels
// (mask: 1 == homogeneous region; default all-ones).
double depth_smoothness(const Tensor& depth, const Tensor* mask = nullptr);

double charbonnier(const Tensor& pred, const Tensor& gt, double eps);

// Mean |dx| + |dy| with forward differences, normalized by pixel count.
double tv_loss(const Tensor& img);

// Edge loss compares Sobel gradient magnitudes; grad loss compares the raw
// (gx, gy) component pairs.
double sobel_edge_loss(const Tensor& pred, const Tensor& gt);
double sobel_grad_loss(const Tensor& pred, const Tensor& gt);

double depth_loss(const Tensor& pred, const Tensor& gt, const LossWeights& w,
                  double data_range = 1.0);
double intensity_loss(const Tensor& pred, const Tensor& gt,
                      const LossWeights& w, double data_range = 1.0);
double total_loss(const Tensor& d_pred, const Tensor& d_gt,
                  const Tensor& i_pred, const Tensor& i_gt,
                  const LossWeights& w, double data_range = 1.0);

// Everything applicable to one pair; depth mode adds delta_125 and
// depth_smoothness. Metrics whose size preconditions fail are left unset.
MetricReport full_report(const Tensor& pred, const Tensor& gt,
                         double data_range, bool depth_mode);

}  // namespace litesr
