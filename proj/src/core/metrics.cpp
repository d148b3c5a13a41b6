#include "core/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <json.hpp>

namespace litesr {

namespace {

struct Image {
  std::size_t h = 0, w = 0;
  std::vector<double> v;

  double at(std::size_t y, std::size_t x) const { return v[y * w + x]; }
  double& at(std::size_t y, std::size_t x) { return v[y * w + x]; }
};

Image to_image(const Tensor& t, const char* what) {
  if (t.dtype() != DType::f32) {
    fail(ErrorCode::dtype, std::string(what) + " expects an FP32 tensor");
  }
  const Shape& s = t.shape();
  if (s.n != 1 || s.c != 1 || s.h == 0 || s.w == 0) {
    fail(ErrorCode::shape, std::string(what) +
                               " expects a single-channel image (1,1,h,w), "
                               "got " +
                               s.str());
  }
  Image img;
  img.h = s.h;
  img.w = s.w;
  auto data = t.f32();
  img.v.assign(data.begin(), data.end());
  return img;
}

void check_same_shape(const Image& a, const Image& b, const char* what) {
  if (a.h != b.h || a.w != b.w) {
    fail(ErrorCode::shape, std::string(what) + " image sizes differ");
  }
}

double mse(const Image& a, const Image& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.v.size(); ++i) {
    const double d = a.v[i] - b.v[i];
    acc += d * d;
  }
  return acc / double(a.v.size());
}

// 3x3 correlation with zero padding, evaluated in double.
void filter3x3(const Image& in, const double k[9], Image& out) {
  out.h = in.h;
  out.w = in.w;
  out.v.assign(in.v.size(), 0.0);
  for (std::size_t y = 0; y < in.h; ++y) {
    for (std::size_t x = 0; x < in.w; ++x) {
      double acc = 0.0;
      for (int dy = -1; dy <= 1; ++dy) {
        const std::ptrdiff_t iy = std::ptrdiff_t(y) + dy;
        if (iy < 0 || iy >= std::ptrdiff_t(in.h)) continue;
        for (int dx = -1; dx <= 1; ++dx) {
          const std::ptrdiff_t ix = std::ptrdiff_t(x) + dx;
          if (ix < 0 || ix >= std::ptrdiff_t(in.w)) continue;
          acc += k[(dy + 1) * 3 + (dx + 1)] * in.at(iy, ix);
        }
      }
      out.at(y, x) = acc;
    }
  }
}

constexpr double kSobelX[9] = {-1, 0, 1, -2, 0, 2, -1, 0, 1};
constexpr double kSobelY[9] = {-1, -2, -1, 0, 0, 0, 1, 2, 1};
constexpr double kPrewittX[9] = {1.0 / 3, 0, -1.0 / 3, 1.0 / 3, 0,
                                 -1.0 / 3, 1.0 / 3, 0, -1.0 / 3};
constexpr double kPrewittY[9] = {1.0 / 3,  1.0 / 3,  1.0 / 3, 0, 0,
                                 0,        -1.0 / 3, -1.0 / 3, -1.0 / 3};

// --- SSIM machinery ---------------------------------------------------------

constexpr int kWin = 11;
constexpr double kSigma = 1.5;
constexpr double kK1 = 0.01;
constexpr double kK2 = 0.03;

const std::vector<double>& gaussian_window() {
  static const std::vector<double> g = [] {
    std::vector<double> v(kWin);
    double sum = 0.0;
    for (int i = 0; i < kWin; ++i) {
      const double d = i - (kWin - 1) / 2.0;
      v[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
      sum += v[i];
    }
    for (double& x : v) x /= sum;
    return v;
  }();
  return g;
}

// Separable valid-mode Gaussian filtering: output (h-10) x (w-10).
Image gauss_valid(const Image& in) {
  const auto& g = gaussian_window();
  Image mid;
  mid.h = in.h;
  mid.w = in.w - (kWin - 1);
  mid.v.resize(mid.h * mid.w);
  for (std::size_t y = 0; y < in.h; ++y) {
    for (std::size_t x = 0; x < mid.w; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWin; ++k) acc += g[k] * in.at(y, x + k);
      mid.at(y, x) = acc;
    }
  }
  Image out;
  out.h = in.h - (kWin - 1);
  out.w = mid.w;
  out.v.resize(out.h * out.w);
  for (std::size_t y = 0; y < out.h; ++y) {
    for (std::size_t x = 0; x < out.w; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWin; ++k) acc += g[k] * mid.at(y + k, x);
      out.at(y, x) = acc;
    }
  }
  return out;
}

Image product(const Image& a, const Image& b) {
  Image out;
  out.h = a.h;
  out.w = a.w;
  out.v.resize(a.v.size());
  for (std::size_t i = 0; i < a.v.size(); ++i) out.v[i] = a.v[i] * b.v[i];
  return out;
}

struct SsimMeans {
  double ssim = 0.0;
  double cs = 0.0;
};

SsimMeans ssim_means(const Image& a, const Image& b, double data_range) {
  if (a.h < kWin || a.w < kWin) {
    fail(ErrorCode::shape, "ssim requires images of at least 11x11");
  }
  const double c1 = (kK1 * data_range) * (kK1 * data_range);
  const double c2 = (kK2 * data_range) * (kK2 * data_range);
  const Image mu_a = gauss_valid(a);
  const Image mu_b = gauss_valid(b);
  const Image e_aa = gauss_valid(product(a, a));
  const Image e_bb = gauss_valid(product(b, b));
  const Image e_ab = gauss_valid(product(a, b));
  double ssim_sum = 0.0, cs_sum = 0.0;
  for (std::size_t i = 0; i < mu_a.v.size(); ++i) {
    const double ma = mu_a.v[i];
    const double mb = mu_b.v[i];
    const double va = e_aa.v[i] - ma * ma;
    const double vb = e_bb.v[i] - mb * mb;
    const double cov = e_ab.v[i] - ma * mb;
    const double cs = (2.0 * cov + c2) / (va + vb + c2);
    const double lum = (2.0 * ma * mb + c1) / (ma * ma + mb * mb + c1);
    cs_sum += cs;
    ssim_sum += lum * cs;
  }
  const double inv = 1.0 / double(mu_a.v.size());
  return {ssim_sum * inv, cs_sum * inv};
}

Image avg_pool2(const Image& in) {
  Image out;
  out.h = in.h / 2;
  out.w = in.w / 2;
  out.v.resize(out.h * out.w);
  for (std::size_t y = 0; y < out.h; ++y) {
    for (std::size_t x = 0; x < out.w; ++x) {
      out.at(y, x) = 0.25 * (in.at(2 * y, 2 * x) + in.at(2 * y, 2 * x + 1) +
                             in.at(2 * y + 1, 2 * x) +
                             in.at(2 * y + 1, 2 * x + 1));
    }
  }
  return out;
}

constexpr double kMsWeights[5] = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};

double norm01_span(Image& img) {
  double lo = std::numeric_limits<double>::max();
  double hi = std::numeric_limits<double>::lowest();
  for (double v : img.v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double span = hi - lo;
  if (span <= 0.0) {
    std::fill(img.v.begin(), img.v.end(), 0.0);
    return 0.0;
  }
  for (double& v : img.v) v = (v - lo) / span;
  return span;
}

double gmsd_core(const Image& a, const Image& b) {
  constexpr double c = 170.0;
  Image ax, ay, bx, by;
  filter3x3(a, kPrewittX, ax);
  filter3x3(a, kPrewittY, ay);
  filter3x3(b, kPrewittX, bx);
  filter3x3(b, kPrewittY, by);
  const std::size_t count = a.v.size();
  std::vector<double> gms(count);
  double mean = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double ma = std::sqrt(ax.v[i] * ax.v[i] + ay.v[i] * ay.v[i]);
    const double mb = std::sqrt(bx.v[i] * bx.v[i] + by.v[i] * by.v[i]);
    gms[i] = (2.0 * ma * mb + c) / (ma * ma + mb * mb + c);
    mean += gms[i];
  }
  mean /= double(count);
  double var = 0.0;
  for (double g : gms) var += (g - mean) * (g - mean);
  return std::sqrt(var / double(count));
}

void scale255(Image& img) {
  for (double& v : img.v) v *= 255.0;
}

}  // namespace

double psnr(const Tensor& ta, const Tensor& tb, double data_range) {
  if (!(data_range > 0.0)) {
    fail(ErrorCode::argument, "psnr data_range must be positive");
  }
  const Image a = to_image(ta, "psnr");
  const Image b = to_image(tb, "psnr");
  check_same_shape(a, b, "psnr");
  const double m = mse(a, b);
  if (m == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(data_range * data_range / m);
}

double ssim(const Tensor& ta, const Tensor& tb, double data_range) {
  const Image a = to_image(ta, "ssim");
  const Image b = to_image(tb, "ssim");
  check_same_shape(a, b, "ssim");
  return ssim_means(a, b, data_range).ssim;
}

double ms_ssim(const Tensor& ta, const Tensor& tb, double data_range,
               int max_scales) {
  if (max_scales < 1 || max_scales > 5) {
    fail(ErrorCode::argument, "ms_ssim supports 1..5 scales");
  }
  Image a = to_image(ta, "ms_ssim");
  Image b = to_image(tb, "ms_ssim");
  check_same_shape(a, b, "ms_ssim");

  int feasible = 0;
  for (std::size_t h = a.h, w = a.w; h >= kWin && w >= kWin; h /= 2, w /= 2) {
    ++feasible;
    if (feasible == max_scales) break;
  }
  if (feasible == 0) {
    fail(ErrorCode::shape, "ms_ssim: image too small for one 11x11 scale");
  }

  double wsum = 0.0;
  for (int s = 0; s < feasible; ++s) wsum += kMsWeights[s];

  double value = 1.0;
  for (int s = 0; s < feasible; ++s) {
    const SsimMeans m = ssim_means(a, b, data_range);
    const double exponent = kMsWeights[s] / wsum;
    // Negative similarity means cannot enter a real-valued power; clamp at 0.
    const double term = (s == feasible - 1) ? std::max(m.ssim, 0.0)
                                            : std::max(m.cs, 0.0);
    value *= std::pow(term, exponent);
    if (s + 1 < feasible) {
      a = avg_pool2(a);
      b = avg_pool2(b);
    }
  }
  return value;
}

double gmsd(const Tensor& ta, const Tensor& tb) {
  Image a = to_image(ta, "gmsd");
  Image b = to_image(tb, "gmsd");
  check_same_shape(a, b, "gmsd");
  scale255(a);
  scale255(b);
  return gmsd_core(a, b);
}

double ngmsd(const Tensor& ta, const Tensor& tb) {
  Image a = to_image(ta, "ngmsd");
  Image b = to_image(tb, "ngmsd");
  check_same_shape(a, b, "ngmsd");
  norm01_span(a);
  norm01_span(b);
  scale255(a);
  scale255(b);
  return gmsd_core(a, b);
}

double rmse(const Tensor& ta, const Tensor& tb) {
  const Image a = to_image(ta, "rmse");
  const Image b = to_image(tb, "rmse");
  check_same_shape(a, b, "rmse");
  return std::sqrt(mse(a, b));
}

double delta_threshold(const Tensor& tpred, const Tensor& tgt, double t,
                       std::size_t* excluded) {
  const Image pred = to_image(tpred, "delta_threshold");
  const Image gt = to_image(tgt, "delta_threshold");
  check_same_shape(pred, gt, "delta_threshold");
  std::size_t skipped = 0, hits = 0, valid = 0;
  for (std::size_t i = 0; i < gt.v.size(); ++i) {
    if (gt.v[i] <= 0.0) {
      ++skipped;
      continue;
    }
    ++valid;
    if (pred.v[i] <= 0.0) continue;  // never within ratio t of a positive gt
    const double ratio = std::max(pred.v[i] / gt.v[i], gt.v[i] / pred.v[i]);
    if (ratio < t) ++hits;
  }
  if (excluded) *excluded = skipped;
  if (valid == 0) {
    fail(ErrorCode::argument,
         "delta metric undefined: every pixel has non-positive ground truth");
  }
  return double(hits) / double(valid);
}

double laplacian_variance(const Tensor& timg) {
  const Image img = to_image(timg, "laplacian_variance");
  if (img.h < 3 || img.w < 3) return 0.0;
  // Interior response only: the zero-padded border rows would make LV
  // sensitive to constant offsets, which the metric must ignore.
  double sum = 0.0, sum2 = 0.0;
  const std::size_t count = (img.h - 2) * (img.w - 2);
  for (std::size_t y = 1; y + 1 < img.h; ++y) {
    for (std::size_t x = 1; x + 1 < img.w; ++x) {
      const double r = img.at(y - 1, x) + img.at(y + 1, x) + img.at(y, x - 1) +
                       img.at(y, x + 1) - 4.0 * img.at(y, x);
      sum += r;
      sum2 += r * r;
    }
  }
  const double mean = sum / double(count);
  return sum2 / double(count) - mean * mean;
}

double depth_smoothness(const Tensor& tdepth, const Tensor* tmask) {
  const Image depth = to_image(tdepth, "depth_smoothness");
  Image mask;
  if (tmask) {
    mask = to_image(*tmask, "depth_smoothness mask");
    check_same_shape(depth, mask, "depth_smoothness");
  }
  if (depth.h < 3 || depth.w < 3) {
    fail(ErrorCode::shape, "depth_smoothness requires at least a 3x3 image");
  }
  Image gx, gy;
  filter3x3(depth, kSobelX, gx);
  filter3x3(depth, kSobelY, gy);
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t y = 1; y + 1 < depth.h; ++y) {
    for (std::size_t x = 1; x + 1 < depth.w; ++x) {
      if (tmask && mask.at(y, x) == 0.0) continue;
      acc += gx.at(y, x) * gx.at(y, x) + gy.at(y, x) * gy.at(y, x);
      ++count;
    }
  }
  if (count == 0) {
    fail(ErrorCode::argument, "depth_smoothness: mask selects no pixels");
  }
  return acc / double(count);
}

double charbonnier(const Tensor& tpred, const Tensor& tgt, double eps) {
  if (!(eps > 0.0)) fail(ErrorCode::argument, "charbonnier eps must be > 0");
  const Image pred = to_image(tpred, "charbonnier");
  const Image gt = to_image(tgt, "charbonnier");
  check_same_shape(pred, gt, "charbonnier");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.v.size(); ++i) {
    const double d = pred.v[i] - gt.v[i];
    acc += std::sqrt(d * d + eps * eps);
  }
  return acc / double(pred.v.size());
}

double tv_loss(const Tensor& timg) {
  const Image img = to_image(timg, "tv_loss");
  double acc = 0.0;
  for (std::size_t y = 0; y < img.h; ++y) {
    for (std::size_t x = 0; x + 1 < img.w; ++x) {
      acc += std::fabs(img.at(y, x + 1) - img.at(y, x));
    }
  }
  for (std::size_t y = 0; y + 1 < img.h; ++y) {
    for (std::size_t x = 0; x < img.w; ++x) {
      acc += std::fabs(img.at(y + 1, x) - img.at(y, x));
    }
  }
  return acc / double(img.v.size());
}

double sobel_edge_loss(const Tensor& tpred, const Tensor& tgt) {
  const Image pred = to_image(tpred, "sobel_edge_loss");
  const Image gt = to_image(tgt, "sobel_edge_loss");
  check_same_shape(pred, gt, "sobel_edge_loss");
  Image px, py, gx, gy;
  filter3x3(pred, kSobelX, px);
  filter3x3(pred, kSobelY, py);
  filter3x3(gt, kSobelX, gx);
  filter3x3(gt, kSobelY, gy);
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.v.size(); ++i) {
    const double mp = std::sqrt(px.v[i] * px.v[i] + py.v[i] * py.v[i]);
    const double mg = std::sqrt(gx.v[i] * gx.v[i] + gy.v[i] * gy.v[i]);
    acc += std::fabs(mp - mg);
  }
  return acc / double(pred.v.size());
}

double sobel_grad_loss(const Tensor& tpred, const Tensor& tgt) {
  const Image pred = to_image(tpred, "sobel_grad_loss");
  const Image gt = to_image(tgt, "sobel_grad_loss");
  check_same_shape(pred, gt, "sobel_grad_loss");
  Image px, py, gx, gy;
  filter3x3(pred, kSobelX, px);
  filter3x3(pred, kSobelY, py);
  filter3x3(gt, kSobelX, gx);
  filter3x3(gt, kSobelY, gy);
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.v.size(); ++i) {
    acc += 0.5 * (std::fabs(px.v[i] - gx.v[i]) + std::fabs(py.v[i] - gy.v[i]));
  }
  return acc / double(pred.v.size());
}

double depth_loss(const Tensor& pred, const Tensor& gt, const LossWeights& w,
                  double data_range) {
  return charbonnier(pred, gt, w.eps) +
         w.w_ssim * (1.0 - ssim(pred, gt, data_range)) +
         w.w_edge * sobel_edge_loss(pred, gt) + w.w_tv * tv_loss(pred);
}

double intensity_loss(const Tensor& pred, const Tensor& gt,
                      const LossWeights& w, double data_range) {
  return charbonnier(pred, gt, w.eps) +
         w.w_ms_ssim * (1.0 - ms_ssim(pred, gt, data_range)) +
         w.w_grad * sobel_grad_loss(pred, gt);
}

double total_loss(const Tensor& d_pred, const Tensor& d_gt,
                  const Tensor& i_pred, const Tensor& i_gt,
                  const LossWeights& w, double data_range) {
  return w.w_d * depth_loss(d_pred, d_gt, w, data_range) +
         w.w_i * intensity_loss(i_pred, i_gt, w, data_range);
}

MetricReport full_report(const Tensor& pred, const Tensor& gt,
                         double data_range, bool depth_mode) {
  MetricReport r;
  r.data_range = data_range;
  r.psnr_db = psnr(pred, gt, data_range);
  r.rmse = rmse(pred, gt);
  r.gmsd = gmsd(pred, gt);
  r.ngmsd = ngmsd(pred, gt);
  r.lv = laplacian_variance(pred);
  const Shape& s = pred.shape();
  if (s.h >= 11 && s.w >= 11) {
    r.ssim = ssim(pred, gt, data_range);
    r.ms_ssim = ms_ssim(pred, gt, data_range);
  }
  if (depth_mode) {
    r.delta_125 = delta_threshold(pred, gt);
    if (s.h >= 3 && s.w >= 3) r.depth_smoothness = depth_smoothness(pred);
  }
  return r;
}

std::string MetricReport::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  auto put = [&j](const char* name, const std::optional<double>& v) {
    if (v) j[name] = *v;
  };
  put("psnr_db", psnr_db);
  put("ssim", ssim);
  put("ms_ssim", ms_ssim);
  put("gmsd", gmsd);
  put("ngmsd", ngmsd);
  put("rmse", rmse);
  put("delta_125", delta_125);
  put("lv", lv);
  put("depth_smoothness", depth_smoothness);
  j["data_range"] = data_range;
  return j.dump();
}

}  // namespace litesr
