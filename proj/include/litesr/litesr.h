/*
 * litesr: edge super-resolution inference and evaluation toolkit for 32x48
 * SPAD depth/intensity sensors.
 *
 * C API over the C++ core. All objects are opaque handles created and
 * destroyed through these functions; every fallible call returns a
 * litesr_status, and litesr_last_error() carries a thread-local message for
 * the most recent failure on the calling thread.
 *
 * Tensors are rank-4 (n, c, h, w) row-major FP32 buffers. LR sensor frames
 * are (1, 1, 32, 48); depth is in meters, intensity in photon counts.
 */

#ifndef LITESR_H
#define LITESR_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define LITESR_API __declspec(dllexport)
#else
#define LITESR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum litesr_status {
  LITESR_OK = 0,
  LITESR_ERR_ARGUMENT = 1,
  LITESR_ERR_SHAPE = 2,
  LITESR_ERR_DTYPE = 3,
  LITESR_ERR_VALIDATION = 4,
  LITESR_ERR_STATE = 5,
  LITESR_ERR_IO = 6,
  LITESR_ERR_PARSE = 7,
  LITESR_ERR_CALIBRATION = 8
} litesr_status;

LITESR_API const char* litesr_version(void);
LITESR_API const char* litesr_last_error(void);

/* Frees strings returned through char** out-parameters. */
LITESR_API void litesr_string_free(char* s);
LITESR_API void litesr_bytes_free(uint8_t* bytes);

/* ---- tensors ------------------------------------------------------------ */

typedef struct litesr_tensor litesr_tensor;

/* data may be NULL for a zero-filled tensor; length must be n*c*h*w. */
LITESR_API litesr_status litesr_tensor_create(uint32_t n, uint32_t c,
                                              uint32_t h, uint32_t w,
                                              const float* data,
                                              litesr_tensor** out);
LITESR_API void litesr_tensor_free(litesr_tensor* t);
LITESR_API litesr_status litesr_tensor_shape(const litesr_tensor* t,
                                             uint32_t shape_out[4]);
LITESR_API litesr_status litesr_tensor_read(const litesr_tensor* t, float* out,
                                            size_t capacity);

/* ---- PGM images ---------------------------------------------------------- */

LITESR_API litesr_status litesr_pgm_read(const char* path, litesr_tensor** out,
                                         uint32_t* maxval_out);
LITESR_API litesr_status litesr_pgm_write(const char* path,
                                          const litesr_tensor* img,
                                          uint32_t maxval);

/* ---- model configuration, weights, inference ----------------------------- */

typedef struct litesr_model_config {
  uint32_t ch_e, ch_r, ch_dh, ch_ih;
  uint32_t n_earb, n_rlfb;
  uint32_t upscale; /* 4 (256x256) or 8 (512x512) */
  int32_t ablate_earb, ablate_rlfb;
} litesr_model_config;

LITESR_API litesr_model_config litesr_default_model_config(void);

typedef struct litesr_weights litesr_weights;
typedef struct litesr_model litesr_model;

/* Deterministic random-init container for tests and demos. */
LITESR_API litesr_status litesr_weights_fixture(
    const litesr_model_config* config, uint64_t seed, litesr_weights** out);
LITESR_API litesr_status litesr_weights_load(const char* path,
                                             litesr_weights** out);
LITESR_API litesr_status litesr_weights_save(const litesr_weights* w,
                                             const char* path);
LITESR_API litesr_status litesr_weights_config(const litesr_weights* w,
                                               litesr_model_config* out);
LITESR_API int32_t litesr_weights_is_int8(const litesr_weights* w);
LITESR_API int32_t litesr_weights_is_calibrated(const litesr_weights* w);
LITESR_API void litesr_weights_free(litesr_weights* w);

LITESR_API litesr_status litesr_model_build(const litesr_weights* w,
                                            litesr_model** out);
LITESR_API void litesr_model_free(litesr_model* m);

typedef struct litesr_param_counts {
  uint64_t params;
  uint64_t bytes;
  uint64_t macs;
} litesr_param_counts;

LITESR_API litesr_status litesr_model_count_params(const litesr_model* m,
                                                   litesr_param_counts* out);
LITESR_API litesr_status litesr_model_layer_count(const litesr_model* m,
                                                  size_t* out);

typedef struct litesr_sr_result litesr_sr_result;

typedef enum litesr_result_field {
  LITESR_RESULT_DEPTH_HR = 0,
  LITESR_RESULT_INTENSITY_HR = 1,
  LITESR_RESULT_BASE_DEPTH = 2,
  LITESR_RESULT_BASE_INTENSITY = 3,
  LITESR_RESULT_RESIDUAL_DEPTH = 4,
  LITESR_RESULT_RESIDUAL_INTENSITY = 5
} litesr_result_field;

/* Inputs are normalized LR frames; INT8 models must be calibrated. */
LITESR_API litesr_status litesr_model_forward(const litesr_model* m,
                                              const litesr_tensor* depth_lr,
                                              const litesr_tensor* intensity_lr,
                                              litesr_sr_result** out);
LITESR_API litesr_status litesr_result_get(const litesr_sr_result* r,
                                           litesr_result_field field,
                                           litesr_tensor** out);
LITESR_API void litesr_result_free(litesr_sr_result* r);

/* ---- INT8 quantization ---------------------------------------------------- */

typedef struct litesr_calibration_set litesr_calibration_set;

LITESR_API litesr_status litesr_calibration_set_create(
    litesr_calibration_set** out);
LITESR_API litesr_status litesr_calibration_set_add(
    litesr_calibration_set* s, const litesr_tensor* depth_lr,
    const litesr_tensor* intensity_lr);
LITESR_API size_t litesr_calibration_set_size(const litesr_calibration_set* s);
LITESR_API void litesr_calibration_set_free(litesr_calibration_set* s);

/*
 * Per-tensor symmetric INT8 weights. With a calibration set (>= 8 frames)
 * the result carries activation ranges and is ready for inference; with
 * calib == NULL the container is uncalibrated and forward rejects it.
 */
LITESR_API litesr_status litesr_quantize(const litesr_weights* fp32,
                                         const litesr_calibration_set* calib,
                                         litesr_weights** out);

/* ---- metrics and losses --------------------------------------------------- */

typedef struct litesr_loss_weights {
  double w_d, w_i, w_ssim, w_edge, w_tv, w_ms_ssim, w_grad, eps;
} litesr_loss_weights;

LITESR_API litesr_loss_weights litesr_default_loss_weights(void);

LITESR_API litesr_status litesr_psnr(const litesr_tensor* a,
                                     const litesr_tensor* b, double data_range,
                                     double* out);
LITESR_API litesr_status litesr_ssim(const litesr_tensor* a,
                                     const litesr_tensor* b, double data_range,
                                     double* out);
LITESR_API litesr_status litesr_ms_ssim(const litesr_tensor* a,
                                        const litesr_tensor* b,
                                        double data_range, int32_t max_scales,
                                        double* out);
LITESR_API litesr_status litesr_gmsd(const litesr_tensor* a,
                                     const litesr_tensor* b, double* out);
LITESR_API litesr_status litesr_ngmsd(const litesr_tensor* a,
                                      const litesr_tensor* b, double* out);
LITESR_API litesr_status litesr_rmse(const litesr_tensor* a,
                                     const litesr_tensor* b, double* out);
LITESR_API litesr_status litesr_delta_threshold(const litesr_tensor* pred,
                                                const litesr_tensor* gt,
                                                double t, double* out,
                                                size_t* excluded_out);
LITESR_API litesr_status litesr_laplacian_variance(const litesr_tensor* img,
                                                   double* out);
LITESR_API litesr_status litesr_depth_smoothness(const litesr_tensor* depth,
                                                 const litesr_tensor* mask,
                                                 double* out);
LITESR_API litesr_status litesr_charbonnier(const litesr_tensor* pred,
                                            const litesr_tensor* gt,
                                            double eps, double* out);
LITESR_API litesr_status litesr_tv_loss(const litesr_tensor* img, double* out);
LITESR_API litesr_status litesr_sobel_edge_loss(const litesr_tensor* pred,
                                                const litesr_tensor* gt,
                                                double* out);
LITESR_API litesr_status litesr_sobel_grad_loss(const litesr_tensor* pred,
                                                const litesr_tensor* gt,
                                                double* out);
LITESR_API litesr_status litesr_depth_loss(const litesr_tensor* pred,
                                           const litesr_tensor* gt,
                                           const litesr_loss_weights* w,
                                           double data_range, double* out);
LITESR_API litesr_status litesr_intensity_loss(const litesr_tensor* pred,
                                               const litesr_tensor* gt,
                                               const litesr_loss_weights* w,
                                               double data_range, double* out);
LITESR_API litesr_status litesr_total_loss(
    const litesr_tensor* d_pred, const litesr_tensor* d_gt,
    const litesr_tensor* i_pred, const litesr_tensor* i_gt,
    const litesr_loss_weights* w, double data_range, double* out);

/* Flat JSON report (fields psnr_db, ssim, ms_ssim, gmsd, ngmsd, rmse,
 * delta_125, lv, depth_smoothness, data_range). */
LITESR_API litesr_status litesr_metric_report_json(const litesr_tensor* pred,
                                                   const litesr_tensor* gt,
                                                   double data_range,
                                                   int32_t depth_mode,
                                                   char** json_out);

/* ---- sensor calibration ---------------------------------------------------- */

typedef struct litesr_calibration_bundle litesr_calibration_bundle;

/*
 * Builds a bundle from flat-field captures: hot-pixel mask from the temporal
 * mean of the intensity frames thresholded at `threshold` photon counts,
 * plus response non-uniformity gains (depth gains stay identity unless depth
 * flats are given).
 */
LITESR_API litesr_status litesr_bundle_create(
    const litesr_tensor* const* flat_intensity, size_t intensity_count,
    const litesr_tensor* const* flat_depth, size_t depth_count,
    double threshold, litesr_calibration_bundle** out);
LITESR_API litesr_status litesr_bundle_save(const litesr_calibration_bundle* b,
                                            const char* path);
LITESR_API litesr_status litesr_bundle_load(const char* path,
                                            litesr_calibration_bundle** out);
LITESR_API void litesr_bundle_free(litesr_calibration_bundle* b);
LITESR_API size_t litesr_bundle_hot_count(const litesr_calibration_bundle* b);
LITESR_API int32_t litesr_bundle_all_flagged(const litesr_calibration_bundle* b);
LITESR_API int32_t litesr_bundle_gains_out_of_band(
    const litesr_calibration_bundle* b);

/* use_mean != 0 replaces hot pixels by the neighbourhood mean instead of the
 * default median. */
LITESR_API litesr_status litesr_compensate_hot_pixels(
    const litesr_calibration_bundle* b, const litesr_tensor* frame,
    int32_t use_mean, litesr_tensor** out);

/* channel: 0 depth, 1 intensity; direction: 0 correct, 1 corrupt. */
LITESR_API litesr_status litesr_apply_nonuniformity(
    const litesr_calibration_bundle* b, const litesr_tensor* frame,
    int32_t channel, int32_t direction, litesr_tensor** out);

/* ---- synthetic data generation --------------------------------------------- */

typedef struct litesr_dataset_stats {
  double mean_depth, std_depth, mean_intensity, std_intensity;
} litesr_dataset_stats;

typedef struct litesr_pair_sample litesr_pair_sample;

typedef enum litesr_pair_field {
  LITESR_PAIR_LR_DEPTH = 0,
  LITESR_PAIR_LR_INTENSITY = 1,
  LITESR_PAIR_HR_DEPTH = 2,
  LITESR_PAIR_HR_INTENSITY = 3
} litesr_pair_field;

/* target is 256 or 512; a non-NULL bundle corrupts the LR pair with its
 * non-uniformity gains (divide), which litesr_apply_nonuniformity inverts. */
LITESR_API litesr_status litesr_make_pair(
    const litesr_tensor* hr_depth, const litesr_tensor* hr_intensity,
    uint32_t target, const litesr_calibration_bundle* corrupt,
    const char* scene_id, litesr_pair_sample** out);
/* mode: 0 none, 1 hflip, 2 vflip, 3 hvflip. */
LITESR_API litesr_status litesr_pair_augment(const litesr_pair_sample* s,
                                             int32_t mode,
                                             litesr_pair_sample** out);
LITESR_API litesr_status litesr_pair_get(const litesr_pair_sample* s,
                                         litesr_pair_field field,
                                         litesr_tensor** out);
LITESR_API litesr_status litesr_pair_write_dir(const litesr_pair_sample* s,
                                               const char* dir,
                                               uint32_t intensity_maxval);
LITESR_API litesr_status litesr_pair_load_dir(const char* dir,
                                              const char* scene_id,
                                              litesr_pair_sample** out);
LITESR_API void litesr_pair_free(litesr_pair_sample* s);

LITESR_API litesr_status litesr_compute_stats(
    const litesr_pair_sample* const* samples, size_t count,
    litesr_dataset_stats* out);
LITESR_API litesr_status litesr_normalize(const litesr_tensor* t, double mean,
                                          double stddev, litesr_tensor** out);
LITESR_API litesr_status litesr_denormalize(const litesr_tensor* t,
                                            double mean, double stddev,
                                            litesr_tensor** out);

/* Deterministic shuffled split; train_out/val_out must hold `count` items.
 * floor(ratio * count) indices go to train. */
LITESR_API litesr_status litesr_split_indices(size_t count, double ratio,
                                              uint64_t seed, size_t* train_out,
                                              size_t* train_count,
                                              size_t* val_out,
                                              size_t* val_count);

/* ---- sensor frame protocol -------------------------------------------------- */

/* frame_type: 1 depth, 2 intensity, 3 combined. */
LITESR_API litesr_status litesr_packet_encode(
    const litesr_tensor* depth_m, const litesr_tensor* intensity,
    uint32_t sequence, uint64_t timestamp_us, uint8_t frame_type,
    uint8_t** bytes_out, size_t* len_out, int32_t* clamped_out);

typedef struct litesr_stream_diagnostics {
  uint64_t crc_errors, resyncs, seq_gaps;
} litesr_stream_diagnostics;

typedef struct litesr_parser litesr_parser;

LITESR_API litesr_parser* litesr_parser_new(void);
LITESR_API void litesr_parser_free(litesr_parser* p);
LITESR_API litesr_status litesr_parser_push(litesr_parser* p,
                                            const uint8_t* bytes, size_t len);
/* Returns 1 and fills the outputs when a frame is ready, 0 otherwise. */
LITESR_API int32_t litesr_parser_poll(litesr_parser* p,
                                      litesr_tensor** depth_out,
                                      litesr_tensor** intensity_out,
                                      uint32_t* sequence_out,
                                      uint64_t* timestamp_out);
LITESR_API void litesr_parser_diagnostics(const litesr_parser* p,
                                          litesr_stream_diagnostics* out);

typedef struct litesr_pingpong litesr_pingpong;

LITESR_API litesr_pingpong* litesr_pingpong_new(void);
LITESR_API void litesr_pingpong_free(litesr_pingpong* b);
LITESR_API litesr_status litesr_pingpong_write(litesr_pingpong* b,
                                               const litesr_tensor* depth,
                                               const litesr_tensor* intensity,
                                               uint32_t sequence,
                                               uint64_t timestamp_us);
/* Returns 1 and fills the outputs when a frame was ready, 0 otherwise. */
LITESR_API int32_t litesr_pingpong_read(litesr_pingpong* b,
                                        litesr_tensor** depth_out,
                                        litesr_tensor** intensity_out,
                                        uint32_t* sequence_out,
                                        uint64_t* timestamp_out);
LITESR_API uint64_t litesr_pingpong_dropped(const litesr_pingpong* b);

typedef struct litesr_stream_config {
  uint32_t period_ms;       /* 100 => nominal 10 Hz */
  uint64_t iterations;      /* sensor integration setting, recorded only */
  double consumer_delay_ms; /* simulated per-frame consumer cost */
  int32_t wall_clock;       /* 0: deterministic virtual clock */
  litesr_dataset_stats stats;
} litesr_stream_config;

LITESR_API litesr_stream_config litesr_default_stream_config(void);

/* Streams from a datagen sample directory (source_dir != NULL) or from a
 * seeded synthetic generator. Returns the run statistics as JSON. */
LITESR_API litesr_status litesr_simulate(const litesr_stream_config* config,
                                         const char* source_dir,
                                         uint64_t synthetic_count,
                                         uint64_t synthetic_seed,
                                         const litesr_model* model,
                                         char** stats_json_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* LITESR_H */
