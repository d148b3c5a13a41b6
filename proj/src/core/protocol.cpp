#include "core/protocol.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <memory>
#include <thread>

#include <json.hpp>

#include "core/crc32.hpp"
#include "core/pgm.hpp"
#include "core/rng.hpp"

namespace litesr {

namespace {

void put_u16(std::vector<std::uint8_t>& b, std::uint16_t v) {
  b.push_back(std::uint8_t(v & 0xFF));
  b.push_back(std::uint8_t(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(std::uint8_t((v >> (8 * i)) & 0xFF));
}

void put_u64(std::vector<std::uint8_t>& b, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) b.push_back(std::uint8_t((v >> (8 * i)) & 0xFF));
}

std::uint16_t rd_u16(const std::uint8_t* p) {
  return std::uint16_t(p[0]) | std::uint16_t(p[1]) << 8;
}

std::uint32_t rd_u32(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t(p[i]) << (8 * i);
  return v;
}

std::uint64_t rd_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(p[i]) << (8 * i);
  return v;
}

std::size_t expected_payload(std::uint8_t type) {
  switch (type) {
    case std::uint8_t(FrameType::depth):
    case std::uint8_t(FrameType::intensity):
      return kFramePixels * 2;
    case std::uint8_t(FrameType::combined):
      return kCombinedPayloadBytes;
    default:
      return 0;
  }
}

void check_frame_32x48(const Tensor& t, const char* what) {
  const Shape& s = t.shape();
  if (t.dtype() != DType::f32 || s.n != 1 || s.c != 1 || s.h != kLrHeight ||
      s.w != kLrWidth) {
    fail(ErrorCode::shape,
         std::string(what) + " frame must be (1,1,32,48) FP32, got " + s.str());
  }
}

void append_depth_mm(std::vector<std::uint8_t>& b, const Tensor& depth) {
  for (float v : depth.f32()) {
    const double mm = double(v) * kDepthMmPerMeter;
    const long q = std::lround(mm);
    if (q < 0 || q > 65535) {
      fail(ErrorCode::argument,
           "depth value " + std::to_string(v) +
               " m is outside the u16 millimeter wire range");
    }
    put_u16(b, std::uint16_t(q));
  }
}

bool append_counts(std::vector<std::uint8_t>& b, const Tensor& intensity) {
  bool clamped = false;
  for (float v : intensity.f32()) {
    long q = std::lround(double(v));
    if (q < 0 || q > 65535) {
      clamped = true;
      q = std::clamp<long>(q, 0, 65535);
    }
    put_u16(b, std::uint16_t(q));
  }
  return clamped;
}

Tensor depth_from_mm(const std::uint8_t* p) {
  std::vector<float> v(kFramePixels);
  for (std::size_t i = 0; i < kFramePixels; ++i) {
    v[i] = float(rd_u16(p + 2 * i)) / float(kDepthMmPerMeter);
  }
  return Tensor::from_data({1, 1, kLrHeight, kLrWidth}, std::move(v));
}

Tensor counts_from_u16(const std::uint8_t* p) {
  std::vector<float> v(kFramePixels);
  for (std::size_t i = 0; i < kFramePixels; ++i) {
    v[i] = float(rd_u16(p + 2 * i));
  }
  return Tensor::from_data({1, 1, kLrHeight, kLrWidth}, std::move(v));
}

}  // namespace

EncodedPacket encode_packet(const FramePair& pair, FrameType type) {
  check_frame_32x48(pair.depth, "depth");
  check_frame_32x48(pair.intensity, "intensity");

  EncodedPacket out;
  std::vector<std::uint8_t>& b = out.bytes;
  b.reserve(kCombinedPacketBytes);
  b.push_back(kPacketMagic0);
  b.push_back(kPacketMagic1);
  b.push_back(kPacketVersion);
  b.push_back(std::uint8_t(type));
  put_u32(b, pair.sequence);
  put_u64(b, pair.timestamp_us);
  put_u16(b, std::uint16_t(expected_payload(std::uint8_t(type))));
  switch (type) {
    case FrameType::depth:
      append_depth_mm(b, pair.depth);
      break;
    case FrameType::intensity:
      out.clamped = append_counts(b, pair.intensity);
      break;
    case FrameType::combined:
      append_depth_mm(b, pair.depth);
      out.clamped = append_counts(b, pair.intensity);
      break;
  }
  put_u32(b, crc32(b.data(), b.size()));
  return out;
}

void StreamParser::note_emitted(std::uint32_t seq) {
  if (saw_seq_) {
    if (seq > last_seq_ + 1) diag_.seq_gaps += seq - last_seq_ - 1;
    if (seq > last_seq_) last_seq_ = seq;
  } else {
    saw_seq_ = true;
    last_seq_ = seq;
  }
}

void StreamParser::emit(FrameType type, std::uint32_t seq, std::uint64_t ts,
                        const std::uint8_t* payload) {
  if (type == FrameType::combined) {
    FramePair pair;
    pair.depth = depth_from_mm(payload);
    pair.intensity = counts_from_u16(payload + kFramePixels * 2);
    pair.sequence = seq;
    pair.timestamp_us = ts;
    note_emitted(seq);
    ready_.push_back(std::move(pair));
    return;
  }
  Half& half = pending_[seq];
  half.timestamp_us = ts;
  if (type == FrameType::depth) {
    half.depth = depth_from_mm(payload);
  } else {
    half.intensity = counts_from_u16(payload);
  }
  if (half.depth && half.intensity) {
    FramePair pair;
    pair.depth = std::move(*half.depth);
    pair.intensity = std::move(*half.intensity);
    pair.sequence = seq;
    pair.timestamp_us = half.timestamp_us;
    pending_.erase(seq);
    note_emitted(seq);
    ready_.push_back(std::move(pair));
  } else if (pending_.size() > 16) {
    pending_.erase(pending_.begin());  // shed the oldest unmatched half
  }
}

void StreamParser::scan() {
  for (;;) {
    while (head_ + 1 < buf_.size() &&
           !(buf_[head_] == kPacketMagic0 && buf_[head_ + 1] == kPacketMagic1)) {
      ++head_;
      ++discard_run_;
    }
    if (head_ + 1 >= buf_.size()) return;  // keep a possible magic prefix

    const std::size_t avail = buf_.size() - head_;
    if (avail < kPacketHeaderBytes) return;
    const std::uint8_t* p = buf_.data() + head_;
    const std::uint8_t version = p[2];
    const std::uint8_t type = p[3];
    const std::uint16_t plen = rd_u16(p + 16);
    const std::size_t expected = expected_payload(type);
    if (version != kPacketVersion || expected == 0 || plen != expected) {
      head_ += 2;  // not a packet; the next magic cannot overlap these bytes
      discard_run_ += 2;
      continue;
    }
    const std::size_t total = kPacketHeaderBytes + plen + 4;
    if (avail < total) return;
    const std::uint32_t stored = rd_u32(p + kPacketHeaderBytes + plen);
    if (crc32(p, kPacketHeaderBytes + plen) != stored) {
      ++diag_.crc_errors;
      head_ += 2;
      discard_run_ += 2;
      continue;
    }
    if (discard_run_ > 0) {
      ++diag_.resyncs;
      discard_run_ = 0;
    }
    emit(FrameType(type), rd_u32(p + 4), rd_u64(p + 8),
         p + kPacketHeaderBytes);
    head_ += total;
  }
}

void StreamParser::push(std::span<const std::uint8_t> bytes) {
  buf_.insert(buf_.end(), bytes.begin(), bytes.end());
  scan();
  if (head_ > 0) {
    buf_.erase(buf_.begin(), buf_.begin() + std::ptrdiff_t(head_));
    head_ = 0;
  }
}

std::optional<FramePair> StreamParser::poll() {
  if (ready_.empty()) return std::nullopt;
  FramePair out = std::move(ready_.front());
  ready_.pop_front();
  return out;
}

ParsedStream parse_stream(std::span<const std::uint8_t> bytes) {
  StreamParser parser;
  parser.push(bytes);
  ParsedStream out;
  while (auto f = parser.poll()) out.frames.push_back(std::move(*f));
  out.diagnostics = parser.diagnostics();
  return out;
}

// --- simulation ---------------------------------------------------------------

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

struct ConsumerPipeline {
  StreamParser parser;
  const StreamConfig* config = nullptr;
  const Model* model = nullptr;
  FrameSink* sink = nullptr;
  StageLatency totals;
  std::uint64_t consumed = 0;
  std::uint64_t serialized_bytes = 0;
  bool sink_failed = false;

  // Returns false when the sink requested shutdown.
  bool process_packet(const std::vector<std::uint8_t>& packet) {
    const auto t0 = Clock::now();
    parser.push(packet);
    std::optional<FramePair> frame = parser.poll();
    totals.parse_ms += ms_since(t0);
    if (!frame) return true;  // corrupt packet surfaces in diagnostics

    const auto t1 = Clock::now();
    const DatasetStats& st = config->stats;
    Tensor depth_n = normalize(frame->depth, st.mean_depth, st.std_depth);
    Tensor intensity_n =
        normalize(frame->intensity, st.mean_intensity, st.std_intensity);
    totals.preprocess_ms += ms_since(t1);

    std::optional<SRResult> result;
    if (model) {
      const auto t2 = Clock::now();
      result = model->forward(depth_n, intensity_n);
      totals.inference_ms += ms_since(t2);
    }

    const auto t3 = Clock::now();
    if (result) {
      Tensor depth_out =
          denormalize(result->depth_hr, st.mean_depth, st.std_depth);
      Tensor intensity_out = denormalize(result->intensity_hr,
                                         st.mean_intensity, st.std_intensity);
      serialized_bytes += pgm_to_bytes(depth_out, 65535).size();
      serialized_bytes += pgm_to_bytes(intensity_out, 65535).size();
    } else {
      serialized_bytes += pgm_to_bytes(frame->depth, 65535).size();
      serialized_bytes += pgm_to_bytes(frame->intensity, 65535).size();
    }
    totals.serialize_ms += ms_since(t3);

    ++consumed;
    if (sink && *sink) {
      if (!(*sink)(*frame, result ? &*result : nullptr)) {
        sink_failed = true;
        return false;
      }
    }
    return true;
  }
};

StreamStats finalize(const StreamConfig& config, ConsumerPipeline& pipe,
                     std::uint64_t produced, std::uint64_t dropped,
                     std::uint64_t leftover, double elapsed_ms,
                     bool sink_failed) {
  StreamStats s;
  s.produced = produced;
  s.consumed = pipe.consumed;
  s.dropped = dropped;
  s.leftover = leftover;
  s.diagnostics = pipe.parser.diagnostics();
  s.elapsed_ms = elapsed_ms;
  s.effective_fps =
      elapsed_ms > 0.0 ? double(pipe.consumed) * 1000.0 / elapsed_ms : 0.0;
  if (pipe.consumed > 0) {
    const double inv = 1.0 / double(pipe.consumed);
    s.mean_latency.parse_ms = pipe.totals.parse_ms * inv;
    s.mean_latency.preprocess_ms = pipe.totals.preprocess_ms * inv;
    s.mean_latency.inference_ms = pipe.totals.inference_ms * inv;
    s.mean_latency.serialize_ms = pipe.totals.serialize_ms * inv;
  }
  s.sink_failed = sink_failed;
  (void)config;
  return s;
}

StreamStats simulate_virtual(const StreamConfig& config, FrameSource& source,
                             const Model* model, FrameSink& sink) {
  PingPong<std::vector<std::uint8_t>> channel;
  ConsumerPipeline pipe;
  pipe.config = &config;
  pipe.model = model;
  pipe.sink = &sink;

  const double period = double(config.period_ms);
  double t_prod = 0.0, t_cons = 0.0;
  double prod_end = 0.0, last_consume_end = 0.0;
  bool prod_done = false;
  bool stop = false;
  std::uint64_t produced = 0;

  while (!stop) {
    if (!prod_done && t_prod <= t_cons) {
      std::optional<FramePair> frame = source();
      if (!frame) {
        prod_done = true;
      } else {
        frame->sequence = std::uint32_t(produced);
        frame->timestamp_us = std::uint64_t(t_prod * 1000.0);
        channel.write(encode_packet(*frame).bytes);
        ++produced;
        prod_end = t_prod + period;
        t_prod += period;
      }
      continue;
    }
    std::optional<std::vector<std::uint8_t>> packet = channel.read();
    if (!packet) {
      if (prod_done) break;
      t_cons = std::max(t_cons, t_prod);  // idle until the next production
      continue;
    }
    if (!pipe.process_packet(*packet)) stop = true;
    t_cons += config.consumer_delay_ms;
    last_consume_end = t_cons;
  }

  const double elapsed = std::max(prod_end, last_consume_end);
  return finalize(config, pipe, produced, channel.dropped(),
                  channel.ready_count(), elapsed, pipe.sink_failed);
}

StreamStats simulate_wall(const StreamConfig& config, FrameSource& source,
                          const Model* model, FrameSink& sink) {
  PingPong<std::vector<std::uint8_t>> channel;
  ConsumerPipeline pipe;
  pipe.config = &config;
  pipe.model = model;
  pipe.sink = &sink;

  std::atomic<bool> prod_done{false};
  std::atomic<bool> abort{false};
  std::uint64_t produced = 0;
  const auto start = Clock::now();

  std::thread producer([&] {
    std::uint64_t k = 0;
    for (;;) {
      if (abort.load()) break;
      std::this_thread::sleep_until(
          start + std::chrono::milliseconds(k * config.period_ms));
      std::optional<FramePair> frame = source();
      if (!frame) break;
      frame->sequence = std::uint32_t(k);
      frame->timestamp_us =
          std::uint64_t(ms_since(start) * 1000.0);
      channel.write(encode_packet(*frame).bytes);
      ++produced;
      ++k;
    }
    prod_done.store(true);
  });

  for (;;) {
    std::optional<std::vector<std::uint8_t>> packet = channel.read();
    if (!packet) {
      if (prod_done.load()) break;
      std::this_thread::sleep_for(std::chrono::milliseconds(1));
      continue;
    }
    if (!pipe.process_packet(*packet)) {
      abort.store(true);
      break;
    }
    if (config.consumer_delay_ms > 0.0) {
      std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(
          config.consumer_delay_ms));
    }
  }
  producer.join();

  return finalize(config, pipe, produced, channel.dropped(),
                  channel.ready_count(), ms_since(start), pipe.sink_failed);
}

}  // namespace

StreamStats simulate_stream(const StreamConfig& config, FrameSource source,
                            const Model* model, FrameSink sink) {
  if (config.period_ms < 1) {
    fail(ErrorCode::argument, "stream period must be at least 1 ms");
  }
  config.stats.validate();
  if (!source) fail(ErrorCode::argument, "simulate_stream needs a source");
  return config.wall_clock ? simulate_wall(config, source, model, sink)
                           : simulate_virtual(config, source, model, sink);
}

std::string StreamStats::to_json() const {
  nlohmann::json j;
  j["produced"] = produced;
  j["consumed"] = consumed;
  j["dropped"] = dropped;
  j["leftover"] = leftover;
  j["crc_errors"] = diagnostics.crc_errors;
  j["resyncs"] = diagnostics.resyncs;
  j["seq_gaps"] = diagnostics.seq_gaps;
  j["elapsed_ms"] = elapsed_ms;
  j["effective_fps"] = effective_fps;
  j["latency_ms"] = {{"parse", mean_latency.parse_ms},
                     {"preprocess", mean_latency.preprocess_ms},
                     {"inference", mean_latency.inference_ms},
                     {"serialize", mean_latency.serialize_ms}};
  j["sink_failed"] = sink_failed;
  return j.dump(2);
}

FrameSource dir_frame_source(const std::string& sample_root) {
  auto dirs = std::make_shared<std::vector<std::string>>(
      list_scene_dirs(sample_root));
  auto next = std::make_shared<std::size_t>(0);
  return [dirs, next]() -> std::optional<FramePair> {
    if (*next >= dirs->size()) return std::nullopt;
    const std::string& dir = (*dirs)[(*next)++];
    PairSample s = load_sample_dir(dir, dir);
    FramePair f;
    f.depth = std::move(s.lr_depth);
    f.intensity = std::move(s.lr_intensity);
    return f;
  };
}

FrameSource synthetic_frame_source(std::uint64_t count, std::uint64_t seed) {
  auto rng = std::make_shared<std::mt19937>(std::uint32_t(seed));
  auto remaining = std::make_shared<std::uint64_t>(count);
  return [rng, remaining]() -> std::optional<FramePair> {
    if (*remaining == 0) return std::nullopt;
    --*remaining;
    // Smooth scenes: coarse random grids upsampled to the sensor footprint.
    auto field = [&](float lo, float hi) {
      std::vector<float> grid(4 * 6);
      for (float& v : grid) v = uniform_range(*rng, lo, hi);
      Tensor coarse = Tensor::from_data({1, 1, 4, 6}, std::move(grid));
      return bicubic_upsample(coarse, kLrHeight, kLrWidth);
    };
    FramePair f;
    f.depth = field(0.3f, 1.3f);      // meters, inside the 1.4 m range
    f.intensity = field(50.0f, 240.0f);  // photon counts
    return f;
  };
}

}  // namespace litesr
