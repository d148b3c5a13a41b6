#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/datagen.hpp"
#include "core/model.hpp"
#include "core/tensor.hpp"

namespace litesr {

// --- wire format -------------------------------------------------------------
//
// Framed packet, little-endian, frozen bit-exact:
//
//   0   magic        0x54 0x46
//   2   version      u8   (1)
//   3   frame_type   u8   (1 depth, 2 intensity, 3 combined)
//   4   sequence     u32
//   8   timestamp_us u64
//   16  payload_len  u16  (3072 / 3072 / 6144)
//   18  payload      u16 samples: depth millimeters, then counts (combined)
//   end crc32        u32  over header + payload
//
// A combined packet is 18 + 6144 + 4 = 6166 bytes.

enum class FrameType : std::uint8_t { depth = 1, intensity = 2, combined = 3 };

inline constexpr std::uint8_t kPacketMagic0 = 0x54;
inline constexpr std::uint8_t kPacketMagic1 = 0x46;
inline constexpr std::uint8_t kPacketVersion = 1;
inline constexpr std::size_t kPacketHeaderBytes = 18;
inline constexpr std::size_t kFramePixels =
    std::size_t(kLrHeight) * kLrWidth;  // 1536
inline constexpr std::size_t kCombinedPayloadBytes = kFramePixels * 4;  // 6144
inline constexpr std::size_t kCombinedPacketBytes =
    kPacketHeaderBytes + kCombinedPayloadBytes + 4;  // 6166

// One sensor capture: depth in meters, intensity in photon counts.
struct FramePair {
  Tensor depth;
  Tensor intensity;
  std::uint32_t sequence = 0;
  std::uint64_t timestamp_us = 0;
};

struct EncodedPacket {
  std::vector<std::uint8_t> bytes;
  bool clamped = false;  // intensity counts were clamped into u16 range
};

// Depth must fit u16 millimeters (error otherwise); counts clamp with a flag.
EncodedPacket encode_packet(const FramePair& pair,
                            FrameType type = FrameType::combined);

struct StreamDiagnostics {
  std::uint64_t crc_errors = 0;
  std::uint64_t resyncs = 0;
  std::uint64_t seq_gaps = 0;
};

// Incremental parser over an arbitrary byte stream. Resynchronizes on the
// magic after corruption; every fault becomes a diagnostic, never an
// exception. Memory use is bounded by one push chunk plus one packet.
class StreamParser {
 public:
  void push(std::span<const std::uint8_t> bytes);
  std::optional<FramePair> poll();
  const StreamDiagnostics& diagnostics() const { return diag_; }

 private:
  void scan();
  void emit(FrameType type, std::uint32_t seq, std::uint64_t ts,
            const std::uint8_t* payload);
  void note_emitted(std::uint32_t seq);

  std::vector<std::uint8_t> buf_;
  std::size_t head_ = 0;
  std::size_t discard_run_ = 0;
  std::deque<FramePair> ready_;
  struct Half {
    std::optional<Tensor> depth;
    std::optional<Tensor> intensity;
    std::uint64_t timestamp_us = 0;
  };
  std::map<std::uint32_t, Half> pending_;  // depth/intensity halves by seq
  bool saw_seq_ = false;
  std::uint32_t last_seq_ = 0;
  StreamDiagnostics diag_;
};

struct ParsedStream {
  std::vector<FramePair> frames;
  StreamDiagnostics diagnostics;
};

ParsedStream parse_stream(std::span<const std::uint8_t> bytes);

// --- ping-pong buffer --------------------------------------------------------

// Two-slot single-producer/single-consumer buffer with latest-wins
// semantics: a write lands in an empty slot if one exists, otherwise it
// overwrites the oldest stale ready slot; a read takes the newest ready slot
// and drops an older unread one. Both paths count drops exactly. Operations
// are atomic with respect to each other.
template <typename T>
class PingPong {
 public:
  void write(T value) {
    std::lock_guard<std::mutex> lock(mu_);
    int target = -1;
    for (int i = 0; i < 2; ++i) {
      if (slots_[i].state == State::empty) {
        target = i;
        break;
      }
    }
    if (target < 0) {
      // No empty slot: overwrite the oldest ready one (never the slot being
      // read).
      std::uint64_t oldest = UINT64_MAX;
      for (int i = 0; i < 2; ++i) {
        if (slots_[i].state == State::ready && slots_[i].stamp < oldest) {
          oldest = slots_[i].stamp;
          target = i;
        }
      }
      if (target < 0) return;  // both slots busy reading/filling (SPSC misuse)
      ++dropped_;
    }
    slots_[target].state = State::filling;
    slots_[target].value = std::move(value);
    slots_[target].stamp = ++stamp_;
    slots_[target].state = State::ready;
  }

  std::optional<T> read() {
    std::lock_guard<std::mutex> lock(mu_);
    int newest = -1;
    std::uint64_t best = 0;
    for (int i = 0; i < 2; ++i) {
      if (slots_[i].state == State::ready && slots_[i].stamp >= best) {
        best = slots_[i].stamp;
        newest = i;
      }
    }
    if (newest < 0) return std::nullopt;
    // Latest wins: an older unread frame is stale, discard it.
    const int other = 1 - newest;
    if (slots_[other].state == State::ready) {
      slots_[other].state = State::empty;
      ++dropped_;
    }
    slots_[newest].state = State::reading;
    T out = std::move(slots_[newest].value);
    slots_[newest].state = State::empty;
    return out;
  }

  std::uint64_t dropped() const {
    std::lock_guard<std::mutex> lock(mu_);
    return dropped_;
  }

  std::size_t ready_count() const {
    std::lock_guard<std::mutex> lock(mu_);
    std::size_t n = 0;
    for (const Slot& s : slots_) n += s.state == State::ready ? 1 : 0;
    return n;
  }

 private:
  enum class State : std::uint8_t { empty, filling, ready, reading };
  struct Slot {
    State state = State::empty;
    std::uint64_t stamp = 0;
    T value{};
  };
  mutable std::mutex mu_;
  Slot slots_[2];
  std::uint64_t stamp_ = 0;
  std::uint64_t dropped_ = 0;
};

// --- stream simulation ---------------------------------------------------------

struct StreamConfig {
  std::uint32_t period_ms = 100;       // 100 ms => nominal 10 Hz
  std::uint64_t iterations = 1000000;  // sensor integration setting, recorded
  double consumer_delay_ms = 0.0;      // virtual per-frame processing cost
  bool wall_clock = false;             // real threads + real time
  DatasetStats stats;                  // preprocess normalization
};

struct StageLatency {
  double parse_ms = 0.0;
  double preprocess_ms = 0.0;
  double inference_ms = 0.0;
  double serialize_ms = 0.0;
};

struct StreamStats {
  std::uint64_t produced = 0;
  std::uint64_t consumed = 0;
  std::uint64_t dropped = 0;   // ping-pong stage
  std::uint64_t leftover = 0;  // still buffered at shutdown
  StreamDiagnostics diagnostics;
  double elapsed_ms = 0.0;
  double effective_fps = 0.0;
  StageLatency mean_latency;  // measured wall time per consumed frame
  bool sink_failed = false;

  std::string to_json() const;
};

// Pulls the next frame, or nullopt when the source is exhausted.
using FrameSource = std::function<std::optional<FramePair>()>;
// Receives each consumed frame (and the SR result when a model is attached);
// returning false requests a clean shutdown with partial stats.
using FrameSink = std::function<bool(const FramePair&, const SRResult*)>;

// Producer emits one combined packet per period through a ping-pong byte
// buffer; the consumer parses, preprocesses, optionally runs inference and
// serializes the outputs. A deterministic virtual clock drives scheduling
// unless wall_clock is set.
StreamStats simulate_stream(const StreamConfig& config, FrameSource source,
                            const Model* model = nullptr,
                            FrameSink sink = nullptr);

FrameSource dir_frame_source(const std::string& sample_root);
FrameSource synthetic_frame_source(std::uint64_t count, std::uint64_t seed);

}  // namespace litesr
