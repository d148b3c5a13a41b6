#include "core/weights.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "core/crc32.hpp"
#include "core/rng.hpp"

namespace litesr {

namespace {

constexpr char kMagic[4] = {'L', 'S', 'R', 'W'};
constexpr std::uint16_t kVersion = 1;

void put_u16(std::vector<std::uint8_t>& b, std::uint16_t v) {
  b.push_back(std::uint8_t(v & 0xFF));
  b.push_back(std::uint8_t(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(std::uint8_t((v >> (8 * i)) & 0xFF));
}

void put_f32(std::vector<std::uint8_t>& b, float v) {
  std::uint32_t u;
  std::memcpy(&u, &v, 4);
  put_u32(b, u);
}

struct Reader {
  const std::uint8_t* p;
  std::size_t len;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > len) fail(ErrorCode::parse, "weight container truncated");
  }
  std::uint8_t u8() {
    need(1);
    return p[pos++];
  }
  std::uint16_t u16() {
    need(2);
    std::uint16_t v = std::uint16_t(p[pos]) | std::uint16_t(p[pos + 1]) << 8;
    pos += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(p[pos + i]) << (8 * i);
    pos += 4;
    return v;
  }
  float f32() {
    std::uint32_t u = u32();
    float v;
    std::memcpy(&v, &u, 4);
    return v;
  }
  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(p + pos), n);
    pos += n;
    return s;
  }
};

void put_tensor_entry(std::vector<std::uint8_t>& b, const std::string& path,
                      const Tensor& t) {
  if (path.size() > 0xFFFF) fail(ErrorCode::argument, "entry path too long");
  put_u16(b, std::uint16_t(path.size()));
  b.insert(b.end(), path.begin(), path.end());
  b.push_back(std::uint8_t(t.dtype()));
  const Shape& s = t.shape();
  put_u32(b, s.n);
  put_u32(b, s.c);
  put_u32(b, s.h);
  put_u32(b, s.w);
  if (t.dtype() == DType::i8) {
    put_f32(b, t.scale());
    auto d = t.i8();
    b.insert(b.end(), reinterpret_cast<const std::uint8_t*>(d.data()),
             reinterpret_cast<const std::uint8_t*>(d.data() + d.size()));
  } else {
    for (float v : t.f32()) put_f32(b, v);
  }
}

Tensor scalar_tensor(float v) {
  return Tensor::from_data({1, 1, 1, 1}, {v});
}

Tensor bias_tensor(const std::vector<float>& bias) {
  return Tensor::from_data({std::uint32_t(bias.size()), 1, 1, 1}, bias);
}

}  // namespace

ModelWeights fixture_weights(const ModelConfig& config, std::uint64_t seed) {
  ModelWeights w;
  w.config = config;
  std::mt19937 rng{std::uint32_t(seed)};
  for (const LayerDef& layer : enumerate_layers(config)) {
    WeightEntry e;
    const Shape ws{layer.spec.out_channels, layer.spec.in_channels,
                   layer.spec.kh, layer.spec.kw};
    std::vector<float> vals(ws.count());
    for (float& v : vals) v = uniform_range(rng, -0.1f, 0.1f);
    e.weight = Tensor::from_data(ws, std::move(vals));
    e.bias.resize(layer.spec.out_channels);
    for (float& v : e.bias) v = uniform_range(rng, -0.1f, 0.1f);
    w.entries.emplace(layer.path, std::move(e));
  }
  const double gate_init = std::log(0.1 / 0.9);  // sigmoid(gate) = 0.1
  w.gate_logit_depth = gate_init;
  w.gate_logit_intensity = gate_init;
  return w;
}

std::vector<std::uint8_t> serialize_weights(const ModelWeights& w) {
  w.config.validate();
  std::vector<std::uint8_t> b;
  b.insert(b.end(), kMagic, kMagic + 4);
  put_u16(b, kVersion);
  b.push_back(std::uint8_t(w.dtype));
  std::uint8_t flags = 0;
  if (w.config.ablate_earb) flags |= 1;
  if (w.config.ablate_rlfb) flags |= 2;
  b.push_back(flags);
  put_u16(b, std::uint16_t(w.config.ch_e));
  put_u16(b, std::uint16_t(w.config.ch_r));
  put_u16(b, std::uint16_t(w.config.ch_dh));
  put_u16(b, std::uint16_t(w.config.ch_ih));
  put_u16(b, std::uint16_t(w.config.n_earb));
  put_u16(b, std::uint16_t(w.config.n_rlfb));
  put_u16(b, std::uint16_t(w.config.upscale));

  std::uint32_t count = std::uint32_t(w.entries.size()) * 2 + 2;
  if (w.calibrated()) count += 1;
  put_u32(b, count);

  // Canonical order: graph order, weight then bias per layer. Entries not in
  // the graph enumeration (hand-built stores) go afterwards, sorted.
  std::vector<std::string> order;
  std::map<std::string, const WeightEntry*> pending;
  for (const auto& [path, entry] : w.entries) pending.emplace(path, &entry);
  for (const LayerDef& layer : enumerate_layers(w.config)) {
    if (pending.count(layer.path)) {
      order.push_back(layer.path);
      pending.erase(layer.path);
    }
  }
  for (const auto& [path, entry] : pending) order.push_back(path);

  for (const std::string& path : order) {
    const WeightEntry& e = w.entries.at(path);
    put_tensor_entry(b, path + ".weight", e.weight);
    put_tensor_entry(b, path + ".bias", bias_tensor(e.bias));
  }
  put_tensor_entry(b, kGateDepthPath, scalar_tensor(float(w.gate_logit_depth)));
  put_tensor_entry(b, kGateIntensityPath,
                   scalar_tensor(float(w.gate_logit_intensity)));
  if (w.calibrated()) {
    std::vector<float> ranges;
    ranges.reserve(w.act_ranges.size() * 2);
    for (const ActRange& r : w.act_ranges) {
      ranges.push_back(r.lo);
      ranges.push_back(r.hi);
    }
    put_tensor_entry(b, kActRangesPath,
                     Tensor::from_data(
                         {std::uint32_t(w.act_ranges.size()), 2, 1, 1},
                         std::move(ranges)));
  }

  put_u32(b, crc32(b.data(), b.size()));
  return b;
}

ModelWeights deserialize_weights(const std::uint8_t* data, std::size_t len) {
  if (len < 30) fail(ErrorCode::parse, "weight container too small");
  if (std::memcmp(data, kMagic, 4) != 0) {
    fail(ErrorCode::parse, "weight container magic mismatch");
  }
  std::uint32_t stored_crc = 0;
  std::memcpy(&stored_crc, data + len - 4, 4);
  if (crc32(data, len - 4) != stored_crc) {
    fail(ErrorCode::parse, "weight container CRC mismatch");
  }

  Reader r{data, len - 4};
  r.pos = 4;
  const std::uint16_t version = r.u16();
  if (version != kVersion) {
    fail(ErrorCode::parse,
         "unsupported weight container version " + std::to_string(version));
  }
  ModelWeights w;
  const std::uint8_t dtype = r.u8();
  if (dtype > 1) fail(ErrorCode::parse, "unknown container dtype");
  w.dtype = DType(dtype);
  const std::uint8_t flags = r.u8();
  w.config.ablate_earb = flags & 1;
  w.config.ablate_rlfb = flags & 2;
  w.config.ch_e = r.u16();
  w.config.ch_r = r.u16();
  w.config.ch_dh = r.u16();
  w.config.ch_ih = r.u16();
  w.config.n_earb = r.u16();
  w.config.n_rlfb = r.u16();
  w.config.upscale = r.u16();
  w.config.validate();

  const std::uint32_t count = r.u32();
  bool saw_gate_depth = false, saw_gate_intensity = false;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint16_t path_len = r.u16();
    const std::string path = r.str(path_len);
    const std::uint8_t edtype = r.u8();
    if (edtype > 1) fail(ErrorCode::parse, "unknown entry dtype in " + path);
    Shape s;
    s.n = r.u32();
    s.c = r.u32();
    s.h = r.u32();
    s.w = r.u32();
    Tensor t;
    if (edtype == 1) {
      const float scale = r.f32();
      r.need(s.count());
      std::vector<std::int8_t> vals(s.count());
      std::memcpy(vals.data(), r.p + r.pos, s.count());
      r.pos += s.count();
      t = Tensor::from_i8(s, std::move(vals), scale);
    } else {
      std::vector<float> vals(s.count());
      for (float& v : vals) v = r.f32();
      t = Tensor::from_data(s, std::move(vals));
    }

    if (path == kGateDepthPath || path == kGateIntensityPath) {
      if (t.dtype() != DType::f32 || t.shape().count() != 1) {
        fail(ErrorCode::validation, "gate entry " + path + " must be a scalar");
      }
      (path == kGateDepthPath ? w.gate_logit_depth : w.gate_logit_intensity) =
          t.f32()[0];
      (path == kGateDepthPath ? saw_gate_depth : saw_gate_intensity) = true;
    } else if (path == kActRangesPath) {
      if (t.dtype() != DType::f32 || t.shape().c != 2) {
        fail(ErrorCode::validation, "act.ranges entry malformed");
      }
      auto vals = t.f32();
      w.act_ranges.resize(t.shape().n);
      for (std::uint32_t k = 0; k < t.shape().n; ++k) {
        w.act_ranges[k] = {vals[2 * k], vals[2 * k + 1]};
      }
    } else if (path.size() > 7 &&
               path.compare(path.size() - 7, 7, ".weight") == 0) {
      w.entries[path.substr(0, path.size() - 7)].weight = std::move(t);
    } else if (path.size() > 5 &&
               path.compare(path.size() - 5, 5, ".bias") == 0) {
      if (t.dtype() != DType::f32) {
        fail(ErrorCode::validation, "bias entry " + path + " must be FP32");
      }
      auto vals = t.f32();
      w.entries[path.substr(0, path.size() - 5)].bias.assign(vals.begin(),
                                                             vals.end());
    } else {
      fail(ErrorCode::validation, "unrecognized entry path: " + path);
    }
  }
  if (!saw_gate_depth || !saw_gate_intensity) {
    fail(ErrorCode::validation,
         std::string("weight container missing gate scalar: ") +
             (!saw_gate_depth ? kGateDepthPath : kGateIntensityPath));
  }
  return w;
}

void save_weights(const ModelWeights& w, const std::string& path) {
  const auto bytes = serialize_weights(w);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) fail(ErrorCode::io, "cannot open for write: " + path);
  os.write(reinterpret_cast<const char*>(bytes.data()),
           std::streamsize(bytes.size()));
  if (!os) fail(ErrorCode::io, "write failed: " + path);
}

ModelWeights load_weights(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::io, "cannot open: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)),
                                  std::istreambuf_iterator<char>());
  return deserialize_weights(bytes.data(), bytes.size());
}

}  // namespace litesr
