#include "aurk/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "aurk/error.hpp"

namespace aurk {

namespace {

constexpr char kMagic[8] = {'A', 'U', 'R', 'K', 'C', 'K', 'P', 'T'};

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int k = 0; k < 4; ++k) out_.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
  }
  void u64(std::uint64_t v) {
    for (int k = 0; k < 8; ++k) out_.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out_.insert(out_.end(), s.begin(), s.end());
  }
  void raw(const char* p, std::size_t n) { out_.insert(out_.end(), p, p + n); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}
  std::uint8_t u8() { return need(1)[0]; }
  std::uint32_t u32() {
    const auto b = need(4);
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(b[static_cast<std::size_t>(k)]) << (8 * k);
    return v;
  }
  std::uint64_t u64() {
    const auto b = need(8);
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(b[static_cast<std::size_t>(k)]) << (8 * k);
    return v;
  }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const std::uint32_t n = u32();
    const auto b = need(n);
    return {b.begin(), b.end()};
  }
  std::span<const std::uint8_t> need(std::size_t n) {
    if (in_.size() - pos_ < n) throw FormatError("checkpoint is truncated");
    const auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const noexcept { return pos_ == in_.size(); }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

void write_model_config(Writer& w, const ModelConfig& m) {
  w.str(m.backbone);
  w.i32(m.in_channels);
  w.i32(m.roi_size);
  w.i32(m.fc_hidden);
  w.i32(m.labels);
  w.i32(m.boxes);
  w.str(std::string(to_string(m.dynamic)));
  w.i32(m.lstm_channels);
  w.i32(m.lstm_kernel);
  w.i32(m.flow_channels);
}

ModelConfig read_model_config(Reader& r) {
  ModelConfig m;
  m.backbone = r.str();
  m.in_channels = r.i32();
  m.roi_size = r.i32();
  m.fc_hidden = r.i32();
  m.labels = r.i32();
  m.boxes = r.i32();
  m.dynamic = parse_dynamic_mode(r.str());
  m.lstm_channels = r.i32();
  m.lstm_kernel = r.i32();
  m.flow_channels = r.i32();
  return m;
}

bool same_shape(const ModelConfig& a, const ModelConfig& b) {
  return a.backbone == b.backbone && a.in_channels == b.in_channels && a.roi_size == b.roi_size &&
         a.fc_hidden == b.fc_hidden && a.labels == b.labels && a.boxes == b.boxes && a.dynamic == b.dynamic &&
         (a.dynamic != DynamicMode::convlstm ||
          (a.lstm_channels == b.lstm_channels && a.lstm_kernel == b.lstm_kernel)) &&
         (a.dynamic != DynamicMode::two_stream || a.flow_channels == b.flow_channels);
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const AuRcnn& model, const std::string& dataset,
                                            std::uint64_t table_hash, const OptimState* optim) {
  Writer w;
  w.raw(kMagic, sizeof kMagic);
  w.u32(kCheckpointVersion);
  w.str(dataset);
  w.u64(table_hash);
  write_model_config(w, model.config());
  const auto params = model.params();
  w.u32(static_cast<std::uint32_t>(params.size()));
  for (const Param* p : params) {
    w.str(p->name);
    const Shape4& s = p->value.shape();
    w.i32(s.n);
    w.i32(s.c);
    w.i32(s.h);
    w.i32(s.w);
    for (double v : p->value.values()) w.f64(v);
  }
  w.u8(optim ? 1 : 0);
  if (optim) {
    w.f64(optim->config.base_lr);
    w.f64(optim->config.momentum);
    w.f64(optim->config.weight_decay);
    w.f64(optim->config.decay_factor);
    w.i32(optim->config.decay_every);
    w.i32(optim->epoch);
    w.f64(optim->lr);
    w.u32(static_cast<std::uint32_t>(optim->velocity.size()));
    for (const auto& v : optim->velocity) {
      w.u64(v.size());
      for (double x : v) w.f64(x);
    }
  }
  return w.take();
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  const auto magic = r.need(sizeof kMagic);
  if (std::memcmp(magic.data(), kMagic, sizeof kMagic) != 0) throw FormatError("not an aurk checkpoint");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion)
    throw VersionError("checkpoint format version " + std::to_string(version) + ", this build reads " +
                       std::to_string(kCheckpointVersion));
  Checkpoint c;
  c.dataset = r.str();
  c.table_hash = r.u64();
  c.model = read_model_config(r);
  const std::uint32_t count = r.u32();
  for (std::uint32_t k = 0; k < count; ++k) {
    Param p;
    p.name = r.str();
    Shape4 s;
    s.n = r.i32();
    s.c = r.i32();
    s.h = r.i32();
    s.w = r.i32();
    if (s.n < 0 || s.c < 0 || s.h < 0 || s.w < 0) throw FormatError("negative shape in checkpoint");
    if (s.size() > bytes.size() / 8) throw FormatError("checkpoint is truncated");
    p.value = Tensor4(s);
    for (double& v : p.value.values()) v = r.f64();
    c.params.push_back(std::move(p));
  }
  if (r.u8() != 0) {
    OptimState o;
    o.config.base_lr = r.f64();
    o.config.momentum = r.f64();
    o.config.weight_decay = r.f64();
    o.config.decay_factor = r.f64();
    o.config.decay_every = r.i32();
    o.epoch = r.i32();
    o.lr = r.f64();
    const std::uint32_t n = r.u32();
    for (std::uint32_t k = 0; k < n; ++k) {
      const std::uint64_t len = r.u64();
      if (len > bytes.size() / 8) throw FormatError("checkpoint is truncated");
      std::vector<double> v(len);
      for (double& x : v) x = r.f64();
      o.velocity.push_back(std::move(v));
    }
    c.optim = std::move(o);
  }
  if (!r.done()) throw FormatError("trailing bytes after checkpoint");
  return c;
}

void save_checkpoint(const std::string& path, const AuRcnn& model, const std::string& dataset,
                     std::uint64_t table_hash, const OptimState* optim) {
  const auto bytes = encode_checkpoint(model, dataset, table_hash, optim);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write checkpoint '" + path + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing checkpoint '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint '" + path + "'");
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

void check_compatible(const Checkpoint& ckpt, const std::string& dataset, std::uint64_t table_hash,
                      const ModelConfig& model) {
  if (ckpt.dataset != dataset)
    throw VersionError("checkpoint was trained for dataset profile '" + ckpt.dataset + "', config uses '" +
                       dataset + "'");
  if (ckpt.table_hash != table_hash)
    throw VersionError("checkpoint was trained with a different partition table");
  if (!same_shape(ckpt.model, model))
    throw VersionError("checkpoint model (" + ckpt.model.backbone + ", " + std::string(to_string(ckpt.model.dynamic)) +
                       ") does not match the configured model (" + model.backbone + ", " +
                       std::string(to_string(model.dynamic)) + ")");
}

AuRcnn restore_model(const Checkpoint& ckpt) {
  AuRcnn model(ckpt.model);
  load_weights(model, ckpt.params);
  return model;
}

void load_weights(AuRcnn& model, std::span<const Param> params) {
  auto dst = model.params();
  if (dst.size() != params.size())
    throw VersionError("checkpoint has " + std::to_string(params.size()) + " tensors, model expects " +
                       std::to_string(dst.size()));
  for (std::size_t k = 0; k < dst.size(); ++k) {
    if (dst[k]->name != params[k].name || !(dst[k]->value.shape() == params[k].value.shape()))
      throw VersionError("checkpoint tensor '" + params[k].name + "' " + params[k].value.shape().str() +
                         " does not match '" + dst[k]->name + "' " + dst[k]->value.shape().str());
    dst[k]->value = params[k].value;
  }
}

}  // namespace aurk
