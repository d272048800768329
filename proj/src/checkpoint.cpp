#include "edgeflow/checkpoint.hpp"

#include <cstring>
#include <stdexcept>

#include "edgeflow/io_util.hpp"

namespace edgeflow {

namespace {

constexpr char kMagic[4] = {'E', 'F', 'C', 'K'};

class Writer {
 public:
  void raw(const void* data, size_t n) {
    buf_.append(static_cast<const char*>(data), n);
  }
  void u32(uint32_t v) { raw(&v, sizeof(v)); }
  void u64(uint64_t v) { raw(&v, sizeof(v)); }
  void f64(double v) { raw(&v, sizeof(v)); }
  void str(const std::string& s) {
    u32(static_cast<uint32_t>(s.size()));
    raw(s.data(), s.size());
  }
  void tensor(const Tensor& t) {
    u32(static_cast<uint32_t>(t.shape().size()));
    for (int64_t d : t.shape()) u64(static_cast<uint64_t>(d));
    raw(t.data(), sizeof(double) * static_cast<size_t>(t.numel()));
  }
  std::string take() { return std::move(buf_); }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}
  void raw(void* out, size_t n) {
    if (pos_ + n > bytes_.size())
      throw std::runtime_error("checkpoint: truncated file");
    std::memcpy(out, bytes_.data() + pos_, n);
    pos_ += n;
  }
  uint32_t u32() { uint32_t v; raw(&v, sizeof(v)); return v; }
  uint64_t u64() { uint64_t v; raw(&v, sizeof(v)); return v; }
  std::string str() {
    uint32_t n = u32();
    if (pos_ + n > bytes_.size())
      throw std::runtime_error("checkpoint: truncated string");
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  Tensor tensor() {
    uint32_t ndim = u32();
    if (ndim > 4) throw std::runtime_error("checkpoint: corrupt tensor rank");
    std::vector<int64_t> shape(ndim);
    for (auto& d : shape) d = static_cast<int64_t>(u64());
    Tensor t(shape);
    raw(t.data(), sizeof(double) * static_cast<size_t>(t.numel()));
    return t;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  const std::string& bytes_;
  size_t pos_ = 0;
};

}  // namespace

uint64_t fnv1a64(const std::string& text) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string encode_checkpoint(const Checkpoint& ckpt) {
  Writer w;
  w.raw(kMagic, 4);
  w.u32(ckpt.version);
  w.u64(ckpt.config_hash);
  w.u64(ckpt.step);
  w.u32(ckpt.epoch);
  w.str(ckpt.rng_state);
  w.str(ckpt.vocab_text);
  w.u32(static_cast<uint32_t>(ckpt.params.size()));
  for (const auto& [name, tensor] : ckpt.params) {
    w.str(name);
    w.tensor(tensor);
  }
  w.u32(ckpt.has_adam ? 1 : 0);
  if (ckpt.has_adam) {
    if (ckpt.adam.m.size() != ckpt.params.size() ||
        ckpt.adam.v.size() != ckpt.params.size())
      throw std::runtime_error("checkpoint: adam moments misaligned");
    w.u64(ckpt.adam.t);
    for (size_t i = 0; i < ckpt.params.size(); ++i) {
      w.tensor(ckpt.adam.m[i]);
      w.tensor(ckpt.adam.v[i]);
    }
  }
  return w.take();
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  Reader r(bytes);
  char magic[4];
  r.raw(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("checkpoint: bad magic bytes");
  Checkpoint ckpt;
  ckpt.version = r.u32();
  if (ckpt.version != 1)
    throw std::runtime_error("checkpoint: unsupported version " +
                             std::to_string(ckpt.version));
  ckpt.config_hash = r.u64();
  ckpt.step = r.u64();
  ckpt.epoch = r.u32();
  ckpt.rng_state = r.str();
  ckpt.vocab_text = r.str();
  uint32_t n = r.u32();
  for (uint32_t i = 0; i < n; ++i) {
    std::string name = r.str();
    Tensor t = r.tensor();
    ckpt.params.emplace_back(std::move(name), std::move(t));
  }
  ckpt.has_adam = r.u32() != 0;
  if (ckpt.has_adam) {
    ckpt.adam.t = r.u64();
    for (uint32_t i = 0; i < n; ++i) {
      ckpt.adam.m.push_back(r.tensor());
      ckpt.adam.v.push_back(r.tensor());
    }
  }
  if (!r.done()) throw std::runtime_error("checkpoint: trailing bytes");
  return ckpt;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  atomic_write_file(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::string& path) {
  return decode_checkpoint(read_file(path));
}

}  // namespace edgeflow
