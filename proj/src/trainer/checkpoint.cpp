// Copyright Contributors to the vgan project
// SPDX-License-Identifier: Apache-2.0

#include "vgan/trainer/checkpoint.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace vgan {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

const Tensor* CheckpointState::param(const std::string& name) const {
  for (const auto& p : params)
    if (p.name == name) return &p.value;
  return nullptr;
}

namespace {

constexpr char kMagic[4] = {'V', 'G', 'A', 'N'};

class Writer {
 public:
  template <class T>
  void pod(T v) {
    const auto* p = reinterpret_cast<const unsigned char*>(&v);
    buf_.insert(buf_.end(), p, p + sizeof(T));
  }
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    buf_.insert(buf_.end(), p, p + n);
  }
  void str(const std::string& s) {
    pod<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  void tensors(const std::vector<NamedTensor>& list) {
    pod<std::uint32_t>(static_cast<std::uint32_t>(list.size()));
    for (const auto& [name, t] : list) {
      str(name);
      pod<std::uint8_t>(static_cast<std::uint8_t>(t.dtype()));
      pod<std::uint32_t>(static_cast<std::uint32_t>(t.rank()));
      for (auto e : t.shape()) pod<std::int64_t>(e);
      dispatch(t.dtype(), [&](auto tag) {
        using T = decltype(tag);
        auto d = t.data<T>();
        bytes(d.data(), d.size_bytes());
      });
    }
  }
  std::vector<unsigned char>& buffer() { return buf_; }

 private:
  std::vector<unsigned char> buf_;
};

class Reader {
 public:
  Reader(const unsigned char* data, std::size_t size) : p_(data), end_(data + size) {}

  void need(std::size_t n) const {
    if (static_cast<std::size_t>(end_ - p_) < n)
      throw CheckpointError(CheckpointErrc::truncated, "checkpoint is truncated");
  }
  template <class T>
  T pod() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, p_, sizeof(T));
    p_ += sizeof(T);
    return v;
  }
  void bytes(void* out, std::size_t n) {
    need(n);
    std::memcpy(out, p_, n);
    p_ += n;
  }
  std::string str() {
    const auto n = pod<std::uint32_t>();
    need(n);
    std::string s(reinterpret_cast<const char*>(p_), n);
    p_ += n;
    return s;
  }
  std::vector<NamedTensor> tensors() {
    const auto count = pod<std::uint32_t>();
    std::vector<NamedTensor> out;
    for (std::uint32_t i = 0; i < count; ++i) {
      NamedTensor nt;
      nt.name = str();
      const auto code = pod<std::uint8_t>();
      if (code > 1) throw CheckpointError(CheckpointErrc::format, "unknown dtype code in checkpoint");
      const auto rank = pod<std::uint32_t>();
      need(static_cast<std::size_t>(rank) * 8);
      Shape shape(rank);
      std::size_t n = 1;
      for (auto& e : shape) {
        e = pod<std::int64_t>();
        if (e <= 0) throw CheckpointError(CheckpointErrc::format, "bad extent in checkpoint");
        n *= static_cast<std::size_t>(e);
      }
      const DType dtype = static_cast<DType>(code);
      need(n * dtype_size(dtype));
      if (dtype == DType::f32) {
        std::vector<float> v(n);
        bytes(v.data(), n * 4);
        nt.value = Tensor::adopt(std::move(v), shape);
      } else {
        std::vector<double> v(n);
        bytes(v.data(), n * 8);
        nt.value = Tensor::adopt(std::move(v), shape);
      }
      out.push_back(std::move(nt));
    }
    return out;
  }
  std::size_t remaining() const { return static_cast<std::size_t>(end_ - p_); }

 private:
  const unsigned char* p_;
  const unsigned char* end_;
};

std::uint32_t crc_of(const unsigned char* data, std::size_t n) {
  return static_cast<std::uint32_t>(crc32(crc32(0L, Z_NULL, 0), data, static_cast<uInt>(n)));
}

}  // namespace

void save_checkpoint(const CheckpointState& s, const std::string& path) {
  Writer w;
  w.bytes(kMagic, 4);
  w.pod<std::uint32_t>(kCheckpointVersion);
  w.pod<std::uint64_t>(s.config_hash);
  w.tensors(s.params);
  w.pod<std::uint64_t>(s.g_opt_steps);
  w.pod<std::uint64_t>(s.d_opt_steps);
  w.tensors(s.optimizer);
  w.pod<std::uint32_t>(static_cast<std::uint32_t>(s.rng_states.size()));
  for (const auto& [k, v] : s.rng_states) {
    w.str(k);
    w.str(v);
  }
  w.pod<std::uint64_t>(s.step);
  w.pod<std::uint64_t>(s.images_shown);
  w.pod<std::uint64_t>(s.growth_events);
  auto& buf = w.buffer();
  w.pod<std::uint32_t>(crc_of(buf.data(), buf.size()));

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError(CheckpointErrc::io, "cannot write checkpoint '" + path + "'");
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out) throw CheckpointError(CheckpointErrc::io, "short write on '" + path + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw CheckpointError(CheckpointErrc::io, "cannot move checkpoint into '" + path + "'");
}

CheckpointState load_checkpoint(const std::string& path, std::uint64_t expected_hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(CheckpointErrc::io, "cannot open checkpoint '" + path + "'");
  const std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                       std::istreambuf_iterator<char>());
  if (buf.size() < 4 || std::memcmp(buf.data(), kMagic, 4) != 0)
    throw CheckpointError(CheckpointErrc::format, "'" + path + "' is not a vgan checkpoint");
  Reader r(buf.data() + 4, buf.size() - 4);
  const auto version = r.pod<std::uint32_t>();
  if (version != kCheckpointVersion)
    throw CheckpointError(CheckpointErrc::version, "checkpoint version " + std::to_string(version) +
                                                       ", expected " +
                                                       std::to_string(kCheckpointVersion));
  CheckpointState s;
  s.config_hash = r.pod<std::uint64_t>();
  s.params = r.tensors();
  s.g_opt_steps = r.pod<std::uint64_t>();
  s.d_opt_steps = r.pod<std::uint64_t>();
  s.optimizer = r.tensors();
  const auto n_rng = r.pod<std::uint32_t>();
  for (std::uint32_t i = 0; i < n_rng; ++i) {
    std::string k = r.str();
    s.rng_states.emplace_back(std::move(k), r.str());
  }
  s.step = r.pod<std::uint64_t>();
  s.images_shown = r.pod<std::uint64_t>();
  s.growth_events = r.pod<std::uint64_t>();
  const std::size_t body = buf.size() - r.remaining();
  const auto stored = r.pod<std::uint32_t>();
  if (r.remaining() != 0)
    throw CheckpointError(CheckpointErrc::format, "trailing bytes after checkpoint footer");
  if (stored != crc_of(buf.data(), body))
    throw CheckpointError(CheckpointErrc::crc, "checkpoint CRC mismatch in '" + path + "'");
  if (expected_hash != 0 && s.config_hash != expected_hash)
    throw CheckpointError(CheckpointErrc::hash,
                          "checkpoint was written for a different configuration");
  return s;
}

}  // namespace vgan
