#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "srr/errors.hpp"
#include "srr/infer.hpp"
#include "srr/network.hpp"

namespace srr {

/// Binary checkpoint layout, all integers little-endian:
///   "SRRN"  magic
///   u16     format version (currently 1)
///   u8      loss kind
///   u32     input dimension
///   u32     layer count
///   per layer: u32 fan_out, u8 activation kind
///   u64     parameter count
///   f64[n]  parameters in flatten order
///   u64     FNV-1a checksum of every preceding byte
/// A version mismatch or checksum failure refuses the load outright.
inline constexpr std::uint16_t kCheckpointVersion = 1;

namespace detail {

inline void put_bytes(std::vector<std::uint8_t>& buf, std::uint64_t v, int n_bytes) {
  for (int i = 0; i < n_bytes; ++i) buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline std::uint64_t get_bytes(const std::vector<std::uint8_t>& buf, std::size_t& pos,
                               int n_bytes) {
  if (pos + static_cast<std::size_t>(n_bytes) > buf.size())
    throw IoError("checkpoint: truncated file");
  std::uint64_t v = 0;
  for (int i = 0; i < n_bytes; ++i)
    v |= static_cast<std::uint64_t>(buf[pos + static_cast<std::size_t>(i)]) << (8 * i);
  pos += static_cast<std::size_t>(n_bytes);
  return v;
}

inline std::uint64_t fnv1a(const std::vector<std::uint8_t>& buf, std::size_t count) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < count; ++i) {
    h ^= buf[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

inline void save_checkpoint(const std::string& path, const ModelBundle& model) {
  std::vector<std::uint8_t> buf;
  buf.push_back('S');
  buf.push_back('R');
  buf.push_back('R');
  buf.push_back('N');
  detail::put_bytes(buf, kCheckpointVersion, 2);
  buf.push_back(model.loss.kind == LossKind::mse ? 0 : 1);
  detail::put_bytes(buf, model.net.input_dim(), 4);
  detail::put_bytes(buf, model.net.depth(), 4);
  for (const Layer& l : model.net.layers()) {
    detail::put_bytes(buf, l.fan_out(), 4);
    buf.push_back(static_cast<std::uint8_t>(l.activation));
  }
  const Vec w = model.net.flatten();
  detail::put_bytes(buf, w.size(), 8);
  for (double x : w) detail::put_bytes(buf, std::bit_cast<std::uint64_t>(x), 8);
  detail::put_bytes(buf, detail::fnv1a(buf, buf.size()), 8);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("save_checkpoint: cannot open " + path);
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("save_checkpoint: write failed for " + path);
}

inline ModelBundle load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("load_checkpoint: cannot open " + path);
  std::vector<std::uint8_t> buf((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());
  if (buf.size() < 12) throw IoError("checkpoint: truncated file");
  if (buf[0] != 'S' || buf[1] != 'R' || buf[2] != 'R' || buf[3] != 'N')
    throw IoError("checkpoint: bad magic");

  const std::uint64_t stored_sum = detail::fnv1a(buf, buf.size() - 8);
  std::size_t tail = buf.size() - 8;
  if (detail::get_bytes(buf, tail, 8) != stored_sum)
    throw IoError("checkpoint: checksum mismatch, file corrupted");

  std::size_t pos = 4;
  const std::uint64_t version = detail::get_bytes(buf, pos, 2);
  if (version != kCheckpointVersion)
    throw IoError("checkpoint: unsupported format version " + std::to_string(version));
  const std::uint64_t loss_kind = detail::get_bytes(buf, pos, 1);
  if (loss_kind > 1) throw IoError("checkpoint: bad loss kind");
  const std::uint64_t input_dim = detail::get_bytes(buf, pos, 4);
  const std::uint64_t n_layers = detail::get_bytes(buf, pos, 4);
  if (n_layers == 0 || n_layers > 1024) throw IoError("checkpoint: bad layer count");

  std::vector<Layer> layers;
  std::size_t prev = input_dim;
  std::size_t param_total = 0;
  for (std::uint64_t l = 0; l < n_layers; ++l) {
    const std::uint64_t fan_out = detail::get_bytes(buf, pos, 4);
    const std::uint64_t act = detail::get_bytes(buf, pos, 1);
    if (act > static_cast<std::uint64_t>(ActivationKind::relu))
      throw IoError("checkpoint: bad activation kind");
    Layer layer;
    layer.weights = Mat(fan_out, prev);
    layer.bias.assign(fan_out, 0.0);
    layer.activation = static_cast<ActivationKind>(act);
    param_total += layer.weights.size() + layer.bias.size();
    layers.push_back(std::move(layer));
    prev = fan_out;
  }
  const std::uint64_t n_params = detail::get_bytes(buf, pos, 8);
  if (n_params != param_total)
    throw IoError("checkpoint: parameter count does not match architecture");
  Vec w(n_params);
  for (std::uint64_t i = 0; i < n_params; ++i)
    w[i] = std::bit_cast<double>(detail::get_bytes(buf, pos, 8));
  if (!all_finite(w)) throw IoError("checkpoint: non-finite parameter");

  ModelBundle model;
  model.loss.kind = loss_kind == 0 ? LossKind::mse : LossKind::sigmoid_bce;
  model.net = Network(input_dim, std::move(layers));
  model.net.set_params(w);
  return model;
}

}  // namespace srr
