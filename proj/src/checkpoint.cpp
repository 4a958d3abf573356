// Copyright 2026 The sgada Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sgada/checkpoint.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>

#include "sgada/binary_io.hpp"
#include "sgada/errors.hpp"

namespace sgada {

namespace {

constexpr std::uint16_t kCheckpointVersion = 1;

std::uint32_t checksum(const std::uint8_t* data, std::size_t size) {
  return static_cast<std::uint32_t>(crc32(crc32(0L, Z_NULL, 0), data, static_cast<uInt>(size)));
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

}  // namespace

bool operator==(const StoredTensor& a, const StoredTensor& b) {
  return a.name == b.name && a.shape == b.shape && same_bits(a.values, b.values);
}

bool operator==(const Checkpoint& a, const Checkpoint& b) {
  if (a.config_text != b.config_text || a.u64 != b.u64 || a.tensors != b.tensors) return false;
  if (a.f64.size() != b.f64.size()) return false;
  for (auto ia = a.f64.begin(), ib = b.f64.begin(); ia != a.f64.end(); ++ia, ++ib) {
    if (ia->first != ib->first) return false;
    if (std::bit_cast<std::uint64_t>(ia->second) != std::bit_cast<std::uint64_t>(ib->second)) {
      return false;
    }
  }
  return true;
}

const StoredTensor* Checkpoint::find(std::string_view name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

std::uint64_t Checkpoint::get_u64(const std::string& name) const {
  auto it = u64.find(name);
  if (it == u64.end()) throw DataError("checkpoint lacks scalar '" + name + "'");
  return it->second;
}

double Checkpoint::get_f64(const std::string& name) const {
  auto it = f64.find(name);
  if (it == f64.end()) throw DataError("checkpoint lacks scalar '" + name + "'");
  return it->second;
}

void Checkpoint::add_params(const std::string& prefix, const ParamList& params) {
  for (const auto& p : params) {
    tensors.push_back({prefix + p.name, p.tensor.shape(), p.tensor.to_vector()});
  }
}

void Checkpoint::load_params(const std::string& prefix, const ParamList& params) const {
  for (const auto& p : params) {
    const StoredTensor* t = find(prefix + p.name);
    if (t == nullptr) throw DataError("checkpoint lacks tensor '" + prefix + p.name + "'");
    if (t->shape != p.tensor.shape()) {
      throw DataError("checkpoint tensor '" + prefix + p.name + "' has shape " +
                      shape_str(t->shape) + ", expected " + shape_str(p.tensor.shape()));
    }
    Tensor dst = p.tensor;
    dst.assign(t->values);
  }
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  ByteWriter w;
  w.magic("STCK");
  w.u16(kCheckpointVersion);
  w.u64(fnv1a(ckpt.config_text));
  w.str(ckpt.config_text);
  w.u32(static_cast<std::uint32_t>(ckpt.u64.size()));
  for (const auto& [name, v] : ckpt.u64) {
    w.str(name);
    w.u64(v);
  }
  w.u32(static_cast<std::uint32_t>(ckpt.f64.size()));
  for (const auto& [name, v] : ckpt.f64) {
    w.str(name);
    w.f64(v);
  }
  w.u32(static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto& t : ckpt.tensors) {
    if (shape_numel(t.shape) != t.values.size()) {
      throw ShapeError("checkpoint tensor '" + t.name + "' value count does not match its shape");
    }
    w.str(t.name);
    w.u8(static_cast<std::uint8_t>(t.shape.size()));
    for (std::size_t d : t.shape) w.u64(d);
    for (double v : t.values) w.f64(v);
  }
  const auto& bytes = w.bytes();
  w.u32(checksum(bytes.data(), bytes.size()));
  return std::move(w.bytes());
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4) throw DataError("checkpoint: truncated");
  const std::size_t body = bytes.size() - 4;
  ByteReader tail(bytes.data() + body, 4, "checkpoint");
  if (tail.u32() != checksum(bytes.data(), body)) throw DataError("checkpoint: checksum mismatch");

  ByteReader r(bytes.data(), body, "checkpoint");
  r.expect_magic("STCK");
  const std::uint16_t version = r.u16();
  if (version != kCheckpointVersion) r.fail("unsupported version " + std::to_string(version));
  const std::uint64_t digest = r.u64();
  Checkpoint ckpt;
  ckpt.config_text = r.str();
  if (fnv1a(ckpt.config_text) != digest) r.fail("config digest mismatch");
  for (std::uint32_t n = r.u32(), i = 0; i < n; ++i) {
    std::string name = r.str();
    ckpt.u64[std::move(name)] = r.u64();
  }
  for (std::uint32_t n = r.u32(), i = 0; i < n; ++i) {
    std::string name = r.str();
    ckpt.f64[std::move(name)] = r.f64();
  }
  for (std::uint32_t n = r.u32(), i = 0; i < n; ++i) {
    StoredTensor t;
    t.name = r.str();
    const std::uint8_t rank = r.u8();
    for (std::uint8_t k = 0; k < rank; ++k) t.shape.push_back(r.u64());
    const std::size_t count = shape_numel(t.shape);
    if (count > r.remaining() / 8) r.fail("tensor '" + t.name + "' exceeds file size");
    t.values.resize(count);
    for (double& v : t.values) v = r.f64();
    ckpt.tensors.push_back(std::move(t));
  }
  if (r.remaining() != 0) r.fail("trailing bytes");
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  write_file_bytes(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  try {
    return decode_checkpoint(read_file_bytes(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace sgada
