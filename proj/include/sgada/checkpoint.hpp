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

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "sgada/params.hpp"
#include "sgada/tensor.hpp"

namespace sgada {

struct StoredTensor {
  std::string name;
  Shape shape;
  std::vector<double> values;

  /// Bitwise on values, so identical NaNs compare equal.
  friend bool operator==(const StoredTensor&, const StoredTensor&);
};

/// Complete training snapshot.
///
/// Layout (little-endian): "STCK", u16 version, u64 digest of the config
/// text, config text, u32 count + (name, u64) scalar table, u32 count +
/// (name, f64) scalar table, u32 count + (name, u8 rank, u64 dims, f64
/// values) tensor table, u32 crc32 of every preceding byte.
struct Checkpoint {
  std::string config_text;
  std::map<std::string, std::uint64_t> u64;
  std::map<std::string, double> f64;
  std::vector<StoredTensor> tensors;

  const StoredTensor* find(std::string_view name) const;
  /// Throws DataError when `name` is absent.
  std::uint64_t get_u64(const std::string& name) const;
  double get_f64(const std::string& name) const;

  /// Appends every tensor of `params` under `prefix`.
  void add_params(const std::string& prefix, const ParamList& params);
  /// Loads tensors stored under `prefix` into `params`; every parameter must
  /// be present with a matching shape.
  void load_params(const std::string& prefix, const ParamList& params) const;

  /// Bitwise on every stored double.
  friend bool operator==(const Checkpoint&, const Checkpoint&);
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
/// Throws DataError on corruption (bad magic, checksum, digest, truncation).
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace sgada
