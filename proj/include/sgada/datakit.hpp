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
#include <optional>
#include <string>
#include <vector>

#include "sgada/tensor.hpp"

namespace sgada {

/// 8-bit raster, row-major, channels interleaved.
struct Image {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint8_t channels = 1;
  std::vector<std::uint8_t> pixels;

  friend bool operator==(const Image&, const Image&) = default;
};

/// Binary PGM (P5) or PPM (P6). maxval below 255 is rescaled to 0..255.
/// Throws DataError on malformed input.
Image decode_pnm(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> encode_pnm(const Image& image);
Image read_pnm(const std::filesystem::path& path);
void write_pnm(const std::filesystem::path& path, const Image& image);

/// Luminance 0.299 R + 0.587 G + 0.114 B, rounded half up. One-channel input
/// is returned unchanged.
Image to_grayscale(const Image& image);

/// Bilinear, corner-aligned resample to target x target, rounded half up.
/// Sampling positions are exact rationals, so the result is platform
/// independent. Throws ConfigError unless target is a power of two.
Image resize(const Image& image, std::uint32_t target);

struct DatasetRecord {
  std::uint8_t label = 0;
  std::uint16_t width = 0;
  std::uint16_t height = 0;
  std::uint8_t channels = 1;
  std::vector<std::uint8_t> pixels;

  friend bool operator==(const DatasetRecord&, const DatasetRecord&) = default;
};

/// In-memory form of a record file: header fields plus records.
struct RecordSet {
  std::uint16_t resolution = 0;
  std::uint8_t channels = 1;
  std::vector<DatasetRecord> records;

  std::size_t size() const noexcept { return records.size(); }
};

/// "BTRC", u16 version, u64 count, u16 resolution, u8 channels, then per
/// record: u8 label, u16 width, u16 height, u8 channels, pixels, u32 crc32
/// of the pixel bytes. Little-endian throughout.
std::vector<std::uint8_t> encode_records(const RecordSet& set);
/// Throws DataError on truncation, count mismatch, header mismatch or a
/// failed checksum.
RecordSet decode_records(const std::vector<std::uint8_t>& bytes);
void write_records(const std::filesystem::path& path, const RecordSet& set);
RecordSet read_records(const std::filesystem::path& path);

struct BuildSummary {
  std::size_t count = 0;
  std::vector<std::string> class_names;
  std::vector<std::size_t> per_class;
  std::size_t skipped = 0;
};

/// Packs input_dir/<class>/<file> images into a record file. Classes are the
/// sorted subdirectory names unless `class_names` fixes the label order.
/// Files are visited in lexicographic order; undecodable files are skipped
/// with a warning on stderr. Throws DataError when nothing was packed.
BuildSummary build_records(const std::filesystem::path& input_dir,
                           const std::optional<std::vector<std::string>>& class_names,
                           std::uint16_t resolution, const std::filesystem::path& out_path,
                           std::uint8_t channels = 1);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
};

/// Stratified seeded split: llround(val_fraction * n_c) of each class go to
/// validation. Both lists are sorted. Throws ConfigError unless
/// 0 <= val_fraction < 1.
Split split_records(const RecordSet& set, double val_fraction, std::uint64_t seed);

/// Selected records as [N, C, R, R] in [-1, 1] via p / 127.5 - 1.
Tensor records_to_tensor(const RecordSet& set, const std::vector<std::size_t>& ids);

/// One image of a [N, C, H, W] tensor mapped back to 8 bits by clamping
/// (x + 1) * 127.5 to [0, 255] and rounding half up.
Image tensor_to_image(const Tensor& images, std::size_t index);

}  // namespace sgada
