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

#include "sgada/datakit.hpp"

#include <zlib.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iostream>
#include <numeric>

#include "sgada/binary_io.hpp"
#include "sgada/errors.hpp"
#include "sgada/rng.hpp"

namespace sgada {

namespace {

constexpr std::uint16_t kRecordVersion = 1;

std::uint32_t checksum(const std::vector<std::uint8_t>& bytes) {
  return static_cast<std::uint32_t>(
      crc32(crc32(0L, Z_NULL, 0), bytes.data(), static_cast<uInt>(bytes.size())));
}

std::uint8_t round_half_up(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
}

// Header tokenizer: whitespace and '#' comments separate tokens.
class PnmHeader {
 public:
  explicit PnmHeader(const std::vector<std::uint8_t>& b) : b_(b) {}

  std::uint32_t number() {
    skip();
    if (pos_ >= b_.size() || !std::isdigit(b_[pos_])) throw DataError("pnm: malformed header");
    std::uint64_t v = 0;
    while (pos_ < b_.size() && std::isdigit(b_[pos_])) {
      v = v * 10 + (b_[pos_++] - '0');
      if (v > 0xFFFFFFFFULL) throw DataError("pnm: header value overflow");
    }
    return static_cast<std::uint32_t>(v);
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_start() {
    if (pos_ >= b_.size() || !std::isspace(b_[pos_])) throw DataError("pnm: malformed header");
    return pos_ + 1;
  }

 private:
  void skip() {
    while (pos_ < b_.size()) {
      if (b_[pos_] == '#') {
        while (pos_ < b_.size() && b_[pos_] != '\n') ++pos_;
      } else if (std::isspace(b_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<std::uint8_t>& b_;
  std::size_t pos_ = 2;
};

}  // namespace

Image decode_pnm(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    throw DataError("pnm: not a binary PGM/PPM file");
  }
  Image img;
  img.channels = bytes[1] == '5' ? 1 : 3;
  PnmHeader header(bytes);
  img.width = header.number();
  img.height = header.number();
  const std::uint32_t maxval = header.number();
  if (img.width == 0 || img.height == 0) throw DataError("pnm: empty image");
  if (maxval == 0 || maxval > 255) throw DataError("pnm: only 8-bit maxval is supported");
  const std::size_t start = header.raster_start();
  const std::size_t size = std::size_t{img.width} * img.height * img.channels;
  if (bytes.size() - start < size) throw DataError("pnm: truncated raster");
  img.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(start),
                    bytes.begin() + static_cast<std::ptrdiff_t>(start + size));
  if (maxval != 255) {
    for (auto& p : img.pixels) {
      if (p > maxval) throw DataError("pnm: sample exceeds maxval");
      p = static_cast<std::uint8_t>((p * 255u * 2u + maxval) / (2u * maxval));
    }
  }
  return img;
}

std::vector<std::uint8_t> encode_pnm(const Image& image) {
  if (image.channels != 1 && image.channels != 3) {
    throw DataError("pnm: only 1 or 3 channels can be written");
  }
  const std::string head = std::string(image.channels == 1 ? "P5" : "P6") + "\n" +
                           std::to_string(image.width) + " " + std::to_string(image.height) +
                           "\n255\n";
  std::vector<std::uint8_t> out(head.begin(), head.end());
  out.insert(out.end(), image.pixels.begin(), image.pixels.end());
  return out;
}

Image read_pnm(const std::filesystem::path& path) {
  try {
    return decode_pnm(read_file_bytes(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_pnm(const std::filesystem::path& path, const Image& image) {
  write_file_bytes(path, encode_pnm(image));
}

Image to_grayscale(const Image& image) {
  if (image.channels == 1) return image;
  if (image.channels != 3) throw DataError("to_grayscale: expected 1 or 3 channels");
  Image out;
  out.width = image.width;
  out.height = image.height;
  out.channels = 1;
  const std::size_t n = std::size_t{image.width} * image.height;
  out.pixels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto* p = &image.pixels[3 * i];
    out.pixels[i] = round_half_up(0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]);
  }
  return out;
}

Image resize(const Image& image, std::uint32_t target) {
  if (image.width == 0 || image.height == 0 || image.pixels.empty()) {
    throw DataError("resize: empty image");
  }
  if (target == 0 || (target & (target - 1)) != 0) {
    throw ConfigError("resize: target must be a power of two, got " + std::to_string(target));
  }
  Image out;
  out.width = target;
  out.height = target;
  out.channels = image.channels;
  out.pixels.resize(std::size_t{target} * target * image.channels);
  // Source position i * (S - 1) / (T - 1) as integer part plus exact fraction.
  struct Tap {
    std::uint32_t lo, hi;
    double frac;
  };
  auto taps = [target](std::uint32_t src) {
    std::vector<Tap> t(target);
    const std::uint64_t den = target > 1 ? target - 1 : 1;
    for (std::uint32_t i = 0; i < target; ++i) {
      const std::uint64_t num = target > 1 ? std::uint64_t{i} * (src - 1) : 0;
      const auto lo = static_cast<std::uint32_t>(num / den);
      const std::uint64_t rem = num % den;
      t[i] = {lo, std::min(lo + 1, src - 1), static_cast<double>(rem) / static_cast<double>(den)};
    }
    return t;
  };
  const auto ty = taps(image.height);
  const auto tx = taps(image.width);
  const std::size_t c = image.channels;
  auto at = [&](std::uint32_t y, std::uint32_t x, std::size_t ch) {
    return static_cast<double>(image.pixels[(std::size_t{y} * image.width + x) * c + ch]);
  };
  for (std::uint32_t i = 0; i < target; ++i) {
    for (std::uint32_t j = 0; j < target; ++j) {
      for (std::size_t ch = 0; ch < c; ++ch) {
        const Tap& a = ty[i];
        const Tap& b = tx[j];
        double v = at(a.lo, b.lo, ch);
        if (a.frac != 0.0 || b.frac != 0.0) {
          const double top = at(a.lo, b.lo, ch) * (1.0 - b.frac) + at(a.lo, b.hi, ch) * b.frac;
          const double bottom = at(a.hi, b.lo, ch) * (1.0 - b.frac) + at(a.hi, b.hi, ch) * b.frac;
          v = top * (1.0 - a.frac) + bottom * a.frac;
        }
        out.pixels[(std::size_t{i} * target + j) * c + ch] = round_half_up(v);
      }
    }
  }
  return out;
}

std::vector<std::uint8_t> encode_records(const RecordSet& set) {
  ByteWriter w;
  w.magic("BTRC");
  w.u16(kRecordVersion);
  w.u64(set.records.size());
  w.u16(set.resolution);
  w.u8(set.channels);
  for (const auto& r : set.records) {
    if (r.width != set.resolution || r.height != set.resolution || r.channels != set.channels ||
        r.pixels.size() != std::size_t{r.width} * r.height * r.channels) {
      throw DataError("encode_records: record does not match the file header");
    }
    w.u8(r.label);
    w.u16(r.width);
    w.u16(r.height);
    w.u8(r.channels);
    w.raw(r.pixels.data(), r.pixels.size());
    w.u32(checksum(r.pixels));
  }
  return std::move(w.bytes());
}

RecordSet decode_records(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes, "record file");
  r.expect_magic("BTRC");
  const std::uint16_t version = r.u16();
  if (version != kRecordVersion) r.fail("unsupported record version " + std::to_string(version));
  const std::uint64_t count = r.u64();
  RecordSet set;
  set.resolution = r.u16();
  set.channels = r.u8();
  const std::size_t per = std::size_t{set.resolution} * set.resolution * set.channels;
  if (count > r.remaining() / (per + 10)) r.fail("record count exceeds file size");
  set.records.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    DatasetRecord rec;
    rec.label = r.u8();
    rec.width = r.u16();
    rec.height = r.u16();
    rec.channels = r.u8();
    if (rec.width != set.resolution || rec.height != set.resolution ||
        rec.channels != set.channels) {
      r.fail("record " + std::to_string(i) + " disagrees with the header geometry");
    }
    const std::uint8_t* p = r.raw(per);
    rec.pixels.assign(p, p + per);
    if (r.u32() != checksum(rec.pixels)) r.fail("checksum mismatch in record " + std::to_string(i));
    set.records.push_back(std::move(rec));
  }
  if (r.remaining() != 0) r.fail("trailing bytes after the declared record count");
  return set;
}

void write_records(const std::filesystem::path& path, const RecordSet& set) {
  write_file_bytes(path, encode_records(set));
}

RecordSet read_records(const std::filesystem::path& path) {
  try {
    return decode_records(read_file_bytes(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

BuildSummary build_records(const std::filesystem::path& input_dir,
                           const std::optional<std::vector<std::string>>& class_names,
                           std::uint16_t resolution, const std::filesystem::path& out_path,
                           std::uint8_t channels) {
  namespace fs = std::filesystem;
  if (channels != 1 && channels != 3) throw ConfigError("dataset channels must be 1 or 3");
  if (!fs::is_directory(input_dir)) throw DataError("not a directory: " + input_dir.string());
  BuildSummary summary;
  if (class_names) {
    summary.class_names = *class_names;
  } else {
    for (const auto& entry : fs::directory_iterator(input_dir)) {
      if (entry.is_directory()) summary.class_names.push_back(entry.path().filename().string());
    }
    std::sort(summary.class_names.begin(), summary.class_names.end());
  }
  if (summary.class_names.size() > 256) throw ConfigError("at most 256 classes are supported");
  summary.per_class.assign(summary.class_names.size(), 0);

  RecordSet set;
  set.resolution = resolution;
  set.channels = channels;
  for (std::size_t label = 0; label < summary.class_names.size(); ++label) {
    const fs::path dir = input_dir / summary.class_names[label];
    if (!fs::is_directory(dir)) throw DataError("missing class directory " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
      if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      Image img;
      try {
        img = read_pnm(file);
      } catch (const DataError& e) {
        std::cerr << "warning: skipping " << e.what() << "\n";
        ++summary.skipped;
        continue;
      }
      if (channels == 1) img = to_grayscale(img);
      if (img.channels != channels) {
        std::cerr << "warning: skipping " << file.string() << ": channel count mismatch\n";
        ++summary.skipped;
        continue;
      }
      img = resize(img, resolution);
      DatasetRecord rec;
      rec.label = static_cast<std::uint8_t>(label);
      rec.width = resolution;
      rec.height = resolution;
      rec.channels = channels;
      rec.pixels = std::move(img.pixels);
      set.records.push_back(std::move(rec));
      ++summary.per_class[label];
    }
  }
  summary.count = set.records.size();
  if (summary.count == 0) throw DataError("no decodable images under " + input_dir.string());
  write_records(out_path, set);
  return summary;
}

Split split_records(const RecordSet& set, double val_fraction, std::uint64_t seed) {
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) {
    throw ConfigError("validation fraction must lie in [0, 1)");
  }
  std::vector<std::vector<std::size_t>> by_class(256);
  for (std::size_t i = 0; i < set.records.size(); ++i) by_class[set.records[i].label].push_back(i);
  Split split;
  for (std::size_t label = 0; label < by_class.size(); ++label) {
    auto& ids = by_class[label];
    if (ids.empty()) continue;
    CounterRng rng(hash_key(seed, label));
    for (std::size_t i = ids.size(); i > 1; --i) std::swap(ids[i - 1], ids[rng.below(i)]);
    const auto n_val = static_cast<std::size_t>(
        std::llround(val_fraction * static_cast<double>(ids.size())));
    split.val.insert(split.val.end(), ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_val));
    split.train.insert(split.train.end(), ids.begin() + static_cast<std::ptrdiff_t>(n_val), ids.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.val.begin(), split.val.end());
  return split;
}

Tensor records_to_tensor(const RecordSet& set, const std::vector<std::size_t>& ids) {
  const std::size_t r = set.resolution;
  const std::size_t c = set.channels;
  const std::size_t plane = r * r;
  std::vector<double> v(ids.size() * c * plane);
  for (std::size_t n = 0; n < ids.size(); ++n) {
    const auto& px = set.records.at(ids[n]).pixels;
    // Records interleave channels; tensors are planar.
    for (std::size_t i = 0; i < plane; ++i) {
      for (std::size_t ch = 0; ch < c; ++ch) {
        v[(n * c + ch) * plane + i] = px[i * c + ch] / 127.5 - 1.0;
      }
    }
  }
  return Tensor::from_data({ids.size(), c, r, r}, std::move(v));
}

Image tensor_to_image(const Tensor& images, std::size_t index) {
  if (images.rank() != 4) throw ShapeError("tensor_to_image: expected [N,C,H,W]");
  Image img;
  img.channels = static_cast<std::uint8_t>(images.dim(1));
  img.height = static_cast<std::uint32_t>(images.dim(2));
  img.width = static_cast<std::uint32_t>(images.dim(3));
  const std::size_t plane = std::size_t{img.width} * img.height;
  const std::size_t c = img.channels;
  img.pixels.resize(plane * c);
  const auto v = images.data();
  for (std::size_t i = 0; i < plane; ++i) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      img.pixels[i * c + ch] = round_half_up((v[(index * c + ch) * plane + i] + 1.0) * 127.5);
    }
  }
  return img;
}

}  // namespace sgada
