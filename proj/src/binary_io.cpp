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

#include "sgada/binary_io.hpp"

#include <fstream>
#include <iterator>

#include "sgada/errors.hpp"

namespace sgada {

std::uint64_t ByteReader::get(std::size_t width) {
  if (remaining() < width) fail("truncated input");
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < width; ++i) {
    v |= static_cast<std::uint64_t>(data_[offset_ + i]) << (8 * i);
  }
  offset_ += width;
  return v;
}

const std::uint8_t* ByteReader::raw(std::size_t size) {
  if (remaining() < size) fail("truncated input");
  const std::uint8_t* p = data_ + offset_;
  offset_ += size;
  return p;
}

void ByteReader::expect_magic(std::string_view tag) {
  const std::uint8_t* p = raw(tag.size());
  if (std::memcmp(p, tag.data(), tag.size()) != 0) {
    fail("bad magic, expected '" + std::string(tag) + "'");
  }
}

std::string ByteReader::str() {
  const std::uint32_t n = u32();
  const std::uint8_t* p = raw(n);
  return std::string(reinterpret_cast<const char*>(p), n);
}

void ByteReader::fail(const std::string& what) const {
  throw DataError(context_ + ": " + what + " at byte " + std::to_string(offset_));
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw DataError("read failure on " + path.string());
  return bytes;
}

void write_file_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failure on " + path.string());
}

}  // namespace sgada
