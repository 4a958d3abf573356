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
#include <string>
#include <string_view>
#include <vector>

#include "sgada/datakit.hpp"

namespace sgada {

/// Procedural grayscale corpora for desk-scale runs.
///
///   two-mode         one Gaussian blob near either the upper-left or the
///                    lower-right quadrant (label = mode)
///   symmetric-blobs  a mirror-symmetric pair of blobs above a central one
///   rings            one centred ring of random radius
///
/// Blob centres, widths and amplitudes are jittered per image.
std::vector<std::string> toy_corpus_kinds();

/// Throws ConfigError for an unknown kind or a zero count.
RecordSet make_toy_corpus(std::string_view kind, std::size_t count, std::uint16_t resolution,
                          std::uint64_t seed);

}  // namespace sgada
