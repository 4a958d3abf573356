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

#include "sgada/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <variant>

#include "sgada/errors.hpp"
#include "sgada/params.hpp"

namespace sgada {

namespace {

using FieldRef = std::variant<std::int64_t TrainConfig::*, double TrainConfig::*,
                              std::string TrainConfig::*>;

struct Field {
  const char* name;
  FieldRef ref;
};

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"data", &TrainConfig::data},
      {"resolution", &TrainConfig::resolution},
      {"channels", &TrainConfig::channels},
      {"z_dim", &TrainConfig::z_dim},
      {"w_dim", &TrainConfig::w_dim},
      {"mapping_depth", &TrainConfig::mapping_depth},
      {"val_frac", &TrainConfig::val_frac},
      {"batch_size", &TrainConfig::batch_size},
      {"total_kimg", &TrainConfig::total_kimg},
      {"tick_kimg", &TrainConfig::tick_kimg},
      {"snapshot_every_ticks", &TrainConfig::snapshot_every_ticks},
      {"seed", &TrainConfig::seed},
      {"lr_g", &TrainConfig::lr_g},
      {"lr_d", &TrainConfig::lr_d},
      {"adam_beta1", &TrainConfig::adam_beta1},
      {"adam_beta2", &TrainConfig::adam_beta2},
      {"adam_eps", &TrainConfig::adam_eps},
      {"mapping_lr_mult", &TrainConfig::mapping_lr_mult},
      {"r1_gamma", &TrainConfig::r1_gamma},
      {"r1_interval", &TrainConfig::r1_interval},
      {"pl_weight", &TrainConfig::pl_weight},
      {"pl_interval", &TrainConfig::pl_interval},
      {"pl_decay", &TrainConfig::pl_decay},
      {"pl_batch_shrink", &TrainConfig::pl_batch_shrink},
      {"style_mixing_prob", &TrainConfig::style_mixing_prob},
      {"augment", &TrainConfig::augment},
      {"ada_mode", &TrainConfig::ada_mode},
      {"ada_target", &TrainConfig::ada_target},
      {"ada_horizon", &TrainConfig::ada_horizon},
      {"ada_p_max", &TrainConfig::ada_p_max},
      {"ada_interval", &TrainConfig::ada_interval},
      {"ada_initial_p", &TrainConfig::ada_initial_p},
      {"embedder", &TrainConfig::embedder},
      {"embedder_seed", &TrainConfig::embedder_seed},
      {"n_gen", &TrainConfig::n_gen},
      {"kid_block_size", &TrainConfig::kid_block_size},
      {"kid_blocks", &TrainConfig::kid_blocks},
      {"transfer_from", &TrainConfig::transfer_from},
  };
  return table;
}

const Field& find_field(std::string_view key) {
  for (const auto& f : fields()) {
    if (key == f.name) return f;
  }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::int64_t parse_int(std::string_view key, std::string_view v) {
  std::int64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("config key '" + std::string(key) + "' expects an integer, got '" +
                      std::string(v) + "'");
  }
  return out;
}

double parse_double(std::string_view key, std::string_view v) {
  // strtod accepts the same forms on every libc; from_chars<double> is not
  // available on all supported toolchains.
  const std::string s(v);
  char* end = nullptr;
  const double out = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(out)) {
    throw ConfigError("config key '" + std::string(key) + "' expects a finite number, got '" + s +
                      "'");
  }
  return out;
}

}  // namespace

void TrainConfig::set(std::string_view key, std::string_view value) {
  const Field& f = find_field(key);
  value = trim(value);
  std::visit(
      [&](auto member) {
        using T = std::remove_reference_t<decltype(this->*member)>;
        if constexpr (std::is_same_v<T, std::int64_t>) {
          this->*member = parse_int(key, value);
        } else if constexpr (std::is_same_v<T, double>) {
          this->*member = parse_double(key, value);
        } else {
          this->*member = std::string(value);
        }
      },
      f.ref);
}

std::string TrainConfig::get(std::string_view key) const {
  const Field& f = find_field(key);
  return std::visit(
      [&](auto member) -> std::string {
        using T = std::remove_cvref_t<decltype(this->*member)>;
        if constexpr (std::is_same_v<T, std::int64_t>) {
          return std::to_string(this->*member);
        } else if constexpr (std::is_same_v<T, double>) {
          return format_double(this->*member);
        } else {
          return this->*member;
        }
      },
      f.ref);
}

std::vector<std::string> TrainConfig::keys() {
  std::vector<std::string> out;
  for (const auto& f : fields()) out.emplace_back(f.name);
  return out;
}

void TrainConfig::merge_text(std::string_view text) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

void TrainConfig::merge_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  merge_text(ss.str());
}

TrainConfig TrainConfig::from_text(std::string_view text) {
  TrainConfig c;
  c.merge_text(text);
  return c;
}

std::string TrainConfig::to_text() const {
  std::string out;
  for (const auto& f : fields()) {
    out += f.name;
    out += " = ";
    out += get(f.name);
    out += '\n';
  }
  return out;
}

std::uint64_t TrainConfig::digest() const { return fnv1a(to_text()); }

std::map<std::size_t, std::size_t> parse_channel_map(std::string_view text) {
  std::map<std::size_t, std::size_t> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const std::string_view item = trim(text.substr(0, comma));
    text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
    const auto colon = item.find(':');
    if (colon == std::string_view::npos) {
      throw ConfigError("channels: expected resolution:count pairs, got '" + std::string(item) + "'");
    }
    const auto r = parse_int("channels", trim(item.substr(0, colon)));
    const auto c = parse_int("channels", trim(item.substr(colon + 1)));
    if (r <= 0 || c <= 0) throw ConfigError("channels: entries must be positive");
    out[static_cast<std::size_t>(r)] = static_cast<std::size_t>(c);
  }
  return out;
}

void TrainConfig::validate() const {
  auto positive = [](std::int64_t v, const char* name) {
    if (v <= 0) throw ConfigError(std::string(name) + " must be positive");
  };
  positive(batch_size, "batch_size");
  positive(snapshot_every_ticks, "snapshot_every_ticks");
  positive(r1_interval, "r1_interval");
  positive(pl_interval, "pl_interval");
  positive(pl_batch_shrink, "pl_batch_shrink");
  positive(n_gen, "n_gen");
  positive(kid_blocks, "kid_blocks");
  if (batch_size < 2) throw ConfigError("batch_size must be at least 2");
  if (kid_block_size < 2) throw ConfigError("kid_block_size must be at least 2");
  if (total_kimg < 0.0) throw ConfigError("total_kimg must be non-negative");
  if (tick_kimg <= 0.0) throw ConfigError("tick_kimg must be positive");
  if (tick_images() <= 0) throw ConfigError("tick_kimg must cover at least one image");
  if (lr_g <= 0.0 || lr_d <= 0.0) throw ConfigError("learning rates must be positive");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw ConfigError("adam betas must lie in [0, 1)");
  }
  if (adam_eps <= 0.0) throw ConfigError("adam_eps must be positive");
  if (mapping_lr_mult <= 0.0) throw ConfigError("mapping_lr_mult must be positive");
  if (r1_gamma < 0.0 || pl_weight < 0.0) throw ConfigError("regularization weights must be >= 0");
  if (!(pl_decay >= 0.0 && pl_decay < 1.0)) throw ConfigError("pl_decay must lie in [0, 1)");
  if (!(style_mixing_prob >= 0.0 && style_mixing_prob <= 1.0)) {
    throw ConfigError("style_mixing_prob must lie in [0, 1]");
  }
  if (!(val_frac >= 0.0 && val_frac < 1.0)) throw ConfigError("val_frac must lie in [0, 1)");
  if (augment != "ada" && augment != "fixed" && augment != "off") {
    throw ConfigError("augment must be ada, fixed or off");
  }
  if (n_gen < 2 * kid_block_size) throw ConfigError("n_gen must be at least 2 * kid_block_size");
  const ControllerConfig ada = controller();
  ada.validate();
  if (!(ada_initial_p >= 0.0 && ada_initial_p <= ada_p_max)) {
    throw ConfigError("ada_initial_p must lie in [0, ada_p_max]");
  }
  parse_embedder(embedder);
  synthesis().validate();
}

SynthesisConfig TrainConfig::synthesis(std::size_t image_channels) const {
  if (resolution <= 0 || z_dim <= 0 || w_dim <= 0 || mapping_depth <= 0) {
    throw ConfigError("resolution, z_dim, w_dim and mapping_depth must be positive");
  }
  SynthesisConfig s;
  s.target_resolution = static_cast<std::size_t>(resolution);
  s.channels = parse_channel_map(channels);
  s.z_dim = static_cast<std::size_t>(z_dim);
  s.w_dim = static_cast<std::size_t>(w_dim);
  s.mapping_depth = static_cast<std::size_t>(mapping_depth);
  s.image_channels = image_channels;
  return s;
}

ControllerConfig TrainConfig::controller() const {
  ControllerConfig c;
  c.target = ada_target;
  c.mode = parse_control_mode(ada_mode);
  c.horizon_images = ada_horizon;
  c.p_max = ada_p_max;
  c.update_interval = ada_interval;
  return c;
}

Embedder TrainConfig::metric_embedder() const {
  return Embedder{parse_embedder(embedder), static_cast<std::uint64_t>(embedder_seed)};
}

KidOptions TrainConfig::kid_options(std::uint64_t s) const {
  return KidOptions{static_cast<std::size_t>(kid_block_size), static_cast<std::size_t>(kid_blocks), s};
}

std::int64_t TrainConfig::total_images() const { return std::llround(total_kimg * 1000.0); }
std::int64_t TrainConfig::tick_images() const { return std::llround(tick_kimg * 1000.0); }

}  // namespace sgada
