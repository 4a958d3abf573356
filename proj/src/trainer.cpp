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

#include "sgada/trainer.hpp"

#include <bit>
#include <cmath>
#include <limits>

#include "sgada/errors.hpp"
#include "sgada/ops.hpp"

namespace sgada {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kEvalChunk = 50;

enum SeedStream : std::uint64_t {
  kGeneratorInit = 1,
  kDiscriminatorInit = 2,
  kTraining = 3,
  kMetrics = 4,
  kSplit = 5,
};

std::string csv_number(double v) { return std::isfinite(v) ? format_double(v) : std::string(); }

std::uint64_t seed_of(const TrainConfig& c, SeedStream s) {
  return hash_key(static_cast<std::uint64_t>(c.seed), s);
}

std::vector<double> lr_multipliers(const ParamList& params, double mapping_mult) {
  std::vector<double> out;
  for (const auto& p : params) {
    out.push_back(equalized_lr_multiplier(p.name, p.tensor.shape(), mapping_mult));
  }
  return out;
}

AdamOptions adam_options(const TrainConfig& c, double lr) {
  return AdamOptions{lr, c.adam_beta1, c.adam_beta2, c.adam_eps};
}

void store_moments(Checkpoint& ckpt, const std::string& prefix, const Adam& adam) {
  const auto& params = adam.params();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Shape& shape = params[i].tensor.shape();
    ckpt.tensors.push_back({prefix + ".m/" + params[i].name, shape, adam.first_moments()[i]});
    ckpt.tensors.push_back({prefix + ".v/" + params[i].name, shape, adam.second_moments()[i]});
  }
  ckpt.u64[prefix + ".steps"] = static_cast<std::uint64_t>(adam.steps());
}

void load_moments(const Checkpoint& ckpt, const std::string& prefix, Adam& adam) {
  const auto& params = adam.params();
  for (std::size_t i = 0; i < params.size(); ++i) {
    for (const char* kind : {".m/", ".v/"}) {
      const std::string name = prefix + kind + params[i].name;
      const StoredTensor* t = ckpt.find(name);
      if (t == nullptr || t->values.size() != params[i].tensor.numel()) {
        throw DataError("checkpoint lacks optimizer state '" + name + "'");
      }
      (kind[1] == 'm' ? adam.first_moments() : adam.second_moments())[i] = t->values;
    }
  }
  adam.set_steps(static_cast<std::int64_t>(ckpt.get_u64(prefix + ".steps")));
}

void put_f64(Checkpoint& ckpt, const std::string& name, double v) { ckpt.f64[name] = v; }
void put_i64(Checkpoint& ckpt, const std::string& name, std::int64_t v) {
  ckpt.u64[name] = static_cast<std::uint64_t>(v);
}
std::int64_t get_i64(const Checkpoint& ckpt, const std::string& name) {
  return static_cast<std::int64_t>(ckpt.get_u64(name));
}

}  // namespace

std::string ReportRow::csv_header() {
  return "tick,kimg,fid,kid,p,r_t,r_v,loss_g,loss_d,embedder,n_real,n_gen";
}

std::string ReportRow::to_csv() const {
  return std::to_string(tick) + "," + csv_number(kimg) + "," + csv_number(fid) + "," +
         csv_number(kid) + "," + csv_number(p) + "," + csv_number(r_t) + "," + csv_number(r_v) +
         "," + csv_number(loss_g) + "," + csv_number(loss_d) + "," + embedder + "," +
         std::to_string(n_real) + "," + std::to_string(n_gen);
}

std::string TraceRow::csv_header() { return "iteration,kimg,p,loss_d,loss_g,r1,pl,r_t,r_v"; }

std::string TraceRow::to_csv() const {
  return std::to_string(iteration) + "," + csv_number(kimg) + "," + csv_number(p) + "," +
         csv_number(loss_d) + "," + csv_number(loss_g) + "," + csv_number(r1) + "," +
         csv_number(pl) + "," + csv_number(r_t) + "," + csv_number(r_v);
}

double TransferManifest::copied_fraction() const {
  const std::size_t total = copied.size() + reinitialized.size();
  return total == 0 ? 1.0 : static_cast<double>(copied.size()) / static_cast<double>(total);
}

std::string TransferManifest::to_text() const {
  std::string out = "# copied " + std::to_string(copied.size()) + "\n";
  for (const auto& n : copied) out += "copied " + n + "\n";
  out += "# reinitialized " + std::to_string(reinitialized.size()) + "\n";
  for (const auto& n : reinitialized) out += "reinitialized " + n + "\n";
  return out;
}

Features embed_records(const RecordSet& data, const Embedder& embedder) {
  std::vector<std::size_t> ids(data.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
  return embed(records_to_tensor(data, ids), embedder);
}

Tensor sample_images(const Generator& generator, std::size_t count, std::uint64_t seed) {
  NoGradGuard no_grad;
  const std::size_t zd = generator.config().z_dim;
  std::vector<Tensor> parts;
  for (std::size_t start = 0; start < count; start += kEvalChunk) {
    const std::size_t n = std::min(kEvalChunk, count - start);
    std::vector<double> z(n * zd);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < zd; ++j) z[i * zd + j] = normal_at(seed, start + i, j);
    }
    const Tensor w = generator.map_latent(Tensor::from_data({n, zd}, std::move(z)));
    parts.push_back(generator.synthesize(w, hash_key(seed, start, 0x6E6F)));
  }
  return concat(parts, 0);
}

ReportRow evaluate_generator(const Generator& generator, const Features& real_features,
                             const TrainConfig& config, std::uint64_t seed) {
  const Embedder embedder = config.metric_embedder();
  const auto n_gen = static_cast<std::size_t>(config.n_gen);
  const Features gen = embed(sample_images(generator, n_gen, seed), embedder);
  ReportRow row;
  row.fid = fid(gaussian_moments(real_features), gaussian_moments(gen));
  row.kid = kid(real_features, gen, config.kid_options(hash_key(seed, 0x6B6964)));
  row.embedder = embedder.name();
  row.n_real = static_cast<std::size_t>(real_features.rows());
  row.n_gen = n_gen;
  return row;
}

Generator load_generator(const Checkpoint& ckpt, std::size_t image_channels) {
  const TrainConfig config = TrainConfig::from_text(ckpt.config_text);
  Generator g(config.synthesis(image_channels), seed_of(config, kGeneratorInit));
  ckpt.load_params("G/", g.parameters());
  return g;
}

MetricRow snapshot_metrics(const Checkpoint& ckpt, const RecordSet& data, const Embedder& embedder,
                           std::size_t n_gen, std::uint64_t seed) {
  TrainConfig config = TrainConfig::from_text(ckpt.config_text);
  if (config.resolution != data.resolution) {
    throw ConfigError("checkpoint resolution does not match the dataset");
  }
  config.embedder = embedder.name();
  config.embedder_seed = static_cast<std::int64_t>(embedder.seed);
  config.n_gen = static_cast<std::int64_t>(n_gen);
  if (config.n_gen < 2 * config.kid_block_size) {
    throw DataError("n_gen must be at least twice the kid block size");
  }
  const Generator g = load_generator(ckpt, data.channels);
  const ReportRow row = evaluate_generator(g, embed_records(data, embedder), config, seed);
  MetricRow out;
  out.tick = static_cast<std::int64_t>(ckpt.u64.count("tick") ? ckpt.get_u64("tick") : 0);
  out.fid = row.fid;
  out.kid = row.kid;
  out.embedder = row.embedder;
  out.n_real = row.n_real;
  out.n_gen = row.n_gen;
  return out;
}

Image generate_grid(const Generator& generator, std::size_t rows, std::size_t cols,
                    std::uint64_t seed) {
  if (rows == 0 || cols == 0) throw ConfigError("grid needs at least one row and one column");
  const Tensor images = sample_images(generator, rows * cols, seed);
  const std::size_t r = images.dim(2);
  const std::size_t c = images.dim(1);
  Image grid;
  grid.width = static_cast<std::uint32_t>(cols * r);
  grid.height = static_cast<std::uint32_t>(rows * r);
  grid.channels = static_cast<std::uint8_t>(c);
  grid.pixels.resize(std::size_t{grid.width} * grid.height * c);
  for (std::size_t k = 0; k < rows * cols; ++k) {
    const Image tile = tensor_to_image(images, k);
    const std::size_t oy = (k / cols) * r;
    const std::size_t ox = (k % cols) * r;
    for (std::size_t y = 0; y < r; ++y) {
      std::copy_n(tile.pixels.begin() + static_cast<std::ptrdiff_t>(y * r * c), r * c,
                  grid.pixels.begin() + static_cast<std::ptrdiff_t>(((oy + y) * grid.width + ox) * c));
    }
  }
  return grid;
}

Trainer::Trainer(TrainConfig config, RecordSet data) : config_(std::move(config)), data_(std::move(data)) {
  config_.validate();
  if (config_.resolution != data_.resolution) {
    throw ConfigError("config resolution " + std::to_string(config_.resolution) +
                      " does not match dataset resolution " + std::to_string(data_.resolution));
  }
  if (data_.size() < 2) throw DataError("training needs at least 2 records");
  build();
}

void Trainer::build() {
  const SynthesisConfig arch = config_.synthesis(data_.channels);
  generator_ = std::make_unique<Generator>(arch, seed_of(config_, kGeneratorInit));
  discriminator_ = std::make_unique<Discriminator>(arch, seed_of(config_, kDiscriminatorInit));
  const ParamList gp = generator_->parameters();
  const ParamList dp = discriminator_->parameters();
  adam_g_ = std::make_unique<Adam>(gp, adam_options(config_, config_.lr_g),
                                   lr_multipliers(gp, config_.mapping_lr_mult));
  adam_d_ = std::make_unique<Adam>(dp, adam_options(config_, config_.lr_d),
                                   lr_multipliers(dp, 1.0));
  controller_ = ControllerState::with_p(config_.controller(), config_.ada_initial_p);
  pl_state_ = PathLengthState{0.0, config_.pl_decay};
  rng_ = CounterRng(seed_of(config_, kTraining));
  split_ = split_records(data_, config_.val_frac, seed_of(config_, kSplit));
  if (split_.train.empty()) throw DataError("training split is empty");
  real_features_ = embed_records(data_, config_.metric_embedder());
  if (real_features_.rows() < config_.kid_block_size) {
    throw DataError("dataset has fewer records than kid_block_size");
  }
  last_rt_ = kNaN;
  last_rv_ = kNaN;
}

Trainer Trainer::from_checkpoint(const Checkpoint& ckpt, RecordSet data,
                                 std::optional<double> total_kimg) {
  TrainConfig config = TrainConfig::from_text(ckpt.config_text);
  if (total_kimg) config.total_kimg = *total_kimg;
  // The transfer source was consumed when the run started.
  config.transfer_from.clear();
  Trainer t(std::move(config), std::move(data));
  ckpt.load_params("G/", t.generator_->parameters());
  ckpt.load_params("D/", t.discriminator_->parameters());
  load_moments(ckpt, "adam_g", *t.adam_g_);
  load_moments(ckpt, "adam_d", *t.adam_d_);
  t.controller_.p_images = get_i64(ckpt, "ada.p_images");
  t.controller_.images_seen_since_update = get_i64(ckpt, "ada.images_since_update");
  t.pl_state_.ema = ckpt.get_f64("pl.ema");
  t.rng_ = CounterRng(ckpt.get_u64("rng.key"), ckpt.get_u64("rng.counter"));
  t.iteration_ = get_i64(ckpt, "iteration");
  t.images_seen_ = get_i64(ckpt, "images_seen");
  t.tick_ = get_i64(ckpt, "tick");
  t.reported_images_ = get_i64(ckpt, "reported_images");
  t.last_rt_ = ckpt.get_f64("last_rt");
  t.last_rv_ = ckpt.get_f64("last_rv");
  t.acc_.real_sign_sum = ckpt.get_f64("acc.real_sign_sum");
  t.acc_.real_sum = ckpt.get_f64("acc.real_sum");
  t.acc_.real_count = ckpt.get_u64("acc.real_count");
  t.acc_.fake_sum = ckpt.get_f64("acc.fake_sum");
  t.acc_.fake_count = ckpt.get_u64("acc.fake_count");
  t.acc_.report_loss_d = ckpt.get_f64("acc.report_loss_d");
  t.acc_.report_loss_g = ckpt.get_f64("acc.report_loss_g");
  t.acc_.report_count = ckpt.get_u64("acc.report_count");
  return t;
}

Checkpoint Trainer::checkpoint() const {
  Checkpoint ckpt;
  ckpt.config_text = config_.to_text();
  ckpt.add_params("G/", generator_->parameters());
  ckpt.add_params("D/", discriminator_->parameters());
  store_moments(ckpt, "adam_g", *adam_g_);
  store_moments(ckpt, "adam_d", *adam_d_);
  put_i64(ckpt, "ada.p_images", controller_.p_images);
  put_i64(ckpt, "ada.images_since_update", controller_.images_seen_since_update);
  put_f64(ckpt, "pl.ema", pl_state_.ema);
  ckpt.u64["rng.key"] = rng_.key();
  ckpt.u64["rng.counter"] = rng_.counter();
  put_i64(ckpt, "iteration", iteration_);
  put_i64(ckpt, "images_seen", images_seen_);
  put_i64(ckpt, "tick", tick_);
  put_i64(ckpt, "reported_images", reported_images_);
  put_f64(ckpt, "last_rt", last_rt_);
  put_f64(ckpt, "last_rv", last_rv_);
  put_f64(ckpt, "acc.real_sign_sum", acc_.real_sign_sum);
  put_f64(ckpt, "acc.real_sum", acc_.real_sum);
  ckpt.u64["acc.real_count"] = acc_.real_count;
  put_f64(ckpt, "acc.fake_sum", acc_.fake_sum);
  ckpt.u64["acc.fake_count"] = acc_.fake_count;
  put_f64(ckpt, "acc.report_loss_d", acc_.report_loss_d);
  put_f64(ckpt, "acc.report_loss_g", acc_.report_loss_g);
  ckpt.u64["acc.report_count"] = acc_.report_count;
  return ckpt;
}

TransferManifest Trainer::transfer_from(const Checkpoint& source) {
  if (iteration_ != 0) throw ConfigError("transfer must happen before training starts");
  TransferManifest manifest;
  auto copy = [&](const std::string& prefix, const ParamList& params) {
    for (const auto& p : params) {
      const StoredTensor* t = source.find(prefix + p.name);
      if (t != nullptr && t->shape == p.tensor.shape()) {
        Tensor dst = p.tensor;
        dst.assign(t->values);
        manifest.copied.push_back(prefix + p.name);
      } else {
        manifest.reinitialized.push_back(prefix + p.name);
      }
    }
  };
  copy("G/", generator_->parameters());
  copy("D/", discriminator_->parameters());
  return manifest;
}

double Trainer::augment_p() const {
  if (config_.augment == "off") return 0.0;
  if (config_.augment == "fixed") return config_.ada_initial_p;
  return controller_.p();
}

Tensor Trainer::sample_reals(const std::vector<std::size_t>& pool, std::size_t count) {
  std::vector<std::size_t> ids(count);
  for (auto& id : ids) id = pool[rng_.below(pool.size())];
  return records_to_tensor(data_, ids);
}

Tensor Trainer::sample_latents(std::size_t count) {
  const std::size_t zd = generator_->config().z_dim;
  std::vector<double> z(count * zd);
  for (double& v : z) v = rng_.normal();
  return Tensor::from_data({count, zd}, std::move(z));
}

std::vector<Tensor> Trainer::sample_styles(std::size_t count) {
  const std::size_t layers = generator_->num_layers();
  const Tensor w = generator_->map_latent(sample_latents(count));
  if (config_.style_mixing_prob > 0.0 && rng_.uniform() < config_.style_mixing_prob) {
    const Tensor w2 = generator_->map_latent(sample_latents(count));
    const std::size_t crossover = 1 + static_cast<std::size_t>(rng_.below(layers - 1));
    return style_mix(w, w2, crossover, layers);
  }
  return std::vector<Tensor>(layers, w);
}

TraceRow Trainer::step() {
  const auto batch = static_cast<std::size_t>(config_.batch_size);
  const double p = augment_p();
  TraceRow row;
  row.iteration = iteration_;
  row.p = p;
  row.r1 = kNaN;
  row.pl = kNaN;
  row.r_t = kNaN;
  row.r_v = kNaN;

  // Critic step.
  {
    const Tensor reals = sample_reals(split_.train, batch);
    Tensor fakes;
    {
      NoGradGuard no_grad;
      const auto styles = sample_styles(batch);
      fakes = generator_->synthesize(styles, rng_.fork());
    }
    const std::uint64_t real_aug = rng_.fork();
    const std::uint64_t fake_aug = rng_.fork();
    const Tensor real_scores = discriminator_->score(augment_batch(reals, p, real_aug));
    const Tensor fake_scores = discriminator_->score(augment_batch(fakes, p, fake_aug));
    Tensor loss = loss_d(real_scores, fake_scores);
    row.loss_d = loss.item();
    if (config_.r1_gamma > 0.0 &&
        lazy_gate({static_cast<std::uint64_t>(config_.r1_interval), static_cast<std::uint64_t>(iteration_)})) {
      const Tensor r1 = r1_penalty(
          [&](const Tensor& x) { return discriminator_->score(augment_batch(x, p, real_aug)); },
          reals, config_.r1_gamma);
      row.r1 = r1.item();
      loss = add(loss, scale(r1, static_cast<double>(config_.r1_interval)));
    }
    const auto params = adam_d_->tensors();
    adam_d_->step(gradients(loss, params, {.allow_unused = true}));

    for (double s : real_scores.data()) {
      acc_.real_sign_sum += static_cast<double>((s > 0.0) - (s < 0.0));
      acc_.real_sum += s;
    }
    acc_.real_count += batch;
    for (double s : fake_scores.data()) acc_.fake_sum += s;
    acc_.fake_count += batch;
  }

  // Generator step.
  {
    const auto styles = sample_styles(batch);
    const Tensor fakes = generator_->synthesize(styles, rng_.fork());
    const Tensor scores = discriminator_->score(augment_batch(fakes, p, rng_.fork()));
    Tensor loss = loss_g(scores);
    row.loss_g = loss.item();
    std::optional<PathLengthState> next_pl;
    if (config_.pl_weight > 0.0 &&
        lazy_gate({static_cast<std::uint64_t>(config_.pl_interval), static_cast<std::uint64_t>(iteration_)})) {
      const std::size_t pl_batch =
          std::max<std::size_t>(1, batch / static_cast<std::size_t>(config_.pl_batch_shrink));
      const Tensor w = generator_->map_latent(sample_latents(pl_batch));
      const std::uint64_t noise = rng_.fork();
      const auto result = path_length_penalty(
          [&](const Tensor& ws) { return generator_->synthesize(ws, noise); }, w, pl_state_,
          rng_.fork());
      row.pl = result.penalty.item();
      loss = add(loss, scale(result.penalty, config_.pl_weight * static_cast<double>(config_.pl_interval)));
      next_pl = result.state;
    }
    const auto params = adam_g_->tensors();
    adam_g_->step(gradients(loss, params, {.allow_unused = true}));
    if (next_pl) pl_state_ = *next_pl;
  }

  ++iteration_;
  images_seen_ += static_cast<std::int64_t>(batch);
  controller_.images_seen_since_update += static_cast<std::int64_t>(batch);
  acc_.report_loss_d += row.loss_d;
  acc_.report_loss_g += row.loss_g;
  ++acc_.report_count;
  if (iteration_ % controller_.config.update_interval == 0) controller_update(row);
  row.kimg = static_cast<double>(images_seen_) / 1000.0;
  return row;
}

void Trainer::controller_update(TraceRow& row) {
  const std::size_t batch = static_cast<std::size_t>(config_.batch_size);
  ScoreSummary s;
  s.e_train = acc_.real_sum / static_cast<double>(acc_.real_count);
  s.e_gen = acc_.fake_sum / static_cast<double>(acc_.fake_count);
  s.sign_mean_train = acc_.real_sign_sum / static_cast<double>(acc_.real_count);
  double rv = kNaN;
  if (!split_.val.empty()) {
    NoGradGuard no_grad;
    const Tensor val = sample_reals(split_.val, batch);
    const Tensor scores = discriminator_->score(augment_batch(val, augment_p(), rng_.fork()));
    double sum = 0.0;
    for (double v : scores.data()) sum += v;
    s.e_val = sum / static_cast<double>(batch);
    try {
      rv = heuristic_rv(s);
    } catch (const NumericError&) {
      rv = kNaN;
    }
  }
  const double rt = s.sign_mean_train;
  row.r_t = rt;
  row.r_v = rv;
  last_rt_ = rt;
  last_rv_ = rv;
  const double h = controller_.config.mode == ControlMode::kRt ? rt : rv;
  if (config_.augment == "ada" && std::isfinite(h)) {
    controller_ = controller_step(controller_, h, controller_.images_seen_since_update);
  }
  controller_.images_seen_since_update = 0;
  acc_.real_sign_sum = 0.0;
  acc_.real_sum = 0.0;
  acc_.real_count = 0;
  acc_.fake_sum = 0.0;
  acc_.fake_count = 0;
}

ReportRow Trainer::evaluate() const {
  ReportRow row = evaluate_generator(*generator_, real_features_, config_, seed_of(config_, kMetrics));
  row.tick = tick_;
  row.kimg = static_cast<double>(images_seen_) / 1000.0;
  row.p = augment_p();
  row.r_t = last_rt_;
  row.r_v = last_rv_;
  row.loss_g = acc_.report_count ? acc_.report_loss_g / static_cast<double>(acc_.report_count) : kNaN;
  row.loss_d = acc_.report_count ? acc_.report_loss_d / static_cast<double>(acc_.report_count) : kNaN;
  return row;
}

ReportRow Trainer::report_row() {
  ReportRow row = evaluate();
  acc_.report_loss_d = 0.0;
  acc_.report_loss_g = 0.0;
  acc_.report_count = 0;
  reported_images_ = images_seen_;
  return row;
}

void Trainer::run(const RunHooks& hooks) {
  auto snapshot = [&] {
    const ReportRow row = report_row();
    if (hooks.on_report) hooks.on_report(row);
    if (hooks.on_snapshot) hooks.on_snapshot(tick_, checkpoint());
  };
  if (reported_images_ < 0) snapshot();
  const std::int64_t total = config_.total_images();
  const std::int64_t per_tick = config_.tick_images();
  while (images_seen_ < total) {
    const Checkpoint before = hooks.on_abort ? checkpoint() : Checkpoint{};
    TraceRow row;
    try {
      row = step();
    } catch (const NumericError&) {
      if (hooks.on_abort) hooks.on_abort(before);
      throw;
    }
    if (hooks.on_trace) hooks.on_trace(row);
    if (images_seen_ >= (tick_ + 1) * per_tick) {
      tick_ = images_seen_ / per_tick;
      if (tick_ % config_.snapshot_every_ticks == 0) snapshot();
    }
  }
  if (reported_images_ != images_seen_) snapshot();
}

}  // namespace sgada
