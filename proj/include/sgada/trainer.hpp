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
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sgada/ada.hpp"
#include "sgada/checkpoint.hpp"
#include "sgada/config.hpp"
#include "sgada/datakit.hpp"
#include "sgada/discriminator.hpp"
#include "sgada/generator.hpp"
#include "sgada/metrics.hpp"
#include "sgada/objectives.hpp"
#include "sgada/optimizer.hpp"
#include "sgada/rng.hpp"

namespace sgada {

/// One evaluation row of the training report. Loss columns average the
/// iterations since the previous row; statistics that do not exist yet are
/// NaN and render as empty CSV fields.
struct ReportRow {
  std::int64_t tick = 0;
  double kimg = 0.0;
  double fid = 0.0;
  double kid = 0.0;
  double p = 0.0;
  double r_t = 0.0;
  double r_v = 0.0;
  double loss_g = 0.0;
  double loss_d = 0.0;
  std::string embedder;
  std::size_t n_real = 0;
  std::size_t n_gen = 0;

  static std::string csv_header();
  std::string to_csv() const;
};

/// Per-iteration record. r_t and r_v are set on controller updates only.
struct TraceRow {
  std::int64_t iteration = 0;
  double kimg = 0.0;
  double p = 0.0;
  double loss_d = 0.0;
  double loss_g = 0.0;
  double r1 = 0.0;
  double pl = 0.0;
  double r_t = 0.0;
  double r_v = 0.0;

  static std::string csv_header();
  std::string to_csv() const;
};

struct TransferManifest {
  std::vector<std::string> copied;
  std::vector<std::string> reinitialized;

  double copied_fraction() const;
  std::string to_text() const;
};

struct RunHooks {
  std::function<void(const ReportRow&)> on_report;
  std::function<void(const TraceRow&)> on_trace;
  /// Called after every report row with the matching checkpoint.
  std::function<void(std::int64_t tick, const Checkpoint&)> on_snapshot;
  /// Called with the pre-step state when a numerical failure aborts the run.
  std::function<void(const Checkpoint&)> on_abort;
};

/// Generated-versus-real evaluation shared by training and the CLI.
ReportRow evaluate_generator(const Generator& generator, const Features& real_features,
                             const TrainConfig& config, std::uint64_t seed);

/// Features of every record under the configured embedder.
Features embed_records(const RecordSet& data, const Embedder& embedder);

/// n_gen images from seeded latents with a fixed noise seed.
Tensor sample_images(const Generator& generator, std::size_t count, std::uint64_t seed);

/// Generator rebuilt from a checkpoint's configuration and weights.
Generator load_generator(const Checkpoint& ckpt, std::size_t image_channels);

/// Fresh-sample evaluation of a checkpoint against every record.
MetricRow snapshot_metrics(const Checkpoint& ckpt, const RecordSet& data, const Embedder& embedder,
                           std::size_t n_gen, std::uint64_t seed);

/// rows x cols samples from seeded latents tiled into one image.
Image generate_grid(const Generator& generator, std::size_t rows, std::size_t cols,
                    std::uint64_t seed);

/// Alternating GAN training with adaptive augmentation. The whole run is a
/// pure function of (configuration, dataset); checkpoints capture every bit
/// of state, so interrupting and resuming reproduces the uninterrupted run.
class Trainer {
 public:
  Trainer(TrainConfig config, RecordSet data);

  /// Restores a run. `total_kimg`, when given, replaces the stored budget.
  static Trainer from_checkpoint(const Checkpoint& ckpt, RecordSet data,
                                 std::optional<double> total_kimg = std::nullopt);

  /// Copies same-named, same-shaped parameters of both networks from a
  /// checkpoint. Only valid before the first iteration.
  TransferManifest transfer_from(const Checkpoint& source);

  /// Trains until total_kimg, emitting a report row at tick 0, every
  /// snapshot_every_ticks ticks and at the end.
  void run(const RunHooks& hooks = {});

  /// One D step, one G step and, on schedule, a controller update.
  TraceRow step();

  /// Report row for the current parameters (no state is modified).
  ReportRow evaluate() const;

  Checkpoint checkpoint() const;

  const TrainConfig& config() const noexcept { return config_; }
  const Generator& generator() const noexcept { return *generator_; }
  const Discriminator& discriminator() const noexcept { return *discriminator_; }
  const ControllerState& controller() const noexcept { return controller_; }
  const PathLengthState& path_length_state() const noexcept { return pl_state_; }
  std::int64_t iteration() const noexcept { return iteration_; }
  std::int64_t images_seen() const noexcept { return images_seen_; }
  std::int64_t tick() const noexcept { return tick_; }
  /// Current augmentation probability.
  double augment_p() const;

 private:
  struct Accumulators {
    double real_sign_sum = 0.0;
    double real_sum = 0.0;
    std::uint64_t real_count = 0;
    double fake_sum = 0.0;
    std::uint64_t fake_count = 0;
    double report_loss_d = 0.0;
    double report_loss_g = 0.0;
    std::uint64_t report_count = 0;
  };

  void build();
  Tensor sample_reals(const std::vector<std::size_t>& pool, std::size_t count);
  Tensor sample_latents(std::size_t count);
  std::vector<Tensor> sample_styles(std::size_t count);
  void controller_update(TraceRow& row);
  ReportRow report_row();

  TrainConfig config_;
  RecordSet data_;
  Split split_;
  Features real_features_;
  std::unique_ptr<Generator> generator_;
  std::unique_ptr<Discriminator> discriminator_;
  std::unique_ptr<Adam> adam_g_;
  std::unique_ptr<Adam> adam_d_;
  ControllerState controller_;
  PathLengthState pl_state_;
  CounterRng rng_;
  std::int64_t iteration_ = 0;
  std::int64_t images_seen_ = 0;
  std::int64_t tick_ = 0;
  std::int64_t reported_images_ = -1;
  double last_rt_ = 0.0;
  double last_rv_ = 0.0;
  Accumulators acc_;
};

}  // namespace sgada
