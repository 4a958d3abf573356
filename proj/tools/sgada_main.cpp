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

// Command-line front end: dataset packing, training, resumption, transfer,
// evaluation and sample grids. Exit codes: 0 success, 2 configuration error,
// 3 data error, 4 numerical abort, 1 anything else.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "sgada/checkpoint.hpp"
#include "sgada/config.hpp"
#include "sgada/datakit.hpp"
#include "sgada/errors.hpp"
#include "sgada/metrics.hpp"
#include "sgada/toy_data.hpp"
#include "sgada/trainer.hpp"

namespace fs = std::filesystem;
using namespace sgada;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

// Unrecognised arguments of the training commands are `--key value` (or
// `--key=value`) overrides of TrainConfig.
void apply_overrides(TrainConfig& config, const std::vector<std::string>& extras) {
  for (std::size_t i = 0; i < extras.size(); ++i) {
    std::string arg = extras[i];
    if (arg.rfind("--", 0) != 0) throw ConfigError("unexpected argument '" + arg + "'");
    arg = arg.substr(2);
    std::string value;
    if (const auto eq = arg.find('='); eq != std::string::npos) {
      value = arg.substr(eq + 1);
      arg = arg.substr(0, eq);
    } else {
      if (i + 1 >= extras.size()) throw ConfigError("missing value for --" + arg);
      value = extras[++i];
    }
    config.set(arg, value);
  }
}

class RunOutput {
 public:
  RunOutput(const fs::path& dir, bool append) : dir_(dir) {
    fs::create_directories(dir_);
    const auto mode = append ? std::ios::app : std::ios::trunc;
    const bool fresh_report = !append || !fs::exists(dir_ / "report.csv");
    const bool fresh_trace = !append || !fs::exists(dir_ / "trace.csv");
    report_.open(dir_ / "report.csv", std::ios::out | mode);
    trace_.open(dir_ / "trace.csv", std::ios::out | mode);
    if (!report_ || !trace_) throw DataError("cannot write into " + dir_.string());
    if (fresh_report) report_ << ReportRow::csv_header() << "\n";
    if (fresh_trace) trace_ << TraceRow::csv_header() << "\n";
  }

  RunHooks hooks() {
    RunHooks h;
    h.on_report = [this](const ReportRow& row) {
      report_ << row.to_csv() << "\n";
      report_.flush();
      std::cout << "tick " << row.tick << "  kimg " << format_double(row.kimg) << "  fid "
                << format_double(row.fid) << "  kid " << format_double(row.kid) << "  p "
                << format_double(row.p) << "\n";
    };
    h.on_trace = [this](const TraceRow& row) { trace_ << row.to_csv() << "\n"; };
    h.on_snapshot = [this](std::int64_t tick, const Checkpoint& ckpt) {
      char name[64];
      std::snprintf(name, sizeof name, "snapshot-%06lld.stck", static_cast<long long>(tick));
      save_checkpoint(dir_ / name, ckpt);
      save_checkpoint(dir_ / "latest.stck", ckpt);
    };
    h.on_abort = [this](const Checkpoint& ckpt) {
      save_checkpoint(dir_ / "abort.stck", ckpt);
      std::cerr << "numerical failure; state before the failing step saved to "
                << (dir_ / "abort.stck").string() << "\n";
    };
    return h;
  }

  void finish(const Checkpoint& ckpt) {
    trace_.flush();
    save_checkpoint(dir_ / "final.stck", ckpt);
    std::cout << "final checkpoint: " << (dir_ / "final.stck").string() << "\n";
  }

  const fs::path& dir() const noexcept { return dir_; }

 private:
  fs::path dir_;
  std::ofstream report_;
  std::ofstream trace_;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  out << text;
  if (!out) throw DataError("cannot write " + path.string());
}

void train_fresh(TrainConfig config, const fs::path& out_dir) {
  if (config.data.empty()) throw ConfigError("no dataset given (--data or data = ...)");
  RecordSet data = read_records(config.data);
  Trainer trainer(config, std::move(data));
  RunOutput output(out_dir, false);
  write_text(output.dir() / "config.txt", trainer.config().to_text());
  if (!config.transfer_from.empty()) {
    const TransferManifest manifest = trainer.transfer_from(load_checkpoint(config.transfer_from));
    write_text(output.dir() / "transfer_manifest.txt", manifest.to_text());
    std::cout << "transfer: copied " << manifest.copied.size() << ", reinitialized "
              << manifest.reinitialized.size() << "\n";
  }
  trainer.run(output.hooks());
  output.finish(trainer.checkpoint());
}

int run(int argc, char** argv) {
  CLI::App app{"Style-based GAN training with adaptive discriminator augmentation"};
  app.require_subcommand(1);

  // dataset
  auto* dataset = app.add_subcommand("dataset", "Build record files");
  dataset->require_subcommand(1);
  auto* build = dataset->add_subcommand("build", "Pack DIR/<class>/<image> into a record file");
  std::string in_dir, out_file, classes;
  int res = 32, channels = 1;
  double val_frac = 0.0;
  std::int64_t seed = 0;
  build->add_option("--in", in_dir, "Input directory with one subdirectory per class")->required();
  build->add_option("--out", out_file, "Output record file")->required();
  build->add_option("--res", res, "Target resolution (power of two)")->required();
  build->add_option("--channels", channels, "1 (luminance) or 3");
  build->add_option("--classes", classes, "Comma-separated label order (default: sorted)");
  build->add_option("--val-frac", val_frac, "Report the stratified split for this fraction");
  build->add_option("--seed", seed, "Split seed");

  auto* toy = dataset->add_subcommand("toy", "Write a procedural toy corpus");
  std::string toy_kind = "two-mode", pgm_dir;
  std::size_t toy_count = 500;
  toy->add_option("--kind", toy_kind, "two-mode, symmetric-blobs or rings");
  toy->add_option("--count", toy_count, "Number of images");
  toy->add_option("--res", res, "Resolution");
  toy->add_option("--seed", seed, "Corpus seed");
  toy->add_option("--out", out_file, "Output record file")->required();
  toy->add_option("--pgm-dir", pgm_dir, "Also write the images as DIR/<label>/<index>.pgm");

  // training commands
  std::string config_file, data_file, out_dir, ckpt_file, source_file;
  auto add_training_options = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_file, "key = value configuration file");
    cmd->add_option("--out", out_dir, "Output directory")->required();
    cmd->allow_extras();
  };
  auto* train = app.add_subcommand("train", "Train from scratch (any config key as --key value)");
  add_training_options(train);

  auto* pretrain = app.add_subcommand("pretrain", "Train a source model on a toy corpus");
  std::string corpus = "symmetric-blobs";
  std::size_t corpus_count = 500;
  std::int64_t corpus_seed = 1;
  pretrain->add_option("--corpus", corpus, "two-mode, symmetric-blobs or rings");
  pretrain->add_option("--count", corpus_count, "Corpus size");
  pretrain->add_option("--corpus-seed", corpus_seed, "Corpus seed");
  add_training_options(pretrain);

  auto* transfer = app.add_subcommand("transfer", "Fine-tune from a source checkpoint");
  transfer->add_option("--source", source_file, "Source checkpoint")->required();
  add_training_options(transfer);

  auto* resume = app.add_subcommand("resume", "Continue a run from a checkpoint");
  std::optional<double> resume_kimg;
  resume->add_option("--checkpoint", ckpt_file, "Checkpoint to resume")->required();
  resume->add_option("--data", data_file, "Record file (default: the stored data path)");
  resume->add_option("--out", out_dir, "Output directory")->required();
  resume->add_option("--total_kimg", resume_kimg, "New training budget");

  auto* metrics = app.add_subcommand("metrics", "FID/KID of a checkpoint against a record file");
  std::string embedder_name = "pixels", features_out;
  std::size_t n_gen = 500;
  std::uint64_t embedder_seed = 0, metric_seed = 0;
  metrics->add_option("--checkpoint", ckpt_file, "Checkpoint")->required();
  metrics->add_option("--data", data_file, "Record file")->required();
  metrics->add_option("--embedder", embedder_name, "pixels or randconv");
  metrics->add_option("--embedder-seed", embedder_seed, "Embedder seed");
  metrics->add_option("--n-gen", n_gen, "Generated sample count");
  metrics->add_option("--seed", metric_seed, "Sampling seed");
  metrics->add_option("--features-out", features_out, "Write real features to this FEAT file");

  auto* generate = app.add_subcommand("generate", "Write a grid of samples as PGM/PPM");
  std::size_t rows = 4, cols = 4;
  std::uint64_t gen_seed = 0;
  generate->add_option("--checkpoint", ckpt_file, "Checkpoint")->required();
  generate->add_option("--rows", rows, "Grid rows");
  generate->add_option("--cols", cols, "Grid columns");
  generate->add_option("--seed", gen_seed, "Latent seed");
  generate->add_option("--out", out_file, "Output image")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  auto load_config = [&](CLI::App* cmd) {
    TrainConfig config;
    if (!config_file.empty()) config.merge_file(config_file);
    apply_overrides(config, cmd->remaining());
    return config;
  };

  if (*build) {
    std::optional<std::vector<std::string>> class_names;
    if (!classes.empty()) {
      class_names.emplace();
      std::string item;
      for (char ch : classes + ",") {
        if (ch == ',') {
          if (!item.empty()) class_names->push_back(item);
          item.clear();
        } else {
          item += ch;
        }
      }
    }
    if (res <= 0 || res > 65535) throw ConfigError("--res out of range");
    const BuildSummary s = build_records(in_dir, class_names, static_cast<std::uint16_t>(res),
                                         out_file, static_cast<std::uint8_t>(channels));
    std::cout << "records: " << s.count << "  skipped: " << s.skipped << "\n";
    for (std::size_t i = 0; i < s.class_names.size(); ++i) {
      std::cout << "  " << i << " " << s.class_names[i] << ": " << s.per_class[i] << "\n";
    }
    if (val_frac > 0.0) {
      const Split split = split_records(read_records(out_file), val_frac, static_cast<std::uint64_t>(seed));
      std::cout << "split: train " << split.train.size() << "  val " << split.val.size() << "\n";
    }
  } else if (*toy) {
    if (res <= 0 || res > 65535) throw ConfigError("--res out of range");
    const RecordSet set = make_toy_corpus(toy_kind, toy_count, static_cast<std::uint16_t>(res),
                                          static_cast<std::uint64_t>(seed));
    write_records(out_file, set);
    if (!pgm_dir.empty()) {
      for (std::size_t i = 0; i < set.size(); ++i) {
        const auto& r = set.records[i];
        const fs::path dir = fs::path(pgm_dir) / std::to_string(r.label);
        fs::create_directories(dir);
        char name[32];
        std::snprintf(name, sizeof name, "%06zu.pgm", i);
        write_pnm(dir / name, Image{r.width, r.height, r.channels, r.pixels});
      }
    }
    std::cout << "wrote " << set.size() << " records to " << out_file << "\n";
  } else if (*train) {
    train_fresh(load_config(train), out_dir);
  } else if (*pretrain) {
    TrainConfig config = load_config(pretrain);
    fs::create_directories(out_dir);
    const fs::path data_path = fs::path(out_dir) / "source.btrc";
    write_records(data_path, make_toy_corpus(corpus, corpus_count,
                                             static_cast<std::uint16_t>(config.resolution),
                                             static_cast<std::uint64_t>(corpus_seed)));
    config.data = data_path.string();
    train_fresh(config, out_dir);
  } else if (*transfer) {
    TrainConfig config = load_config(transfer);
    config.transfer_from = source_file;
    train_fresh(config, out_dir);
  } else if (*resume) {
    const Checkpoint ckpt = load_checkpoint(ckpt_file);
    std::string path = data_file;
    if (path.empty()) path = TrainConfig::from_text(ckpt.config_text).data;
    if (path.empty()) throw ConfigError("no dataset given (--data)");
    Trainer trainer = Trainer::from_checkpoint(ckpt, read_records(path), resume_kimg);
    RunOutput output(out_dir, true);
    trainer.run(output.hooks());
    output.finish(trainer.checkpoint());
  } else if (*metrics) {
    const Checkpoint ckpt = load_checkpoint(ckpt_file);
    const RecordSet data = read_records(data_file);
    const Embedder embedder{parse_embedder(embedder_name), embedder_seed};
    if (!features_out.empty()) write_features(features_out, embed_records(data, embedder));
    const MetricRow row = snapshot_metrics(ckpt, data, embedder, n_gen, metric_seed);
    std::cout << MetricRow::csv_header() << "\n" << row.to_csv() << "\n";
  } else if (*generate) {
    const Checkpoint ckpt = load_checkpoint(ckpt_file);
    const StoredTensor* rgb = nullptr;
    for (const auto& t : ckpt.tensors) {
      if (t.name.find(".torgb.bias") != std::string::npos) rgb = &t;
    }
    const std::size_t image_channels = rgb ? rgb->shape.at(0) : 1;
    const Generator g = load_generator(ckpt, image_channels);
    write_pnm(out_file, generate_grid(g, rows, cols, gen_seed));
    std::cout << "wrote " << out_file << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const NumericError& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}
