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

// Acceptance suite. `sgada_acceptance` runs every criterion; passing numbers
// runs only those. One PASS/FAIL line per criterion goes to stdout, progress
// to stderr. Criterion 9 is soft: a miss is reported but does not fail.

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "sgada/ada.hpp"
#include "sgada/binary_io.hpp"
#include "sgada/checkpoint.hpp"
#include "sgada/datakit.hpp"
#include "sgada/discriminator.hpp"
#include "sgada/errors.hpp"
#include "sgada/generator.hpp"
#include "sgada/linalg.hpp"
#include "sgada/metrics.hpp"
#include "sgada/objectives.hpp"
#include "sgada/ops.hpp"
#include "sgada/rng.hpp"
#include "sgada/toy_data.hpp"
#include "sgada/trainer.hpp"
#include "support/gradcheck.hpp"
#include "support/op_cases.hpp"
#include "support/tiny.hpp"
#include "support/tiny_run.hpp"

namespace {

using namespace sgada;
using sgada::testing::check_gradients;
using sgada::testing::GradCheckOptions;
using sgada::testing::random_tensor;
using sgada::testing::tensors_of;

constexpr int kSeeds = 20;

struct Outcome {
  bool pass = true;
  std::string detail;
  std::vector<std::string> failures;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      failures.push_back(what);
    }
  }
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Criterion 1 ---------------------------------------------------------------

Outcome gradient_suite() {
  Outcome out;
  const Stopwatch clock;
  double first = 0.0, second = 0.0;
  int checks = 0;
  auto record = [&](const std::string& what, const sgada::testing::GradCheckResult& r, double tol,
                    double& worst) {
    ++checks;
    worst = std::max(worst, r.max_rel_error);
    out.require(r.evaluated > 0 && r.max_rel_error <= tol, what + " err " + num(r.max_rel_error));
  };

  for (const auto& [name, build] : sgada::testing::all_op_builders()) {
    for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
      std::vector<Tensor> leaves;
      const auto objective = build(seed, leaves);
      record(name + " seed " + std::to_string(seed), check_gradients(objective, leaves, seed), 1e-4,
             first);
    }
  }

  GradCheckOptions net;
  net.directions = 8;
  for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
    const Generator g(sgada::testing::tiny_synthesis(), seed);
    for (const Tensor& t : g.noise_strengths()) {
      Tensor h = t;
      h.assign(std::vector<double>{0.3});
    }
    std::vector<Tensor> leaves = tensors_of(g.parameters());
    Tensor z = random_tensor({2, 4}, seed + 50);
    leaves.push_back(z);
    const Tensor probe = random_tensor({2, 1, 16, 16}, seed + 99, false);
    const auto objective = [&] { return sum(mul(g.synthesize(g.map_latent(z), seed), probe)); };
    record("generator seed " + std::to_string(seed), check_gradients(objective, leaves, seed, net),
           1e-4, first);
  }

  for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
    const Discriminator d(sgada::testing::tiny_synthesis(), seed);
    std::vector<Tensor> leaves = tensors_of(d.parameters());
    Tensor x = random_tensor({2, 1, 16, 16}, seed + 70);
    leaves.push_back(x);
    const auto objective = [&] { return sum(softplus(d.score(x))); };
    record("discriminator seed " + std::to_string(seed), check_gradients(objective, leaves, seed, net),
           1e-4, first);

    const Tensor real = random_tensor({2, 1, 16, 16}, seed + 30, false);
    const ScoreFn critic = [&](const Tensor& in) { return d.score(in); };
    const auto r1 = [&] { return r1_penalty(critic, real, 1.0); };
    record("r1 seed " + std::to_string(seed),
           check_gradients(r1, tensors_of(d.parameters()), seed, net), 1e-3, second);
  }

  for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
    const Generator g(sgada::testing::tiny_synthesis(), seed);
    const Tensor w = g.map_latent(random_tensor({2, 4}, seed + 5, false)).detach();
    Tensor wl = Tensor::from_data(w.shape(), w.to_vector(), true);
    const SynthesisFn synth = [&](const Tensor& in) { return g.synthesize(in, seed); };
    const auto pl = [&] { return path_length_penalty(synth, wl, {.ema = 0.5}, seed).penalty; };
    record("path length seed " + std::to_string(seed),
           check_gradients(pl, tensors_of(g.parameters()), seed, net), 1e-3, second);
  }

  const double secs = clock.seconds();
  out.require(secs < 300.0, "runtime " + num(secs) + " s exceeds 300 s");
  out.detail = std::to_string(checks) + " checks, max rel err " + num(first) + " first-order, " +
               num(second) + " second-order, " + num(secs) + " s";
  return out;
}

// Criterion 2 ---------------------------------------------------------------

GaussianMoments moments(Eigen::VectorXd mu, Eigen::MatrixXd sigma) {
  return GaussianMoments{std::move(mu), SpdMatrix(std::move(sigma)), 2};
}

Eigen::MatrixXd random_spd(Eigen::Index n, std::uint64_t seed) {
  CounterRng rng(seed);
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = rng.normal();
  Eigen::MatrixXd m = a * a.transpose() / static_cast<double>(n) + 1e-3 * Eigen::MatrixXd::Identity(n, n);
  return 0.5 * (m + m.transpose());
}

Outcome fid_oracle() {
  Outcome out;
  const Stopwatch clock;
  double worst = 0.0;
  auto near = [&](double got, double want, const std::string& what) {
    worst = std::max(worst, std::abs(got - want));
    out.require(std::abs(got - want) <= 1e-8, what + ": " + num(got) + " vs " + num(want));
  };
  const auto one = [](double v) { return Eigen::VectorXd::Constant(1, v); };
  const auto var = [](double v) { return Eigen::MatrixXd::Constant(1, 1, v); };
  near(fid(moments(one(0), var(1)), moments(one(1), var(1))), 1.0, "1-D mean shift");
  near(fid(moments(one(0), var(4)), moments(one(0), var(1))), 1.0, "1-D variance ratio");

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CounterRng rng(seed);
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.below(16));
    Eigen::VectorXd sr(d), sg(d), mr(d), mg(d);
    double want = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
      sr(i) = 0.05 + 4.0 * rng.uniform();
      sg(i) = 0.05 + 4.0 * rng.uniform();
      mr(i) = rng.normal();
      mg(i) = rng.normal();
      const double ds = std::sqrt(sr(i)) - std::sqrt(sg(i));
      want += (mr(i) - mg(i)) * (mr(i) - mg(i)) + ds * ds;
    }
    const GaussianMoments a = moments(mr, sr.asDiagonal().toDenseMatrix());
    const GaussianMoments b = moments(mg, sg.asDiagonal().toDenseMatrix());
    near(fid(a, b), want, "diagonal seed " + std::to_string(seed));

    const Eigen::Index n = 2 + static_cast<Eigen::Index>(seed % 24);
    const GaussianMoments p = moments(Eigen::VectorXd::Random(n), random_spd(n, seed + 1));
    const GaussianMoments q = moments(Eigen::VectorXd::Random(n), random_spd(n, seed + 2));
    near(fid(p, p), 0.0, "self distance seed " + std::to_string(seed));
    near(fid(p, q), fid(q, p), "symmetry seed " + std::to_string(seed));
  }

  double sqrt_worst = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Eigen::Index n = seed < 36 ? 1 + static_cast<Eigen::Index>(seed) : 64 - static_cast<Eigen::Index>(seed % 28);
    const Eigen::MatrixXd m = random_spd(n, 1000 + seed);
    const Eigen::MatrixXd s = matrix_sqrt_spd(SpdMatrix(m)).matrix();
    const double rel = (s * s - m).norm() / m.norm();
    sqrt_worst = std::max(sqrt_worst, rel);
    out.require(rel <= 1e-8, "sqrt square-back n=" + std::to_string(n) + " rel " + num(rel));
  }
  const double secs = clock.seconds();
  out.require(secs < 60.0, "runtime " + num(secs) + " s exceeds 60 s");
  out.detail = "max abs err " + num(worst) + ", sqrt square-back " + num(sqrt_worst) +
               " over 100 SPD matrices up to 64x64, " + num(secs) + " s";
  return out;
}

// Criterion 3 ---------------------------------------------------------------

Features random_features(Eigen::Index n, Eigen::Index d, std::uint64_t seed, double shift = 0.0) {
  CounterRng rng(seed);
  Features f(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) f(i, j) = rng.normal() + shift;
  return f;
}

double brute_mmd2(const Features& x, const Features& y) {
  const auto k = [](const Features& a, Eigen::Index i, const Features& b, Eigen::Index j) {
    double dot = 0.0;
    for (Eigen::Index c = 0; c < a.cols(); ++c) dot += a(i, c) * b(j, c);
    const double t = dot / static_cast<double>(a.cols()) + 1.0;
    return t * t * t;
  };
  const Eigen::Index m = x.rows();
  double xx = 0.0, yy = 0.0, xy = 0.0;
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) {
      if (i != j) {
        xx += k(x, i, x, j);
        yy += k(y, i, y, j);
      }
      xy += k(x, i, y, j);
    }
  const double md = static_cast<double>(m);
  return (xx + yy) / (md * (md - 1)) - 2.0 * xy / (md * md);
}

Outcome kid_oracle() {
  Outcome out;
  Features hand(2, 2);
  hand << 1, 1, 1, -1;
  const double h = mmd2_unbiased(hand, hand);
  out.require(h == -7.0, "hand example gave " + num(h));

  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Features real = random_features(80, 8, seed), gen = random_features(90, 8, seed + 100, 0.4);
    const KidOptions opt{.block_size = 25, .n_blocks = 4, .seed = seed};
    const auto blocks = kid_blocks(real, gen, opt);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const auto ri = kid_subsample(80, 25, seed, b, 0), gi = kid_subsample(90, 25, seed, b, 1);
      Features xs(25, 8), ys(25, 8);
      for (Eigen::Index i = 0; i < 25; ++i) {
        xs.row(i) = real.row(static_cast<Eigen::Index>(ri[static_cast<std::size_t>(i)]));
        ys.row(i) = gen.row(static_cast<Eigen::Index>(gi[static_cast<std::size_t>(i)]));
      }
      const double err = std::abs(blocks[b] - brute_mmd2(xs, ys));
      worst = std::max(worst, err);
      out.require(err <= 1e-12, "block mismatch " + num(err));
    }
  }

  std::vector<double> est;
  for (std::uint64_t t = 0; t < 100; ++t) {
    est.push_back(kid(random_features(100, 8, 2 * t + 5000), random_features(100, 8, 2 * t + 5001),
                      {.block_size = 50, .n_blocks = 4, .seed = t}));
  }
  double mean = 0.0, var = 0.0;
  for (double v : est) mean += v / 100.0;
  for (double v : est) var += (v - mean) * (v - mean) / 99.0;
  const double sd = std::sqrt(var);
  int inside = 0;
  for (double v : est) inside += std::abs(v) <= 3.0 * sd;
  out.require(std::abs(mean) <= 3.0 * sd, "self-distance mean " + num(mean) + " beyond 3 sd");
  out.require(inside >= 95, "only " + std::to_string(inside) + "/100 trials within 3 sd");
  out.detail = "hand example " + num(h) + ", max block err " + num(worst) + ", self-distance mean " +
               num(mean) + " (sd " + num(sd) + ", " + std::to_string(inside) + "/100 within 3 sd)";
  return out;
}

// Criterion 4 ---------------------------------------------------------------

Outcome ada_heuristics() {
  Outcome out;
  const auto rv = [](double t, double v, double g) {
    ScoreSummary s;
    s.e_train = t;
    s.e_val = v;
    s.e_gen = g;
    return heuristic_rv(s);
  };
  out.require(rv(1, 1, -1) == 0.0, "r_v example 1");
  out.require(rv(1, -1, -1) == 1.0, "r_v example 2");
  out.require(rv(0.8, 0.2, -0.4) == 0.6 / 1.2, "r_v example 3");
  const std::vector<double> pos{0.3, 1.0}, mixed{0.5, -0.2, 0.1, -0.9}, zeros{0.0, 0.0, 0.0};
  out.require(heuristic_rt(pos) == 1.0, "r_t all positive");
  out.require(heuristic_rt(mixed) == 0.0, "r_t mixed");
  out.require(heuristic_rt(zeros) == 0.0, "r_t zeros");

  const ControllerConfig cfg;
  out.require(controller_step(ControllerState::with_p(cfg, 0.5), 0.8, 16).p() == 0.50016,
              "single step 0.5 -> 0.50016");
  const std::int64_t batch = 16;
  const auto expected = static_cast<std::int64_t>(
      std::ceil(cfg.p_max * static_cast<double>(cfg.horizon_images) / static_cast<double>(batch)));
  ControllerState s;
  s.config = cfg;
  std::int64_t steps = 0;
  while (s.p() < cfg.p_max && steps <= 2 * expected) {
    s = controller_step(s, 0.9, batch);
    ++steps;
  }
  out.require(steps == expected, "reached p_max after " + std::to_string(steps) + " steps");
  std::int64_t down = 0;
  while (s.p() > 0.0 && down <= 2 * expected) {
    s = controller_step(s, 0.1, batch);
    ++down;
  }
  out.require(down == expected, "returned to 0 after " + std::to_string(down) + " steps");
  out.detail = "r_v {0,1,0.5}, r_t {1,0,0}, p_max reached in " + std::to_string(steps) +
               " steps (expected " + std::to_string(expected) + ")";
  return out;
}

// Criterion 5 ---------------------------------------------------------------

Outcome demodulation() {
  Outcome out;
  SynthesisConfig sc;
  const Generator g(sc, 11);
  double worst = 0.0;
  std::size_t layers = 0;
  for (const auto& p : g.parameters()) {
    if (p.name.find(".conv") == std::string::npos || !p.name.ends_with(".weight") ||
        p.name.find("affine") != std::string::npos) {
      continue;
    }
    ++layers;
    const Shape& sh = p.tensor.shape();
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      const Tensor s = random_tensor({sh[1]}, seed + 31 * layers, false, 2.0);
      const Tensor eff = modulate_demodulate(p.tensor, s, true);
      const auto v = eff.data();
      const std::size_t k = sh[1] * sh[2] * sh[3];
      for (std::size_t o = 0; o < sh[0]; ++o) {
        double ss = 0.0;
        for (std::size_t j = 0; j < k; ++j) ss += v[o * k + j] * v[o * k + j];
        worst = std::max(worst, std::abs(std::sqrt(ss) - 1.0));
      }
    }
  }
  out.require(layers == g.num_layers(), "found " + std::to_string(layers) + " modulated layers");
  out.require(worst <= 1e-6, "norm deviation " + num(worst));

  // Centre output of a 3x3 input sees every tap.
  const std::size_t n = 10000, in = 16, oc = 8;
  const Tensor x = random_tensor({n, in, 3, 3}, 5, false);
  const Tensor w = random_tensor({oc, in, 3, 3}, 6, false);
  CounterRng rng(7);
  std::vector<double> style(n * in);
  for (double& v : style) v = 1.0 + 0.5 * rng.normal();
  const Tensor y = modulated_conv2d(x, w, Tensor::from_data({n, in}, style), true);
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t o = 0; o < oc; ++o) {
      const double v = y[((i * oc + o) * 3 + 1) * 3 + 1];
      sum += v;
      sum2 += v * v;
    }
  const double cnt = static_cast<double>(n * oc);
  const double sd = std::sqrt(sum2 / cnt - (sum / cnt) * (sum / cnt));
  out.require(sd >= 0.8 && sd <= 1.2, "output std " + num(sd));
  out.detail = "max |norm - 1| " + num(worst) + " over " + std::to_string(layers) +
               " generator layers, output std " + num(sd) + " over 10000 samples";
  return out;
}

// Criterion 6 ---------------------------------------------------------------

struct Logged {
  std::string reports;
  std::vector<std::uint8_t> final_state;
};

Logged run_tiny(Trainer& t) {
  Logged log;
  RunHooks hooks;
  hooks.on_report = [&](const ReportRow& r) { log.reports += r.to_csv() + "\n"; };
  t.run(hooks);
  log.final_state = encode_checkpoint(t.checkpoint());
  return log;
}

Outcome determinism() {
  Outcome out;
  const TrainConfig cfg = sgada::testing::tiny_run();
  const RecordSet data = sgada::testing::tiny_data();
  Trainer a(cfg, data), b(cfg, data);
  const Logged la = run_tiny(a), lb = run_tiny(b);
  out.require(la.reports == lb.reports, "reports differ between identical runs");
  out.require(la.final_state == lb.final_state, "checkpoints differ between identical runs");

  TrainConfig half = cfg;
  half.total_kimg = cfg.total_kimg / 2.0;
  Trainer first(half, data);
  run_tiny(first);
  const Checkpoint mid = decode_checkpoint(encode_checkpoint(first.checkpoint()));
  Trainer second = Trainer::from_checkpoint(mid, data, cfg.total_kimg);
  const Logged tail = run_tiny(second);
  out.require(tail.final_state == la.final_state, "resumed checkpoint differs from uninterrupted run");
  out.detail = std::to_string(a.tick()) + " ticks, report " + std::to_string(la.reports.size()) +
               " bytes identical, 5+5 resume checkpoint " + std::to_string(la.final_state.size()) +
               " bytes identical";
  return out;
}

// Criterion 7 ---------------------------------------------------------------

Outcome data_round_trip() {
  Outcome out;
  const RecordSet set = make_toy_corpus("rings", 12, 16, 3);
  const auto dir = std::filesystem::temp_directory_path() / "sgada_acceptance";
  std::filesystem::create_directories(dir);
  const auto path = dir / "roundtrip.btrc";
  write_records(path, set);
  const RecordSet back = read_records(path);
  out.require(back.records == set.records, "records changed across write/read");

  const auto bytes = read_file_bytes(path);
  const std::size_t header = 17, per = 6 + 256 + 4;
  int detected = 0, tried = 0;
  for (std::size_t r = 0; r < set.size(); ++r)
    for (std::size_t k = 0; k < 256; k += 17) {
      auto bad = bytes;
      bad[header + r * per + 6 + k] ^= 0x80;
      ++tried;
      try {
        decode_records(bad);
      } catch (const DataError&) {
        ++detected;
      }
    }
  out.require(detected == tried, std::to_string(tried - detected) + " corruptions missed");

  const Image img{16, 16, 1, set.records[0].pixels};
  out.require(resize(img, 16) == img, "resize at target is not the identity");
  const Image up = resize(Image{2, 2, 1, {0, 0, 255, 255}}, 4);
  const std::vector<std::uint8_t> want{0, 0, 0, 0, 85, 85, 85, 85, 170, 170, 170, 170, 255, 255, 255, 255};
  out.require(up.pixels == want, "2x2 to 4x4 example");
  out.detail = std::to_string(set.size()) + " records pixel-exact, " + std::to_string(detected) + "/" +
               std::to_string(tried) + " corruptions detected, resize examples exact";
  return out;
}

// Criteria 8 and 9 ----------------------------------------------------------

TrainConfig smoke_config(std::int64_t seed) {
  TrainConfig c;
  c.resolution = 32;
  c.channels = "4:16,8:16,16:8,32:8";
  c.z_dim = 32;
  c.w_dim = 32;
  c.mapping_depth = 2;
  c.batch_size = 16;
  c.total_kimg = 30;
  c.snapshot_every_ticks = 10;
  c.seed = seed;
  return c;
}

struct SmokeRun {
  std::vector<ReportRow> reports;
  bool finite = true;
  bool p_in_range = true;
  double p_peak = 0.0;
};

SmokeRun train_logged(Trainer& t, const std::string& label) {
  SmokeRun run;
  const double p_max = t.config().ada_p_max;
  RunHooks hooks;
  hooks.on_report = [&](const ReportRow& r) {
    run.reports.push_back(r);
    std::cerr << "  " << label << " tick " << r.tick << " fid " << num(r.fid) << " p " << num(r.p) << "\n";
  };
  hooks.on_trace = [&](const TraceRow& r) {
    if (!std::isfinite(r.loss_d) || !std::isfinite(r.loss_g)) run.finite = false;
    if (!(r.p >= 0.0 && r.p <= p_max)) run.p_in_range = false;
    run.p_peak = std::max(run.p_peak, r.p);
  };
  try {
    t.run(hooks);
  } catch (const NumericError& e) {
    std::cerr << "  " << label << " aborted: " << e.what() << "\n";
    run.finite = false;
  }
  return run;
}

Outcome smoke_training() {
  Outcome out;
  const Stopwatch clock;
  const RecordSet data = make_toy_corpus("two-mode", 500, 32, 7);
  std::vector<double> first, last;
  std::string per_seed;
  for (std::int64_t seed = 0; seed < 3; ++seed) {
    Trainer t(smoke_config(seed), data);
    const SmokeRun run = train_logged(t, "seed " + std::to_string(seed));
    out.require(run.finite, "non-finite loss, seed " + std::to_string(seed));
    out.require(run.p_in_range, "p left [0, p_max], seed " + std::to_string(seed));
    if (run.reports.empty()) {
      out.require(false, "no reports, seed " + std::to_string(seed));
      continue;
    }
    first.push_back(run.reports.front().fid);
    last.push_back(run.reports.back().fid);
    per_seed += (per_seed.empty() ? "" : "; ") + num(first.back()) + " -> " + num(last.back());
  }
  if (!first.empty()) {
    out.require(median(last) < median(first),
                "median final FID " + num(median(last)) + " not below tick-0 " + num(median(first)));
  }
  out.detail = "FID tick 0 -> final per seed: " + per_seed + "; median final " +
               (last.empty() ? "n/a" : num(median(last))) + ", " + num(clock.seconds()) + " s";
  return out;
}

Outcome transfer_workflow() {
  Outcome out;
  const Stopwatch clock;
  TrainConfig source_cfg = smoke_config(100);
  source_cfg.total_kimg = 10;
  Trainer source(source_cfg, make_toy_corpus("symmetric-blobs", 500, 32, 1));
  train_logged(source, "source");
  const Checkpoint src = source.checkpoint();

  const RecordSet target = make_toy_corpus("two-mode", 100, 32, 11);
  int wins = 0;
  std::string per_seed;
  bool manifest_ok = true;
  for (std::int64_t seed = 0; seed < 3; ++seed) {
    TrainConfig cfg = smoke_config(seed);
    cfg.total_kimg = 5;
    cfg.snapshot_every_ticks = 5;

    Trainer scratch(cfg, target);
    const SmokeRun s = train_logged(scratch, "scratch " + std::to_string(seed));
    Trainer tuned(cfg, target);
    const TransferManifest m = tuned.transfer_from(src);
    manifest_ok = manifest_ok && m.reinitialized.empty() && m.copied_fraction() == 1.0;
    const SmokeRun f = train_logged(tuned, "transfer " + std::to_string(seed));
    if (s.reports.empty() || f.reports.empty()) continue;

    // Both improvements are measured from the untrained model's tick-0 FID.
    const double base = s.reports.front().fid;
    const double gain_scratch = (base - s.reports.back().fid) / base;
    const double gain_tuned = (base - f.reports.back().fid) / base;
    wins += gain_tuned >= gain_scratch;
    per_seed += (per_seed.empty() ? "" : "; ") + num(f.reports.back().fid) + " vs " +
                num(s.reports.back().fid);
  }
  out.require(manifest_ok, "same-architecture manifest was not a full copy");
  const bool soft_ok = wins >= 2;
  out.detail = "manifest 100% copied, final FID transfer vs scratch: " + per_seed + "; transfer at least as good in " +
               std::to_string(wins) + "/3 seeds" + (soft_ok ? "" : " (soft miss, logged)") + ", " +
               num(clock.seconds()) + " s";
  return out;
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "gradient suite", gradient_suite},
      {2, "FID oracle", fid_oracle},
      {3, "KID oracle", kid_oracle},
      {4, "ADA heuristics and controller", ada_heuristics},
      {5, "demodulation", demodulation},
      {6, "determinism and resume", determinism},
      {7, "data round-trip", data_round_trip},
      {8, "smoke training", smoke_training},
      {9, "transfer workflow", transfer_workflow},
  };
  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));

  int failed = 0;
  for (const Criterion& c : all) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.failures.push_back(std::string("exception: ") + e.what());
    }
    std::cout << "criterion " << c.id << " (" << c.name << "): " << (o.pass ? "PASS" : "FAIL");
    if (!o.detail.empty()) std::cout << " - " << o.detail;
    std::cout << "\n";
    for (std::size_t i = 0; i < o.failures.size() && i < 10; ++i) {
      std::cout << "    " << o.failures[i] << "\n";
    }
    std::cout.flush();
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
