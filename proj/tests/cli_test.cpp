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

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "sgada/binary_io.hpp"
#include "sgada/checkpoint.hpp"
#include "sgada/datakit.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path& work() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "sgada_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(SGADA_CLI) + " " + args + " > " +
                          (work() / "last.log").string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::string kTiny =
    " --resolution 16 --channels 4:8,8:8,16:8 --z_dim 8 --w_dim 8 --mapping_depth 1"
    " --batch_size 4 --tick_kimg 0.016 --total_kimg 0.032 --snapshot_every_ticks 1"
    " --n_gen 20 --kid_block_size 10 --kid_blocks 2";

}  // namespace

TEST(Cli, ExitCodes) {
  EXPECT_EQ(cli("--help"), 0);
  EXPECT_EQ(cli("frobnicate"), 2);
  EXPECT_EQ(cli("train --out " + (work() / "x").string() + " --no_such_key 1"), 2);
  EXPECT_EQ(cli("train --out " + (work() / "x").string() + " --data " +
                (work() / "missing.btrc").string()),
            3);
  EXPECT_EQ(cli("generate --checkpoint " + (work() / "missing.stck").string() + " --out " +
                (work() / "g.pgm").string()),
            3);
}

TEST(Cli, ToyTrainResumeGenerateMetrics) {
  const fs::path data = work() / "toy.btrc";
  ASSERT_EQ(cli("dataset toy --kind two-mode --count 40 --res 16 --seed 2 --out " + data.string()), 0);
  EXPECT_EQ(sgada::read_records(data).size(), 40u);

  const fs::path run = work() / "run";
  ASSERT_EQ(cli("train --out " + run.string() + " --data " + data.string() + kTiny), 0)
      << slurp(work() / "last.log");
  for (const char* f : {"report.csv", "trace.csv", "config.txt", "final.stck", "latest.stck"})
    EXPECT_TRUE(fs::exists(run / f)) << f;
  const std::string report = slurp(run / "report.csv");
  EXPECT_EQ(report.rfind("tick,kimg,fid,kid,p,r_t,r_v,loss_g,loss_d", 0), 0u);

  ASSERT_EQ(cli("resume --checkpoint " + (run / "final.stck").string() + " --out " + run.string() +
                " --total_kimg 0.048"),
            0)
      << slurp(work() / "last.log");
  EXPECT_GT(slurp(run / "report.csv").size(), report.size());

  const fs::path a = work() / "a.pgm", b = work() / "b.pgm";
  const std::string gen = "generate --checkpoint " + (run / "final.stck").string() +
                          " --rows 2 --cols 2 --seed 5 --out ";
  ASSERT_EQ(cli(gen + a.string()), 0);
  ASSERT_EQ(cli(gen + b.string()), 0);
  EXPECT_EQ(sgada::read_file_bytes(a), sgada::read_file_bytes(b));
  EXPECT_EQ(sgada::read_pnm(a).width, 32u);

  const std::string metrics =
      "metrics --checkpoint " + (run / "final.stck").string() + " --data " + data.string();
  ASSERT_EQ(cli(metrics + " --n-gen 20"), 0) << slurp(work() / "last.log");
  EXPECT_NE(slurp(work() / "last.log").find("fid"), std::string::npos);
  // The stored KID block of 10 needs at least 20 generated samples.
  EXPECT_EQ(cli(metrics + " --n-gen 10"), 3);
}

TEST(Cli, PretrainThenTransferWritesManifest) {
  const fs::path src = work() / "src";
  ASSERT_EQ(cli("pretrain --corpus symmetric-blobs --count 40 --out " + src.string() + kTiny), 0)
      << slurp(work() / "last.log");
  const fs::path data = work() / "target.btrc";
  ASSERT_EQ(cli("dataset toy --kind two-mode --count 40 --res 16 --seed 4 --out " + data.string()), 0);
  const fs::path dst = work() / "dst";
  ASSERT_EQ(cli("transfer --source " + (src / "final.stck").string() + " --out " + dst.string() +
                " --data " + data.string() + kTiny),
            0)
      << slurp(work() / "last.log");
  const std::string manifest = slurp(dst / "transfer_manifest.txt");
  EXPECT_NE(manifest.find("copied"), std::string::npos);
}
