#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <string>

#include "support/tempdir.hpp"
#include "tumorkit/dataset.hpp"
#include "tumorkit/metrics.hpp"

using tktest::TempDir;

namespace {

struct CliRun {
  int status = -1;
  std::string output;  // stdout and stderr interleaved
};

CliRun run_cli(const std::string& args) {
  const std::string cmd = std::string(TUMORKIT_CLI) + " " + args + " 2>&1";
  CliRun r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST(Cli, HelpAndUsageErrors) {
  EXPECT_EQ(run_cli("--help").status, 0);
  EXPECT_EQ(run_cli("").status, 2);
  EXPECT_EQ(run_cli("frobnicate").status, 2);
  EXPECT_EQ(run_cli("train --train-on pixels").status, 2);
  EXPECT_EQ(run_cli("evaluate").status, 2);
}

TEST(Cli, ElbowKMaxTwoIsUsageError) {
  const CliRun r = run_cli("elbow --k-max 2");
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.output.find("usage error"), std::string::npos) << r.output;
}

TEST(Cli, RuntimeFailureExitsOne) {
  TempDir dir;
  const CliRun r = run_cli("--manifest " + q(dir / "absent.csv") + " segment");
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.output.find("error:"), std::string::npos) << r.output;
}

TEST(Cli, EndToEnd) {
  TempDir dir;
  const auto data = dir / "data", out = dir / "out";
  ASSERT_EQ(run_cli("--seed 4 --out " + q(data) + " synth --count 8 --size 24").status, 0);
  EXPECT_EQ(tumorkit::load_manifest(data / "manifest.csv").entries.size(), 8u);

  tktest::write_text(dir / "run.toml", "seed = 4\nout = \"out\"\n[dataset]\nmanifest = \"data/manifest.csv\"\n"
                                       "[network]\ninput_height = 24\ninput_width = 24\n"
                                       "[train]\nepochs = 1\nbatch_size = 4\n");
  const std::string base = "--config " + q(dir / "run.toml") + " ";

  CliRun r = run_cli(base + "preprocess pos_0000 neg_0000");
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_TRUE(std::filesystem::exists(out / "pos_0000_pre.png"));

  r = run_cli(base + "elbow --k-max 5");
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_NE(r.output.find("chosen k: "), std::string::npos);

  r = run_cli(base + "segment");
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_EQ(tumorkit::read_iou_report(out / "iou_report.csv").per_image.size(), 4u);
  EXPECT_NE(r.output.find("skipped 4 without masks"), std::string::npos) << r.output;

  r = run_cli(base + "train --train-on preprocessed");
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_NE(r.output.find("peak test accuracy: "), std::string::npos);
  EXPECT_EQ(tumorkit::read_train_report(out / "train_report.csv").epochs(), 1u);

  r = run_cli(base + "evaluate --checkpoint " + q(out / "checkpoint.json") + " --split all");
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_NE(r.output.find("accuracy: "), std::string::npos);

  tktest::write_text(dir / "other.toml", "[dataset]\nmanifest = \"data/manifest.csv\"\n"
                                         "[network]\ninput_height = 32\ninput_width = 32\n");
  r = run_cli("--config " + q(dir / "other.toml") + " evaluate --checkpoint " +
              q(out / "checkpoint.json"));
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.output.find("shape mismatch"), std::string::npos) << r.output;
}
