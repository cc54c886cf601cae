#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "rtransfer/process.hpp"
#include "rtransfer/protocol.hpp"
#include "support/fixtures.hpp"

namespace rt = rtransfer;
namespace fs = std::filesystem;
using rt::testing::TempDir;

namespace {
const fs::path kHooks = RT_HOOKS_DIR;
}

TEST(Process, TemplatesQuoteValues) {
  EXPECT_EQ(rt::process::shell_quote("a'b"), "'a'\\''b'");
  EXPECT_EQ(rt::process::expand_template("cp {src} {dst} {other}", {{"src", "a b"}, {"dst", "c"}}),
            "cp 'a b' 'c' {other}");
}

TEST(Process, RunShellCapturesExitAndLog) {
  TempDir dir;
  const auto ok = rt::process::run_shell("echo hello", dir / "ok.log");
  EXPECT_EQ(ok.exit_code, 0);
  EXPECT_EQ(rt::io::read_file(dir / "ok.log"), "hello\n");
  const auto bad = rt::process::run_shell("echo oops >&2; exit 3", dir / "bad.log");
  EXPECT_EQ(bad.exit_code, 3);
  EXPECT_NE(bad.output_tail.find("oops"), std::string::npos);
}

TEST(Config, JsonRoundTripAndValidation) {
  TempDir dir;
  auto c = rt::testing::stub_config(dir.path(), kHooks, 20);
  const auto back = rt::ExperimentConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
  EXPECT_EQ(back.fingerprint(), c.fingerprint());
  auto j = c.to_json();
  j["jobs"] = 8;
  EXPECT_EQ(rt::ExperimentConfig::from_json(j).fingerprint(), c.fingerprint());
  j["seed"] = 2;
  EXPECT_NE(rt::ExperimentConfig::from_json(j).fingerprint(), c.fingerprint());
  j["unknown"] = 1;
  EXPECT_THROW(rt::ExperimentConfig::from_json(j), rt::Error);

  auto no_clean = c;
  no_clean.settings = {rt::Setting::CharAttack};
  EXPECT_THROW(no_clean.validate(), rt::Error);
  auto bad_hook = c;
  bad_hook.hooks.translate = "cp {src_file} {out_file}";
  EXPECT_THROW(bad_hook.validate(), rt::Error);
}

TEST(Config, RelativePathsResolveAgainstConfigFile) {
  TempDir dir;
  auto c = rt::testing::stub_config(dir.path(), kHooks, 20);
  auto j = c.to_json();
  j["dataset"] = "data/manifest.json";
  j["output_dir"] = "out";
  rt::io::write_file_atomic(dir / "cfg.json", j.dump());
  const auto loaded = rt::ExperimentConfig::load(dir / "cfg.json");
  EXPECT_EQ(loaded.manifest, dir.path() / "data/manifest.json");
  EXPECT_EQ(loaded.output_dir, dir.path() / "out");
}

TEST(Protocol, UnknownAttackedDirection) {
  TempDir dir;
  auto c = rt::testing::stub_config(dir.path(), kHooks, 20);
  c.attacked = rt::Direction("de", "en");
  try {
    rt::Protocol p(c);
    FAIL();
  } catch (const rt::Error& e) {
    EXPECT_EQ(e.kind(), rt::ErrorKind::UnknownDirection);
  }
}

TEST(Protocol, SmallRunResumesAndReports) {
  TempDir dir;
  auto c = rt::testing::stub_config(dir.path(), kHooks, 40);
  const auto first = rt::run_protocol(c);
  EXPECT_EQ(first.trainings_run, 4u);
  EXPECT_EQ(first.cells_computed, 64u);
  EXPECT_TRUE(first.report.complete());
  for (const auto& [k, cell] : first.report.grid) {
    EXPECT_GT(cell.bleu, 0.0);
    if (k.train == rt::Setting::Clean) {
      EXPECT_EQ(*cell.delta_pct, 0.0);
    }
  }
  for (const char* f : {"report.md", "grid.csv", "deltas.tsv", "state.json", "effective_config.json"})
    EXPECT_TRUE(fs::exists(c.output_dir / f)) << f;

  // Non-attacked training files are byte copies of the inputs.
  rt::Protocol p(c);
  const auto m = rt::Manifest::load(c.manifest);
  for (const auto& d : m.directions)
    for (auto side : {rt::Side::Src, rt::Side::Tgt}) {
      const auto name = rt::corpus_file_name(rt::Split::Train, d, side);
      const bool attacked = d == c.attacked && side == rt::Side::Src;
      EXPECT_EQ(rt::io::sha256_file(p.train_dir(rt::Setting::CharAttack) / name) ==
                    rt::io::sha256_file(m.root / name),
                !attacked)
          << name;
      EXPECT_EQ(rt::io::sha256_file(p.train_dir(rt::Setting::Clean) / name), rt::io::sha256_file(m.root / name));
    }

  const rt::GridKey key{rt::Setting::WordAttack, rt::Setting::CharAttack, rt::Direction("en", "ar")};
  fs::remove(p.hyp_file(key));
  const auto second = rt::run_protocol(c);
  EXPECT_EQ(second.trainings_run, 0u);
  EXPECT_EQ(second.cells_computed, 1u);
  EXPECT_EQ(second.cells_reused, 63u);
  for (const auto& [k, cell] : first.report.grid) EXPECT_EQ(second.report.grid.at(k).bleu, cell.bleu);

  // A changed seed invalidates all saved state.
  c.seed = 2;
  const auto third = rt::run_protocol(c);
  EXPECT_EQ(third.trainings_run, 4u);
  EXPECT_EQ(third.cells_computed, 64u);
}

TEST(Protocol, FailingHookReportsLogTail) {
  TempDir dir;
  auto c = rt::testing::stub_config(dir.path(), kHooks, 20);
  c.hooks.train = "echo broken trainer >&2; exit 1 # {train_dir} {model_dir}";
  try {
    rt::run_protocol(c);
    FAIL();
  } catch (const rt::Error& e) {
    EXPECT_EQ(e.kind(), rt::ErrorKind::HookFailure);
    EXPECT_NE(std::string(e.what()).find("broken trainer"), std::string::npos) << e.what();
  }
}

TEST(Protocol, MissingHypothesisIsReported) {
  TempDir dir;
  auto c = rt::testing::stub_config(dir.path(), kHooks, 20);
  c.hooks.translate = "true {model_dir} {src_file} {out_file} {direction}";
  try {
    rt::run_protocol(c);
    FAIL();
  } catch (const rt::Error& e) {
    EXPECT_EQ(e.kind(), rt::ErrorKind::MissingOutput);
  }
}
