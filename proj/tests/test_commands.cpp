#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "srr/commands.hpp"

using namespace srr;
namespace fs = std::filesystem;

namespace {

struct TempTree {
  fs::path root;
  explicit TempTree(const std::string& name) {
    root = fs::temp_directory_path() / name;
    fs::remove_all(root);
    fs::create_directories(root);
  }
  ~TempTree() { fs::remove_all(root); }
  fs::path file(const std::string& rel) const { return root / rel; }
};

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream f(p, std::ios::trunc);
  f << content;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kClusterConfig = R"({
  "seed": 3,
  "output_dir": "OUTDIR",
  "dataset": {"kind": "synth_clusters", "n_per_class": 40, "dim": 2,
              "separation": 5.0, "split": [0.5, 0.25, 0.25]},
  "model": {"hidden": [6]},
  "train": {"alpha0": 0.2, "batch_size": 10, "max_epochs": 3,
            "power_iteration": {"eps": 0.01, "max_iters": 300},
            "regularizer": {"mu": 0.01, "K": 0.0}},
  "harness": {"sigma_shift": 0.05, "n_trials": 40}
})";

const char* kStrokeConfig = R"({
  "seed": 5,
  "output_dir": "OUTDIR",
  "dataset": {"kind": "synth_strokes", "n_per_class": 20},
  "model": {"hidden": [6]},
  "train": {"alpha0": 0.1, "batch_size": 17, "max_epochs": 2},
  "harness": {"at1": {"crop": 1, "rot": 15.0}, "at2": {"crop": 2, "rot": 30.0}}
})";

std::string with_outdir(std::string text, const fs::path& dir) {
  const std::string key = "OUTDIR";
  text.replace(text.find(key), key.size(), dir.generic_string());
  return text;
}

}  // namespace

TEST_CASE("train writes its outputs and reruns byte-identically") {
  TempTree tmp("srr_cmd_train");
  write_file(tmp.file("run1.json"), with_outdir(kClusterConfig, tmp.file("out1")));
  write_file(tmp.file("run2.json"), with_outdir(kClusterConfig, tmp.file("out2")));

  std::ostringstream out, err;
  REQUIRE(cmd_train(tmp.file("run1.json").string(), {}, out, err) == 0);
  REQUIRE(err.str().empty());
  REQUIRE(fs::exists(tmp.file("out1/metrics.csv")));
  REQUIRE(fs::exists(tmp.file("out1/timing.csv")));
  REQUIRE(fs::exists(tmp.file("out1/resolved_config.json")));
  REQUIRE(fs::exists(tmp.file("out1/final.srrn")));
  REQUIRE(fs::exists(tmp.file("out1/best_val.srrn")));

  const std::string metrics = read_file(tmp.file("out1/metrics.csv"));
  REQUIRE(metrics.rfind("epoch,f,rho_batch,h,grad_norm,pi_iters,pi_residual\n", 0) == 0);
  // header plus one line per epoch
  REQUIRE(std::count(metrics.begin(), metrics.end(), '\n') == 4);

  REQUIRE(cmd_train(tmp.file("run2.json").string(), {}, out, err) == 0);
  REQUIRE(read_file(tmp.file("out2/metrics.csv")) == metrics);
  REQUIRE(read_file(tmp.file("out1/final.srrn")) == read_file(tmp.file("out2/final.srrn")));
}

TEST_CASE("the seed override changes the run and is echoed") {
  TempTree tmp("srr_cmd_seed");
  write_file(tmp.file("run.json"), with_outdir(kClusterConfig, tmp.file("outA")));
  std::ostringstream out, err;
  REQUIRE(cmd_train(tmp.file("run.json").string(), {}, out, err) == 0);

  CliOverrides ov;
  ov.has_seed = true;
  ov.seed = 99;
  ov.out_dir = tmp.file("outB").string();
  REQUIRE(cmd_train(tmp.file("run.json").string(), ov, out, err) == 0);
  REQUIRE(read_file(tmp.file("outA/metrics.csv")) !=
          read_file(tmp.file("outB/metrics.csv")));
  const auto echo = nlohmann::json::parse(read_file(tmp.file("outB/resolved_config.json")));
  REQUIRE(echo["seed"] == 99);
  REQUIRE(echo["output_dir"] == tmp.file("outB").generic_string());
}

TEST_CASE("eval prints a four-decimal accuracy for a saved checkpoint") {
  TempTree tmp("srr_cmd_eval");
  write_file(tmp.file("run.json"), with_outdir(kClusterConfig, tmp.file("out")));
  std::ostringstream out, err;
  REQUIRE(cmd_train(tmp.file("run.json").string(), {}, out, err) == 0);

  std::ostringstream eval_out;
  REQUIRE(cmd_eval(tmp.file("run.json").string(), tmp.file("out/final.srrn").string(),
                   {}, eval_out, err) == 0);
  const std::string s = eval_out.str();
  REQUIRE(s.size() == 7);  // "0.xxxx\n"
  REQUIRE(s[1] == '.');
  REQUIRE(s.back() == '\n');
  const double acc = std::stod(s);
  REQUIRE(acc >= 0.0);
  REQUIRE(acc <= 1.0);
}

TEST_CASE("eval refuses a checkpoint whose shape does not fit the data") {
  TempTree tmp("srr_cmd_evalbad");
  write_file(tmp.file("clusters.json"), with_outdir(kClusterConfig, tmp.file("outc")));
  write_file(tmp.file("strokes.json"), with_outdir(kStrokeConfig, tmp.file("outs")));
  std::ostringstream out, err;
  REQUIRE(cmd_train(tmp.file("clusters.json").string(), {}, out, err) == 0);
  std::ostringstream err2;
  REQUIRE(cmd_eval(tmp.file("strokes.json").string(),
                   tmp.file("outc/final.srrn").string(), {}, out, err2) == 1);
  REQUIRE(err2.str().find("error:") != std::string::npos);
  REQUIRE(err2.str().find("input width") != std::string::npos);
}

TEST_CASE("shift-test writes trials and slopes, pairwise only for two models") {
  TempTree tmp("srr_cmd_shift");
  write_file(tmp.file("run.json"), with_outdir(kClusterConfig, tmp.file("out")));
  std::ostringstream out, err;
  REQUIRE(cmd_train(tmp.file("run.json").string(), {}, out, err) == 0);

  REQUIRE(cmd_shift_test(tmp.file("run.json").string(),
                         {tmp.file("out/final.srrn").string()}, {}, out, err) == 0);
  const std::string trials = read_file(tmp.file("out/shift_trials.csv"));
  REQUIRE(trials.rfind("trial_id,l1_norm,final\n", 0) == 0);
  REQUIRE(std::count(trials.begin(), trials.end(), '\n') == 41);
  REQUIRE(fs::exists(tmp.file("out/slope_report.csv")));
  REQUIRE_FALSE(fs::exists(tmp.file("out/slope_pairwise.csv")));
  const std::string slopes = read_file(tmp.file("out/slope_report.csv"));
  REQUIRE(slopes.find("normal_approx") != std::string::npos);

  REQUIRE(cmd_shift_test(tmp.file("run.json").string(),
                         {tmp.file("out/final.srrn").string(),
                          tmp.file("out/best_val.srrn").string()},
                         {}, out, err) == 0);
  REQUIRE(fs::exists(tmp.file("out/slope_pairwise.csv")));
  const std::string pair = read_file(tmp.file("out/slope_pairwise.csv"));
  REQUIRE(pair.find("final,best_val") != std::string::npos);
}

TEST_CASE("augment-test summarizes the three tiers") {
  TempTree tmp("srr_cmd_aug");
  write_file(tmp.file("run.json"), with_outdir(kStrokeConfig, tmp.file("out")));
  std::ostringstream out, err;
  REQUIRE(cmd_train(tmp.file("run.json").string(), {}, out, err) == 0);
  REQUIRE(cmd_augment_test(tmp.file("run.json").string(),
                           tmp.file("out/final.srrn").string(), {}, out, err) == 0);
  const std::string summary = read_file(tmp.file("out/augment_summary.csv"));
  REQUIRE(summary.rfind("tier,accuracy\n", 0) == 0);
  REQUIRE(summary.find("\ntest,") != std::string::npos);
  REQUIRE(summary.find("\nat1,") != std::string::npos);
  REQUIRE(summary.find("\nat2,") != std::string::npos);
}

TEST_CASE("augment-test refuses non-image data") {
  TempTree tmp("srr_cmd_augbad");
  write_file(tmp.file("run.json"), with_outdir(kClusterConfig, tmp.file("out")));
  std::ostringstream out, err;
  REQUIRE(cmd_train(tmp.file("run.json").string(), {}, out, err) == 0);
  std::ostringstream err2;
  REQUIRE(cmd_augment_test(tmp.file("run.json").string(),
                           tmp.file("out/final.srrn").string(), {}, out, err2) == 1);
  REQUIRE(err2.str().find("image") != std::string::npos);
}

TEST_CASE("command errors surface as a single diagnostic line and exit code") {
  std::ostringstream out, err;
  REQUIRE(cmd_train("/nonexistent/cfg.json", {}, out, err) == 1);
  const std::string msg = err.str();
  REQUIRE(msg.rfind("error:", 0) == 0);
  REQUIRE(std::count(msg.begin(), msg.end(), '\n') == 1);

  TempTree tmp("srr_cmd_badcfg");
  write_file(tmp.file("bad.json"), R"({"sede": 1})");
  std::ostringstream err2;
  REQUIRE(cmd_train(tmp.file("bad.json").string(), {}, out, err2) == 1);
  REQUIRE(err2.str().find("sede") != std::string::npos);
}

TEST_CASE("the validation suite command reports success") {
  std::ostringstream out, err;
  REQUIRE(cmd_validate(out, err) == 0);
  REQUIRE(out.str().find("[PASS]") != std::string::npos);
  REQUIRE(out.str().find("[FAIL]") == std::string::npos);
}
