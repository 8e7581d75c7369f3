#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <vector>

#include "srr/checkpoint.hpp"
#include "srr/config.hpp"

using namespace srr;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

struct Cleanup {
  std::filesystem::path p;
  ~Cleanup() { std::filesystem::remove(p); }
};

ModelBundle sample_model() {
  Network net = make_mlp(4, {5, 3}, 2, ActivationKind::sigmoid, 77, 1.3);
  return ModelBundle{"sample", std::move(net), LossModel{LossKind::sigmoid_bce}};
}

std::vector<char> read_all(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::vector<char>(std::istreambuf_iterator<char>(in), {});
}

void write_all(const std::filesystem::path& p, const std::vector<char>& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("checkpoint round-trips parameters bit for bit") {
  const ModelBundle m = sample_model();
  const auto p = temp_path("srr_ckpt_rt.srrn");
  Cleanup cl{p};
  save_checkpoint(p.string(), m);
  const ModelBundle back = load_checkpoint(p.string());
  REQUIRE(back.net.flatten() == m.net.flatten());
  REQUIRE(back.net.input_dim() == 4);
  REQUIRE(back.net.depth() == 3);
  REQUIRE(back.net.layers()[0].activation == ActivationKind::sigmoid);
  REQUIRE(back.net.layers()[2].activation == ActivationKind::identity);
  REQUIRE(back.loss.kind == LossKind::sigmoid_bce);
}

TEST_CASE("saving twice produces identical bytes") {
  const ModelBundle m = sample_model();
  const auto p1 = temp_path("srr_ckpt_a.srrn");
  const auto p2 = temp_path("srr_ckpt_b.srrn");
  Cleanup c1{p1}, c2{p2};
  save_checkpoint(p1.string(), m);
  save_checkpoint(p2.string(), m);
  REQUIRE(read_all(p1) == read_all(p2));
}

TEST_CASE("a flipped payload byte fails the checksum") {
  const ModelBundle m = sample_model();
  const auto p = temp_path("srr_ckpt_corrupt.srrn");
  Cleanup cl{p};
  save_checkpoint(p.string(), m);
  std::vector<char> bytes = read_all(p);
  bytes[bytes.size() / 2] ^= 0x20;
  write_all(p, bytes);
  REQUIRE_THROWS_AS(load_checkpoint(p.string()), IoError);
}

TEST_CASE("truncation and garbage are rejected") {
  const ModelBundle m = sample_model();
  const auto p = temp_path("srr_ckpt_trunc.srrn");
  Cleanup cl{p};
  save_checkpoint(p.string(), m);
  std::vector<char> bytes = read_all(p);
  bytes.resize(bytes.size() - 9);
  write_all(p, bytes);
  REQUIRE_THROWS_AS(load_checkpoint(p.string()), IoError);

  write_all(p, {'n', 'o', 'p', 'e'});
  REQUIRE_THROWS_AS(load_checkpoint(p.string()), IoError);
  REQUIRE_THROWS_AS(load_checkpoint("/nonexistent/x.srrn"), IoError);
}

TEST_CASE("a wrong magic tag is rejected before anything else") {
  const ModelBundle m = sample_model();
  const auto p = temp_path("srr_ckpt_magic.srrn");
  Cleanup cl{p};
  save_checkpoint(p.string(), m);
  std::vector<char> bytes = read_all(p);
  bytes[0] = 'X';
  write_all(p, bytes);
  REQUIRE_THROWS_AS(load_checkpoint(p.string()), IoError);
}

TEST_CASE("defaults survive an empty config object") {
  const RunConfig cfg = parse_run_config(nlohmann::json::object());
  REQUIRE(cfg.seed == 0);
  REQUIRE(cfg.output_dir == "out");
  REQUIRE(cfg.dataset.kind == DatasetKind::synth_clusters);
  REQUIRE(cfg.model.hidden == std::vector<std::size_t>{20, 20, 20});
  REQUIRE(cfg.model.activation == ActivationKind::tanh);
  REQUIRE(cfg.model.loss == LossKind::mse);
  REQUIRE(cfg.train.alpha0 == 0.5);
  REQUIRE(cfg.train.schedule == LrSchedule::inverse_epoch);
  REQUIRE(cfg.train.reg.mu == 0.0);
  REQUIRE(cfg.harness.n_trials == 1000);
  REQUIRE(cfg.harness.at2.crop == 2);
  REQUIRE(cfg.harness.at2.rot == 30.0);
}

TEST_CASE("a full config parses into every field") {
  const nlohmann::json j = nlohmann::json::parse(R"({
    "seed": 9,
    "output_dir": "runs/x",
    "dataset": {
      "kind": "synth_clusters", "n_per_class": 50, "dim": 3,
      "separation": 4.5, "split": [0.5, 0.25, 0.25], "normalize": false
    },
    "model": {"hidden": [10, 7], "activation": "relu", "loss": "sigmoid_bce",
              "init_scale": 0.5},
    "train": {
      "alpha0": 0.05, "schedule": "constant", "batch_size": 32,
      "max_epochs": 12, "grad_tol": 1e-6, "update_rule": "adam",
      "power_iteration": {"eps": 1e-4, "max_iters": 500,
                          "eps_decay": "inverse_sqrt_epoch", "warm_start": false},
      "regularizer": {"mu": 0.02, "K": 1.5}
    },
    "harness": {"sigma_shift": 0.1, "n_trials": 200, "pad_fill": 0.0,
                "at1": {"crop": 1, "rot": 10.0}, "at2": {"crop": 2, "rot": 25.0}}
  })");
  const RunConfig cfg = parse_run_config(j);
  REQUIRE(cfg.seed == 9);
  REQUIRE(cfg.train.seed == 9);
  REQUIRE(cfg.output_dir == "runs/x");
  REQUIRE(cfg.dataset.n_per_class == 50);
  REQUIRE(cfg.dataset.split_fractions[1] == 0.25);
  REQUIRE_FALSE(cfg.dataset.normalize_features);
  REQUIRE(cfg.model.hidden == std::vector<std::size_t>{10, 7});
  REQUIRE(cfg.model.activation == ActivationKind::relu);
  REQUIRE(cfg.model.loss == LossKind::sigmoid_bce);
  REQUIRE(cfg.train.alpha0 == 0.05);
  REQUIRE(cfg.train.schedule == LrSchedule::constant);
  REQUIRE(cfg.train.update_rule == UpdateRule::adam);
  REQUIRE(cfg.train.pi.eps == 1e-4);
  REQUIRE(cfg.train.pi.eps_decay == PowerIterationConfig::EpsDecay::inverse_sqrt_epoch);
  REQUIRE_FALSE(cfg.train.pi.warm_start);
  REQUIRE(cfg.train.reg.mu == 0.02);
  REQUIRE(cfg.train.reg.K == 1.5);
  REQUIRE(cfg.harness.sigma_shift == 0.1);
  REQUIRE(cfg.harness.at2.rot == 25.0);
}

TEST_CASE("unknown keys are rejected by name") {
  auto expect_offender = [](const nlohmann::json& j, const std::string& key) {
    try {
      parse_run_config(j);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      REQUIRE(std::string(e.what()).find(key) != std::string::npos);
    }
  };
  expect_offender(nlohmann::json::parse(R"({"sede": 1})"), "sede");
  expect_offender(nlohmann::json::parse(R"({"train": {"alpha": 0.1}})"), "alpha");
  expect_offender(nlohmann::json::parse(R"({"model": {"hiden": [4]}})"), "hiden");
  expect_offender(
      nlohmann::json::parse(R"({"train": {"regularizer": {"lambda": 0.1}}})"),
      "lambda");
}

TEST_CASE("invalid values are rejected") {
  REQUIRE_THROWS_AS(parse_run_config(nlohmann::json::parse(R"({"seed": -3})")),
                    ConfigError);
  REQUIRE_THROWS_AS(
      parse_run_config(nlohmann::json::parse(R"({"model": {"activation": "gelu"}})")),
      Error);
  REQUIRE_THROWS_AS(
      parse_run_config(nlohmann::json::parse(R"({"train": {"alpha0": -1.0}})")),
      ValidationError);
  REQUIRE_THROWS_AS(
      parse_run_config(nlohmann::json::parse(R"({"dataset": {"delimiter": ";;"}})")),
      ConfigError);
  REQUIRE_THROWS_AS(
      parse_run_config(nlohmann::json::parse(R"({"model": {"hidden": [0]}})")),
      ConfigError);
}

TEST_CASE("the resolved echo reparses to the same configuration") {
  nlohmann::json j = nlohmann::json::parse(
      R"({"seed": 5, "train": {"alpha0": 0.125, "regularizer": {"mu": 0.01}}})");
  const RunConfig cfg = parse_run_config(j);
  const nlohmann::json echo = run_config_to_json(cfg);
  const RunConfig back = parse_run_config(echo);
  REQUIRE(back.seed == cfg.seed);
  REQUIRE(back.train.alpha0 == cfg.train.alpha0);
  REQUIRE(back.train.reg.mu == cfg.train.reg.mu);
  REQUIRE(back.model.hidden == cfg.model.hidden);
  REQUIRE(back.dataset.split_fractions == cfg.dataset.split_fractions);
  REQUIRE(run_config_to_json(back) == echo);
}

TEST_CASE("schema files parse roles and eligibility defaults") {
  const auto p = temp_path("srr_schema.json");
  Cleanup cl{p};
  {
    std::ofstream f(p);
    f << R"({"columns": [
      {"name": "age", "role": "continuous"},
      {"name": "smoker", "role": "binary_factor"},
      {"name": "weight", "role": "continuous", "shift_eligible": false}
    ]})";
  }
  const FeatureSchema s = load_schema(p.string());
  REQUIRE(s.columns.size() == 3);
  REQUIRE(s.columns[0].shift_eligible);        // continuous defaults to eligible
  REQUIRE_FALSE(s.columns[1].shift_eligible);  // binary defaults to ineligible
  REQUIRE_FALSE(s.columns[2].shift_eligible);  // explicit override
  REQUIRE(s.eligible_columns() == std::vector<std::size_t>{0});
}

TEST_CASE("schema rejects a shift-eligible binary column") {
  const auto p = temp_path("srr_schema_bad.json");
  Cleanup cl{p};
  {
    std::ofstream f(p);
    f << R"({"columns": [{"name": "flag", "role": "binary_factor",
                          "shift_eligible": true}]})";
  }
  REQUIRE_THROWS_AS(load_schema(p.string()), ValidationError);
}
