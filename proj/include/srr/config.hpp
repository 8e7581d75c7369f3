#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

#include <json.hpp>

#include "srr/activation.hpp"
#include "srr/data.hpp"
#include "srr/errors.hpp"
#include "srr/loss.hpp"
#include "srr/train.hpp"

namespace srr {

/// Run configuration as strict structured text. Every object rejects keys
/// it does not know, so a typo fails the run instead of silently falling
/// back to a default.

enum class DatasetKind { tabular, digits, synth_clusters, synth_strokes };

struct DatasetConfig {
  DatasetKind kind = DatasetKind::synth_clusters;
  std::string path;        // tabular, digits
  std::string test_path;   // digits: separate test file
  std::string schema_path; // tabular
  int n_classes = 2;
  std::string delimiter = ",";
  bool has_header = false;
  int label_base = 0;
  std::array<double, 3> split_fractions{0.64, 0.16, 0.20};
  double val_fraction = 1.0 / 7.0;  // image datasets: carve from training
  double test_fraction = 0.2;       // image datasets without a test file
  std::size_t n_per_class = 200;    // synthetic kinds
  std::size_t test_n_per_class = 0; // 0 means same as n_per_class
  std::size_t dim = 2;
  double separation = 6.0;
  bool normalize_features = true;   // ignored for image kinds
};

struct ModelConfig {
  std::vector<std::size_t> hidden{20, 20, 20};
  ActivationKind activation = ActivationKind::tanh;
  LossKind loss = LossKind::mse;
  double init_scale = 1.0;
};

struct AugmentTier {
  std::size_t crop = 0;
  double rot = 0.0;
};

struct HarnessConfig {
  double sigma_shift = 0.05;
  std::size_t n_trials = 1000;
  double pad_fill = -1.0;
  AugmentTier at1{1, 15.0};
  AugmentTier at2{2, 30.0};
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  DatasetConfig dataset;
  ModelConfig model;
  TrainConfig train;
  HarnessConfig harness;
};

namespace cfgdetail {

using nlohmann::json;

inline void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                       const std::string& ctx) {
  if (!obj.is_object()) throw ConfigError("config: " + ctx + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* a : allowed)
      if (it.key() == a) {
        known = true;
        break;
      }
    if (!known)
      throw ConfigError("config: unknown key '" + it.key() + "' in " + ctx);
  }
}

inline double get_number(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) throw ConfigError(std::string("config: ") + key + " must be a number");
  return obj[key].get<double>();
}

inline std::size_t get_size(const json& obj, const char* key, std::size_t fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_unsigned())
    throw ConfigError(std::string("config: ") + key + " must be a non-negative integer");
  return obj[key].get<std::size_t>();
}

inline bool get_bool(const json& obj, const char* key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_boolean()) throw ConfigError(std::string("config: ") + key + " must be a boolean");
  return obj[key].get<bool>();
}

inline std::string get_string(const json& obj, const char* key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_string()) throw ConfigError(std::string("config: ") + key + " must be a string");
  return obj[key].get<std::string>();
}

}  // namespace cfgdetail

inline FeatureSchema load_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_schema: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("load_schema: " + std::string(e.what()));
  }
  cfgdetail::check_keys(j, {"columns"}, "schema");
  if (!j.contains("columns") || !j["columns"].is_array())
    throw ConfigError("schema: missing 'columns' array");
  FeatureSchema schema;
  for (const auto& col : j["columns"]) {
    cfgdetail::check_keys(col, {"name", "role", "shift_eligible"}, "schema column");
    ColumnSpec spec;
    spec.name = cfgdetail::get_string(col, "name", "");
    if (spec.name.empty()) throw ConfigError("schema: column without a name");
    const std::string role = cfgdetail::get_string(col, "role", "continuous");
    if (role == "continuous")
      spec.role = ColumnRole::continuous;
    else if (role == "binary_factor")
      spec.role = ColumnRole::binary_factor;
    else
      throw ConfigError("schema: unknown role '" + role + "' for column " + spec.name);
    spec.shift_eligible =
        cfgdetail::get_bool(col, "shift_eligible", spec.role == ColumnRole::continuous);
    schema.columns.push_back(std::move(spec));
  }
  schema.validate();
  return schema;
}

inline RunConfig parse_run_config(const nlohmann::json& j) {
  using namespace cfgdetail;
  check_keys(j, {"seed", "output_dir", "dataset", "model", "train", "harness"}, "top level");
  RunConfig cfg;
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned())
      throw ConfigError("config: seed must be a non-negative integer");
    cfg.seed = j["seed"].get<std::uint64_t>();
  }
  cfg.output_dir = get_string(j, "output_dir", cfg.output_dir);

  if (j.contains("dataset")) {
    const json& d = j["dataset"];
    check_keys(d,
               {"kind", "path", "test_path", "schema", "n_classes", "delimiter",
                "has_header", "label_base", "split", "val_fraction", "test_fraction",
                "n_per_class", "test_n_per_class", "dim", "separation", "normalize"},
               "dataset");
    const std::string kind = get_string(d, "kind", "synth_clusters");
    if (kind == "tabular")
      cfg.dataset.kind = DatasetKind::tabular;
    else if (kind == "digits")
      cfg.dataset.kind = DatasetKind::digits;
    else if (kind == "synth_clusters")
      cfg.dataset.kind = DatasetKind::synth_clusters;
    else if (kind == "synth_strokes")
      cfg.dataset.kind = DatasetKind::synth_strokes;
    else
      throw ConfigError("config: unknown dataset kind '" + kind + "'");
    cfg.dataset.path = get_string(d, "path", "");
    cfg.dataset.test_path = get_string(d, "test_path", "");
    cfg.dataset.schema_path = get_string(d, "schema", "");
    cfg.dataset.n_classes = static_cast<int>(get_number(d, "n_classes", cfg.dataset.n_classes));
    const std::string delim = get_string(d, "delimiter", cfg.dataset.delimiter);
    if (delim.size() != 1) throw ConfigError("config: delimiter must be one character");
    cfg.dataset.delimiter = delim;
    cfg.dataset.has_header = get_bool(d, "has_header", cfg.dataset.has_header);
    cfg.dataset.label_base = static_cast<int>(get_number(d, "label_base", cfg.dataset.label_base));
    if (d.contains("split")) {
      if (!d["split"].is_array() || d["split"].size() != 3)
        throw ConfigError("config: split must be an array of 3 fractions");
      for (std::size_t i = 0; i < 3; ++i) {
        if (!d["split"][i].is_number()) throw ConfigError("config: split fractions must be numbers");
        cfg.dataset.split_fractions[i] = d["split"][i].get<double>();
      }
    }
    cfg.dataset.val_fraction = get_number(d, "val_fraction", cfg.dataset.val_fraction);
    cfg.dataset.test_fraction = get_number(d, "test_fraction", cfg.dataset.test_fraction);
    cfg.dataset.n_per_class = get_size(d, "n_per_class", cfg.dataset.n_per_class);
    cfg.dataset.test_n_per_class = get_size(d, "test_n_per_class", cfg.dataset.test_n_per_class);
    cfg.dataset.dim = get_size(d, "dim", cfg.dataset.dim);
    cfg.dataset.separation = get_number(d, "separation", cfg.dataset.separation);
    cfg.dataset.normalize_features = get_bool(d, "normalize", cfg.dataset.normalize_features);
  }

  if (j.contains("model")) {
    const json& m = j["model"];
    check_keys(m, {"hidden", "activation", "loss", "init_scale"}, "model");
    if (m.contains("hidden")) {
      if (!m["hidden"].is_array()) throw ConfigError("config: hidden must be an array");
      cfg.model.hidden.clear();
      for (const auto& h : m["hidden"]) {
        if (!h.is_number_unsigned() || h.get<std::size_t>() == 0)
          throw ConfigError("config: hidden sizes must be positive integers");
        cfg.model.hidden.push_back(h.get<std::size_t>());
      }
    }
    cfg.model.activation = parse_activation(get_string(m, "activation", "tanh"));
    cfg.model.loss = parse_loss(get_string(m, "loss", "mse"));
    cfg.model.init_scale = get_number(m, "init_scale", cfg.model.init_scale);
    if (!(cfg.model.init_scale > 0.0))
      throw ConfigError("config: init_scale must be positive");
  }

  if (j.contains("train")) {
    const json& t = j["train"];
    check_keys(t,
               {"alpha0", "schedule", "batch_size", "max_epochs", "grad_tol",
                "update_rule", "power_iteration", "regularizer", "exact_dim_cap"},
               "train");
    cfg.train.alpha0 = get_number(t, "alpha0", cfg.train.alpha0);
    const std::string sched = get_string(t, "schedule", "inverse_epoch");
    if (sched == "constant")
      cfg.train.schedule = LrSchedule::constant;
    else if (sched == "inverse_epoch")
      cfg.train.schedule = LrSchedule::inverse_epoch;
    else
      throw ConfigError("config: unknown schedule '" + sched + "'");
    cfg.train.batch_size = get_size(t, "batch_size", cfg.train.batch_size);
    cfg.train.max_epochs = get_size(t, "max_epochs", cfg.train.max_epochs);
    cfg.train.convergence_grad_tol = get_number(t, "grad_tol", cfg.train.convergence_grad_tol);
    cfg.train.exact_dim_cap = get_size(t, "exact_dim_cap", cfg.train.exact_dim_cap);
    const std::string rule = get_string(t, "update_rule", "sgd");
    if (rule == "sgd")
      cfg.train.update_rule = UpdateRule::sgd;
    else if (rule == "adam")
      cfg.train.update_rule = UpdateRule::adam;
    else
      throw ConfigError("config: unknown update rule '" + rule + "'");
    if (t.contains("power_iteration")) {
      const json& p = t["power_iteration"];
      check_keys(p, {"eps", "max_iters", "eps_decay", "warm_start"}, "power_iteration");
      cfg.train.pi.eps = get_number(p, "eps", cfg.train.pi.eps);
      cfg.train.pi.max_iters = get_size(p, "max_iters", cfg.train.pi.max_iters);
      const std::string decay = get_string(p, "eps_decay", "fixed");
      if (decay == "fixed")
        cfg.train.pi.eps_decay = PowerIterationConfig::EpsDecay::fixed;
      else if (decay == "inverse_sqrt_epoch")
        cfg.train.pi.eps_decay = PowerIterationConfig::EpsDecay::inverse_sqrt_epoch;
      else
        throw ConfigError("config: unknown eps_decay '" + decay + "'");
      cfg.train.pi.warm_start = get_bool(p, "warm_start", cfg.train.pi.warm_start);
    }
    if (t.contains("regularizer")) {
      const json& r = t["regularizer"];
      check_keys(r, {"mu", "K"}, "regularizer");
      cfg.train.reg.mu = get_number(r, "mu", cfg.train.reg.mu);
      cfg.train.reg.K = get_number(r, "K", cfg.train.reg.K);
    }
  }
  cfg.train.seed = cfg.seed;

  if (j.contains("harness")) {
    const json& h = j["harness"];
    cfgdetail::check_keys(h, {"sigma_shift", "n_trials", "pad_fill", "at1", "at2"}, "harness");
    cfg.harness.sigma_shift = get_number(h, "sigma_shift", cfg.harness.sigma_shift);
    cfg.harness.n_trials = get_size(h, "n_trials", cfg.harness.n_trials);
    cfg.harness.pad_fill = get_number(h, "pad_fill", cfg.harness.pad_fill);
    auto tier = [&](const char* key, AugmentTier fallback) {
      if (!h.contains(key)) return fallback;
      const json& a = h[key];
      cfgdetail::check_keys(a, {"crop", "rot"}, key);
      AugmentTier out;
      out.crop = get_size(a, "crop", fallback.crop);
      out.rot = get_number(a, "rot", fallback.rot);
      return out;
    };
    cfg.harness.at1 = tier("at1", cfg.harness.at1);
    cfg.harness.at2 = tier("at2", cfg.harness.at2);
  }

  cfg.train.validate();
  return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_run_config: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("load_run_config: " + std::string(e.what()));
  }
  return parse_run_config(j);
}

/// Fully resolved form with every default filled in, for the echo file.
inline nlohmann::json run_config_to_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["seed"] = cfg.seed;
  j["output_dir"] = cfg.output_dir;
  nlohmann::json d;
  switch (cfg.dataset.kind) {
    case DatasetKind::tabular: d["kind"] = "tabular"; break;
    case DatasetKind::digits: d["kind"] = "digits"; break;
    case DatasetKind::synth_clusters: d["kind"] = "synth_clusters"; break;
    case DatasetKind::synth_strokes: d["kind"] = "synth_strokes"; break;
  }
  d["path"] = cfg.dataset.path;
  d["test_path"] = cfg.dataset.test_path;
  d["schema"] = cfg.dataset.schema_path;
  d["n_classes"] = cfg.dataset.n_classes;
  d["delimiter"] = cfg.dataset.delimiter;
  d["has_header"] = cfg.dataset.has_header;
  d["label_base"] = cfg.dataset.label_base;
  d["split"] = cfg.dataset.split_fractions;
  d["val_fraction"] = cfg.dataset.val_fraction;
  d["test_fraction"] = cfg.dataset.test_fraction;
  d["n_per_class"] = cfg.dataset.n_per_class;
  d["test_n_per_class"] = cfg.dataset.test_n_per_class;
  d["dim"] = cfg.dataset.dim;
  d["separation"] = cfg.dataset.separation;
  d["normalize"] = cfg.dataset.normalize_features;
  j["dataset"] = d;
  nlohmann::json m;
  m["hidden"] = cfg.model.hidden;
  m["activation"] = activation_name(cfg.model.activation);
  m["loss"] = loss_name(cfg.model.loss);
  m["init_scale"] = cfg.model.init_scale;
  j["model"] = m;
  nlohmann::json t;
  t["alpha0"] = cfg.train.alpha0;
  t["schedule"] = cfg.train.schedule == LrSchedule::constant ? "constant" : "inverse_epoch";
  t["batch_size"] = cfg.train.batch_size;
  t["max_epochs"] = cfg.train.max_epochs;
  t["grad_tol"] = cfg.train.convergence_grad_tol;
  t["exact_dim_cap"] = cfg.train.exact_dim_cap;
  t["update_rule"] = cfg.train.update_rule == UpdateRule::sgd ? "sgd" : "adam";
  t["power_iteration"] = {
      {"eps", cfg.train.pi.eps},
      {"max_iters", cfg.train.pi.max_iters},
      {"eps_decay", cfg.train.pi.eps_decay == PowerIterationConfig::EpsDecay::fixed
                        ? "fixed"
                        : "inverse_sqrt_epoch"},
      {"warm_start", cfg.train.pi.warm_start}};
  t["regularizer"] = {{"mu", cfg.train.reg.mu}, {"K", cfg.train.reg.K}};
  j["train"] = t;
  nlohmann::json h;
  h["sigma_shift"] = cfg.harness.sigma_shift;
  h["n_trials"] = cfg.harness.n_trials;
  h["pad_fill"] = cfg.harness.pad_fill;
  h["at1"] = {{"crop", cfg.harness.at1.crop}, {"rot", cfg.harness.at1.rot}};
  h["at2"] = {{"crop", cfg.harness.at2.crop}, {"rot", cfg.harness.at2.rot}};
  j["harness"] = h;
  return j;
}

}  // namespace srr
