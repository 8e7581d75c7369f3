#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "srr/checkpoint.hpp"
#include "srr/config.hpp"
#include "srr/data.hpp"
#include "srr/errors.hpp"
#include "srr/genharness.hpp"
#include "srr/infer.hpp"
#include "srr/train.hpp"
#include "srr/validate.hpp"

namespace srr {

namespace cmddetail {

/// Shortest round-trippable decimal form; identical doubles always print
/// identically, which is what keeps rerun outputs byte-identical.
inline std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::trunc);
  if (!out) throw IoError("cannot open " + p.string() + " for writing");
  return out;
}

/// Deterministic columns only; wall time goes to the timing sidecar so
/// reruns of the same (config, seed) produce identical bytes here.
inline void write_metrics(const std::filesystem::path& p, const TrainReport& report) {
  std::ofstream out = open_out(p);
  out << "epoch,f,rho_batch,h,grad_norm,pi_iters,pi_residual\n";
  for (const EpochRecord& r : report.epochs)
    out << r.epoch << ',' << num(r.f) << ',' << num(r.rho_batch) << ',' << num(r.h)
        << ',' << num(r.grad_norm) << ',' << r.pi_iters << ',' << num(r.pi_residual)
        << '\n';
}

inline void write_timing(const std::filesystem::path& p, const TrainReport& report) {
  std::ofstream out = open_out(p);
  out << "epoch,wall_ms\n";
  for (const EpochRecord& r : report.epochs)
    out << r.epoch << ',' << num(r.wall_ms) << '\n';
}

inline void write_shift_trials(const std::filesystem::path& p, const ShiftTrialTable& t) {
  std::ofstream out = open_out(p);
  out << "trial_id,l1_norm";
  for (const std::string& name : t.model_names) out << ',' << name;
  out << '\n';
  for (const ShiftTrial& row : t.rows) {
    out << row.trial_id << ',' << num(row.l1_norm);
    for (double a : row.weighted_acc) out << ',' << num(a);
    out << '\n';
  }
}

inline void write_slope_report(const std::filesystem::path& p, const SlopeReport& r) {
  std::ofstream out = open_out(p);
  out << "model,slope,std_err,p_value,r2,p_method\n";
  for (const ModelSlope& m : r.models)
    out << m.name << ',' << num(m.slope) << ',' << num(m.std_err) << ','
        << num(m.p_value) << ',' << num(m.r2) << ',' << r.p_method << '\n';
}

inline void write_slope_pairwise(const std::filesystem::path& p, const SlopeReport& r) {
  std::ofstream out = open_out(p);
  out << "model_a,model_b,slope_diff,std_err,p_value,p_method\n";
  for (const PairSlope& pr : r.pairwise)
    out << pr.name_a << ',' << pr.name_b << ',' << num(pr.slope) << ','
        << num(pr.std_err) << ',' << num(pr.p_value) << ',' << r.p_method << '\n';
}

inline std::string stem_of(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

}  // namespace cmddetail

struct LoadedData {
  Dataset train, val, test;
};

/// Build train/val/test splits from the dataset section, deterministic in
/// (config, seed). Normalization stats always come from the training
/// split alone.
inline LoadedData assemble_dataset(const RunConfig& cfg) {
  const DatasetConfig& d = cfg.dataset;
  LoadedData out;
  switch (d.kind) {
    case DatasetKind::tabular: {
      if (d.path.empty()) throw ConfigError("dataset: tabular kind needs a path");
      if (d.schema_path.empty()) throw ConfigError("dataset: tabular kind needs a schema");
      const FeatureSchema schema = load_schema(d.schema_path);
      TabularOptions opts;
      opts.delimiter = d.delimiter[0];
      opts.has_header = d.has_header;
      opts.label_base = d.label_base;
      const Dataset full = load_tabular(d.path, schema, d.n_classes, opts);
      auto parts = split(full, d.split_fractions, cfg.seed);
      out.train = std::move(parts[0]);
      out.val = std::move(parts[1]);
      out.test = std::move(parts[2]);
      break;
    }
    case DatasetKind::synth_clusters: {
      const Dataset full = synth_clusters(d.n_per_class, d.dim,
                                          static_cast<std::size_t>(d.n_classes),
                                          d.separation, cfg.seed);
      auto parts = split(full, d.split_fractions, cfg.seed);
      out.train = std::move(parts[0]);
      out.val = std::move(parts[1]);
      out.test = std::move(parts[2]);
      break;
    }
    case DatasetKind::digits: {
      if (d.path.empty()) throw ConfigError("dataset: digits kind needs a path");
      Dataset train_full = load_digits(d.path);
      if (!d.test_path.empty()) {
        out.test = load_digits(d.test_path);
      } else {
        auto carved = carve_holdout(train_full, d.test_fraction,
                                    derive_seed(cfg.seed, SeedStream::shuffle, 7));
        train_full = std::move(carved.first);
        out.test = std::move(carved.second);
      }
      auto carved = carve_holdout(train_full, d.val_fraction, cfg.seed);
      out.train = std::move(carved.first);
      out.val = std::move(carved.second);
      break;
    }
    case DatasetKind::synth_strokes: {
      const std::size_t test_n = d.test_n_per_class ? d.test_n_per_class : d.n_per_class;
      Dataset train_full = synth_strokes(d.n_per_class, cfg.seed);
      out.test = synth_strokes(test_n, derive_seed(cfg.seed, SeedStream::synth, 40));
      auto carved = carve_holdout(train_full, d.val_fraction, cfg.seed);
      out.train = std::move(carved.first);
      out.val = std::move(carved.second);
      break;
    }
  }

  const bool image_kind =
      d.kind == DatasetKind::digits || d.kind == DatasetKind::synth_strokes;
  if (d.normalize_features && !image_kind) {
    auto [stats, train_z] = normalize(out.train);
    out.train = std::move(train_z);
    out.val = apply_normalization(stats, out.val);
    out.test = apply_normalization(stats, out.test);
  }
  return out;
}

struct CliOverrides {
  bool has_seed = false;
  std::uint64_t seed = 0;
  std::string out_dir;
};

inline RunConfig load_config_with_overrides(const std::string& config_path,
                                            const CliOverrides& ov) {
  RunConfig cfg = load_run_config(config_path);
  if (ov.has_seed) {
    cfg.seed = ov.seed;
    cfg.train.seed = ov.seed;
  }
  if (!ov.out_dir.empty()) cfg.output_dir = ov.out_dir;
  return cfg;
}

/// Train per config; writes metrics.csv, timing.csv, resolved_config.json
/// and the final plus best-validation checkpoints into the output
/// directory.
inline int cmd_train(const std::string& config_path, const CliOverrides& ov,
                     std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  try {
    const RunConfig cfg = load_config_with_overrides(config_path, ov);
    const LoadedData data = assemble_dataset(cfg);
    Network net = make_mlp(data.train.features.cols(), cfg.model.hidden,
                           static_cast<std::size_t>(data.train.n_classes),
                           cfg.model.activation, cfg.seed, cfg.model.init_scale);
    const LossModel loss{cfg.model.loss};

    const TrainReport report = sgd_train(data.train, net, loss, cfg.train, &data.val);

    const std::filesystem::path dir(cfg.output_dir);
    std::filesystem::create_directories(dir);
    cmddetail::write_metrics(dir / "metrics.csv", report);
    cmddetail::write_timing(dir / "timing.csv", report);
    {
      std::ofstream f = cmddetail::open_out(dir / "resolved_config.json");
      f << run_config_to_json(cfg).dump(2) << '\n';
    }
    ModelBundle final_model{"final", net, loss};
    save_checkpoint((dir / "final.srrn").string(), final_model);
    Network best_net = net;
    best_net.set_params(report.best_val_w);
    ModelBundle best_model{"best_val", best_net, loss};
    save_checkpoint((dir / "best_val.srrn").string(), best_model);

    const double test_acc = dataset_accuracy(net, loss, data.test);
    char accbuf[32];
    std::snprintf(accbuf, sizeof accbuf, "%.4f", test_acc);
    out << "trained " << report.epochs.size() << " epochs; final h="
        << cmddetail::num(report.epochs.back().h)
        << " rho_batch=" << cmddetail::num(report.epochs.back().rho_batch)
        << " test_acc=" << accbuf << '\n'
        << "outputs in " << dir.string() << '\n';
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

/// Accuracy of a checkpoint on the config's test split, printed with four
/// decimals.
inline int cmd_eval(const std::string& config_path, const std::string& checkpoint_path,
                    const CliOverrides& ov, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  try {
    const RunConfig cfg = load_config_with_overrides(config_path, ov);
    const LoadedData data = assemble_dataset(cfg);
    ModelBundle model = load_checkpoint(checkpoint_path);
    model.name = cmddetail::stem_of(checkpoint_path);
    if (model.net.input_dim() != data.test.features.cols())
      throw ValidationError("eval: checkpoint expects input width " +
                            std::to_string(model.net.input_dim()) + ", test data has " +
                            std::to_string(data.test.features.cols()));
    if (model.net.output_dim() != static_cast<std::size_t>(data.test.n_classes))
      throw ValidationError("eval: checkpoint emits " +
                            std::to_string(model.net.output_dim()) + " outputs for " +
                            std::to_string(data.test.n_classes) + " classes");
    const double acc = dataset_accuracy(model.net, model.loss, data.test);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", acc);
    out << buf << '\n';
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

/// Paired shift trials for one or more checkpoints on the config's test
/// split; writes the trial table and slope report (pairwise file only
/// when there are at least two models).
inline int cmd_shift_test(const std::string& config_path,
                          const std::vector<std::string>& checkpoint_paths,
                          const CliOverrides& ov, std::ostream& out = std::cout,
                          std::ostream& err = std::cerr) {
  try {
    if (checkpoint_paths.empty()) throw ConfigError("shift-test: no checkpoints given");
    const RunConfig cfg = load_config_with_overrides(config_path, ov);
    const LoadedData data = assemble_dataset(cfg);
    std::vector<ModelBundle> models;
    for (const std::string& p : checkpoint_paths) {
      ModelBundle m = load_checkpoint(p);
      m.name = cmddetail::stem_of(p);
      models.push_back(std::move(m));
    }
    ShiftSpec spec;
    spec.sigma_shift = cfg.harness.sigma_shift;
    spec.n_trials = cfg.harness.n_trials;
    spec.seed = cfg.seed;
    const ShiftTrialTable table = run_shift_trials(models, data.test, spec);
    for (const std::string& w : table.warnings) err << "warning: " << w << '\n';
    const SlopeReport report = slope_stats(table);

    const std::filesystem::path dir(cfg.output_dir);
    std::filesystem::create_directories(dir);
    cmddetail::write_shift_trials(dir / "shift_trials.csv", table);
    cmddetail::write_slope_report(dir / "slope_report.csv", report);
    if (models.size() > 1)
      cmddetail::write_slope_pairwise(dir / "slope_pairwise.csv", report);

    for (const ModelSlope& m : report.models)
      out << m.name << ": slope=" << cmddetail::num(m.slope)
          << " p=" << cmddetail::num(m.p_value) << '\n';
    out << "outputs in " << dir.string() << '\n';
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

/// Plain, mildly augmented and strongly augmented accuracy for one
/// checkpoint on an image test split; writes augment_summary.csv.
inline int cmd_augment_test(const std::string& config_path,
                            const std::string& checkpoint_path, const CliOverrides& ov,
                            std::ostream& out = std::cout,
                            std::ostream& err = std::cerr) {
  try {
    const RunConfig cfg = load_config_with_overrides(config_path, ov);
    const LoadedData data = assemble_dataset(cfg);
    if (data.test.image_side == 0)
      throw ValidationError("augment-test: dataset has no image geometry");
    ModelBundle model = load_checkpoint(checkpoint_path);
    model.name = cmddetail::stem_of(checkpoint_path);

    auto tier_cfg = [&](const AugmentTier& t) {
      AugmentConfig a;
      a.max_crop_px = t.crop;
      a.max_rot_deg = t.rot;
      a.pad_fill = cfg.harness.pad_fill;
      a.seed = cfg.seed;
      return a;
    };
    const double plain = dataset_accuracy(model.net, model.loss, data.test);
    const double at1 = run_augmented_eval(model, data.test, tier_cfg(cfg.harness.at1));
    const double at2 = run_augmented_eval(model, data.test, tier_cfg(cfg.harness.at2));

    const std::filesystem::path dir(cfg.output_dir);
    std::filesystem::create_directories(dir);
    {
      std::ofstream f = cmddetail::open_out(dir / "augment_summary.csv");
      f << "tier,accuracy\n";
      f << "test," << cmddetail::num(plain) << '\n';
      f << "at1," << cmddetail::num(at1) << '\n';
      f << "at2," << cmddetail::num(at2) << '\n';
    }
    out << "test=" << cmddetail::num(plain) << " at1=" << cmddetail::num(at1)
        << " at2=" << cmddetail::num(at2) << '\n'
        << "outputs in " << dir.string() << '\n';
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

/// Operator-versus-oracle suite; exit 0 only when every check passes.
inline int cmd_validate(std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  try {
    return validate::print_validation(out, validate::run_validation_suite()) ? 0 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace srr
