#include <CLI11.hpp>

#include <string>
#include <vector>

#include "srr/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"spectral-radius regularized network trainer"};
  app.require_subcommand(1);

  std::string config_path;
  std::string checkpoint_path;
  std::vector<std::string> checkpoint_paths;
  srr::CliOverrides ov;
  std::uint64_t seed_arg = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "run configuration (json)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", seed_arg, "override the config seed");
    sub->add_option("--out", ov.out_dir, "override the output directory");
  };

  CLI::App* train = app.add_subcommand("train", "train a model per config");
  add_common(train);

  CLI::App* eval = app.add_subcommand("eval", "test accuracy of a checkpoint");
  add_common(eval);
  eval->add_option("--checkpoint", checkpoint_path, "model checkpoint")
      ->required()
      ->check(CLI::ExistingFile);

  CLI::App* shift = app.add_subcommand("shift-test", "covariate shift trials");
  add_common(shift);
  shift->add_option("--checkpoint", checkpoint_paths, "model checkpoint (repeatable)")
      ->required()
      ->check(CLI::ExistingFile);

  CLI::App* aug = app.add_subcommand("augment-test", "accuracy under augmentation tiers");
  add_common(aug);
  aug->add_option("--checkpoint", checkpoint_path, "model checkpoint")
      ->required()
      ->check(CLI::ExistingFile);

  CLI::App* validate =
      app.add_subcommand("validate", "check operators against finite differences");

  CLI11_PARSE(app, argc, argv);

  CLI::App* sub = app.get_subcommand();
  if (sub != validate) {
    ov.has_seed = sub->count("--seed") > 0;
    ov.seed = seed_arg;
  }

  if (train->parsed()) return srr::cmd_train(config_path, ov);
  if (eval->parsed()) return srr::cmd_eval(config_path, checkpoint_path, ov);
  if (shift->parsed()) return srr::cmd_shift_test(config_path, checkpoint_paths, ov);
  if (aug->parsed()) return srr::cmd_augment_test(config_path, checkpoint_path, ov);
  if (validate->parsed()) return srr::cmd_validate();
  return 1;
}
