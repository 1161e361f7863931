// panslam command line: run single trials, batch comparison matrices, export
// ground-truth maps, and validate environment files.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "panslam/io.hpp"
#include "panslam/trial.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kEnvironmentError = 3;
constexpr int kTrialFailure = 4;

struct CommonArgs {
  std::string config_path;
  panslam::cfg::CliOverrides overrides;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "config file (key=value sections)");
  cmd->add_option("--env", args.overrides.env, "environment file (ASCII or PGM)");
  cmd->add_option("--mode", args.overrides.mode, "platform mode: A|HH|OC|Y0");
  cmd->add_option("--merged", args.overrides.merged,
                  "merged state estimate: true|false");
  cmd->add_option("--seed", args.overrides.seed, "base random seed");
  cmd->add_option("--trials", args.overrides.trials, "trials per cell");
  cmd->add_option("--duration", args.overrides.duration, "trial duration [s]");
  cmd->add_option("--out-dir", args.overrides.out_dir, "output directory");
}

panslam::cfg::ExperimentConfig make_config(const CommonArgs& args) {
  panslam::cfg::ExperimentConfig cfg;
  if (!args.config_path.empty())
    cfg = panslam::cfg::load_config(args.config_path);
  panslam::cfg::apply_overrides(cfg, args.overrides);
  if (cfg.env_path.empty())
    throw std::invalid_argument("no environment given (--env or run.env)");
  return cfg;
}

std::vector<panslam::sim::BatchCell> parse_cells(const std::string& modes,
                                                 const std::string& merged) {
  std::vector<panslam::ctrl::PlatformMode> mode_list;
  std::string tok;
  std::istringstream ss(modes);
  while (std::getline(ss, tok, ','))
    mode_list.push_back(panslam::ctrl::mode_from_string(tok));
  std::vector<bool> merged_list;
  if (merged == "both")
    merged_list = {true, false};
  else if (merged == "true")
    merged_list = {true};
  else if (merged == "false")
    merged_list = {false};
  else
    throw std::invalid_argument("--merged expects true|false|both");
  std::vector<panslam::sim::BatchCell> cells;
  for (auto m : mode_list)
    for (bool mg : merged_list) cells.push_back({m, mg});
  return cells;
}

int cmd_run(const CommonArgs& args) {
  const auto cfg = make_config(args);
  const auto out = panslam::sim::run_trial(cfg, cfg.seed);
  std::filesystem::create_directories(cfg.out_dir);
  const std::string base =
      cfg.out_dir + "/" + panslam::ctrl::to_string(cfg.mode) +
      (cfg.merged ? "" : "_NC") + "_seed" + std::to_string(cfg.seed);
  panslam::io::write_trial_csv(base + ".csv", out.record, cfg.sample_period);
  panslam::io::write_class_pgm(base + "_map.pgm", out.final_map);
  panslam::io::write_class_pgm(cfg.out_dir + "/ground_truth.pgm",
                               out.ground_truth);
  panslam::io::write_g2o(base + "_graph.g2o", out.graph);
  panslam::io::write_estimate_trace(base + "_estimate.csv", out.estimate_trace);

  const auto& r = out.record;
  std::cout << "trial " << r.mode << (r.merged ? "" : "_NC") << " seed "
            << r.seed << (r.failed ? " FAILED (" + r.failure_reason + ")" : " ok")
            << "\n  path " << r.total_path_length << " m, wheel "
            << r.total_wheel_rotation << " rad, loops " << r.n_loop_closures
            << ", nodes " << r.n_graph_nodes << "\n  bac " << r.final_bac
            << ", ate " << r.final_ate << " m, entropy "
            << r.final_entropy_norm
            << (r.exploration_complete ? ", exploration complete" : "") << "\n";
  return r.failed ? kTrialFailure : kOk;
}

int cmd_batch(const CommonArgs& args, const std::string& modes,
              const std::string& merged) {
  const auto cfg = make_config(args);
  const auto cells = parse_cells(modes, merged);
  const auto result = panslam::sim::run_batch_to_dir(cfg, cells);
  std::cout << "method,n_success,bac,wheel_rot_per_m,ate,loops_per_m\n";
  bool any_short = false;
  for (const auto& c : result.cells) {
    const auto& s = c.summary;
    std::cout << s.method << ',' << s.n_success << ',' << s.bac_mean << ','
              << s.wheel_per_m_mean << ',' << s.ate_mean << ','
              << s.loops_per_m_mean << '\n';
    if (s.n_success < s.n_requested) any_short = true;
  }
  std::cout << "wrote " << cfg.out_dir << "/summary.csv\n";
  return any_short ? kTrialFailure : kOk;
}

int cmd_map_export(const CommonArgs& args, const std::string& out_path) {
  const auto cfg = make_config(args);
  const auto env = panslam::world::load_environment(
      cfg.env_path, cfg.env_resolution, cfg.env_origin_x, cfg.env_origin_y);
  const auto gt = panslam::world::ground_truth_classes(
      env, cfg.map_resolution, cfg.start_x, cfg.start_y, cfg.world.robot_radius);
  panslam::io::write_class_pgm(out_path, gt);
  std::cout << "wrote " << out_path << " (" << gt.spec.width << "x"
            << gt.spec.height << " @ " << gt.spec.resolution << " m)\n";
  return kOk;
}

int cmd_validate_env(const CommonArgs& args) {
  const auto cfg = make_config(args);
  const auto env = panslam::world::load_environment(
      cfg.env_path, cfg.env_resolution, cfg.env_origin_x, cfg.env_origin_y);
  panslam::world::validate_start(env, cfg.start_x, cfg.start_y,
                                 cfg.world.robot_radius);
  std::cout << "environment ok: " << env.spec.width << "x" << env.spec.height
            << " cells @ " << env.spec.resolution << " m, "
            << env.occupied_count() << " occupied, " << env.free_count()
            << " free\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"desk-scale active V-SLAM simulation with a panning camera"};
  app.require_subcommand(1);

  CommonArgs run_args, batch_args, map_args, val_args;
  std::string modes = "A,HH,OC,Y0";
  std::string merged_sel = "both";
  std::string map_out = "ground_truth.pgm";

  auto* run = app.add_subcommand("run", "run a single trial");
  add_common(run, run_args);
  auto* batch = app.add_subcommand("batch", "run a comparison matrix");
  add_common(batch, batch_args);
  batch->add_option("--modes", modes, "comma list of modes (default all)");
  batch->add_option("--merged-variants", merged_sel, "true|false|both");
  auto* mapx = app.add_subcommand("map-export", "export ground-truth map PGM");
  add_common(mapx, map_args);
  mapx->add_option("--out", map_out, "output PGM path");
  auto* val = app.add_subcommand("validate-env", "validate an environment file");
  add_common(val, val_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? kConfigError : kOk;
  }

  try {
    if (run->parsed()) return cmd_run(run_args);
    if (batch->parsed()) return cmd_batch(batch_args, modes, merged_sel);
    if (mapx->parsed()) return cmd_map_export(map_args, map_out);
    if (val->parsed()) return cmd_validate_env(val_args);
  } catch (const panslam::world::EnvLoadError& e) {
    std::cerr << "environment error: " << e.what() << "\n";
    return kEnvironmentError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kTrialFailure;
  }
  return kConfigError;
}
