#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <functional>
#include <string>

#include "coolpinns/runner.hpp"

namespace {

using namespace coolpinns;

RunConfig base_config(Command cmd, const std::string& preset,
                      const std::string& config_path) {
  RunConfig cfg;
  if (!preset.empty())
    cfg = preset_config(preset);
  else if (!config_path.empty())
    cfg = load_config_file(config_path);
  else
    throw ConfigError("pass --preset or --config");
  cfg.command = cmd;
  return cfg;
}

bool radiation_flag(const std::string& s) {
  if (s == "on") return true;
  if (s == "off") return false;
  throw ConfigError("--radiation expects on or off");
}

int dispatch(const std::function<int()>& run) {
  try {
    return run();
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 2;
  } catch (const IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vascular cooling panel: network solver, grid oracle, "
               "calibration, and study drivers"};
  app.require_subcommand(1);

  std::string preset, config_path, out_dir, data_source = "oracle";
  std::string geometry, engine = "oracle", radiation = "off";
  std::string pinn_dir, oracle_dir;
  std::uint64_t seed = 0;
  double flow = 10.0, threshold = 0.0, ratio_threshold = 0.95;
  int grid = 200;
  bool reverse = false;

  auto* fw = app.add_subcommand("forward", "train the temperature field");
  auto* fw_p = fw->add_option("--preset", preset, "named configuration");
  auto* fw_c = fw->add_option("--config", config_path, "TOML config file");
  fw_p->excludes(fw_c);
  fw->add_option("--out", out_dir, "output directory")->required();
  auto* fw_seed = fw->add_option("--seed", seed, "RNG seed override");

  auto* inv = app.add_subcommand("inverse",
                                 "calibrate conductivity from observations");
  auto* inv_p = inv->add_option("--preset", preset, "named configuration");
  auto* inv_c = inv->add_option("--config", config_path, "TOML config file");
  inv_p->excludes(inv_c);
  inv->add_option("--out", out_dir, "output directory")->required();
  auto* inv_seed = inv->add_option("--seed", seed, "RNG seed override");
  auto* inv_d = inv->add_option(
      "--data", data_source,
      "observation source: 'oracle' or a stored forward-run directory");

  auto* orc = app.add_subcommand("oracle", "grid reference solve");
  auto* orc_p = orc->add_option("--preset", preset, "named configuration");
  auto* orc_c = orc->add_option("--config", config_path, "TOML config file");
  orc_p->excludes(orc_c);
  auto* orc_g = orc->add_option(
      "--geometry", geometry,
      "channel layout: straight-center, straight-quarter, stepped, "
      "stepped-mst, none");
  auto* orc_f = orc->add_option("--flow", flow, "flow rate (mL/min)");
  auto* orc_n = orc->add_option("--grid", grid, "cells per side");
  auto* orc_r =
      orc->add_option("--radiation", radiation, "surface radiation: on|off");
  auto* orc_rev =
      orc->add_flag("--reverse", reverse, "swap coolant inlet and outlet");
  orc->add_option("--out", out_dir, "output directory")->required();

  auto* mst = app.add_subcommand(
      "verify-mst", "mean surface temperature under flow reversal");
  auto* mst_p = mst->add_option("--preset", preset, "named configuration");
  auto* mst_c = mst->add_option("--config", config_path, "TOML config file");
  mst_p->excludes(mst_c);
  mst->add_option("--engine", engine, "pinn or oracle")
      ->check(CLI::IsMember({"pinn", "oracle"}));
  auto* mst_r =
      mst->add_option("--radiation", radiation, "surface radiation: on|off");
  auto* mst_n = mst->add_option("--grid", grid, "cells per side");
  auto* mst_seed = mst->add_option("--seed", seed, "RNG seed override");
  mst->add_option("--threshold", threshold,
                  "percent difference bound (0 = engine default)");
  mst->add_option("--out", out_dir, "output directory")->required();

  auto* sw = app.add_subcommand("sweep", "hyperparameter grid study");
  sw->add_option("--config", config_path, "sweep TOML file")->required();
  sw->add_option("--out", out_dir, "output directory")->required();

  auto* cp = app.add_subcommand("compare",
                                "ratio map of two stored temperature fields");
  cp->add_option("--pinn", pinn_dir, "candidate run directory")->required();
  cp->add_option("--oracle", oracle_dir, "reference run directory")
      ->required();
  cp->add_option("--threshold", ratio_threshold, "acceptable ratio floor");
  cp->add_option("--out", out_dir, "output directory")->required();

  auto* pl = app.add_subcommand("presets", "list named configurations");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (pl->parsed()) {
    for (const auto& n : preset_names()) std::printf("%s\n", n.c_str());
    return 0;
  }

  if (fw->parsed())
    return dispatch([&] {
      RunConfig cfg = base_config(Command::Forward, preset, config_path);
      if (fw_seed->count()) cfg.seed = seed;
      const ForwardOutcome r = run_forward(cfg, out_dir);
      std::printf(
          "forward %s: MST %.3f K, field [%.3f, %.3f] K, closure %.4f%%, "
          "final loss %.6g\nartifacts: %s\n",
          cfg.preset.empty() ? config_path.c_str() : cfg.preset.c_str(),
          r.mst, r.field.theta.minCoeff(), r.field.theta.maxCoeff(),
          100.0 * r.closure_rel, r.result.final_loss.total, r.dir.c_str());
      return 0;
    });

  if (inv->parsed())
    return dispatch([&] {
      RunConfig cfg = base_config(Command::Inverse, preset, config_path);
      cfg.inverse = true;
      if (inv_seed->count()) cfg.seed = seed;
      if (inv_d->count()) cfg.data_source = data_source;
      const InverseOutcome r = run_inverse(cfg, out_dir);
      if (std::isfinite(r.percent_error))
        std::printf("inverse %s: K = %.6f W/(m K), %.3f%% from target\n",
                    cfg.preset.empty() ? config_path.c_str()
                                       : cfg.preset.c_str(),
                    r.final_K, r.percent_error);
      else
        std::printf("inverse %s: K = %.6f W/(m K)\n",
                    cfg.preset.empty() ? config_path.c_str()
                                       : cfg.preset.c_str(),
                    r.final_K);
      std::printf("artifacts: %s\n", r.dir.c_str());
      return 0;
    });

  if (orc->parsed())
    return dispatch([&] {
      RunConfig cfg;
      if (orc_p->count() || orc_c->count())
        cfg = base_config(Command::Oracle, preset, config_path);
      else if (orc_g->count())
        cfg.geometry = vasc_kind_from_name(geometry);
      else
        throw ConfigError("pass --geometry, --preset, or --config");
      cfg.command = Command::Oracle;
      if (orc_f->count()) cfg.params.flow_ml_min = flow;
      if (orc_n->count()) cfg.grid = grid;
      if (orc_r->count()) cfg.params.radiation = radiation_flag(radiation);
      if (orc_rev->count()) cfg.reverse_flow = reverse;
      const OracleOutcome r = run_oracle(cfg, out_dir);
      std::printf(
          "oracle %s V=%g: MST %.3f K, closure %.4g%%, %d Newton "
          "iterations\nartifacts: %s\n",
          vasc_kind_name(cfg.geometry), cfg.params.flow_ml_min, r.mst,
          100.0 * r.fv.balance.closure_rel(), r.fv.newton_iters,
          r.dir.c_str());
      return 0;
    });

  if (mst->parsed())
    return dispatch([&] {
      RunConfig cfg;
      if (mst_p->count() || mst_c->count()) {
        cfg = base_config(Command::VerifyMst, preset, config_path);
        if (mst_r->count()) cfg.params.radiation = radiation_flag(radiation);
      } else {
        cfg = preset_config(radiation_flag(radiation) ? "mst-on" : "mst-off");
        cfg.command = Command::VerifyMst;
      }
      cfg.engine = engine == "pinn" ? Engine::Pinn : Engine::Oracle;
      if (mst_n->count()) cfg.grid = grid;
      if (mst_seed->count()) cfg.seed = seed;
      const MstOutcome r = run_verify_mst(cfg, out_dir, threshold);
      std::printf(
          "verify-mst (%s, radiation %s): forward %.4f K, reverse %.4f K, "
          "diff %.4f%% vs %.2f%% bound: %s\nartifacts: %s\n",
          engine.c_str(), cfg.params.radiation ? "on" : "off", r.forward_mst,
          r.reverse_mst, r.percent_diff, r.threshold_pct,
          r.asserted ? (r.pass ? "PASS" : "FAIL") : "report only",
          r.dir.c_str());
      if (r.asserted && !r.pass)
        throw NumericalError("flow-reversal invariance violated");
      return 0;
    });

  if (sw->parsed())
    return dispatch([&] {
      const SweepSpec spec = load_sweep_file(config_path);
      const SweepOutcome r = run_sweep(spec, out_dir);
      if (r.best_name.empty())
        std::printf("sweep: %d runs, all failed\n", r.runs);
      else
        std::printf("sweep: %d runs (%d failed), best %s (%s = %.6g)\n",
                    r.runs, r.failures, r.best_name.c_str(),
                    r.ranking.c_str(), r.best_metric);
      std::printf("artifacts: %s\n", r.dir.c_str());
      return 0;
    });

  if (cp->parsed())
    return dispatch([&] {
      const CompareOutcome r =
          run_compare(pinn_dir, oracle_dir, out_dir, ratio_threshold);
      std::printf(
          "compare: min ratio %.4f, %.2f%% of area below %.2f, RMS %.4f "
          "K\nartifacts: %s\n",
          r.cmp.min_ratio, 100.0 * r.cmp.below_fraction, r.cmp.threshold,
          r.cmp.rms_error, r.dir.c_str());
      return 0;
    });

  return 0;
}
