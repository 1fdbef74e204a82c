#include "coolpinns/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <optional>
#include <sstream>

namespace coolpinns {
namespace {

namespace fs = std::filesystem;

constexpr std::uint64_t kDataTag = 0x64617461ull;   // observation locations
constexpr std::uint64_t kNoiseTag = 0x6e6f6973ull;  // observation noise

double now_s() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(dir + ": cannot create directory (" + ec.message() +
                        ")");
}

std::string join(const std::string& dir, const char* name) {
  return (fs::path(dir) / name).string();
}

std::string g17(Scalar x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fixed3(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3f", x);
  return buf;
}

TrainOptions train_options(const RunConfig& cfg) {
  TrainOptions t;
  t.adam_steps = cfg.adam_epochs;
  t.adam_lr = cfg.learning_rate;
  t.lbfgs_iters = cfg.lbfgs_epochs;
  t.log_every = cfg.log_every;
  t.inverse = cfg.inverse || cfg.command == Command::Inverse;
  t.kappa0 = std::log(cfg.initial_K);
  return t;
}

FieldModel make_model(const RunConfig& cfg, const Vasculature& vasc,
                      const Domain& dom) {
  OutputTransform tf;
  tf.inlet = vasc.kind() == VascKind::NoChannel ? Vec2::Zero() : vasc.inlet();
  tf.theta_in = cfg.params.theta_in;
  return FieldModel(cfg.hidden_layers, cfg.neurons, cfg.seed, dom, tf);
}

struct Fitted {
  FieldModel model;
  TrainResult res;
};

Fitted fit(const RunConfig& cfg, const Vasculature& vasc, const Domain& dom,
           const CollocationSet& set) {
  FieldModel model = make_model(cfg, vasc, dom);
  TrainResult res =
      train(model, set, dom, cfg.params, LossOptions{}, train_options(cfg));
  return {std::move(model), std::move(res)};
}

void meta_common(std::ostringstream& o, const RunConfig& cfg, double wall) {
  o << "command = \"" << command_name(cfg.command) << "\"\n";
  if (!cfg.preset.empty()) o << "preset = \"" << cfg.preset << "\"\n";
  o << "wall_s = " << fixed3(wall) << "\n";
}

void meta_losses(std::ostringstream& o, const TrainResult& res) {
  o << "diverged = " << (res.diverged ? "true" : "false") << "\n";
  o << "best_loss = " << g17(res.best_loss) << "\n";
  o << "final_total = " << g17(res.final_loss.total) << "\n";
  o << "final_pde = " << g17(res.final_loss.pde) << "\n";
  o << "final_bc_neumann = " << g17(res.final_loss.bc_neumann) << "\n";
  o << "final_bc_dirichlet = " << g17(res.final_loss.bc_dirichlet) << "\n";
  o << "final_jump = " << g17(res.final_loss.jump) << "\n";
  o << "final_data = " << g17(res.final_loss.data) << "\n";
  o << "line_search_failures = " << res.line_search_failures << "\n";
}

void write_field_artifacts(const std::string& dir, const FieldGrid& g) {
  write_field_csv(join(dir, "field.csv"), g);
  write_heatmap_ppm(join(dir, "field.ppm"), g, g.theta.minCoeff(),
                    g.theta.maxCoeff());
}

[[noreturn]] void diverged_abort(const std::string& dir,
                                 const TrainResult& res) {
  const std::size_t at = res.history.empty() ? 0 : res.history.size() - 1;
  throw NumericalError("training diverged near epoch " +
                       std::to_string(res.history.empty()
                                          ? 0
                                          : res.history[at].epoch) +
                       "; see " + join(dir, "training_log.csv"));
}

}  // namespace

FieldGrid eval_model_grid(const FieldModel& model, const Domain& dom, int n) {
  FieldGrid g;
  g.nx = g.ny = n;
  g.Lx = dom.Lx;
  g.Ly = dom.Ly;
  g.hx = dom.Lx / n;
  g.hy = dom.Ly / n;
  g.theta.resize(Eigen::Index(n + 1) * (n + 1));

  constexpr Eigen::Index chunk = 8192;
  const Eigen::Index total = g.theta.size();
  MatX pts(2, std::min(chunk, total));
  for (Eigen::Index base = 0; base < total; base += chunk) {
    const Eigen::Index m = std::min(chunk, total - base);
    for (Eigen::Index k = 0; k < m; ++k) {
      const Eigen::Index node = base + k;
      const Eigen::Index i = node % (n + 1), j = node / (n + 1);
      pts(0, k) = Scalar(i) * g.hx;
      pts(1, k) = Scalar(j) * g.hy;
    }
    const JetBatch jets = model.jet(pts.leftCols(m));
    g.theta.segment(base, m) = jets.v.matrix();
  }
  return g;
}

ForwardOutcome run_forward(const RunConfig& cfg, const std::string& out_dir) {
  validate_config(cfg);
  const double t0 = now_s();
  const Domain dom;
  const Vasculature vasc = make_vasculature(cfg, dom);
  const CollocationSet set =
      make_collocation(dom, vasc, cfg.interior_points, cfg.uniform_interior,
                       cfg.seed, cfg.sampler);

  ensure_dir(out_dir);
  write_text_file(join(out_dir, "config_snapshot.toml"), snapshot_toml(cfg));

  Fitted ft = fit(cfg, vasc, dom, set);
  write_training_log(join(out_dir, "training_log.csv"), ft.res.history);
  if (ft.res.diverged) {
    std::ostringstream o;
    meta_common(o, cfg, now_s() - t0);
    meta_losses(o, ft.res);
    write_text_file(join(out_dir, "run_meta.toml"), o.str());
    diverged_abort(out_dir, ft.res);
  }

  ForwardOutcome out{std::move(ft.res), eval_model_grid(ft.model, dom,
                                                        cfg.grid),
                     0.0, 0.0, out_dir};
  out.mst = mean_surface_temperature(out.field);

  Scalar th_in = 0.0, th_out = 0.0;
  if (vasc.kind() != VascKind::NoChannel) {
    th_in = evaluate_jet(ft.model, vasc.inlet()).v;
    th_out = evaluate_jet(ft.model, vasc.outlet()).v;
  }
  const EnergyBalance eb =
      energy_balance(out.field, cfg.params, th_in, th_out);
  out.closure_rel = eb.closure_rel();

  write_field_artifacts(out_dir, out.field);
  write_checkpoint(join(out_dir, "checkpoint.bin"), ft.model, cfg.seed);

  std::ostringstream o;
  meta_common(o, cfg, now_s() - t0);
  meta_losses(o, out.result);
  o << "mst_K = " << g17(out.mst) << "\n";
  o << "closure_rel = " << g17(out.closure_rel) << "\n";
  o << "theta_min_K = " << g17(out.field.theta.minCoeff()) << "\n";
  o << "theta_max_K = " << g17(out.field.theta.maxCoeff()) << "\n";
  if (vasc.kind() != VascKind::NoChannel) {
    o << "theta_inlet_K = " << g17(th_in) << "\n";
    o << "theta_outlet_K = " << g17(th_out) << "\n";
  }
  write_text_file(join(out_dir, "run_meta.toml"), o.str());
  return out;
}

InverseOutcome run_inverse(const RunConfig& cfg, const std::string& out_dir) {
  validate_config(cfg);
  if (!(cfg.inverse || cfg.command == Command::Inverse))
    throw ConfigError("run_inverse needs an inverse-mode config");
  const double t0 = now_s();
  const Domain dom;
  const Vasculature vasc = make_vasculature(cfg, dom);

  CollocationSet set =
      make_collocation(dom, vasc, cfg.interior_points, cfg.uniform_interior,
                       cfg.seed, cfg.sampler);
  set.data_pts = random_points(dom, vasc, cfg.data_points,
                               derive_seed(cfg.seed, kDataTag), cfg.sampler);

  std::vector<Vec2> obs(static_cast<std::size_t>(set.data_pts.cols()));
  for (Eigen::Index k = 0; k < set.data_pts.cols(); ++k)
    obs[static_cast<std::size_t>(k)] = set.data_pts.col(k);

  FieldGrid source;
  if (cfg.data_source == "oracle") {
    if (vasc.kind() == VascKind::SineWave || vasc.kind() == VascKind::Custom)
      throw ConfigError(
          "no grid oracle for this geometry; pass a stored forward-run "
          "directory as the data source");
    source = solve_fv(vasc, dom, cfg.params, cfg.grid, cfg.grid).grid;
  } else {
    source = read_field_csv(join(cfg.data_source, "field.csv"));
    if (std::abs(source.Lx - dom.Lx) > 1e-9 ||
        std::abs(source.Ly - dom.Ly) > 1e-9)
      throw ConfigError(cfg.data_source +
                        ": stored field does not cover this domain");
  }
  set.data_theta = synthesize_inverse_data(source, obs, cfg.noise_sigma,
                                           derive_seed(cfg.seed, kNoiseTag));

  ensure_dir(out_dir);
  write_text_file(join(out_dir, "config_snapshot.toml"), snapshot_toml(cfg));

  Fitted ft = fit(cfg, vasc, dom, set);
  write_training_log(join(out_dir, "training_log.csv"), ft.res.history);
  write_k_history(join(out_dir, "k_history.csv"), ft.res.history,
                  cfg.ground_truth_K);
  if (ft.res.diverged) {
    std::ostringstream o;
    meta_common(o, cfg, now_s() - t0);
    meta_losses(o, ft.res);
    write_text_file(join(out_dir, "run_meta.toml"), o.str());
    diverged_abort(out_dir, ft.res);
  }

  InverseOutcome out;
  out.result = std::move(ft.res);
  out.final_K = std::exp(out.result.kappa);
  out.percent_error =
      cfg.ground_truth_K > 0
          ? std::abs(out.final_K - cfg.ground_truth_K) / cfg.ground_truth_K *
                100.0
          : std::numeric_limits<Scalar>::quiet_NaN();
  out.dir = out_dir;

  const FieldGrid field = eval_model_grid(ft.model, dom, cfg.grid);
  write_field_artifacts(out_dir, field);
  write_checkpoint(join(out_dir, "checkpoint.bin"), ft.model, cfg.seed);

  std::ostringstream o;
  meta_common(o, cfg, now_s() - t0);
  meta_losses(o, out.result);
  o << "final_K = " << g17(out.final_K) << "\n";
  if (cfg.ground_truth_K > 0) {
    o << "ground_truth_K = " << g17(cfg.ground_truth_K) << "\n";
    o << "percent_error = " << g17(out.percent_error) << "\n";
  }
  write_text_file(join(out_dir, "run_meta.toml"), o.str());
  return out;
}

OracleOutcome run_oracle(const RunConfig& cfg, const std::string& out_dir) {
  validate_config(cfg);
  const double t0 = now_s();
  const Domain dom;
  const Vasculature vasc = make_vasculature(cfg, dom);
  OracleOutcome out;
  out.fv = solve_fv(vasc, dom, cfg.params, cfg.grid, cfg.grid);
  out.mst = mean_surface_temperature(out.fv.grid);
  out.dir = out_dir;

  ensure_dir(out_dir);
  write_text_file(join(out_dir, "config_snapshot.toml"), snapshot_toml(cfg));
  write_field_artifacts(out_dir, out.fv.grid);

  std::ostringstream o;
  meta_common(o, cfg, now_s() - t0);
  o << "mst_K = " << g17(out.mst) << "\n";
  o << "newton_iters = " << out.fv.newton_iters << "\n";
  o << "closure_rel = " << g17(out.fv.balance.closure_rel()) << "\n";
  o << "theta_min_K = " << g17(out.fv.grid.theta.minCoeff()) << "\n";
  o << "theta_max_K = " << g17(out.fv.grid.theta.maxCoeff()) << "\n";
  if (vasc.kind() != VascKind::NoChannel) {
    o << "theta_inlet_K = " << g17(out.fv.theta_inlet) << "\n";
    o << "theta_outlet_K = " << g17(out.fv.theta_outlet) << "\n";
  }
  write_text_file(join(out_dir, "run_meta.toml"), o.str());
  return out;
}

MstOutcome run_verify_mst(const RunConfig& cfg, const std::string& out_dir,
                          Scalar threshold_pct) {
  validate_config(cfg);
  if (cfg.geometry == VascKind::NoChannel)
    throw ConfigError("flow-reversal study needs a channel");
  const double t0 = now_s();
  const Domain dom;

  RunConfig fwd = cfg;
  fwd.reverse_flow = false;
  RunConfig rev = cfg;
  rev.reverse_flow = true;

  MstOutcome out;
  out.threshold_pct =
      threshold_pct > 0 ? threshold_pct
                        : (cfg.engine == Engine::Oracle ? 0.5 : 1.0);
  out.asserted = !cfg.params.radiation;
  out.dir = out_dir;

  ensure_dir(out_dir);
  write_text_file(join(out_dir, "config_snapshot.toml"), snapshot_toml(cfg));

  FieldGrid gf, gr;
  if (cfg.engine == Engine::Oracle) {
    gf = solve_fv(make_vasculature(fwd, dom), dom, cfg.params, cfg.grid,
                  cfg.grid)
             .grid;
    gr = solve_fv(make_vasculature(rev, dom), dom, cfg.params, cfg.grid,
                  cfg.grid)
             .grid;
  } else {
    const Vasculature vf = make_vasculature(fwd, dom);
    const Vasculature vr = make_vasculature(rev, dom);
    Fitted mf = fit(fwd, vf, dom,
                    make_collocation(dom, vf, fwd.interior_points,
                                     fwd.uniform_interior, fwd.seed,
                                     fwd.sampler));
    write_training_log(join(out_dir, "training_log_forward.csv"),
                       mf.res.history);
    if (mf.res.diverged) diverged_abort(out_dir, mf.res);
    Fitted mr = fit(rev, vr, dom,
                    make_collocation(dom, vr, rev.interior_points,
                                     rev.uniform_interior, rev.seed,
                                     rev.sampler));
    write_training_log(join(out_dir, "training_log_reverse.csv"),
                       mr.res.history);
    if (mr.res.diverged) diverged_abort(out_dir, mr.res);
    gf = eval_model_grid(mf.model, dom, cfg.grid);
    gr = eval_model_grid(mr.model, dom, cfg.grid);
  }

  out.forward_mst = mean_surface_temperature(gf);
  out.reverse_mst = mean_surface_temperature(gr);
  out.percent_diff =
      std::abs(out.forward_mst - out.reverse_mst) / out.forward_mst * 100.0;
  out.pass = !out.asserted || out.percent_diff <= out.threshold_pct;

  write_field_csv(join(out_dir, "field_forward.csv"), gf);
  write_field_csv(join(out_dir, "field_reverse.csv"), gr);
  const Scalar lo = std::min(gf.theta.minCoeff(), gr.theta.minCoeff());
  const Scalar hi = std::max(gf.theta.maxCoeff(), gr.theta.maxCoeff());
  write_heatmap_ppm(join(out_dir, "field_forward.ppm"), gf, lo, hi);
  write_heatmap_ppm(join(out_dir, "field_reverse.ppm"), gr, lo, hi);

  std::ostringstream o;
  meta_common(o, cfg, now_s() - t0);
  o << "engine = \"" << (cfg.engine == Engine::Oracle ? "oracle" : "pinn")
    << "\"\n";
  o << "radiation = " << (cfg.params.radiation ? "true" : "false") << "\n";
  o << "forward_mst_K = " << g17(out.forward_mst) << "\n";
  o << "reverse_mst_K = " << g17(out.reverse_mst) << "\n";
  o << "percent_diff = " << g17(out.percent_diff) << "\n";
  o << "threshold_pct = " << g17(out.threshold_pct) << "\n";
  o << "asserted = " << (out.asserted ? "true" : "false") << "\n";
  o << "pass = " << (out.pass ? "true" : "false") << "\n";
  write_text_file(join(out_dir, "mst_report.toml"), o.str());
  return out;
}

SweepOutcome run_sweep(const SweepSpec& spec, const std::string& out_dir) {
  validate_config(spec.base);
  const double t0 = now_s();
  const bool inverse =
      spec.base.inverse || spec.base.command == Command::Inverse;

  SweepOutcome out;
  out.dir = out_dir;
  ensure_dir(out_dir);

  // reference field for ranking forward runs; geometries without a grid
  // oracle fall back to the final training loss
  std::optional<FieldGrid> ref;
  out.ranking = "final_loss";
  if (!inverse) {
    try {
      const Domain dom;
      RunConfig probe = spec.base;
      ref = solve_fv(make_vasculature(probe, dom), dom, probe.params,
                     probe.grid, probe.grid)
                .grid;
      out.ranking = "rms_vs_oracle_K";
    } catch (const ConfigError&) {
      ref.reset();
    }
  } else {
    out.ranking =
        spec.base.ground_truth_K > 0 ? "abs_K_error" : "final_loss";
  }

  struct Row {
    std::string name;
    int layers = 0, neurons = 0;
    Scalar lr = 0;
    Scalar metric = std::numeric_limits<Scalar>::infinity();
    Scalar final_total = std::numeric_limits<Scalar>::quiet_NaN();
    std::string status = "ok";
  };
  std::vector<Row> rows;

  for (int la : spec.hidden_layers)
    for (int ne : spec.neurons)
      for (Scalar lr : spec.learning_rates) {
        Row row;
        row.layers = la;
        row.neurons = ne;
        row.lr = lr;
        {
          char buf[64];
          std::snprintf(buf, sizeof buf, "l%d-n%d-lr%g", la, ne, lr);
          row.name = buf;
        }
        RunConfig cfg = spec.base;
        cfg.hidden_layers = la;
        cfg.neurons = ne;
        cfg.learning_rate = lr;
        const std::string sub = join(out_dir, row.name.c_str());
        ++out.runs;
        try {
          if (inverse) {
            const InverseOutcome r = run_inverse(cfg, sub);
            row.final_total = r.result.final_loss.total;
            row.metric = cfg.ground_truth_K > 0
                             ? std::abs(r.final_K - cfg.ground_truth_K)
                             : row.final_total;
          } else {
            const ForwardOutcome r = run_forward(cfg, sub);
            row.final_total = r.result.final_loss.total;
            row.metric = ref ? compare_fields(r.field, *ref).rms_error
                             : row.final_total;
          }
        } catch (const std::exception& e) {
          ++out.failures;
          row.status = e.what();
          std::replace(row.status.begin(), row.status.end(), ',', ';');
          std::replace(row.status.begin(), row.status.end(), '\n', ' ');
        }
        rows.push_back(std::move(row));
      }

  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.metric != b.metric) return a.metric < b.metric;
    return a.name < b.name;
  });

  std::ostringstream csv;
  csv << "rank,name,hidden_layers,neurons,learning_rate,metric,final_total,"
         "status\n";
  for (std::size_t r = 0; r < rows.size(); ++r)
    csv << r + 1 << ',' << rows[r].name << ',' << rows[r].layers << ','
        << rows[r].neurons << ',' << g17(rows[r].lr) << ','
        << g17(rows[r].metric) << ',' << g17(rows[r].final_total) << ','
        << rows[r].status << '\n';
  write_text_file(join(out_dir, "sweep_results.csv"), csv.str());

  if (!rows.empty() && rows.front().status == "ok") {
    out.best_name = rows.front().name;
    out.best_metric = rows.front().metric;
  } else {
    out.best_metric = std::numeric_limits<Scalar>::quiet_NaN();
  }

  std::ostringstream o;
  meta_common(o, spec.base, now_s() - t0);
  o << "runs = " << out.runs << "\n";
  o << "failures = " << out.failures << "\n";
  o << "ranking = \"" << out.ranking << "\"\n";
  if (!out.best_name.empty()) {
    o << "best = \"" << out.best_name << "\"\n";
    o << "best_metric = " << g17(out.best_metric) << "\n";
  }
  write_text_file(join(out_dir, "run_meta.toml"), o.str());
  return out;
}

CompareOutcome run_compare(const std::string& candidate_dir,
                           const std::string& reference_dir,
                           const std::string& out_dir,
                           Scalar ratio_threshold) {
  const double t0 = now_s();
  const FieldGrid cand = read_field_csv(join(candidate_dir, "field.csv"));
  const FieldGrid ref = read_field_csv(join(reference_dir, "field.csv"));

  CompareOutcome out;
  out.cmp = compare_fields(cand, ref, ratio_threshold);
  out.dir = out_dir;

  ensure_dir(out_dir);
  write_ratio_csv(join(out_dir, "ratio.csv"), cand, out.cmp.ratio);
  FieldGrid rg = cand;
  rg.theta = out.cmp.ratio;
  write_heatmap_ppm(join(out_dir, "ratio.ppm"), rg, rg.theta.minCoeff(),
                    rg.theta.maxCoeff(), "ratio");

  std::ostringstream o;
  o << "command = \"compare\"\n";
  o << "wall_s = " << fixed3(now_s() - t0) << "\n";
  o << "candidate = \"" << candidate_dir << "\"\n";
  o << "reference = \"" << reference_dir << "\"\n";
  o << "threshold = " << g17(out.cmp.threshold) << "\n";
  o << "min_ratio = " << g17(out.cmp.min_ratio) << "\n";
  o << "below_fraction = " << g17(out.cmp.below_fraction) << "\n";
  o << "rms_error_K = " << g17(out.cmp.rms_error) << "\n";
  write_text_file(join(out_dir, "compare_report.toml"), o.str());
  return out;
}

}  // namespace coolpinns
