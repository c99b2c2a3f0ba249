#include "runner.hpp"

#include "config.hpp"

#include "randattract/attractor.hpp"
#include "randattract/evolution.hpp"
#include "randattract/io.hpp"
#include "randattract/ou.hpp"
#include "randattract/parallel.hpp"
#include "randattract/pathwise.hpp"
#include "randattract/studies.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace randattract::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

class Outputs {
 public:
  Outputs(fs::path dir, std::string hash) : dir_(std::move(dir)), hash_(std::move(hash)) {
    fs::create_directories(dir_);
  }

  const std::string& hash() const { return hash_; }

  void write(const std::string& name, const std::string& content) {
    const fs::path target = dir_ / name;
    const fs::path tmp = dir_ / (name + ".tmp");
    {
      std::ofstream out(tmp, std::ios::binary);
      if (!out) throw std::runtime_error("cannot write " + target.string());
      out << content;
    }
    fs::rename(tmp, target);
    files_.push_back(name);
  }

  void csv(const std::string& name, const std::string& body) {
    write(name, "# config_hash=" + hash_ + "\n" + body);
  }

  void json_file(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

  void log(const std::string& line) {
    std::ofstream out(dir_ / "run.log", std::ios::app);
    out << line << "\n";
  }

  void discard() {
    std::error_code ec;
    for (const auto& f : files_) fs::remove(dir_ / f, ec);
    fs::remove(dir_ / "manifest.json", ec);
    files_.clear();
  }

  const std::vector<std::string>& files() const { return files_; }
  void keep_manifest(const json& manifest) {
    const fs::path tmp = dir_ / "manifest.json.tmp";
    {
      std::ofstream out(tmp, std::ios::binary);
      out << manifest.dump(2) << "\n";
    }
    fs::rename(tmp, dir_ / "manifest.json");
  }

 private:
  fs::path dir_;
  std::string hash_;
  std::vector<std::string> files_;
};

struct Context {
  RunConfig cfg;
  StudySetup setup;
  Outputs* out = nullptr;
  std::vector<std::uint64_t> seeds;
  json timings = json::object();
  std::optional<int> levels;
};

template <typename F>
void timed(Context& ctx, const std::string& label, F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  ctx.timings[label] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

json vec_json(const std::vector<double>& v) { return json(v); }

// ---------------------------------------------------------------------------

int cmd_simulate(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const SemilinearProblem problem = cfg.semilinear();
  const double horizon = cfg.experiment.horizon;
  const std::size_t n = static_cast<std::size_t>(cfg.noise.paths);
  std::vector<Trajectory> runs(n);
  for (std::size_t i = 0; i < n; ++i) ctx.seeds.push_back(cfg.noise.seed + i);

  timed(ctx, "integrate", [&] {
    parallel_for(n, ctx.setup.threads, [&](std::size_t i) {
      const WienerPath path = study_path(ctx.setup, 0.0, horizon, ctx.seeds[i]);
      const PropagatorChain chain = build_chain(problem.field, path, TimeGrid::span(0.0, horizon, cfg.noise.dt),
                                                cfg.field.dim);
      runs[i] = integrate_semilinear(problem, chain, path);
    });
  });

  json members = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    std::ostringstream body;
    write_trajectory_csv(body, runs[i], cfg.field.alpha);
    ctx.out->csv("trajectory_" + std::to_string(i) + ".csv", body.str());
    const VectorXd& last = runs[i].final_state();
    members.push_back({{"index", i},
                       {"seed", ctx.seeds[i]},
                       {"status", runs[i].completed() ? "completed" : "blowup"},
                       {"blowup_time", runs[i].completed() ? json(nullptr) : json(runs[i].blowup_time)},
                       {"final_norm_l2", last.norm()},
                       {"final_norm_x_alpha", fractional_norm(last, cfg.field.alpha)}});
  }
  std::ostringstream ens;
  write_ensemble_csv(ens, runs);
  ctx.out->csv("ensemble.csv", ens.str());
  ctx.out->json_file("summary.json", {{"config_hash", ctx.out->hash()}, {"horizon", horizon}, {"paths", members}});
  return kSuccess;
}

int cmd_ou(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const auto& ex = cfg.experiment;
  const DiffusionField field = cfg.diffusion();
  double t_max = 0.0;
  double s_max = 0.0;
  for (double t : ex.stationarity_t) t_max = std::max(t_max, t);
  for (double s : ex.stationarity_s) s_max = std::max(s_max, s);

  json rows = json::array();
  ctx.seeds.push_back(cfg.noise.seed);
  timed(ctx, "stationarity", [&] {
    const WienerPath path = study_path(ctx.setup, -ex.a, t_max + s_max, cfg.noise.seed);
    const StepFactory factory(field, cfg.field.dim, path);
    for (double t : ex.stationarity_t)
      for (double s : ex.stationarity_s) {
        const StationarityReport r = stationarity_residual(factory, t, s, ex.a);
        rows.push_back({{"t", r.t}, {"s", r.s}, {"residual", r.residual},
                        {"truncation_bound", r.truncation_bound}, {"z_norm", r.z_norm}});
      }
  });
  ctx.out->json_file("stationarity.json", {{"config_hash", ctx.out->hash()}, {"a", ex.a}, {"rows", rows}});

  const std::size_t n = static_cast<std::size_t>(cfg.noise.paths);
  const double horizon = ex.temper_horizon;
  const std::vector<double> ladder =
      log_ladder(1.0, horizon, ex.ladder_points, cfg.noise.dt, {0.2 * horizon, 0.5 * horizon, horizon});
  std::vector<TemperednessTable> tables(n);
  for (std::size_t i = 0; i < n; ++i) ctx.seeds.push_back(cfg.noise.seed + 5000 + i);
  timed(ctx, "temperedness", [&] {
    parallel_for(n, ctx.setup.threads, [&](std::size_t i) {
      const WienerPath path = study_path(ctx.setup, -(horizon + ex.a), 0.0, ctx.seeds[1 + i]);
      tables[i] = temperedness_diagnostic(field, path, cfg.field.dim, cfg.field.beta, ex.gammas, horizon, ex.a, ladder);
    });
  });

  std::vector<double> slopes;
  std::vector<double> log_slopes;
  for (std::size_t i = 0; i < n; ++i) {
    std::ostringstream body;
    write_temperedness_csv(body, tables[i]);
    ctx.out->csv("temperedness_" + std::to_string(i) + ".csv", body.str());
    slopes.push_back(tables[i].slope);
    log_slopes.push_back(tables[i].log_slope);
  }
  ctx.out->json_file("temperedness_summary.json",
                     {{"config_hash", ctx.out->hash()},
                      {"note", "finite-horizon surrogate of the temperedness limit"},
                      {"horizon", horizon},
                      {"beta", cfg.field.beta},
                      {"slopes", slopes},
                      {"median_slope", median(slopes)},
                      {"log_slopes", log_slopes},
                      {"median_log_slope", median(log_slopes)}});
  return kSuccess;
}

int cmd_pullback(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const auto& ex = cfg.experiment;
  SemilinearProblem problem = cfg.semilinear();
  const double reach = std::max(ex.horizons.back(), 2.0 * ex.a);
  ctx.seeds.push_back(cfg.noise.seed);
  const WienerPath path = study_path(ctx.setup, -reach, 0.0, cfg.noise.seed);
  const StepFactory factory(problem.field, cfg.field.dim, path);
  const std::vector<VectorXd> ensemble =
      default_ensemble(cfg.field.dim, ex.ball_radius, cfg.field.alpha, ex.ensemble_size, cfg.noise.seed);

  PullbackParams params;
  params.alpha = cfg.field.alpha;
  params.eta = cfg.field.eta;
  params.threads = ctx.setup.threads;
  PullbackEstimate est;
  timed(ctx, "pullback", [&] { est = pullback_estimate(problem, factory, ex.horizons, ensemble, params); });

  AbsorbingParams ap;
  ap.alpha = cfg.field.alpha;
  ap.eta = cfg.field.eta;
  ap.rho = problem.nonlinearity.rho;
  ap.dim = cfg.field.dim;
  AbsorbingDiagnostics ad;
  timed(ctx, "absorbing", [&] { ad = absorbing_diagnostics(problem.field, path, ex.a, ap); });
  const double scale = attractor_scale(ad, problem.sigma, problem.nonlinearity.rho);

  std::ostringstream body;
  body << "horizon,member,alive";
  for (int m = 1; m <= cfg.field.dim; ++m) body << ",mode_" << m;
  body << "\n";
  for (std::size_t j = 0; j < est.horizons.size(); ++j)
    for (std::size_t i = 0; i < est.endpoints[j].size(); ++i) {
      body << format_real(est.horizons[j]) << ',' << i << ',' << (est.alive[j][i] ? 1 : 0);
      for (Index m = 0; m < est.endpoints[j][i].size(); ++m) body << ',' << format_real(est.endpoints[j][i](m));
      body << "\n";
    }
  ctx.out->csv("endpoints.csv", body.str());

  const bool support = est.alpha_max.back() <= 10.0 * scale;
  ctx.out->json_file(
      "summary.json",
      {{"config_hash", ctx.out->hash()},
       {"note", "ensemble ball of the configured radius stands in for the tempered universe"},
       {"horizons", vec_json(est.horizons)},
       {"diameters", vec_json(est.diameters)},
       {"hausdorff_steps", vec_json(est.hausdorff_steps)},
       {"eta_max", vec_json(est.eta_max)},
       {"alpha_max", vec_json(est.alpha_max)},
       {"blowups", est.blowups},
       {"absorbing", {{"r2_integral", ad.r2_integral}, {"rrho_integral", ad.rrho_integral},
                      {"z_l2", ad.z_l2}, {"z_eta", ad.z_eta}, {"scale", scale}}},
       {"flags", {{"monotone", est.monotone}, {"blowup_free", est.blowups == 0}, {"support_bound", support}}}});
  return kSuccess;
}

const char* relation_name(Relation r) {
  switch (r) {
    case Relation::AtMost:
      return "<=";
    case Relation::AtLeast:
      return ">=";
    case Relation::Within:
      return "in";
  }
  return "?";
}

int cmd_verify(Context& ctx) {
  const StudyScale scale = ctx.cfg.experiment.scale == "full" ? StudyScale::full() : StudyScale::light();
  ctx.seeds.push_back(ctx.cfg.noise.seed);
  std::vector<Check> checks;
  timed(ctx, "studies", [&] { checks = run_all_studies(ctx.setup, scale); });

  json list = json::array();
  bool ok = true;
  for (const auto& c : checks) {
    json limit = c.relation == Relation::Within ? json::array({c.limit, c.upper}) : json(c.limit);
    list.push_back({{"suite", c.suite}, {"name", c.name}, {"value", c.value}, {"relation", relation_name(c.relation)},
                    {"limit", limit}, {"margin", c.margin()}, {"passed", c.passed}});
    ok = ok && c.passed;
  }
  ctx.out->json_file("report.json", {{"config_hash", ctx.out->hash()},
                                     {"version", RANDATTRACT_VERSION},
                                     {"scale", ctx.cfg.experiment.scale},
                                     {"passed", ok},
                                     {"checks", list}});

  const WienerPath path = study_path(ctx.setup, 0.0, 2.0, ctx.cfg.noise.seed);
  const PropagatorChain chain =
      build_chain(ctx.setup.field, path, TimeGrid::span(0.0, 2.0, ctx.setup.dt), ctx.setup.dim, ctx.setup.threads);
  const std::vector<TimePair> pairs = sample_pairs(chain.grid(), 20, ctx.cfg.noise.seed);
  std::ostringstream decay;
  write_decay_csv(decay, chain, pairs, decay_fit(chain, pairs));
  ctx.out->csv("decay.csv", decay.str());
  return ok ? kSuccess : kInvariant;
}

int cmd_convergence(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const int levels = ctx.levels.value_or(cfg.experiment.levels);
  if (levels < 2 || cfg.experiment.reference_level <= 3 + levels)
    throw ConfigError("--levels: need at least two levels, all coarser than the reference level");
  for (int i = 0; i < cfg.noise.paths; ++i) ctx.seeds.push_back(cfg.noise.seed + 1000 + i);
  std::vector<ConvergenceResult> res;
  timed(ctx, "convergence", [&] {
    res = strong_convergence(ctx.setup, {cfg.semilinear()}, levels, cfg.experiment.reference_level,
                             cfg.noise.paths, cfg.experiment.horizon);
  });
  const ConvergenceResult& r = res.front();
  std::ostringstream body;
  body << "dt,rms_error\n";
  for (std::size_t i = 0; i < r.dts.size(); ++i) body << format_real(r.dts[i]) << ',' << format_real(r.errors[i]) << "\n";
  ctx.out->csv("convergence.csv", body.str());
  ctx.out->json_file("summary.json", {{"config_hash", ctx.out->hash()},
                                      {"levels", levels},
                                      {"reference_level", r.reference_level},
                                      {"paths", cfg.noise.paths},
                                      {"dts", vec_json(r.dts)},
                                      {"errors", vec_json(r.errors)},
                                      {"order", r.order}});
  return kSuccess;
}

fs::path resolve_out(const RunOptions& o) {
  if (!o.out_dir.empty()) return o.out_dir;
  if (const char* env = std::getenv("RANDATTRACT_OUT"); env && *env) return env;
  return "randattract_out";
}

}  // namespace

int run(const RunOptions& options, std::ostream& err) {
  using Handler = int (*)(Context&);
  Handler handler = nullptr;
  if (options.subcommand == "simulate") handler = cmd_simulate;
  if (options.subcommand == "ou-diagnose") handler = cmd_ou;
  if (options.subcommand == "attractor-pullback") handler = cmd_pullback;
  if (options.subcommand == "verify") handler = cmd_verify;
  if (options.subcommand == "convergence") handler = cmd_convergence;
  if (!handler) {
    err << "error: unknown subcommand '" << options.subcommand << "'\n";
    return kValidation;
  }

  Context ctx;
  try {
    ctx.cfg = options.config_path.empty() ? RunConfig{} : load_config(options.config_path);
    if (options.seed) ctx.cfg.noise.seed = *options.seed;
    ctx.cfg.validate();
  } catch (const std::exception& e) {
    err << "configuration error: " << e.what() << "\n";
    return kValidation;
  }
  if (options.threads < 0) {
    err << "configuration error: --threads must be nonnegative\n";
    return kValidation;
  }
  ctx.setup = ctx.cfg.setup(options.threads > 0 ? options.threads : default_threads());
  ctx.levels = options.levels;

  std::unique_ptr<Outputs> out;
  try {
    out = std::make_unique<Outputs>(resolve_out(options), ctx.cfg.hash());
  } catch (const std::exception& e) {
    err << "error: cannot create output directory: " << e.what() << "\n";
    return kValidation;
  }
  ctx.out = out.get();
  out->log(options.subcommand + " config_hash=" + ctx.cfg.hash());

  int code = kSuccess;
  std::string message;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    code = handler(ctx);
  } catch (const ConfigError& e) {
    code = kValidation;
    message = std::string("configuration error: ") + e.what();
  } catch (const ShiftRangeError& e) {
    code = kValidation;
    message = std::string("shift-range error: ") + e.what();
  } catch (const AlignmentError& e) {
    code = kValidation;
    message = std::string("alignment error: ") + e.what();
  } catch (const OrderingError& e) {
    code = kValidation;
    message = std::string("ordering error: ") + e.what();
  } catch (const std::exception& e) {
    code = kNumerical;
    message = std::string("numerical error: ") + e.what();
  }

  if (code == kValidation || code == kNumerical) {
    err << message << "\n";
    out->log(message);
    out->discard();
    return code;
  }

  ctx.timings["total"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json manifest = {{"config_hash", ctx.cfg.hash()},
                   {"version", RANDATTRACT_VERSION},
                   {"subcommand", options.subcommand},
                   {"seeds", ctx.seeds},
                   {"files", out->files()},
                   {"timings_seconds", ctx.timings}};
  out->keep_manifest(manifest);
  out->log(code == kSuccess ? "completed" : "invariant suite failed");
  if (code == kInvariant) err << "invariant suite failed; see report.json\n";
  return code;
}

}  // namespace randattract::cli
