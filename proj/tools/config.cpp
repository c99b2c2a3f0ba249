#include "config.hpp"

#include "randattract/io.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace randattract::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_real(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || trim(v.substr(used)) != "") throw ConfigError(key + ": expected a number, got '" + v + "'");
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  const double x = to_real(key, v);
  if (x != std::floor(x) || std::abs(x) > 9.0e15) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return static_cast<long long>(x);
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  std::uint64_t out = 0;
  try {
    out = std::stoull(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || trim(v.substr(used)) != "" || trim(v).front() == '-')
    throw ConfigError(key + ": expected an unsigned 64-bit integer, got '" + v + "'");
  return out;
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_real(key, trim(item)));
  if (out.empty()) throw ConfigError(key + ": expected a comma-separated list");
  return out;
}

std::string list_text(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + format_real(xs[i]);
  return s;
}

bool on_grid(double t, double dt) { return std::abs(t / dt - std::round(t / dt)) < 1e-9; }

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"noise.modes", [](RunConfig& c, const std::string& v) { c.noise.modes = static_cast<int>(to_int("noise.modes", v)); }},
      {"noise.decay", [](RunConfig& c, const std::string& v) { c.noise.decay = to_real("noise.decay", v); }},
      {"noise.sigma", [](RunConfig& c, const std::string& v) { c.noise.sigma = to_real("noise.sigma", v); }},
      {"noise.dt", [](RunConfig& c, const std::string& v) { c.noise.dt = to_real("noise.dt", v); }},
      {"noise.seed", [](RunConfig& c, const std::string& v) { c.noise.seed = to_u64("noise.seed", v); }},
      {"noise.paths", [](RunConfig& c, const std::string& v) { c.noise.paths = static_cast<int>(to_int("noise.paths", v)); }},
      {"field.delta", [](RunConfig& c, const std::string& v) { c.field.delta = to_real("field.delta", v); }},
      {"field.amp", [](RunConfig& c, const std::string& v) { c.field.amp = to_real("field.amp", v); }},
      {"field.kappa", [](RunConfig& c, const std::string& v) { c.field.kappa = to_real("field.kappa", v); }},
      {"field.a_drv", [](RunConfig& c, const std::string& v) { c.field.a_drv = to_real("field.a_drv", v); }},
      {"field.M", [](RunConfig& c, const std::string& v) { c.field.dim = static_cast<int>(to_int("field.M", v)); }},
      {"field.alpha", [](RunConfig& c, const std::string& v) { c.field.alpha = to_real("field.alpha", v); }},
      {"field.eta", [](RunConfig& c, const std::string& v) { c.field.eta = to_real("field.eta", v); }},
      {"field.beta", [](RunConfig& c, const std::string& v) { c.field.beta = to_real("field.beta", v); }},
      {"field.reference_norm", [](RunConfig& c, const std::string& v) { c.field.reference_norm = v; }},
      {"problem.nonlinearity", [](RunConfig& c, const std::string& v) { c.problem.nonlinearity = v; }},
      {"problem.forcing", [](RunConfig& c, const std::string& v) { c.problem.forcing = v; }},
      {"problem.u0", [](RunConfig& c, const std::string& v) { c.problem.u0 = v; }},
      {"problem.blowup_threshold", [](RunConfig& c, const std::string& v) { c.problem.blowup_threshold = to_real("problem.blowup_threshold", v); }},
      {"experiment.horizon", [](RunConfig& c, const std::string& v) { c.experiment.horizon = to_real("experiment.horizon", v); }},
      {"experiment.a", [](RunConfig& c, const std::string& v) { c.experiment.a = to_real("experiment.a", v); }},
      {"experiment.horizons", [](RunConfig& c, const std::string& v) { c.experiment.horizons = to_list("experiment.horizons", v); }},
      {"experiment.gammas", [](RunConfig& c, const std::string& v) { c.experiment.gammas = to_list("experiment.gammas", v); }},
      {"experiment.stationarity_t", [](RunConfig& c, const std::string& v) { c.experiment.stationarity_t = to_list("experiment.stationarity_t", v); }},
      {"experiment.stationarity_s", [](RunConfig& c, const std::string& v) { c.experiment.stationarity_s = to_list("experiment.stationarity_s", v); }},
      {"experiment.temper_horizon", [](RunConfig& c, const std::string& v) { c.experiment.temper_horizon = to_real("experiment.temper_horizon", v); }},
      {"experiment.ladder_points", [](RunConfig& c, const std::string& v) { c.experiment.ladder_points = static_cast<int>(to_int("experiment.ladder_points", v)); }},
      {"experiment.levels", [](RunConfig& c, const std::string& v) { c.experiment.levels = static_cast<int>(to_int("experiment.levels", v)); }},
      {"experiment.reference_level", [](RunConfig& c, const std::string& v) { c.experiment.reference_level = static_cast<int>(to_int("experiment.reference_level", v)); }},
      {"experiment.ensemble_size", [](RunConfig& c, const std::string& v) { c.experiment.ensemble_size = static_cast<int>(to_int("experiment.ensemble_size", v)); }},
      {"experiment.ball_radius", [](RunConfig& c, const std::string& v) { c.experiment.ball_radius = to_real("experiment.ball_radius", v); }},
      {"experiment.scale", [](RunConfig& c, const std::string& v) { c.experiment.scale = v; }},
  };
  return table;
}

}  // namespace

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

VectorXd parse_modes(const std::string& text, int dim, const std::string& key) {
  VectorXd out = VectorXd::Zero(dim);
  const std::string s = trim(text);
  if (s.empty() || s == "0") return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ConfigError(key + ": expected entries of the form mode:value");
    const long long n = to_int(key, trim(item.substr(0, colon)));
    if (n < 1 || n > dim) throw ConfigError(key + ": mode index must lie in 1..M");
    out(n - 1) = to_real(key, trim(item.substr(colon + 1)));
  }
  return out;
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::stringstream in(text);
  std::string line;
  std::string section;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(number) + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(number) + ": expected key = value");
    const std::string key = section + "." + trim(line.substr(0, eq));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("line " + std::to_string(number) + ": unknown key " + key);
    it->second(cfg, trim(line.substr(eq + 1)));
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void RunConfig::validate() const {
  spectrum().validate();
  if (noise.sigma < 0.0) throw ConfigError("noise.sigma: noise intensity must be nonnegative");
  if (!(noise.dt > 0.0)) throw ConfigError("noise.dt: time step must be positive");
  if (!on_grid(1.0, noise.dt)) throw ConfigError("noise.dt: 1/dt must be an integer so unit times lie on the grid");
  if (noise.paths < 1) throw ConfigError("noise.paths: at least one path is required");

  diffusion().validate();
  if (field.dim < 1) throw ConfigError("field.M: Galerkin dimension must be at least 1");
  if (!(field.alpha >= 1.0 / 6.0 && field.alpha < 0.25))
    throw ConfigError("field.alpha: phase-space exponent must satisfy 1/6 <= alpha < 1/4");
  if (!(field.eta > field.alpha && field.eta + field.alpha < 1.0))
    throw ConfigError("field.eta: compactness exponent must satisfy eta > alpha and eta + alpha < 1");
  if (!(field.beta >= 0.0 && field.beta < 0.5))
    throw ConfigError("field.beta: temperedness exponent must satisfy 0 <= beta < 1/2");
  if (field.reference_norm != "fixed_laplacian")
    throw ConfigError("field.reference_norm: only fixed_laplacian is supported for reported norms");

  nonlinearity();
  parse_modes(problem.forcing, field.dim, "problem.forcing");
  parse_modes(problem.u0, field.dim, "problem.u0");
  if (!(problem.blowup_threshold > 0.0)) throw ConfigError("problem.blowup_threshold: must be positive");

  const double dt = noise.dt;
  if (!(experiment.horizon > 0.0) || !on_grid(experiment.horizon, dt))
    throw ConfigError("experiment.horizon: must be positive and grid-aligned");
  if (!(experiment.a > 0.0) || !on_grid(experiment.a, dt))
    throw ConfigError("experiment.a: truncation horizon must be positive and grid-aligned");
  for (std::size_t i = 0; i < experiment.horizons.size(); ++i) {
    if (!(experiment.horizons[i] > 0.0) || !on_grid(experiment.horizons[i], dt))
      throw ConfigError("experiment.horizons: pullback times must be positive and grid-aligned");
    if (i > 0 && !(experiment.horizons[i] > experiment.horizons[i - 1]))
      throw ConfigError("experiment.horizons: pullback times must increase");
  }
  for (double g : experiment.gammas)
    if (!(g > 0.0)) throw ConfigError("experiment.gammas: discount rates must be positive");
  for (const auto* list : {&experiment.stationarity_t, &experiment.stationarity_s})
    for (double t : *list)
      if (t < 0.0 || !on_grid(t, dt)) throw ConfigError("experiment.stationarity_t/s: times must be nonnegative and grid-aligned");
  if (!(experiment.temper_horizon >= 2.0) || !on_grid(experiment.temper_horizon, dt))
    throw ConfigError("experiment.temper_horizon: must be at least 2 and grid-aligned");
  if (experiment.ladder_points < 2) throw ConfigError("experiment.ladder_points: at least two ladder points");
  if (experiment.levels < 2) throw ConfigError("experiment.levels: at least two refinement levels");
  if (experiment.reference_level <= 3 + experiment.levels || experiment.reference_level > 16)
    throw ConfigError("experiment.reference_level: must be finer than every level and at most 16");
  if (experiment.ensemble_size < 1) throw ConfigError("experiment.ensemble_size: at least one member");
  if (!(experiment.ball_radius > 0.0)) throw ConfigError("experiment.ball_radius: must be positive");
  if (experiment.scale != "light" && experiment.scale != "full")
    throw ConfigError("experiment.scale: must be light or full");
}

NoiseSpectrum RunConfig::spectrum() const { return NoiseSpectrum::make(noise.modes, noise.decay); }

DiffusionField RunConfig::diffusion() const {
  DiffusionField f;
  f.delta = field.delta;
  f.amp = field.amp;
  f.kappa = field.kappa;
  f.driver_horizon = field.a_drv;
  return f;
}

NonlinearitySpec RunConfig::nonlinearity() const {
  if (problem.nonlinearity == "cubic_fisher") return NonlinearitySpec::cubic_fisher();
  if (problem.nonlinearity == "pure_cubic") return NonlinearitySpec::pure_cubic();
  if (problem.nonlinearity == "zero") return NonlinearitySpec::zero();
  throw ConfigError("problem.nonlinearity: must be cubic_fisher, pure_cubic or zero");
}

SemilinearProblem RunConfig::semilinear() const {
  SemilinearProblem p;
  p.field = diffusion();
  p.nonlinearity = nonlinearity();
  p.forcing = parse_modes(problem.forcing, field.dim, "problem.forcing");
  p.sigma = noise.sigma;
  p.u0 = parse_modes(problem.u0, field.dim, "problem.u0");
  p.blowup_threshold = problem.blowup_threshold;
  p.alpha = field.alpha;
  return p;
}

StudySetup RunConfig::setup(int threads) const {
  StudySetup s;
  s.spectrum = spectrum();
  s.field = diffusion();
  s.dim = field.dim;
  s.dt = noise.dt;
  s.sigma = noise.sigma;
  s.a = experiment.a;
  s.alpha = field.alpha;
  s.beta = field.beta;
  s.eta = field.eta;
  s.seed = noise.seed;
  s.threads = threads;
  return s;
}

std::string RunConfig::canonical() const {
  std::ostringstream o;
  o << "noise.modes=" << noise.modes << "\nnoise.decay=" << format_real(noise.decay)
    << "\nnoise.sigma=" << format_real(noise.sigma) << "\nnoise.dt=" << format_real(noise.dt)
    << "\nnoise.seed=" << noise.seed << "\nnoise.paths=" << noise.paths
    << "\nfield.delta=" << format_real(field.delta) << "\nfield.amp=" << format_real(field.amp)
    << "\nfield.kappa=" << format_real(field.kappa) << "\nfield.a_drv=" << format_real(field.a_drv)
    << "\nfield.M=" << field.dim << "\nfield.alpha=" << format_real(field.alpha)
    << "\nfield.eta=" << format_real(field.eta) << "\nfield.beta=" << format_real(field.beta)
    << "\nfield.reference_norm=" << field.reference_norm
    << "\nproblem.nonlinearity=" << problem.nonlinearity << "\nproblem.forcing=" << problem.forcing
    << "\nproblem.u0=" << problem.u0 << "\nproblem.blowup_threshold=" << format_real(problem.blowup_threshold)
    << "\nexperiment.horizon=" << format_real(experiment.horizon) << "\nexperiment.a=" << format_real(experiment.a)
    << "\nexperiment.horizons=" << list_text(experiment.horizons)
    << "\nexperiment.gammas=" << list_text(experiment.gammas)
    << "\nexperiment.stationarity_t=" << list_text(experiment.stationarity_t)
    << "\nexperiment.stationarity_s=" << list_text(experiment.stationarity_s)
    << "\nexperiment.temper_horizon=" << format_real(experiment.temper_horizon)
    << "\nexperiment.ladder_points=" << experiment.ladder_points << "\nexperiment.levels=" << experiment.levels
    << "\nexperiment.reference_level=" << experiment.reference_level
    << "\nexperiment.ensemble_size=" << experiment.ensemble_size
    << "\nexperiment.ball_radius=" << format_real(experiment.ball_radius)
    << "\nexperiment.scale=" << experiment.scale << "\n";
  return o.str();
}

std::string RunConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canonical())));
  return buf;
}

}  // namespace randattract::cli
