// catsim: command-line front end for the heralded cat-state simulator.
//
// Exit codes: 0 success, 2 invalid configuration, 3 numerical failure.

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "catsim/catsim.hpp"
#include "catsim/csv.hpp"

namespace {

using nlohmann::json;

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;
  double beta = 5.0;
  double tau_min = 0.0;
  double tau_max = 2.0;
  std::size_t steps = 400;
  std::optional<double> tau;
  double eps_tail = 1e-12;
  double range = 6.0;
  std::size_t grid = 201;
  std::vector<double> betas;
  std::string in_path;
  std::string input_path;
  std::string law = "tau";
  std::string out_path;
  unsigned workers = catsim::default_workers();
  std::uint64_t seed = 0x5eed;
  bool zero_timing = false;
  // feasibility, SI units
  catsim::feasibility::PlatformParams platform = catsim::feasibility::lithium_niobate_reference();
};

void apply_json_config(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config file must hold a JSON object");
  for (const auto& [key, val] : doc.items()) {
    try {
      if (key == "beta") cfg.beta = val.get<double>();
      else if (key == "tau_min") cfg.tau_min = val.get<double>();
      else if (key == "tau_max") cfg.tau_max = val.get<double>();
      else if (key == "steps") cfg.steps = val.get<std::size_t>();
      else if (key == "tau") cfg.tau = val.get<double>();
      else if (key == "eps_tail") cfg.eps_tail = val.get<double>();
      else if (key == "range") cfg.range = val.get<double>();
      else if (key == "grid") cfg.grid = val.get<std::size_t>();
      else if (key == "betas") cfg.betas = val.get<std::vector<double>>();
      else if (key == "in") cfg.in_path = val.get<std::string>();
      else if (key == "input") cfg.input_path = val.get<std::string>();
      else if (key == "law") cfg.law = val.get<std::string>();
      else if (key == "out") cfg.out_path = val.get<std::string>();
      else if (key == "workers") cfg.workers = val.get<unsigned>();
      else if (key == "seed") cfg.seed = val.get<std::uint64_t>();
      else if (key == "chi2") cfg.platform.chi2 = val.get<double>();
      else if (key == "ns") cfg.platform.n_s = val.get<double>();
      else if (key == "np") cfg.platform.n_p = val.get<double>();
      else if (key == "lambda_s") cfg.platform.wavelength_s = val.get<double>();
      else if (key == "volume") cfg.platform.mode_volume = val.get<double>();
      else if (key == "q") cfg.platform.q = val.get<double>();
      else throw ConfigError("unknown config key '" + key + "'");
    } catch (const json::exception& e) {
      throw ConfigError("config key '" + key + "': " + e.what());
    }
  }
}

void validate(const RunConfig& cfg) {
  if (cfg.workers == 0) throw ConfigError("--workers must be >= 1");
  if (!(cfg.eps_tail > 0.0) || cfg.eps_tail >= 1.0) throw ConfigError("--eps-tail must be in (0, 1)");
  if (!std::isfinite(cfg.beta) || cfg.beta < 0.0) throw ConfigError("--beta must be finite and >= 0");
  const auto& c = cfg.command;
  if (c == "evolve" || c == "pcurve") {
    if (cfg.steps == 0) throw ConfigError("--steps must be >= 1");
    if (!std::isfinite(cfg.tau_max) || !std::isfinite(cfg.tau_min) || cfg.tau_max < cfg.tau_min)
      throw ConfigError("--tau-max must be finite and >= --tau-min");
  }
  if (c == "distribution" && !cfg.tau && !(cfg.tau_max > 0.0))
    throw ConfigError("--tau-max must be positive when --tau is not given");
  if (c == "conditional" && !(cfg.beta > 0.0)) throw ConfigError("conditional needs --beta > 0");
  if (c == "wigner") {
    if (cfg.in_path.empty()) throw ConfigError("wigner needs --in state.json");
    if (!(cfg.range > 0.0) || cfg.grid < 2) throw ConfigError("wigner needs --range > 0 and --grid >= 2");
  }
  if (c == "sweep")
    for (double b : cfg.betas)
      if (!(b > 0.0) || !std::isfinite(b)) throw ConfigError("--betas entries must be positive");
  if (c == "fit") {
    if (cfg.input_path.empty()) throw ConfigError("fit needs --input sweep.csv");
    if (cfg.law != "tau" && cfg.law != "p0" && cfg.law != "xi") throw ConfigError("--law must be tau, p0 or xi");
  }
  if (c == "feasibility") {
    try {
      cfg.platform.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
}

std::vector<double> tau_grid(double lo, double hi, std::size_t steps) {
  std::vector<double> out(steps);
  for (std::size_t i = 0; i < steps; ++i)
    out[i] = steps == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(steps - 1);
  return out;
}

// Output goes to --out when given, else stdout.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw ConfigError("cannot open output file " + path);
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

void warn_fit_range(double beta) {
  if (!catsim::in_fit_validity_range(beta))
    std::cerr << "catsim: note: beta=" << beta << " lies outside the fit-law validity range [2, 100]\n";
}

int cmd_evolve(const RunConfig& cfg) {
  const auto grid = tau_grid(cfg.tau_min, cfg.tau_max, cfg.steps);
  const auto records = catsim::energy_series(cfg.beta, grid, cfg.eps_tail, cfg.workers);
  Output out(cfg.out_path);
  out.stream() << "tau,mean_ns,two_mean_np,sum_energy\n";
  for (const auto& r : records) catsim::csv::write_row(out.stream(), {r.tau, r.mean_ns, 2.0 * r.mean_np, r.sum_energy});
  return 0;
}

// tau maximizing <n_s> on (0, tau_max]: grid then Brent.
double tau_of_max_signal(const RunConfig& cfg) {
  catsim::SpectrumCache cache;
  const catsim::BlockPropagator prop(catsim::initial_block_state(cfg.beta, cfg.eps_tail), cache, cfg.workers);
  auto ns = [&](double t) { return catsim::mean_occupations(prop.state_at(t)).mean_ns; };
  const auto grid = tau_grid(0.0, cfg.tau_max, std::max<std::size_t>(cfg.steps, 3));
  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (ns(grid[i]) > ns(grid[best])) best = i;
  if (best == 0 || best + 1 == grid.size()) return grid[best];
  return catsim::numkit::minimize_scalar([&](double t) { return -ns(t); }, grid[best - 1], grid[best + 1]).x;
}

int cmd_distribution(const RunConfig& cfg) {
  const double tau = cfg.tau ? *cfg.tau : tau_of_max_signal(cfg);
  catsim::SpectrumCache cache;
  const auto state = catsim::evolve(catsim::initial_block_state(cfg.beta, cfg.eps_tail), tau, cache);
  const auto dist = catsim::signal_distribution(state);
  std::cerr << "catsim: distribution at tau=" << catsim::csv::format(tau) << '\n';
  Output out(cfg.out_path);
  out.stream() << "n,probability\n";
  for (std::size_t n = 0; n < dist.size(); ++n)
    out.stream() << n << ',' << catsim::csv::format(dist[n]) << '\n';
  return 0;
}

int cmd_pcurve(const RunConfig& cfg) {
  const auto grid = tau_grid(cfg.tau_min, cfg.tau_max, cfg.steps);
  const auto curve = catsim::p_zero_curve(cfg.beta, grid, cfg.eps_tail, cfg.workers);
  Output out(cfg.out_path);
  out.stream() << "tau,p0\n";
  for (const auto& [t, p] : curve) catsim::csv::write_row(out.stream(), {t, p});
  return 0;
}

int cmd_conditional(const RunConfig& cfg) {
  warn_fit_range(cfg.beta);
  catsim::TauSearchOptions opt;
  opt.eps_tail = cfg.eps_tail;
  opt.workers = cfg.workers;
  const auto r = catsim::find_tau_opt(cfg.beta, opt);
  const json doc = {{"beta", r.beta}, {"tau_opt", r.tau_opt}, {"p0", r.p0}, {"state", catsim::to_json(r.psi_raw)}};
  Output out(cfg.out_path);
  out.stream() << doc.dump(2) << '\n';
  return 0;
}

catsim::FockVector read_state(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open state file " + path);
  json doc;
  try {
    in >> doc;
    return catsim::fock_vector_from_json(doc.contains("state") ? doc.at("state") : doc);
  } catch (const json::exception& e) {
    throw ConfigError("state file " + path + ": " + e.what());
  }
}

int cmd_wigner(const RunConfig& cfg) {
  const auto psi = read_state(cfg.in_path);
  const auto g = catsim::wigner(psi, catsim::WignerGridSpec::square(cfg.range, cfg.grid), cfg.workers);
  catsim::check_wigner_normalization(g);
  Output out(cfg.out_path);
  out.stream() << "x,p,w\n";
  for (std::size_t ix = 0; ix < g.xs.size(); ++ix)
    for (std::size_t ip = 0; ip < g.ps.size(); ++ip)
      catsim::csv::write_row(out.stream(), {g.xs[ix], g.ps[ip], g.at(ix, ip)});
  return 0;
}

int cmd_sweep(const RunConfig& cfg) {
  const auto betas = cfg.betas.empty() ? catsim::default_sweep_grid() : cfg.betas;
  for (double b : betas) warn_fit_range(b);
  catsim::SweepOptions opt;
  opt.eps_tail = cfg.eps_tail;
  opt.workers = cfg.workers;
  auto records = catsim::sweep(betas, opt);
  int status = 0;
  for (auto& r : records) {
    if (cfg.zero_timing) r.seconds = 0.0;
    if (!r.ok()) {
      std::cerr << "catsim: beta=" << r.beta << " failed: " << r.error << '\n';
      status = kExitNumeric;
    }
  }
  Output out(cfg.out_path);
  catsim::write_sweep_csv(out.stream(), records);
  return status;
}

int cmd_fit(const RunConfig& cfg) {
  std::ifstream in(cfg.input_path);
  if (!in) throw ConfigError("cannot open " + cfg.input_path);
  std::vector<catsim::SweepRecord> records;
  try {
    records = catsim::read_sweep_csv(in);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const auto law = catsim::numkit::fit_law_from_string(cfg.law);
  std::vector<double> x, y;
  double catsim::SweepRecord::*field = law == catsim::numkit::FitLaw::TauOpt ? &catsim::SweepRecord::tau_opt
                                       : law == catsim::numkit::FitLaw::PZero ? &catsim::SweepRecord::p0
                                                                              : &catsim::SweepRecord::xi_star;
  for (const auto& r : records)
    if (r.ok() && std::isfinite(r.*field)) {
      x.push_back(r.beta);
      y.push_back(r.*field);
    }
  const catsim::FitLawConstants paper;
  std::vector<double> initial;
  std::vector<std::string> names;
  switch (law) {
    case catsim::numkit::FitLaw::TauOpt: initial = {paper.b_t, paper.c_t, paper.d_t}; names = {"b_t", "c_t", "d_t"}; break;
    case catsim::numkit::FitLaw::PZero: initial = {paper.b_p, paper.c_p, paper.d_p}; names = {"b_p", "c_p", "d_p"}; break;
    case catsim::numkit::FitLaw::XiPrep:
      initial = {paper.a_r, paper.b_r, paper.c_r, paper.d_r};
      names = {"a_r", "b_r", "c_r", "d_r"};
      break;
  }
  catsim::numkit::NlsOptions nls;
  nls.seed = cfg.seed;
  catsim::numkit::FitModel model;
  try {
    model = catsim::numkit::nls_fit(law, x, y, initial, nls);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  json params = json::object(), reference = json::object(), residuals = json::array();
  for (std::size_t i = 0; i < names.size(); ++i) {
    params[names[i]] = model.params[i];
    reference[names[i]] = initial[i];
  }
  for (std::size_t i = 0; i < x.size(); ++i)
    residuals.push_back({{"beta", x[i]}, {"measured", y[i]}, {"model", model(x[i])}, {"residual", model(x[i]) - y[i]}});
  const json doc = {{"law", cfg.law},
                    {"params", params},
                    {"published", reference},
                    {"residual_norm", model.residual_norm},
                    {"residual_rms", model.residual_rms},
                    {"iterations", model.iterations},
                    {"used_fallback", model.used_fallback},
                    {"points", residuals}};
  Output out(cfg.out_path);
  out.stream() << doc.dump(2) << '\n';
  return 0;
}

int cmd_feasibility(const RunConfig& cfg) {
  namespace fz = catsim::feasibility;
  auto p = cfg.platform;
  p.beta = cfg.beta;
  const double gamma = fz::coupling_rate(p);
  const double t_star = fz::relaxation_time(p);
  const auto verdict = fz::preparation_time(p.beta, gamma, t_star);
  const json doc = {{"gamma", gamma},
                    {"t_star", t_star},
                    {"t_opt", verdict.t_opt},
                    {"feasible", verdict.feasible},
                    {"margin", verdict.margin},
                    {"inputs",
                     {{"chi2_m_per_V", p.chi2},
                      {"n_s", p.n_s},
                      {"n_p", p.n_p},
                      {"lambda_s_m", p.wavelength_s},
                      {"volume_m3", p.mode_volume},
                      {"q", p.q},
                      {"beta", p.beta}}}};
  Output out(cfg.out_path);
  out.stream() << doc.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  std::string config_path;

  CLI::App app{"catsim: heralded Schroedinger-cat preparation by degenerate parametric down-conversion"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--config", config_path, "JSON RunConfig document; its keys override flags");
  app.add_option("--workers", cfg.workers, "Worker threads (default: CATSIM_WORKERS or hardware concurrency)");
  app.add_option("--eps-tail", cfg.eps_tail, "Poisson tail bound for the Fock cutoff")->capture_default_str();
  app.add_option("--out", cfg.out_path, "Output file (default: stdout)");
  app.add_option("--seed", cfg.seed, "Seed for fit restarts")->capture_default_str();

  auto* evolve = app.add_subcommand("evolve", "Mean occupations vs tau: tau,mean_ns,two_mean_np,sum_energy");
  evolve->add_option("--beta", cfg.beta, "Pump coherent amplitude")->capture_default_str();
  evolve->add_option("--tau-min", cfg.tau_min)->capture_default_str();
  evolve->add_option("--tau-max", cfg.tau_max)->capture_default_str();
  evolve->add_option("--steps", cfg.steps, "Number of tau samples (inclusive grid)")->capture_default_str();

  auto* dist = app.add_subcommand("distribution", "Signal photon-number distribution: n,probability");
  dist->add_option("--beta", cfg.beta)->capture_default_str();
  dist->add_option("--tau", cfg.tau, "Evaluation time (default: tau maximizing <n_s> on (0, tau-max])");
  dist->add_option("--tau-max", cfg.tau_max)->capture_default_str();
  dist->add_option("--steps", cfg.steps, "Grid size for the <n_s> maximum search")->capture_default_str();

  auto* pcurve = app.add_subcommand("pcurve", "Herald probability vs tau: tau,p0");
  pcurve->add_option("--beta", cfg.beta)->capture_default_str();
  pcurve->add_option("--tau-min", cfg.tau_min)->capture_default_str();
  pcurve->add_option("--tau-max", cfg.tau_max)->capture_default_str();
  pcurve->add_option("--steps", cfg.steps)->capture_default_str();

  auto* cond = app.add_subcommand("conditional", "Heralded state at tau_opt as JSON");
  cond->add_option("--beta", cfg.beta)->capture_default_str();

  auto* wig = app.add_subcommand("wigner", "Wigner function of a state JSON: x,p,w");
  wig->add_option("--in", cfg.in_path, "State JSON (FockVector or conditional output)");
  wig->add_option("--range", cfg.range, "Half-width of the square phase-space window")->capture_default_str();
  wig->add_option("--grid", cfg.grid, "Points per axis")->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "Beta sweep: beta,tau_opt,p0,xi_star,alpha_star,fidelity,alpha_prep_formula,seconds");
  sweep->add_option("--betas", cfg.betas, "Comma-separated beta values (default 2,3,4,5,6,8,10,12,15,20)")->delimiter(',');
  sweep->add_flag("--zero-timing", cfg.zero_timing, "Write 0 in the seconds column (byte-reproducible output)");

  auto* fit = app.add_subcommand("fit", "Fit an empirical law to a sweep CSV");
  fit->add_option("--input", cfg.input_path, "Sweep CSV");
  fit->add_option("--law", cfg.law, "tau | p0 | xi")->capture_default_str();

  auto* feas = app.add_subcommand("feasibility", "Physical-units estimate (SI): gamma, t_star, t_opt");
  feas->add_option("--chi2", cfg.platform.chi2, "Second-order nonlinearity [m/V]")->capture_default_str();
  feas->add_option("--ns", cfg.platform.n_s, "Signal refractive index")->capture_default_str();
  feas->add_option("--np", cfg.platform.n_p, "Pump refractive index")->capture_default_str();
  feas->add_option("--lambda-s", cfg.platform.wavelength_s, "Signal wavelength [m]")->capture_default_str();
  feas->add_option("--volume", cfg.platform.mode_volume, "Mode volume [m^3]")->capture_default_str();
  feas->add_option("--q", cfg.platform.q, "Quality factor")->capture_default_str();
  feas->add_option("--beta", cfg.beta, "Pump amplitude used for t_opt")->default_str("10");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }
  if (app.get_subcommands().empty()) return kExitConfig;
  cfg.command = app.get_subcommands().front()->get_name();
  if (cfg.command == "feasibility" && feas->count("--beta") == 0) cfg.beta = 10.0;

  try {
    if (!config_path.empty()) apply_json_config(cfg, config_path);
    validate(cfg);
    if (cfg.command == "evolve") return cmd_evolve(cfg);
    if (cfg.command == "distribution") return cmd_distribution(cfg);
    if (cfg.command == "pcurve") return cmd_pcurve(cfg);
    if (cfg.command == "conditional") return cmd_conditional(cfg);
    if (cfg.command == "wigner") return cmd_wigner(cfg);
    if (cfg.command == "sweep") return cmd_sweep(cfg);
    if (cfg.command == "fit") return cmd_fit(cfg);
    if (cfg.command == "feasibility") return cmd_feasibility(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "catsim: configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "catsim: invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::domain_error& e) {
    std::cerr << "catsim: invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "catsim: numerical failure: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitConfig;
}
