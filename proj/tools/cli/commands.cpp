#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "bifl/convexity.hpp"
#include "bifl/field_dump.hpp"
#include "bifl/reference.hpp"
#include "bifl/solvers.hpp"
#include "config.hpp"
#include "identities.hpp"

namespace bifl::cli {

namespace {

using nlohmann::json;

class Log {
 public:
  explicit Log(std::ostream& err) : err_(err) {}

  void open(const std::string& path) {
    if (path.empty()) return;
    file_.open(path, std::ios::app);
    if (!file_) throw ConfigError("cannot open log file " + path);
  }

  void line(const std::string& text) {
    err_ << "[bifl] " << text << '\n';
    if (file_) file_ << text << '\n';
  }

 private:
  std::ostream& err_;
  std::ofstream file_;
};

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

Vec3 parse_vec3(const std::string& text, const char* flag) {
  std::stringstream ss(text);
  double v[3];
  char comma = 0;
  if (!(ss >> v[0] >> comma) || comma != ',' || !(ss >> v[1] >> comma) || comma != ',' || !(ss >> v[2]) ||
      !(ss >> std::ws).eof())
    throw ConfigError(std::string(flag) + " expects three comma-separated numbers");
  return {v[0], v[1], v[2]};
}

json report_json(const SolveReport& r) {
  const ConstraintResidual& c = r.constraint_residual;
  return {{"converged", r.converged},
          {"status", r.status},
          {"iterations", r.iterations},
          {"krylov_iterations", r.krylov_iterations},
          {"residual_history", r.residual_history},
          {"final_energy", r.final_energy},
          {"lagrangian", r.lagrangian},
          {"residual_phi", r.residual_phi},
          {"residual_A", r.residual_A},
          {"min_radicand", r.min_radicand},
          {"constraint_residual",
           {{"gauss", c.gauss},
            {"gauss_relative", c.gauss_relative},
            {"div_B", c.div_B},
            {"ampere", c.ampere},
            {"ampere_relative", c.ampere_relative}}},
          {"wall_time", r.wall_time}};
}

void log_report(Log& log, const SolveReport& r) {
  log.line("status: " + r.status + " after " + std::to_string(r.iterations) + " Newton iterations (" +
           std::to_string(r.krylov_iterations) + " Krylov)");
  log.line("final energy: " + fmt(r.final_energy) + ", Lagrangian: " + fmt(r.lagrangian));
  log.line("gradient residuals (relative): phi " + fmt(r.residual_phi) + ", A " + fmt(r.residual_A));
  const ConstraintResidual& c = r.constraint_residual;
  log.line("constraints: |div D - 4 pi rho| " + fmt(c.gauss) + " (relative " + fmt(c.gauss_relative) +
           "), |div B| " + fmt(c.div_B) + ", |curl H - 4 pi j/c| " + fmt(c.ampere) + " (relative " +
           fmt(c.ampere_relative) + ")");
  log.line("wall time: " + fmt(r.wall_time) + " s");
}

void write_summary(const std::string& path, const json& summary) {
  if (path.empty()) return;
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open summary file " + path);
  os << summary.dump(2) << '\n';
}

void write_state_outputs(const RunConfig& cfg, const FieldState& state, Log& log) {
  if (!cfg.output.dump.empty()) {
    write_field_dump(cfg.output.dump, state);
    log.line("wrote field dump " + cfg.output.dump);
  }
  if (!cfg.output.csv.empty()) {
    std::ofstream os(cfg.output.csv);
    if (!os) throw ConfigError("cannot open CSV file " + cfg.output.csv);
    write_radial_csv(os, radial_profile(state, cfg.model));
    log.line("wrote radial profile " + cfg.output.csv);
  }
}

struct Context {
  std::ostream& out;
  Log& log;
};

RunConfig start_run(const std::string& path, const std::string& command, Log& log) {
  RunConfig cfg = load_config(path);
  log.open(cfg.output.log);
  log.line("command: " + command);
  log.line("config digest: " + config_digest(cfg));
  return cfg;
}

int finish_solve(const std::string& command, const RunConfig& cfg, const SolveResult& r, Context& ctx) {
  log_report(ctx.log, r.report);
  const double scaling = scaling_probe(r.state, cfg.model);
  const auto [bh, ed] = theorem23_vanishing_check(r.state, cfg.model);
  ctx.log.line("scaling probe: " + fmt(scaling) + ", integral B.H: " + fmt(bh) + ", integral E.D: " + fmt(ed));
  write_state_outputs(cfg, r.state, ctx.log);
  json summary = {{"command", command},
                  {"config_digest", config_digest(cfg)},
                  {"config", cfg.canonical},
                  {"report", report_json(r.report)},
                  {"scaling_probe", scaling},
                  {"integral_BH", bh},
                  {"integral_ED", ed}};
  write_summary(cfg.output.summary, summary);
  ctx.out << summary["report"].dump() << '\n';
  if (!r.report.converged) return kExitNotConverged;
  // Exact-by-construction invariants of a converged state.
  if (r.report.constraint_residual.div_B > 1e-8 * std::max(1.0, r.state.B.max_abs() / cfg.grid.h)) {
    ctx.log.line("invariant failure: div B does not vanish");
    return kExitInvariantFailure;
  }
  return kExitOk;
}

int cmd_solve(const std::string& command, const std::string& path, Context& ctx) {
  const RunConfig cfg = start_run(path, command, ctx.log);
  SolveResult r;
  if (command == "solve-electro") {
    r = solve_electrostatic(cfg.sources, cfg.grid, cfg.model, cfg.solve);
  } else if (command == "solve-magneto") {
    r = solve_magnetostatic(cfg.sources, cfg.grid, cfg.model, cfg.solve);
  } else {
    r = solve_mb_stationary(cfg.sources, cfg.grid, cfg.model, cfg.solve);
  }
  return finish_solve(command, cfg, r, ctx);
}

int cmd_probe(const std::string& path, int n_starts_flag, Context& ctx) {
  const RunConfig cfg = start_run(path, "probe-uniqueness", ctx.log);
  const int n_starts = n_starts_flag > 0 ? n_starts_flag : cfg.probe.n_starts;
  const ProbeReport rep = probe_uniqueness({cfg.sources, cfg.grid, cfg.model}, n_starts, cfg.solve);
  json starts = json::array();
  for (const ProbeStart& s : rep.starts) {
    ctx.log.line("start " + std::to_string(s.index) + ": " + s.status + ", " + std::to_string(s.iterations) +
                 " iterations, |D| " + fmt(s.D_max) + ", |B| " + fmt(s.B_max));
    starts.push_back({{"index", s.index},
                      {"converged", s.converged},
                      {"status", s.status},
                      {"iterations", s.iterations},
                      {"start_E_max", s.start_E_max},
                      {"start_B_max", s.start_B_max},
                      {"D_max", s.D_max},
                      {"B_max", s.B_max},
                      {"scaling_probe", s.scaling},
                      {"wall_time", s.wall_time}});
  }
  ctx.log.line("spread D " + fmt(rep.spread_D) + ", spread B " + fmt(rep.spread_B) + ", threshold " +
               fmt(rep.threshold) + (rep.experimental ? " (experimental: not asserted)" : ""));
  const json summary = {{"command", "probe-uniqueness"},
                        {"config_digest", config_digest(cfg)},
                        {"config", cfg.canonical},
                        {"starts", starts},
                        {"spread_D", rep.spread_D},
                        {"spread_B", rep.spread_B},
                        {"field_scale", rep.field_scale},
                        {"threshold", rep.threshold},
                        {"experimental", rep.experimental},
                        {"all_converged", rep.all_converged},
                        {"pass", rep.pass}};
  write_summary(cfg.output.summary, summary);
  ctx.out << (rep.experimental ? "EXPERIMENTAL" : (rep.pass ? "PASS" : "FAIL")) << " spread_D=" << rep.spread_D
          << " spread_B=" << rep.spread_B << " threshold=" << rep.threshold << '\n';
  if (!rep.all_converged) return kExitNotConverged;
  if (!rep.experimental && !rep.pass) return kExitInvariantFailure;
  return kExitOk;
}

int cmd_hessian(const std::string& b_text, const std::string& d_text, double b, const std::string& model,
                Context& ctx) {
  ModelParams m;
  m.b = b;
  try {
    m.model = parse_model(model);
    m.validate();
  } catch (const PreconditionError& e) {
    throw ConfigError(e.what());
  }
  const FieldPoint p{parse_vec3(b_text, "--B"), parse_vec3(d_text, "--D")};
  const SpectrumReport rep = eigen_signature(energy_hessian(p, m));
  ctx.out << "eigenvalues:";
  for (double v : rep.eigenvalues) ctx.out << ' ' << std::setprecision(10) << v;
  ctx.out << '\n' << "signature: " << signature_string(rep) << '\n';
  return kExitOk;
}

int cmd_identities(int samples, std::uint64_t seed, Context& ctx) {
  if (samples < 1) throw ConfigError("--samples must be positive");
  bool ok = true;
  for (const IdentityCheck& c : run_identity_suite(samples, seed)) {
    ctx.out << std::left << std::setw(32) << c.name << " max_dev=" << std::scientific << std::setprecision(3)
            << c.max_deviation << " threshold=" << c.threshold << (c.pass ? " ok" : " FAIL") << '\n'
            << std::defaultfloat;
    ok = ok && c.pass;
  }
  return ok ? kExitOk : kExitInvariantFailure;
}

int cmd_reference(double q, double b, double rmax, int points, const std::string& csv, Context& ctx) {
  if (!(rmax > 0.0)) throw ConfigError("--rmax must be positive");
  if (points < 2) throw ConfigError("--points must be at least 2");
  const PointChargeSolution sol{q, b};
  try {
    sol.validate();
  } catch (const PreconditionError& e) {
    throw ConfigError(e.what());
  }
  std::ofstream file;
  if (!csv.empty()) {
    file.open(csv);
    if (!file) throw ConfigError("cannot open CSV file " + csv);
  }
  std::ostream& os = csv.empty() ? ctx.out : file;
  os << "r,D,E,phi\n" << std::setprecision(15);
  for (int i = 1; i <= points; ++i) {
    const double r = rmax * i / points;
    os << r << ',' << born_D(r, sol) << ',' << born_E(r, sol) << ',' << born_potential(r, sol) << '\n';
  }
  ctx.log.line("field energy: " + fmt(born_field_energy(sol)) + ", phi(0): " + fmt(born_potential(0.0, sol)));
  return kExitOk;
}

int cmd_perturb(const std::string& path, int order_flag, Context& ctx) {
  const RunConfig cfg = start_run(path, "perturb", ctx.log);
  const int order = order_flag >= 0 ? order_flag : cfg.perturb.order;
  const PerturbativeResult r = perturbative_series(cfg.sources, cfg.grid, cfg.model, order);
  for (std::size_t k = 0; k < r.correction_norms.size(); ++k)
    ctx.log.line("order " + std::to_string(k) + " norm: " + fmt(r.correction_norms[k]));
  write_state_outputs(cfg, r.state, ctx.log);
  const json summary = {{"command", "perturb"},
                        {"config_digest", config_digest(cfg)},
                        {"config", cfg.canonical},
                        {"order", order},
                        {"max_linear_field", r.max_linear_field},
                        {"correction_norms", r.correction_norms}};
  write_summary(cfg.output.summary, summary);
  ctx.out << json(r.correction_norms).dump() << '\n';
  return kExitOk;
}

int cmd_export(const std::string& dump, const std::string& csv, double b, const std::string& model, Context& ctx) {
  ModelParams m;
  m.b = b;
  try {
    m.model = parse_model(model);
    m.validate();
  } catch (const PreconditionError& e) {
    throw ConfigError(e.what());
  }
  FieldState state;
  try {
    state = read_field_dump(dump);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  std::ofstream file;
  if (!csv.empty()) {
    file.open(csv);
    if (!file) throw ConfigError("cannot open CSV file " + csv);
  }
  write_radial_csv(csv.empty() ? ctx.out : file, radial_profile(state, m));
  ctx.log.line("exported " + dump + " (n = " + std::to_string(state.grid.n) + ")");
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stationary Born-Infeld field solver"};
  app.require_subcommand(1);
  std::string config;
  auto add_config = [&config](CLI::App* sub) { sub->add_option("-c,--config", config, "JSON run configuration")->required(); };

  auto* electro = app.add_subcommand("solve-electro", "minimize over phi for a charge distribution");
  add_config(electro);
  auto* magneto = app.add_subcommand("solve-magneto", "maximize over A for a stationary current");
  add_config(magneto);
  auto* mb = app.add_subcommand("solve-mb", "saddle solve of the MB model with charge and current");
  add_config(mb);

  int n_starts = 0;
  auto* probe = app.add_subcommand("probe-uniqueness", "multi-start agreement of converged fields");
  add_config(probe);
  probe->add_option("--starts", n_starts, "number of random starts (overrides probe.n_starts)");

  std::string B_text;
  std::string D_text;
  double b = 1.0;
  std::string model = "MBI";
  auto* hessian = app.add_subcommand("hessian", "eigenvalues of the energy-density Hessian at one point");
  hessian->add_option("--B", B_text, "B as x,y,z")->required();
  hessian->add_option("--D", D_text, "D as x,y,z")->required();
  hessian->add_option("--b", b, "Born field strength");
  hessian->add_option("--model", model, "MBI or MB");

  int samples = 1000;
  std::uint64_t seed = 7;
  auto* identities = app.add_subcommand("identities", "randomized pointwise identity suite");
  identities->add_option("--samples", samples, "samples per check");
  identities->add_option("--seed", seed, "generator seed");

  double q = 1.0;
  double rmax = 10.0;
  int points = 100;
  std::string csv;
  auto* reference = app.add_subcommand("reference", "radial profiles of the point-charge solution as CSV");
  reference->add_option("--q", q, "charge");
  reference->add_option("--b", b, "Born field strength");
  reference->add_option("--rmax", rmax, "largest radius");
  reference->add_option("--points", points, "number of radii");
  reference->add_option("--csv", csv, "output file (default stdout)");

  int order = -1;
  auto* perturb = app.add_subcommand("perturb", "perturbative series in 1/b^2");
  add_config(perturb);
  perturb->add_option("--order", order, "series order (overrides perturb.order)");

  std::string dump;
  auto* exporter = app.add_subcommand("export", "radial CSV profile of a field dump");
  exporter->add_option("--dump", dump, "field dump to read")->required();
  exporter->add_option("--csv", csv, "output file (default stdout)");
  exporter->add_option("--b", b, "Born field strength");
  exporter->add_option("--model", model, "MBI or MB");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  }

  Log log(err);
  Context ctx{out, log};
  try {
    if (electro->parsed()) return cmd_solve("solve-electro", config, ctx);
    if (magneto->parsed()) return cmd_solve("solve-magneto", config, ctx);
    if (mb->parsed()) return cmd_solve("solve-mb", config, ctx);
    if (probe->parsed()) return cmd_probe(config, n_starts, ctx);
    if (hessian->parsed()) return cmd_hessian(B_text, D_text, b, model, ctx);
    if (identities->parsed()) return cmd_identities(samples, seed, ctx);
    if (reference->parsed()) return cmd_reference(q, b, rmax, points, csv, ctx);
    if (perturb->parsed()) return cmd_perturb(config, order, ctx);
    if (exporter->parsed()) return cmd_export(dump, csv, b, model, ctx);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const PreconditionError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const ModelError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const ConvergenceError& e) {
    err << "not converged: " << e.what() << '\n';
    return kExitNotConverged;
  } catch (const InfeasiblePointError& e) {
    err << "not converged: " << e.what() << '\n';
    return kExitNotConverged;
  } catch (const Error& e) {
    err << "invariant failure: " << e.what() << '\n';
    return kExitInvariantFailure;
  }
  err << "error: no command given\n";
  return kExitConfigError;
}

}  // namespace bifl::cli
