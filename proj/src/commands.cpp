#include "dirac_graph/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "dirac_graph/errors.hpp"

namespace dgraph {

namespace {

std::string file(const RunConfig& c, const std::string& name) {
  return (std::filesystem::path(c.out) / name).string();
}

// (omega) and (V1) gate every command before any operator is built
void check_parameters(const ProblemParameters& p) {
  if (!(std::abs(p.omega) < p.a)) {
    std::ostringstream os;
    os << "hypothesis (omega) violated: |omega| = " << std::abs(p.omega) << " must be below a = " << p.a;
    throw HypothesisError(os.str());
  }
  if (p.V.inf() < 0.0) {
    std::ostringstream os;
    os << "hypothesis (V1) violated: inf V = " << p.V.inf() << " < 0";
    throw HypothesisError(os.str());
  }
}

Json hypothesis_json(const HypothesisReport& rep) {
  Json out = Json::array();
  for (const auto& r : rep.results) {
    Json j = {{"name", r.name}, {"pass", r.pass}, {"constant", r.constant}, {"detail", r.detail}};
    if (!r.pass && r.witness_r > 0.0) j["witness_r"] = r.witness_r;
    out.push_back(j);
  }
  return out;
}

int theorem_for(const Nonlinearity& nl) { return nl.kind() == Nonlinearity::Kind::asym_linear ? 1 : 2; }

SpinorField gaussian_field(std::shared_ptr<const GraphGrid> grid, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  SpinorField f(grid);
  for (auto& x : f.values()) x = Complex(nd(rng), nd(rng));
  return f;
}

struct SmallOperator {
  PeriodicClosure closure;
  std::shared_ptr<DiracOperator> op;
  std::shared_ptr<SpectralDecomposition> dec;
};

SmallOperator small_operator(const RunConfig& c) {
  SmallOperator s{close_periodically(*c.graph, c.small_closure), nullptr, nullptr};
  auto grid = GraphGrid::uniform(s.closure.graph(), c.small_resolution);
  s.op = std::make_shared<DiracOperator>(assemble(s.closure, grid, c.problem));
  s.dec = std::make_shared<SpectralDecomposition>(decompose(*s.op));
  return s;
}

Json gap_suite(const RunConfig& c, BandStructure* keep) {
  const auto thetas = theta_grid(c.graph->dim(), c.theta_samples);
  BandStructure coarse = band_sweep(*c.graph, c.resolution, c.problem, thetas, c.band_count);
  const BandStructure fine = band_sweep(*c.graph, 2.0 * c.resolution, c.problem, thetas, c.band_count);
  const double tol = refinement_tolerance(coarse, fine);
  const GapReport rep = verify_gap(coarse, c.problem, tol);
  Json j = to_json(rep);
  j["min_abs_lambda_refined"] = fine.min_abs();
  j["theta_samples"] = c.theta_samples;
  j["pass"] = rep.lemma31_pass && rep.lemma33_pass;
  if (keep) *keep = std::move(coarse);
  return j;
}

Json cutoff_suite(const RunConfig& c) {
  Json samples = Json::array();
  std::vector<CutoffSample> s;
  for (int N : c.cutoff_N) {
    s.push_back(cutoff_test_function(N, c.problem, c.small_resolution));
    samples.push_back({{"N", N}, {"derivative_sq", s.back().derivative_sq}, {"norm_Av", s.back().norm_Av}});
  }
  bool pass = true;
  Json ratios = Json::array();
  for (size_t k = 1; k < s.size(); ++k) {
    const double r = s[k - 1].derivative_sq / s[k].derivative_sq *
                     (2.0 * c.cutoff_N[k - 1] / static_cast<double>(c.cutoff_N[k]));
    ratios.push_back(r);
    pass = pass && std::abs(r - 2.0) <= 0.4;
  }
  // slope of log |v_N'|^2 against log(1/N)
  double sxy = 0.0, sxx = 0.0, mx = 0.0, my = 0.0;
  for (size_t k = 0; k < s.size(); ++k) {
    mx += std::log(1.0 / c.cutoff_N[k]) / s.size();
    my += std::log(s[k].derivative_sq) / s.size();
  }
  for (size_t k = 0; k < s.size(); ++k) {
    const double x = std::log(1.0 / c.cutoff_N[k]) - mx;
    sxy += x * (std::log(s[k].derivative_sq) - my);
    sxx += x * x;
  }
  const double bound = c.problem.a + c.problem.V.sup() + 0.05;
  const bool av = !s.empty() && s.back().norm_Av <= bound;
  return {{"samples", samples},
          {"doubling_ratios", ratios},
          {"slope", sxx > 0.0 ? sxy / sxx : 0.0},
          {"norm_Av_bound", bound},
          {"norm_Av_pass", av},
          {"pass", pass && av}};
}

Json interpolation_suite(const RunConfig& c) {
  const SmallOperator s = small_operator(c);
  std::mt19937_64 rng(c.seed);
  Json ratios = Json::array();
  bool pass = true;
  double c_theta = 0.0, worst_route = 0.0;
  int violations = 0;
  for (int k = 0; k < c.interpolation_fields; ++k) {
    const SpinorField f = gaussian_field(s.op->grid_ptr(), rng);
    const InterpolationReport r =
        interpolation_identity_check(*s.op, *s.dec, 0.5, f, c.interpolation_t_points, c.seed + k);
    ratios.push_back(r.ratio);
    c_theta = r.c_theta;
    worst_route = std::max(worst_route, r.max_route_disagreement);
    violations += r.minimality_violations;
    pass = pass && std::abs(r.ratio - 1.0) <= 1e-3;
  }
  const double c_err = std::abs(c_theta - std::numbers::pi);
  pass = pass && c_err < 1e-6 && violations == 0;
  return {{"theta", 0.5},        {"dimension", s.op->size()},   {"ratios", ratios},
          {"c_half", c_theta},   {"c_half_minus_pi", c_err},    {"max_route_disagreement", worst_route},
          {"minimality_violations", violations}, {"pass", pass}};
}

Json norms_suite(const RunConfig& c) {
  const SmallOperator s = small_operator(c);
  const ProblemParameters& p = c.problem;
  const double gamma0 = p.a + std::abs(p.omega) + p.V.sup();
  const NormInequalityReport r =
      check_norm_inequalities(*s.dec, p.a, p.omega, gamma0, gamma0 + 3.0, c.norm_samples, c.seed);
  return {{"samples", r.samples},
          {"lemma34_violations", r.lemma34_violations},
          {"sandwich_violations", r.sandwich_violations},
          {"window_violations", r.window_violations},
          {"worst_lemma34_ratio", r.worst_lemma34_ratio},
          {"window", {gamma0, gamma0 + 3.0}},
          {"pass", r.lemma34_violations == 0 && r.sandwich_violations == 0 && r.window_violations == 0}};
}

Json hypotheses_suite(const RunConfig& c) {
  const Nonlinearity nl = make_nonlinearity(c);
  const HypothesisReport rep = check_hypotheses(nl, c.problem, hypothesis_names());
  const int which = theorem_for(nl);
  bool pass = true;
  Json failed = Json::array();
  for (const auto& h : theorem_hypotheses(which))
    if (!rep.find(h)->pass) {
      pass = false;
      failed.push_back(h);
    }
  return {{"nonlinearity", nl.name()}, {"theorem", which}, {"required", theorem_hypotheses(which)},
          {"failed", failed},          {"results", hypothesis_json(rep)}, {"pass", pass}};
}

Json linking_suite(const RunConfig& c) {
  const ActionContext ctx =
      make_context(*c.graph, c.small_closure, c.small_resolution, c.problem, make_nonlinearity(c), true);
  const LinkingReport r = linking_diagnostics(ctx, c.linking_rho, c.linking_samples, c.seed);
  const bool slope_ok = std::abs(r.slope - 2.0) <= 0.1;
  return {{"rho_grid", r.rho_grid},
          {"min_phi", r.min_phi},
          {"rho", r.rho},
          {"eta", r.eta},
          {"slope", r.slope},
          {"slope_points", r.slope_points},
          {"R1", r.R1},
          {"max_boundary_q", r.max_boundary_q},
          {"max_y_minus", r.max_y_minus},
          {"max_y_minus_bound_defect", r.max_y_minus_bound_defect},
          {"samples", r.samples},
          {"seed", r.seed},
          {"diagnostics", r.diagnostics},
          {"pass", r.eta_positive && r.boundary_q_nonpositive && r.y_minus_nonpositive && slope_ok}};
}

Json gn_suite(const RunConfig& c) {
  const PeriodicClosure closure = close_periodically(*c.graph, c.small_closure);
  const std::vector<std::pair<double, double>> pq = {{4.0, 2.0}, {6.0, 2.0}, {INFINITY, 2.0}};
  Json rows = Json::array();
  bool pass = true;
  std::vector<double> sup[2];
  for (int level = 0; level < 2; ++level) {
    auto grid = GraphGrid::uniform(closure.graph(), c.small_resolution * (1 << level));
    sup[level].assign(pq.size(), 0.0);
    const int E = closure.graph().edge_count();
    for (int e = 0; e < E; e += std::max(1, E / 4))
      for (double w : {0.3, 0.6, 1.2}) {
        const double pos = 0.5 * closure.graph().edge(e).length;
        const SpinorField f = bump_field(grid, e, pos, w, 1.0, Complex(0.0, 0.5));
        for (size_t k = 0; k < pq.size(); ++k)
          sup[level][k] = std::max(sup[level][k], check_gagliardo_nirenberg(f, pq[k].first, pq[k].second).ratio);
      }
  }
  for (size_t k = 0; k < pq.size(); ++k) {
    const double drift = std::abs(sup[1][k] / sup[0][k] - 1.0);
    const bool ok = std::isfinite(sup[0][k]) && sup[0][k] > 0.0 && drift < 0.05;
    pass = pass && ok;
    rows.push_back({{"p", std::isinf(pq[k].first) ? Json("inf") : Json(pq[k].first)},
                    {"q", pq[k].second},
                    {"max_ratio", sup[0][k]},
                    {"max_ratio_refined", sup[1][k]},
                    {"relative_drift", drift},
                    {"pass", ok}});
  }
  return {{"pairs", rows}, {"pass", pass}};
}

Json state_json(const RunConfig& c, const BoundState& b) {
  Json j;
  j["omega"] = b.omega;
  j["a"] = b.a;
  j["residual"] = b.residual;
  j["action"] = b.action;
  j["fhat_integral"] = b.fhat_integral;
  j["N"] = c.closure;
  if (c.nonlinearity.kind == "power")
    j["p_or_b"] = c.nonlinearity.p;
  else
    j["p_or_b"] = c.nonlinearity.b;
  j["seed"] = c.seed;
  j["l2_norm"] = b.l2_norm;
  j["iterations"] = b.iterations;
  j["reseeds"] = b.reseeds;
  j["cells_per_unit"] = b.cells_per_unit;
  j["config"] = c.resolved;
  return j;
}

Json residual_json(const ResidualReport& r) {
  Json j = {{"residual", r.residual},
            {"edge_residual", r.edge_residual},
            {"vertex_flux_defect", r.vertex.flux_defect},
            {"max_vertex_flux_defect", r.vertex.max_flux_defect},
            {"max_continuity_defect", r.vertex.max_continuity_defect},
            {"trace_rule", r.vertex.trace_rule},
            {"cell_profile", r.cell_profile},
            {"action", r.action},
            {"fhat_integral", r.fhat_integral},
            {"identity_defect", r.identity_defect},
            {"l2_norm", r.l2_norm}};
  if (r.has_split) {
    j["plus_sq"] = r.plus_sq;
    j["minus_sq"] = r.minus_sq;
    j["lemma34"] = r.lemma34;
  }
  return j;
}

}  // namespace

int cmd_bands(const RunConfig& c, std::ostream& log) {
  check_parameters(c.problem);
  BandStructure bands;
  Json rep = gap_suite(c, &bands);
  std::ostringstream csv;
  write_bands_csv(bands, csv);
  write_text(file(c, "bands.csv"), csv.str());
  rep["config"] = c.resolved;
  write_json(file(c, "gap_report.json"), rep);
  log << "min |lambda| = " << rep["min_abs_lambda"].get<double>() << ", gap checks "
      << (rep["pass"].get<bool>() ? "pass" : "FAIL") << "\n";
  return rep["pass"].get<bool>() ? exit_ok : exit_verification;
}

int cmd_solve(const RunConfig& c, std::ostream& log) {
  check_parameters(c.problem);
  if (c.nonlinearity.kind.empty()) throw ConfigError("/nonlinearity", "solve needs a nonlinearity");
  const Nonlinearity nl = make_nonlinearity(c);
  const int which = theorem_for(nl);
  const HypothesisReport hyp = check_hypotheses(nl, c.problem, theorem_hypotheses(which));
  if (!hyp.all_pass()) {
    std::string names;
    for (const auto& r : hyp.results)
      if (!r.pass) names += " (" + r.name + "): " + r.detail + ";";
    throw HypothesisError("hypotheses of the existence theorem fail:" + names);
  }
  int dim = 0;
  {
    const PeriodicClosure cl = close_periodically(*c.graph, c.closure);
    dim = GraphGrid::uniform(cl.graph(), c.resolution)->size();
  }
  const ActionContext ctx = make_context(*c.graph, c.closure, c.resolution, c.problem, nl, dim <= 1200);

  std::vector<BoundState> states;
  std::string failure;
  for (int k = 0; k < c.deflate; ++k) {
    try {
      states.push_back(solve_bound_state(ctx, c.init, c.solve, states));
    } catch (const SolverError& e) {
      failure = e.what();
      break;
    }
    log << "state " << k << ": residual " << states.back().residual << ", action "
        << states.back().action << "\n";
  }
  Json reports = Json::array();
  for (size_t k = 0; k < states.size(); ++k) {
    std::ostringstream csv;
    write_field_csv(states[k].field, csv);
    write_text(file(c, "state_" + std::to_string(k) + ".csv"), csv.str());
    write_json(file(c, "state_" + std::to_string(k) + ".json"), state_json(c, states[k]));
    reports.push_back(residual_json(residual_report(ctx, states[k])));
  }
  write_json(file(c, "residual_report.json"),
             {{"states", reports}, {"requested", c.deflate}, {"failure", failure}, {"config", c.resolved}});
  if (c.deflate > 1) {
    std::ostringstream m;
    for (size_t i = 0; i < states.size(); ++i) {
      for (size_t j = 0; j < states.size(); ++j) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", orbit_distance(*ctx.closure, states[i].field, states[j].field));
        m << (j ? "," : "") << buf;
      }
      m << "\n";
    }
    write_text(file(c, "distinctness_matrix.csv"), m.str());
  }
  if (static_cast<int>(states.size()) < c.deflate) {
    log << "solver failure: " << failure << "\n";
    return exit_solver;
  }
  return exit_ok;
}

int cmd_verify(const RunConfig& c, std::ostream& log) {
  check_parameters(c.problem);
  bool all = true;
  for (const std::string& w : c.which) {
    Json j;
    if (w == "gap")
      j = gap_suite(c, nullptr);
    else if (w == "cutoff")
      j = cutoff_suite(c);
    else if (w == "interpolation")
      j = interpolation_suite(c);
    else if (w == "norms")
      j = norms_suite(c);
    else if (w == "hypotheses")
      j = hypotheses_suite(c);
    else if (w == "linking")
      j = linking_suite(c);
    else if (w == "gn")
      j = gn_suite(c);
    else
      throw ConfigError("/verify/which", "unknown suite " + w);
    const bool pass = j["pass"].get<bool>();
    all = all && pass;
    j["suite"] = w;
    j["config"] = c.resolved;
    write_json(file(c, "verify_" + w + ".json"), j);
    log << "verify " << w << ": " << (pass ? "pass" : "FAIL") << "\n";
  }
  return all ? exit_ok : exit_verification;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dirac operators on periodic metric graphs"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  int deflate = 0;
  long long seed = -1;
  std::map<std::string, CLI::App*> subs;
  for (const char* name : {"bands", "solve", "verify"}) {
    CLI::App* s = app.add_subcommand(name);
    s->add_option("--config", config_path, "JSON run configuration")->required();
    s->add_option("--out", out_dir, "output directory");
    s->add_option("--seed", seed, "random seed")->check(CLI::NonNegativeNumber);
    subs[name] = s;
  }
  subs["solve"]->add_option("--deflate", deflate, "number of distinct states")->check(CLI::PositiveNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_config;
  }

  RunConfig c;
  try {
    c = load_config_file(config_path);
    if (!out_dir.empty()) c.out = out_dir;
    if (seed >= 0) c.seed = static_cast<unsigned>(seed);
    if (deflate > 0) c.deflate = deflate;
    c.resolved["output"] = c.out;
    c.resolved["seed"] = c.seed;
    c.resolved["solve"]["deflate"] = c.deflate;
    std::filesystem::create_directories(c.out);
  } catch (const ConfigError& e) {
    err << "config error at " << e.what() << "\n";
    return exit_config;
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << "\n";
    return exit_config;
  }

  try {
    if (subs["bands"]->parsed()) return cmd_bands(c, out);
    if (subs["solve"]->parsed()) return cmd_solve(c, out);
    return cmd_verify(c, out);
  } catch (const ConfigError& e) {
    err << "config error at " << e.what() << "\n";
    return exit_config;
  } catch (const HypothesisError& e) {
    err << e.what() << "\n";
    return exit_hypothesis;
  } catch (const SolverError& e) {
    err << "solver failure: " << e.what() << "\n";
    return exit_solver;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << "\n";
    return exit_config;
  }
}

}  // namespace dgraph
