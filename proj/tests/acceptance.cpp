// Runs the twelve acceptance criteria and prints one line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "dirac_graph/errors.hpp"
#include "dirac_graph/nonlinearity.hpp"
#include "dirac_graph/secular.hpp"
#include "dirac_graph/spectra.hpp"
#include "dirac_graph/variational.hpp"

using namespace dgraph;

namespace {

constexpr double pi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

const ExampleKind all_kinds[] = {ExampleKind::chain, ExampleKind::decorated_chain, ExampleKind::ladder,
                                 ExampleKind::strip, ExampleKind::square_lattice};

double min_abs(const Eigen::VectorXd& ev) { return ev.cwiseAbs().minCoeff(); }

double chain_gap(double V, int N, double n) {
  ProblemParameters p;
  p.V = Potential::constant(V);
  const PeriodicClosure c = close_periodically(build_example(ExampleKind::chain), {N});
  return min_abs(eigenvalues(assemble(c, GraphGrid::uniform(c.graph(), n), p)));
}

Outcome spectral_gap() {
  // the time budget covers the V=0 run
  const auto t0 = std::chrono::steady_clock::now();
  const double g0 = chain_gap(0.0, 16, 64);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double g1 = chain_gap(0.5, 16, 64);
  std::ostringstream os;
  os << "min|lambda| = " << g0 << " (V=0, " << secs << "s), " << g1 << " (V=0.5)";
  return {std::abs(g0 - 1.0) <= 5e-3 && std::abs(g1 - 1.5) <= 5e-3 && secs < 5.0, os.str()};
}

Outcome floquet_consistency() {
  const int N = 12;
  const double n = 16;
  ProblemParameters p;
  p.V = Potential::cosine(0.2, 0.1);
  const PeriodicGraph g = build_example(ExampleKind::decorated_chain);
  const PeriodicClosure c = close_periodically(g, {N});
  const Eigen::VectorXd closed = eigenvalues(assemble(c, GraphGrid::uniform(c.graph(), n), p));
  const PeriodicClosure cell = bloch_cell(g);
  auto cgrid = GraphGrid::uniform(cell.graph(), n);
  std::vector<double> all;
  for (const BlochPhase& th : theta_grid(1, N)) {
    const Eigen::VectorXd ev = eigenvalues(assemble(cell, cgrid, p, th));
    all.insert(all.end(), ev.data(), ev.data() + ev.size());
  }
  std::sort(all.begin(), all.end());
  if (static_cast<Eigen::Index>(all.size()) != closed.size()) return {false, "eigenvalue counts differ"};
  double worst = 0.0;
  for (size_t i = 0; i < all.size(); ++i)
    worst = std::max(worst, std::abs(all[i] - closed[i]) / std::max(1.0, std::abs(closed[i])));
  std::ostringstream os;
  os << closed.size() << " eigenvalues, max relative difference " << worst;
  return {worst < 1e-9, os.str()};
}

Outcome secular_agreement() {
  ProblemParameters p;
  const PeriodicGraph g = build_example(ExampleKind::decorated_chain, {1.0, 1.0});
  const std::vector<BlochPhase> thetas = {{0.0, 0.0}, {0.5, 0.0}, {1.3, 0.0}, {2.2, 0.0}, {pi, 0.0}};
  const BandStructure coarse = band_sweep(g, 200, p, thetas, 12);
  const BandStructure fine = band_sweep(g, 400, p, thetas, 12);
  double worst = 0.0;
  for (size_t t = 0; t < thetas.size(); ++t) {
    const std::vector<double> exact = secular_positive_roots(g, p, thetas[t], 3);
    for (int b = 0; b < 3; ++b) {
      const double c = coarse.positive_band(b)[t], f = fine.positive_band(b)[t];
      worst = std::max(worst, std::abs((4.0 * f - c) / 3.0 - exact[b]));
    }
  }
  std::ostringstream os;
  os << "3 bands x " << thetas.size() << " thetas, max |extrapolated - secular| = " << worst;
  return {worst < 1e-6, os.str()};
}

Outcome hermiticity_transparency() {
  double defect = 0.0;
  ProblemParameters p;
  p.V = Potential::cosine(0.4, 0.2);
  for (ExampleKind k : all_kinds) {
    const PeriodicGraph g = build_example(k, {1.0, 1.7});
    const PeriodicClosure c = close_periodically(g, std::vector<int>(g.dim(), 3));
    defect = std::max(defect, assemble(c, GraphGrid::uniform(c.graph(), 7), p).hermiticity_defect());
    const PeriodicClosure cell = bloch_cell(g);
    defect = std::max(defect, assemble(cell, GraphGrid::uniform(cell.graph(), 9), p, BlochPhase{0.4, 2.1})
                                  .hermiticity_defect());
  }
  const int N = 8;
  const double n = 8;
  ProblemParameters q;
  q.a = 0.8;
  const PeriodicClosure c = close_periodically(build_example(ExampleKind::chain), {N});
  const Eigen::VectorXd chain = eigenvalues(assemble(c, GraphGrid::uniform(c.graph(), n), q));
  const PeriodicClosure ring = bloch_cell(build_example(ExampleKind::chain, {double(N), 1.0}));
  const Eigen::VectorXd loop = eigenvalues(assemble(ring, GraphGrid::uniform(ring.graph(), n), q));
  double diff = INFINITY;
  if (chain.size() == loop.size())
    diff = (chain - loop).cwiseAbs().maxCoeff() / std::max(1.0, loop.cwiseAbs().maxCoeff());
  std::ostringstream os;
  os << "max Hermiticity defect " << defect << ", chain vs ring " << diff;
  return {defect == 0.0 && diff < 1e-12, os.str()};
}

Outcome interpolation() {
  const PeriodicClosure c = close_periodically(build_example(ExampleKind::chain), {6});
  ProblemParameters p;
  p.V = Potential::cosine(0.2, 0.1);
  const DiracOperator op = assemble(c, GraphGrid::uniform(c.graph(), 8), p);
  if (op.size() > 200) return {false, "operator too large"};
  const SpectralDecomposition dec = decompose(op);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  double worst = 0.0, c_half = 0.0;
  for (int k = 0; k < 20; ++k) {
    SpinorField f(op.grid_ptr());
    for (auto& x : f.values()) x = Complex(nd(rng), nd(rng));
    const InterpolationReport r = interpolation_identity_check(op, dec, 0.5, f, 400, 100 + k);
    worst = std::max(worst, std::abs(r.ratio - 1.0));
    c_half = r.c_theta;
  }
  std::ostringstream os;
  os << "dimension " << op.size() << ", max |ratio - 1| = " << worst << ", |C_1/2 - pi| = "
     << std::abs(c_half - pi);
  return {worst <= 1e-3 && std::abs(c_half - pi) < 1e-6, os.str()};
}

Outcome cutoff() {
  ProblemParameters p;
  std::vector<CutoffSample> s;
  for (int N : {16, 32, 64}) s.push_back(cutoff_test_function(N, p, 8.0));
  bool pass = true;
  std::ostringstream os;
  os << "doubling factors";
  for (size_t k = 1; k < s.size(); ++k) {
    const double r = s[k - 1].derivative_sq / s[k].derivative_sq;
    os << " " << r;
    pass = pass && std::abs(r - 2.0) <= 0.4;
  }
  const double bound = p.a + p.V.sup() + 0.05;
  os << ", |A v_64| = " << s.back().norm_Av << " (bound " << bound << ")";
  return {pass && s.back().norm_Av <= bound, os.str()};
}

Outcome norm_inequalities() {
  int violations = 0, samples = 0;
  for (ExampleKind k : {ExampleKind::chain, ExampleKind::decorated_chain}) {
    ProblemParameters p;
    p.omega = 0.4;
    p.V = Potential::cosine(0.2, 0.1);
    const PeriodicClosure c = close_periodically(build_example(k), {6});
    const SpectralDecomposition dec = decompose(assemble(c, GraphGrid::uniform(c.graph(), 8), p));
    const double g0 = p.a + std::abs(p.omega) + p.V.sup();
    const NormInequalityReport r = check_norm_inequalities(dec, p.a, p.omega, g0, g0 + 3.0, 100, 7);
    samples += r.samples;
    violations += r.lemma34_violations + r.sandwich_violations + r.window_violations;
  }
  std::ostringstream os;
  os << samples << " samples, " << violations << " violations";
  return {violations == 0 && samples > 0, os.str()};
}

Outcome gradient_check() {
  ProblemParameters p;
  const Nonlinearity families[] = {Nonlinearity::power(2.5), Nonlinearity::asym_linear({4.0}, p)};
  double worst = 0.0;
  int pairs = 0;
  for (const Nonlinearity& nl : families) {
    const ActionContext ctx = make_context(build_example(ExampleKind::decorated_chain), {4}, 6, p, nl, false);
    std::mt19937 rng(21);
    std::normal_distribution<double> nd;
    for (int k = 0; k < 20; ++k) {
      Eigen::VectorXcd fv(ctx.grid().size()), pv(ctx.grid().size());
      const double scale = 0.2 + 0.2 * (k % 5);
      for (auto& x : fv) x = scale * Complex(nd(rng), nd(rng));
      for (auto& x : pv) x = Complex(nd(rng), nd(rng));
      const SpinorField f(ctx.grid_ptr(), fv), phi(ctx.grid_ptr(), pv);
      const double eps = 1e-5;
      const double fd = (action_quadratic(ctx, f + Complex(eps) * phi) -
                         action_quadratic(ctx, f - Complex(eps) * phi)) / (2.0 * eps);
      const SpinorField G = gradient(ctx, f);
      const double scale_gp = std::sqrt(inner(G, G).real() * inner(phi, phi).real());
      worst = std::max(worst, std::abs(inner(G, phi).real() - fd) / scale_gp);
      ++pairs;
    }
  }
  std::ostringstream os;
  os << pairs << " pairs over both families, max relative defect " << worst;
  return {worst < 1e-6, os.str()};
}

Outcome existence() {
  std::vector<BoundState> st;
  bool ok = true;
  std::ostringstream os;
  for (double n : {16.0, 32.0, 64.0}) {
    const ActionContext ctx =
        make_context(build_example(ExampleKind::chain), {24}, n, ProblemParameters{}, Nonlinearity::power(2.5), false);
    st.push_back(solve_bound_state(ctx, InitSpec::band_edge(0.5)));
    const BoundState& b = st.back();
    ok = ok && b.residual < 1e-9 && b.action > 0.0 && std::abs(b.action - b.fhat_integral) < 1e-8 &&
         b.l2_norm > 1e-6;
    if (n == 16.0)
      os << "residual " << b.residual << ", action " << b.action << ", |action - int Fhat| "
         << std::abs(b.action - b.fhat_integral);
  }
  const double d1 = refinement_distance(st[0].field, st[1].field);
  const double d2 = refinement_distance(st[1].field, st[2].field);
  os << ", refinement ratio " << d1 / d2;
  return {ok && d1 < 4.0 * d2, os.str()};
}

Outcome multiplicity() {
  const ActionContext ctx = make_context(build_example(ExampleKind::decorated_chain), {16}, 32,
                                         ProblemParameters{}, Nonlinearity::power(2.5), false);
  std::vector<BoundState> found;
  for (int k = 0; k < 2; ++k) found.push_back(solve_bound_state(ctx, InitSpec::band_edge(0.5), {}, found));
  double min_dist = INFINITY;
  for (size_t i = 0; i < found.size(); ++i)
    for (size_t j = i + 1; j < found.size(); ++j)
      min_dist = std::min(min_dist, orbit_distance(*ctx.closure, found[i].field, found[j].field));
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> th(0.0, 2.0 * pi);
  std::uniform_int_distribution<int> shift(0, 15);
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    const SpinorField& u = found[k % found.size()].field;
    const SpinorField v = std::polar(1.0, th(rng)) * orbit_translate(*ctx.closure, {shift(rng), 0}, u);
    worst = std::max(worst, orbit_distance(*ctx.closure, u, v));
  }
  std::ostringstream os;
  os << found.size() << " states, min orbit distance " << min_dist << ", max invariance defect " << worst;
  return {found.size() >= 2 && min_dist > 0.1 && worst < 1e-10, os.str()};
}

Outcome linking() {
  const ActionContext ctx = make_context(build_example(ExampleKind::chain), {8}, 8, ProblemParameters{},
                                         Nonlinearity::power(2.5), true);
  std::vector<double> rho;
  for (int k = -10; k <= 0; ++k) rho.push_back(std::pow(10.0, k / 2.0));
  const LinkingReport r = linking_diagnostics(ctx, rho, 1000, 2024);
  std::ostringstream os;
  os << "eta " << r.eta << " at rho " << r.rho << ", max Phi on Y- sphere " << r.max_y_minus
     << ", on dQ " << r.max_boundary_q << ", slope " << r.slope;
  return {r.eta_positive && r.y_minus_nonpositive && r.boundary_q_nonpositive && std::abs(r.slope - 2.0) <= 0.1,
          os.str()};
}

Outcome hypothesis_gates() {
  ProblemParameters p;
  auto all_pass = [&](const Nonlinearity& nl, int which) {
    return check_hypotheses(nl, p, theorem_hypotheses(which)).all_pass();
  };
  const bool power = all_pass(Nonlinearity::power(2.5), 2);
  const bool asym = all_pass(Nonlinearity::asym_linear({4.0}, p), 1);
  bool p4_rejected = false;
  try {
    Nonlinearity::power(4.0);
  } catch (const HypothesisError& e) {
    p4_rejected = std::string(e.what()).find("(F5)") != std::string::npos;
  }
  std::ostringstream os;
  os << "power 2.5 (superlinear set) " << (power ? "passes" : "fails") << ", asym_linear (asymptotically linear set) "
     << (asym ? "passes" : "fails") << ", power 4 " << (p4_rejected ? "rejected by (F5)" : "accepted");
  return {power && asym && p4_rejected, os.str()};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget;  // seconds, 0 when untimed or timed internally
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {"spectral gap", 0.0, spectral_gap},
      {"Floquet consistency", 10.0, floquet_consistency},
      {"secular oracle agreement", 30.0, secular_agreement},
      {"Hermiticity and transparency", 0.0, hermiticity_transparency},
      {"interpolation identity", 20.0, interpolation},
      {"cutoff construction", 0.0, cutoff},
      {"norm inequalities", 0.0, norm_inequalities},
      {"gradient correctness", 0.0, gradient_check},
      {"existence proxy", 60.0, existence},
      {"multiplicity proxy", 0.0, multiplicity},
      {"linking geometry", 0.0, linking},
      {"hypothesis gates", 0.0, hypothesis_gates},
  };
  int failures = 0, index = 0;
  for (const Criterion& c : criteria) {
    ++index;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = c.budget == 0.0 || secs < c.budget;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::printf("%s %2d %-30s %7.2fs%s  %s\n", pass ? "PASS" : "FAIL", index, c.name, secs,
                in_time ? "" : " (over budget)", o.detail.c_str());
  }
  std::printf("%d of 12 criteria passed\n", 12 - failures);
  return failures == 0 ? 0 : 1;
}
