#include "doctest.h"

#include <cmath>
#include <random>

#include "dirac_graph/variational.hpp"

using namespace dgraph;

namespace {

SpinorField random_field(const ActionContext& ctx, std::mt19937& rng, double scale) {
  std::normal_distribution<double> nd;
  Eigen::VectorXcd v(ctx.grid().size());
  for (auto& x : v) x = scale * Complex(nd(rng), nd(rng));
  return SpinorField(ctx.grid_ptr(), v);
}

double fd_defect(const ActionContext& ctx, const SpinorField& f, const SpinorField& phi) {
  const double eps = 1e-5;
  const double fd = (action_quadratic(ctx, f + Complex(eps) * phi) -
                     action_quadratic(ctx, f - Complex(eps) * phi)) / (2.0 * eps);
  const SpinorField G = gradient(ctx, f);
  const double pairing = inner(G, phi).real();
  const double scale = std::sqrt(inner(G, G).real() * inner(phi, phi).real());
  return std::abs(pairing - fd) / scale;
}

ActionContext chain_ctx(const Nonlinearity& nl, bool dec, int N = 8, double n = 8) {
  return make_context(build_example(ExampleKind::chain), {N}, n, ProblemParameters{}, nl, dec);
}

}  // namespace

TEST_CASE("action: both forms, zero, gauge, small amplitude") {
  auto ctx = chain_ctx(Nonlinearity::power(2.5), true);
  SpinorField zero(ctx.grid_ptr());
  CHECK(action(ctx, zero) == 0.0);
  std::mt19937 rng(5);
  for (int k = 0; k < 10; ++k) {
    const SpinorField f = random_field(ctx, rng, 0.7);
    const double phi = action(ctx, f);
    CHECK(phi == doctest::Approx(action_quadratic(ctx, f)).epsilon(1e-10));
    const double gauged = action(ctx, std::polar(1.0, 0.3 + k) * f);
    CHECK(std::abs(gauged - phi) <= 1e-12 * std::max(1.0, std::abs(phi)));
  }
  const auto& dec = *ctx.decomposition;
  for (int i : {dec.positive.front(), dec.positive.back()}) {
    const double t = 1e-3;
    const double phi = action(ctx, Complex(t) * dec.vector(i));
    CHECK(phi > 0.0);
    CHECK(phi == doctest::Approx(0.5 * t * t * dec.eigenvalues[i]).epsilon(1e-3));
  }
}

TEST_CASE("gradient matches finite differences for both nonlinearity families") {
  ProblemParameters p;
  for (const auto& nl : {Nonlinearity::power(2.5), Nonlinearity::asym_linear({4.0}, p)}) {
    auto ctx = make_context(build_example(ExampleKind::decorated_chain), {4}, 6, p, nl, false);
    std::mt19937 rng(11);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      const SpinorField f = random_field(ctx, rng, 1.0);
      const SpinorField phi = random_field(ctx, rng, 1.0);
      worst = std::max(worst, fd_defect(ctx, f, phi));
    }
    CHECK(worst < 1e-6);
    CHECK(gradient_norm(ctx, SpinorField(ctx.grid_ptr())) == 0.0);
  }
}

TEST_CASE("discrete critical-point identity and translation equivariance") {
  ProblemParameters p;
  p.V = Potential::per_edge({0.2, 0.0});
  auto ctx = make_context(build_example(ExampleKind::decorated_chain), {5}, 6, p,
                          Nonlinearity::asym_linear({3.0, 5.0}, p), false);
  std::mt19937 rng(2);
  for (int k = 0; k < 5; ++k) {
    const SpinorField f = random_field(ctx, rng, 2.0);
    const double lhs = action_quadratic(ctx, f) - 0.5 * inner(gradient(ctx, f), f).real();
    CHECK(lhs == doctest::Approx(fhat_integral(ctx, f)).epsilon(1e-12));
    for (int s : {1, 3}) {
      const SpinorField Gk = gradient(ctx, orbit_translate(*ctx.closure, {s, 0}, f));
      const SpinorField kG = orbit_translate(*ctx.closure, {s, 0}, gradient(ctx, f));
      CHECK((Gk.values() - kG.values()).norm() <= 1e-12 * kG.values().norm());
      CHECK(action_quadratic(ctx, orbit_translate(*ctx.closure, {s, 0}, f)) ==
            doctest::Approx(action_quadratic(ctx, f)).epsilon(1e-13));
    }
  }
}

TEST_CASE("orbit distance") {
  auto ctx = chain_ctx(Nonlinearity::power(2.5), false, 6, 4);
  std::mt19937 rng(8);
  const SpinorField u = random_field(ctx, rng, 1.0);
  const SpinorField v = std::polar(1.0, 0.7) * orbit_translate(*ctx.closure, {3, 0}, u);
  CHECK(orbit_distance(*ctx.closure, u, v) < 1e-14);
  CHECK(orbit_distance(*ctx.closure, u, Complex(-1.0) * u) < 1e-14);
  CHECK(orbit_distance(*ctx.closure, u, u) == 0.0);
  CHECK(orbit_distance(*ctx.closure, u, random_field(ctx, rng, 1.0)) > 0.5);
}

TEST_CASE("bound state of the power nonlinearity on the chain ring") {
  auto ctx = chain_ctx(Nonlinearity::power(2.5), false, 24, 16);
  SolveOptions opt;
  opt.tol = 1e-11;
  const BoundState b = solve_bound_state(ctx, InitSpec::band_edge(0.5), opt);
  CHECK(b.residual < 1e-9);
  CHECK(b.action > 0.0);
  CHECK(std::abs(b.action - b.fhat_integral) < 1e-8);
  CHECK(b.l2_norm > 1e-3);

  const ResidualReport rep = residual_report(ctx, b);
  CHECK(rep.identity_defect < 1e-12);
  CHECK(rep.residual == doctest::Approx(b.residual).epsilon(1e-6));
  const double peak = *std::max_element(rep.cell_profile.begin(), rep.cell_profile.end());
  CHECK(rep.cell_profile[12] < 1e-3 * peak);

  // a zero initial field is rejected
  CHECK_THROWS_AS(solve_bound_state(ctx, InitSpec::given(SpinorField(ctx.grid_ptr()))),
                  BoundStateError);
  ProblemParameters bad;
  bad.omega = 1.5;
  CHECK_THROWS_AS(make_context(build_example(ExampleKind::chain), {8}, 8, bad,
                               Nonlinearity::power(2.5), false),
                  std::invalid_argument);
}

TEST_CASE("state refinement is second order and the vertex defect shrinks") {
  std::vector<BoundState> st;
  std::vector<double> flux;
  for (double n : {8.0, 16.0, 32.0}) {
    auto ctx = chain_ctx(Nonlinearity::power(2.5), false, 16, n);
    st.push_back(solve_bound_state(ctx, InitSpec::band_edge(0.5)));
    flux.push_back(residual_report(ctx, st.back()).vertex.max_flux_defect);
  }
  const double d1 = refinement_distance(st[0].field, st[1].field);
  const double d2 = refinement_distance(st[1].field, st[2].field);
  MESSAGE("refinement distances " << d1 << " " << d2 << " ratio " << d1 / d2);
  CHECK(d1 / d2 > 3.5);
  CHECK(d1 / d2 < 4.5);
  CHECK(flux[2] < 0.6 * flux[1]);
}

TEST_CASE("omega continuation towards the band edge") {
  auto g = build_example(ExampleKind::chain);
  auto nl = Nonlinearity::power(2.5);
  ProblemParameters p;
  auto ctx = make_context(g, {24}, 12, p, nl, false);
  BoundState b = solve_bound_state(ctx, InitSpec::band_edge(0.5));
  for (int k = 1; k <= 10; ++k) {
    p.omega = 0.09 * k;
    auto next = make_context(g, {24}, 12, p, nl, false);
    b = solve_bound_state(next, InitSpec::given(b.field));
    CHECK(b.residual < 1e-10);
    CHECK(b.omega == doctest::Approx(p.omega));
  }
}

TEST_CASE("deflation finds geometrically distinct states on the decorated chain") {
  auto ctx = make_context(build_example(ExampleKind::decorated_chain), {12}, 16,
                          ProblemParameters{}, Nonlinearity::power(2.5), false);
  std::vector<BoundState> found;
  found.push_back(solve_bound_state(ctx, InitSpec::band_edge(0.5)));
  found.push_back(solve_bound_state(ctx, InitSpec::band_edge(0.5), {}, found));
  CHECK(found[1].reseeds > 0);
  CHECK(orbit_distance(*ctx.closure, found[0].field, found[1].field) > 0.1);
  CHECK(std::abs(found[0].action - found[1].action) > 1e-4);
  for (const auto& b : found) CHECK(b.residual < 1e-9);
}

TEST_CASE("linking geometry samples") {
  auto ctx = chain_ctx(Nonlinearity::power(2.5), true, 6, 6);
  std::vector<double> rho;
  for (int k = -10; k <= 0; ++k) rho.push_back(std::pow(10.0, k / 2.0));
  const LinkingReport rep = linking_diagnostics(ctx, rho, 300, 3);
  CHECK(rep.eta_positive);
  CHECK(rep.eta > 0.0);
  CHECK(rep.y_minus_nonpositive);
  CHECK(rep.boundary_q_nonpositive);
  CHECK(rep.slope == doctest::Approx(2.0).epsilon(0.05));
  CHECK(rep.diagnostics.empty());
  const LinkingReport again = linking_diagnostics(ctx, rho, 300, 3);
  CHECK(again.eta == rep.eta);
  CHECK(again.R1 == rep.R1);

  ProblemParameters p;
  auto asym = make_context(build_example(ExampleKind::chain), {6}, 6, p,
                           Nonlinearity::asym_linear({4.0}, p), true);
  const LinkingReport r2 = linking_diagnostics(asym, rho, 300, 3);
  CHECK(r2.eta_positive);
  CHECK(r2.boundary_q_nonpositive);
  CHECK(r2.y_minus_nonpositive);
}
