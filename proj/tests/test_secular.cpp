#include "doctest.h"

#include <cmath>
#include <numbers>

#include "dirac_graph/secular.hpp"
#include "dirac_graph/spectra.hpp"

using namespace dgraph;

namespace {

const double pi = std::numbers::pi;

// Richardson extrapolation of a second-order quantity from n and 2n
double richardson(double coarse, double fine) { return (4.0 * fine - coarse) / 3.0; }

}  // namespace

TEST_CASE("transfer coefficients") {
  for (double q : {-3.0, -1e-7, 0.0, 1e-7, 2.0})
    for (double x : {0.1, 1.0, 2.5}) {
      const auto [c, s] = transfer_coefficients(q, x);
      // C^2 - q S^2 = 1 (determinant of the transfer matrix)
      CHECK(c * c - q * s * s == doctest::Approx(1.0).epsilon(1e-12));
    }
  const auto [c, s] = transfer_coefficients(-4.0, 1.0);
  CHECK(c == doctest::Approx(std::cos(2.0)));
  CHECK(s == doctest::Approx(std::sin(2.0) / 2.0));
}

TEST_CASE("chain roots follow the closed-form dispersion") {
  for (double ell : {1.0, 1.7})
    for (double th : {0.0, 0.9, pi}) {
      auto g = build_example(ExampleKind::chain, {ell, 1.0});
      ProblemParameters p;
      p.a = 1.2;
      auto res = secular_bands(g, p, {th, 0.0}, -8.0, 8.0);
      CHECK(res.max_imag_residual < 1e-10);
      std::vector<double> expect;
      for (int n = -6; n <= 6; ++n) {
        const double l = std::sqrt(p.a * p.a + std::pow((th + 2 * pi * n) / ell, 2));
        if (l < 8.0) {
          expect.push_back(l);
          expect.push_back(-l);
        }
      }
      std::sort(expect.begin(), expect.end());
      REQUIRE(res.roots.size() == expect.size());
      for (size_t i = 0; i < expect.size(); ++i)
        CHECK(res.roots[i] == doctest::Approx(expect[i]).epsilon(1e-7));
      if (th == 0.0) CHECK(!res.tangential_roots.empty());
    }
}

TEST_CASE("no roots inside the gap") {
  ProblemParameters p;
  p.V = Potential::per_edge({0.3, 0.1});
  auto g = build_example(ExampleKind::decorated_chain, {1.0, 1.0});
  for (double th : {0.0, 1.0, pi}) {
    auto res = secular_bands(g, p, {th, 0.0}, -p.a + 1e-9, p.a - 1e-9);
    CHECK(res.roots.empty());
  }
}

TEST_CASE("decorated chain first root at two mesh densities") {
  ProblemParameters p;
  auto g = build_example(ExampleKind::decorated_chain, {1.0, 1.0});
  auto r1 = secular_positive_roots(g, p, {0.0, 0.0}, 1);
  SecularOptions fine;
  fine.mesh_step = 2.5e-4;
  auto r2 = secular_positive_roots(g, p, {0.0, 0.0}, 1, fine);
  CHECK(std::abs(r1[0] - r2[0]) < 1e-10);
  CHECK(r1[0] >= p.a);
  MESSAGE("decorated chain, theta=0, first positive root: " << r1[0]);
}

TEST_CASE("Bloch bands of the staggered scheme converge to the secular roots") {
  ProblemParameters p;
  p.V = Potential::per_edge({0.2, 0.0});
  auto g = build_example(ExampleKind::decorated_chain, {1.0, 1.0});
  auto thetas = std::vector<BlochPhase>{{0.0, 0.0}, {0.7, 0.0}, {2.0, 0.0}, {pi, 0.0}};
  auto coarse = band_sweep(g, 200, p, thetas, 12);
  auto fine = band_sweep(g, 400, p, thetas, 12);
  for (size_t t = 0; t < thetas.size(); ++t) {
    auto exact = secular_positive_roots(g, p, thetas[t], 3);
    for (int b = 0; b < 3; ++b) {
      const double c = coarse.positive_band(b)[t], f = fine.positive_band(b)[t];
      CHECK(std::abs(richardson(c, f) - exact[b]) < 1e-6);
      CHECK(std::abs(f - exact[b]) < std::abs(c - exact[b]));
    }
  }
}

TEST_CASE("square lattice lowest positive band value") {
  ProblemParameters p;
  auto g = build_example(ExampleKind::square_lattice);
  const BlochPhase th{0.0, 0.0};
  auto exact = secular_positive_roots(g, p, th, 1);
  CHECK(exact[0] == doctest::Approx(1.0).epsilon(1e-9));
  auto bs = band_sweep(g, 32, p, {th}, 6);
  CHECK(bs.positive_band(0)[0] == doctest::Approx(exact[0]).epsilon(1e-9));
  auto th2 = BlochPhase{1.0, 2.0};
  auto e2 = secular_positive_roots(g, p, th2, 2);
  auto c = band_sweep(g, 100, p, {th2}, 8).positive_band(1)[0];
  auto f = band_sweep(g, 200, p, {th2}, 8).positive_band(1)[0];
  CHECK(std::abs(richardson(c, f) - e2[1]) < 1e-6);
}

TEST_CASE("non-constant potentials are rejected") {
  ProblemParameters p;
  p.V = Potential::cosine(0.1, 0.1);
  CHECK_THROWS_AS(secular_bands(build_example(ExampleKind::chain), p, {0.0, 0.0}, 0.0, 2.0),
                  std::invalid_argument);
}
