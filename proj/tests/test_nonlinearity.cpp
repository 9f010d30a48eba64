#include "doctest.h"

#include <cmath>
#include <random>

#include "dirac_graph/errors.hpp"
#include "dirac_graph/nonlinearity.hpp"

using namespace dgraph;

namespace {

std::vector<Vec4> random_samples(int n, unsigned seed, double scale) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<Vec4> out;
  for (int i = 0; i < n; ++i) out.push_back(scale * Vec4(nd(rng), nd(rng), nd(rng), nd(rng)));
  return out;
}

Vec4 radial(double r) { return Vec4(r, 0.0, 0.0, 0.0); }

bool passes(const HypothesisReport& rep, const std::string& name) {
  const auto* r = rep.find(name);
  REQUIRE(r != nullptr);
  return r->pass;
}

}  // namespace

TEST_CASE("power nonlinearity values") {
  auto nl = Nonlinearity::power(2.5);
  CHECK(nl.Fhat(0, radial(1.0)) == doctest::Approx(0.1));
  CHECK(nl.F(0, radial(1.0)) == doctest::Approx(0.4));
  CHECK(nl.F_u(0, Vec4::Zero()).norm() == 0.0);
  CHECK(nl.F_uu(0, Vec4::Zero()).norm() == 0.0);
  CHECK(nl.metadata().sigma == doctest::Approx(5.0));
  CHECK(nl.metadata().nu == doctest::Approx(0.5));
  for (const Vec4& u : random_samples(50, 3, 2.0))
    CHECK(nl.Fhat(0, u) / nl.F(0, u) == doctest::Approx(0.25));
  CHECK_THROWS_AS(Nonlinearity::power(4.0), HypothesisError);
  CHECK_THROWS_AS(Nonlinearity::power(2.0), HypothesisError);
  CHECK_THROWS_AS(Nonlinearity::power(3.0), HypothesisError);
}

TEST_CASE("power (F7)(ii) constant") {
  auto nl = Nonlinearity::power(2.5);
  for (double r = 1.0; r <= 1e3; r *= 1.3) {
    const Vec4 u = radial(r);
    const double lhs = std::pow(nl.F_u(0, u).norm(), 5.0);
    CHECK(lhs <= 10.0 * nl.Fhat(0, u) * std::pow(r, 5.0) * (1.0 + 1e-12));
  }
}

TEST_CASE("asymptotically linear nonlinearity values") {
  ProblemParameters p;
  auto nl = Nonlinearity::asym_linear({4.0}, p);
  CHECK(nl.F(0, radial(1.0)) == doctest::Approx(4.0 * (0.5 - 1.0 + std::log(2.0))).epsilon(1e-14));
  CHECK(nl.F(0, radial(1.0)) == doctest::Approx(0.772589).epsilon(1e-6));
  const Vec4 u = radial(99.0);
  CHECK((nl.F_u(0, u) - 4.0 * u).norm() / (4.0 * 99.0) == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(nl.Fhat(0, radial(1e4)) / 1e4 == doctest::Approx(2.0).epsilon(0.05));
  // small-|u| branch agrees with the closed form where both are accurate
  for (double r : {0.3, 0.45, 0.5, 0.6})
    CHECK(nl.f(0, r) == doctest::Approx(4.0 * (0.5 * r * r - r + std::log1p(r))).epsilon(1e-12));
  CHECK(nl.f(0, 1e-4) == doctest::Approx(4.0 * (1e-12 / 3 - 1e-16 / 4)).epsilon(1e-12));
  CHECK_THROWS_AS(Nonlinearity::asym_linear({0.9}, p), HypothesisError);
  p.V = Potential::constant(0.5);
  p.omega = 0.4;
  CHECK_THROWS_AS(Nonlinearity::asym_linear({1.8}, p), HypothesisError);
  CHECK_NOTHROW(Nonlinearity::asym_linear({2.0}, p));
}

TEST_CASE("derivative consistency, gauge invariance, evenness") {
  ProblemParameters p;
  for (const auto& nl : {Nonlinearity::power(2.5), Nonlinearity::power(2.9),
                         Nonlinearity::asym_linear({3.0, 4.0}, p)}) {
    for (double scale : {1e-2, 1.0, 30.0}) {
      auto rep = hessian_consistency(nl, random_samples(40, 9, scale), 1 % nl.b().size());
      CHECK(rep.gradient_defect < 1e-6);
      CHECK(rep.hessian_defect < 1e-6);
      CHECK(rep.gauge_defect < 1e-12);
      CHECK(rep.evenness_defect < 1e-15);
    }
    auto one = hessian_consistency(nl, {Vec4(0.5, -0.5, 0.5, 0.5)});
    CHECK(one.gradient_defect < 1e-6);
    for (const Vec4& u : random_samples(20, 4, 3.0)) {
      const Vec4 iu(-u[1], u[0], -u[3], u[2]);
      for (double t : {0.3, 1.7, 3.0}) {
        const Vec4 rot = std::cos(t) * u + std::sin(t) * iu;
        CHECK(nl.F(0, rot) == doctest::Approx(nl.F(0, u)).epsilon(1e-13));
      }
      CHECK(nl.F(0, -u) == nl.F(0, u));
      CHECK(nl.Fhat(0, u) > 0.0);
      CHECK(nl.Fhat(0, u) == doctest::Approx(0.5 * nl.F_u(0, u).dot(u) - nl.F(0, u)).epsilon(1e-12));
    }
  }
}

TEST_CASE("hypothesis matrix") {
  ProblemParameters p;
  auto power = Nonlinearity::power(2.5);
  auto rep = check_hypotheses(power, p, hypothesis_names());
  for (const auto& r : rep.results) MESSAGE("power " << r.name << " " << r.pass << ": " << r.detail);
  for (const auto& h : theorem_hypotheses(2)) CHECK_MESSAGE(passes(rep, h), h);
  CHECK_FALSE(passes(rep, "F3"));
  CHECK(rep.find("F7")->detail.find("10") != std::string::npos);

  auto asym = Nonlinearity::asym_linear({4.0}, p);
  auto rep2 = check_hypotheses(asym, p, hypothesis_names());
  for (const auto& r : rep2.results) MESSAGE("asym " << r.name << " " << r.pass << ": " << r.detail);
  for (const auto& h : theorem_hypotheses(1)) CHECK_MESSAGE(passes(rep2, h), h);
  CHECK_FALSE(passes(rep2, "F6"));
  CHECK(rep2.find("F6")->witness_r > 0.0);

  // the (F3) margin check sees the potential
  auto weak = Nonlinearity::asym_linear_unchecked({0.8});
  CHECK_FALSE(passes(check_hypotheses(weak, p, {"F3"}), "F3"));
  ProblemParameters bad;
  bad.omega = 1.5;
  CHECK_FALSE(passes(check_hypotheses(power, bad, {"omega"}), "omega"));
  CHECK_THROWS_AS(check_hypotheses(power, p, {"F9"}), std::invalid_argument);
}
