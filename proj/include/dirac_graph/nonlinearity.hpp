#pragma once

// Gauge-invariant nonlinearities F(x, u) = f_e(|u|) with x on cell edge e.
// Real form: u in C^2 is identified with (Re u1, Im u1, Re u2, Im u2).

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dirac_graph/dirac.hpp"

namespace dgraph {

using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

Vec4 realify(const Eigen::Vector2cd& u);

class Nonlinearity {
 public:
  enum class Kind { power, asym_linear };

  /// F = |u|^p / p, 2 < p < 3.
  static Nonlinearity power(double p);
  /// F = b_e (|u|^2/2 - |u| + ln(1 + |u|)); requires inf b > sup V + a + omega.
  static Nonlinearity asym_linear(std::vector<double> b, const ProblemParameters& params);
  /// Same profile without the (F3) margin check, for diagnostics.
  static Nonlinearity asym_linear_unchecked(std::vector<double> b);

  Kind kind() const { return kind_; }
  std::string name() const;
  double exponent() const { return p_; }
  const std::vector<double>& b() const { return b_; }
  double b(int cell_edge) const;
  double b_inf() const;
  double b_sup() const;

  // radial profile in r = |u|
  double f(int e, double r) const;
  double df(int e, double r) const;
  double d2f(int e, double r) const;
  double fhat(int e, double r) const;  // (1/2) f'(r) r - f(r)

  // density form G(rho) = f(sqrt(rho)); g1 = G', g2 = G''. g2 is singular at
  // rho = 0 for these profiles but only enters multiplied by O(rho) terms; it
  // is returned as 0 there.
  double g1(int e, double rho) const;
  double g2(int e, double rho) const;

  double F(int e, const Vec4& u) const { return f(e, u.norm()); }
  Vec4 F_u(int e, const Vec4& u) const;
  Mat4 F_uu(int e, const Vec4& u) const;
  double Fhat(int e, const Vec4& u) const { return fhat(e, u.norm()); }

  struct Metadata {
    double kappa = 1.0;  // (F4) exponent
    double R = 1.0;      // (F4) radius
    double nu = 0.5;     // (F5) exponent
    double sigma = 0.0;  // (F7) exponent, power only
    double r = 1.0;      // (F7) radius
  };
  const Metadata& metadata() const { return meta_; }

 private:
  Kind kind_ = Kind::power;
  double p_ = 2.5;
  std::vector<double> b_;
  Metadata meta_;
};

struct SampleSpec {
  double r_min = 1e-6;
  double r_max = 1e6;
  int radii = 200;
  int directions = 8;
  unsigned seed = 2024;
};

struct HypothesisResult {
  std::string name;
  bool pass = false;
  double constant = 0.0;  // fitted constant (c1, c2, c3, C1) or margin
  std::string detail;
  double witness_r = 0.0;  // |u| where the check failed, if it did
  int witness_edge = -1;
};

struct HypothesisReport {
  std::vector<HypothesisResult> results;
  bool all_pass() const;
  const HypothesisResult* find(const std::string& name) const;
};

/// Every hypothesis name understood by check_hypotheses.
const std::vector<std::string>& hypothesis_names();
/// Hypotheses needed for the two existence results.
const std::vector<std::string>& theorem_hypotheses(int which);  // 1: asympt. linear, 2: superlinear

HypothesisReport check_hypotheses(const Nonlinearity& nl, const ProblemParameters& params,
                                  const std::vector<std::string>& which,
                                  const SampleSpec& spec = {});

struct ConsistencyReport {
  double gradient_defect = 0.0;  // FD of F vs F_u, relative
  double hessian_defect = 0.0;   // FD of F_u vs F_uu, relative
  double gauge_defect = 0.0;     // |F_u(u) . (i u)| / (|F_u||u|)
  double evenness_defect = 0.0;  // |F_u(-u) + F_u(u)| / |F_u(u)|
};

ConsistencyReport hessian_consistency(const Nonlinearity& nl, const std::vector<Vec4>& samples,
                                      int cell_edge = 0);

}  // namespace dgraph
