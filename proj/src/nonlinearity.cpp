#include "dirac_graph/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "dirac_graph/errors.hpp"

namespace dgraph {

namespace {

// r^2/2 - r + ln(1 + r) = sum_{k>=3} (-1)^{k+1} r^k / k, summed directly for
// small r where the closed form cancels
double asym_profile(double r) {
  if (r >= 0.5) return 0.5 * r * r - r + std::log1p(r);
  double term = r * r * r, sum = 0.0;
  for (int k = 3; k < 80; ++k) {
    const double t = ((k % 2) ? 1.0 : -1.0) * term / k;
    sum += t;
    if (std::abs(t) < 1e-18 * std::abs(sum)) break;
    term *= r;
  }
  return sum;
}

Vec4 times_i(const Vec4& u) { return Vec4(-u[1], u[0], -u[3], u[2]); }

}  // namespace

Vec4 realify(const Eigen::Vector2cd& u) {
  return Vec4(u[0].real(), u[0].imag(), u[1].real(), u[1].imag());
}

Nonlinearity Nonlinearity::power(double p) {
  if (!(p > 2.0 && p < 3.0))
    throw HypothesisError("power exponent must lie in (2, 3): (F5) needs nu = p - 2 in (0, 1)");
  Nonlinearity nl;
  nl.kind_ = Kind::power;
  nl.p_ = p;
  nl.b_ = {1.0};
  nl.meta_.kappa = 1.0;
  nl.meta_.R = 1.0;
  nl.meta_.nu = p - 2.0;
  nl.meta_.sigma = p / (p - 2.0);
  nl.meta_.r = 1.0;
  return nl;
}

Nonlinearity Nonlinearity::asym_linear_unchecked(std::vector<double> b) {
  if (b.empty()) throw std::invalid_argument("asym_linear needs at least one coefficient");
  for (double x : b)
    if (!(x > 0.0) || !std::isfinite(x)) throw std::invalid_argument("coefficients b must be positive");
  Nonlinearity nl;
  nl.kind_ = Kind::asym_linear;
  nl.b_ = std::move(b);
  nl.meta_.kappa = 1.0;
  nl.meta_.R = 1.0;
  nl.meta_.nu = 0.5;
  nl.meta_.sigma = 0.0;
  return nl;
}

Nonlinearity Nonlinearity::asym_linear(std::vector<double> b, const ProblemParameters& params) {
  Nonlinearity nl = asym_linear_unchecked(std::move(b));
  const double need = params.V.sup() + params.a + params.omega;
  if (!(nl.b_inf() > need)) {
    std::ostringstream os;
    os << "(F3) violated: inf b = " << nl.b_inf() << " must exceed sup V + a + omega = " << need;
    throw HypothesisError(os.str());
  }
  return nl;
}

std::string Nonlinearity::name() const { return kind_ == Kind::power ? "power" : "asym_linear"; }

double Nonlinearity::b(int e) const {
  if (b_.size() == 1) return b_[0];
  return b_.at(e);
}

double Nonlinearity::b_inf() const { return *std::min_element(b_.begin(), b_.end()); }
double Nonlinearity::b_sup() const { return *std::max_element(b_.begin(), b_.end()); }

double Nonlinearity::f(int e, double r) const {
  if (kind_ == Kind::power) return std::pow(r, p_) / p_;
  return b(e) * asym_profile(r);
}

double Nonlinearity::df(int e, double r) const {
  if (kind_ == Kind::power) return std::pow(r, p_ - 1.0);
  return b(e) * r * r / (1.0 + r);
}

double Nonlinearity::d2f(int e, double r) const {
  if (kind_ == Kind::power) return (p_ - 1.0) * std::pow(r, p_ - 2.0);
  const double s = 1.0 + r;
  return b(e) * r * (2.0 + r) / (s * s);
}

double Nonlinearity::fhat(int e, double r) const {
  if (kind_ == Kind::power) return (0.5 - 1.0 / p_) * std::pow(r, p_);
  return 0.5 * df(e, r) * r - f(e, r);
}

double Nonlinearity::g1(int e, double rho) const {
  const double r = std::sqrt(rho);
  if (kind_ == Kind::power) return 0.5 * std::pow(rho, 0.5 * p_ - 1.0);
  return 0.5 * b(e) * r / (1.0 + r);
}

double Nonlinearity::g2(int e, double rho) const {
  if (rho <= 0.0) return 0.0;
  const double r = std::sqrt(rho);
  if (kind_ == Kind::power) return 0.25 * (p_ - 2.0) * std::pow(rho, 0.5 * p_ - 2.0);
  return 0.25 * b(e) / (r * (1.0 + r) * (1.0 + r));
}

Vec4 Nonlinearity::F_u(int e, const Vec4& u) const {
  return 2.0 * g1(e, u.squaredNorm()) * u;
}

Mat4 Nonlinearity::F_uu(int e, const Vec4& u) const {
  const double rho = u.squaredNorm();
  return 2.0 * g1(e, rho) * Mat4::Identity() + 4.0 * g2(e, rho) * u * u.transpose();
}

bool HypothesisReport::all_pass() const {
  return std::all_of(results.begin(), results.end(), [](const auto& r) { return r.pass; });
}

const HypothesisResult* HypothesisReport::find(const std::string& name) const {
  for (const auto& r : results)
    if (r.name == name) return &r;
  return nullptr;
}

const std::vector<std::string>& hypothesis_names() {
  static const std::vector<std::string> names = {"omega", "V1", "F0", "F1", "F2", "F3",
                                                 "F4",    "F5", "F6", "F7"};
  return names;
}

const std::vector<std::string>& theorem_hypotheses(int which) {
  static const std::vector<std::string> t1 = {"omega", "V1", "F0", "F1", "F2", "F3", "F4", "F5"};
  static const std::vector<std::string> t2 = {"omega", "V1", "F0", "F1", "F2", "F5", "F6", "F7"};
  if (which == 1) return t1;
  if (which == 2) return t2;
  throw std::invalid_argument("theorem index must be 1 or 2");
}

HypothesisReport check_hypotheses(const Nonlinearity& nl, const ProblemParameters& params,
                                  const std::vector<std::string>& which, const SampleSpec& spec) {
  if (!(spec.r_min > 0.0 && spec.r_max > spec.r_min && spec.radii >= 10 && spec.directions >= 1))
    throw std::invalid_argument("invalid hypothesis sample specification");
  std::vector<double> radii(spec.radii);
  const double lr = std::log(spec.r_min), step = (std::log(spec.r_max) - lr) / (spec.radii - 1);
  for (int i = 0; i < spec.radii; ++i) radii[i] = std::exp(lr + i * step);
  std::vector<Vec4> dirs;
  std::mt19937 rng(spec.seed);
  std::normal_distribution<double> nd;
  for (int k = 0; k < spec.directions; ++k) {
    Vec4 d(nd(rng), nd(rng), nd(rng), nd(rng));
    dirs.push_back(d.normalized());
  }
  const int edges = static_cast<int>(nl.b().size());
  const auto& meta = nl.metadata();

  // max / min of a sampled quantity over edges, directions and a radius range
  auto scan = [&](auto&& q, double lo, double hi, bool want_max, double& where, int& edge) {
    double best = want_max ? -INFINITY : INFINITY;
    for (int e = 0; e < edges; ++e)
      for (double r : radii) {
        if (r < lo || r > hi) continue;
        for (const Vec4& d : dirs) {
          const double v = q(e, Vec4(r * d));
          if (want_max ? v > best : v < best) {
            best = v;
            where = r;
            edge = e;
          }
        }
      }
    return best;
  };
  // value of a radial quantity at one radius, worst case over edges/directions
  auto at = [&](auto&& q, double r, bool want_max) {
    double best = want_max ? -INFINITY : INFINITY;
    for (int e = 0; e < edges; ++e)
      for (const Vec4& d : dirs) {
        const double v = q(e, Vec4(r * d));
        best = want_max ? std::max(best, v) : std::min(best, v);
      }
    return best;
  };

  HypothesisReport rep;
  for (const std::string& h : which) {
    HypothesisResult res;
    res.name = h;
    std::ostringstream os;
    double w = 0.0;
    int we = -1;
    if (h == "omega") {
      res.pass = std::abs(params.omega) < params.a;
      res.constant = params.a - std::abs(params.omega);
      os << "|omega| = " << std::abs(params.omega) << ", a = " << params.a;
    } else if (h == "V1") {
      res.pass = params.V.inf() >= 0.0 && std::isfinite(params.V.sup());
      res.constant = params.V.sup();
      os << "V stored per cell edge, inf V = " << params.V.inf() << ", sup V = " << params.V.sup();
    } else if (h == "F0") {
      const double m = scan([&](int e, const Vec4& u) { return nl.F(e, u); }, 0.0, INFINITY, false, w, we);
      res.pass = m >= 0.0 && nl.F(0, Vec4::Zero()) == 0.0;
      res.constant = m;
      os << "min F over samples = " << m;
      if (!res.pass) res.witness_r = w, res.witness_edge = we;
    } else if (h == "F1") {
      res.pass = true;
      os << "coefficients stored per cell edge (" << edges << "), periodic by construction";
    } else if (h == "F2") {
      auto ratio = [&](int e, const Vec4& u) { return nl.F_u(e, u).norm() / u.norm(); };
      const double small = at(ratio, radii.front(), true);
      const double one = at(ratio, 1.0, false);
      bool monotone = true;
      double prev = -INFINITY;
      for (double r : radii) {
        if (r > 1.0) break;
        const double v = at(ratio, r, true);
        if (v < prev * (1.0 - 1e-12)) monotone = false;
        prev = v;
        if (!monotone && res.witness_r == 0.0) res.witness_r = r;
      }
      res.pass = monotone && small <= 1e-2 * one;
      res.constant = small / one;
      os << "|F_u|/|u| at r_min relative to r = 1: " << small / one;
    } else if (h == "F3") {
      const double margin = nl.b_inf() - (params.V.sup() + params.a + params.omega);
      if (nl.kind() != Nonlinearity::Kind::asym_linear) {
        auto ratio = [&](int e, const Vec4& u) { return nl.F_u(e, u).norm() / u.norm(); };
        const double big = at(ratio, radii.back(), true);
        res.pass = false;
        os << "not asymptotically linear: |F_u|/|u| = " << big << " at r_max";
        res.witness_r = radii.back();
      } else {
        auto defect = [&](int e, const Vec4& u) {
          return (nl.F_u(e, u) - nl.b(e) * u).norm() / (nl.b(e) * u.norm());
        };
        const double tail = at(defect, radii.back(), true);
        res.pass = tail < 1e-2 && margin > 0.0;
        res.constant = margin;
        os << "|F_u - b u|/(b|u|) at r_max = " << tail << ", inf b - (sup V + a + omega) = " << margin;
      }
    } else if (h == "F4") {
      const double kappa = meta.kappa;
      const double minpos = scan([&](int e, const Vec4& u) { return nl.Fhat(e, u); }, 0.0, INFINITY, false, w, we);
      const double c1 = 0.9 * scan([&](int e, const Vec4& u) { return nl.Fhat(e, u) / std::pow(u.norm(), kappa); },
                                   meta.R, INFINITY, false, w, we);
      res.pass = kappa > 0.0 && kappa < 2.0 && minpos > 0.0 && c1 > 0.0;
      res.constant = c1;
      os << "kappa = " << kappa << ", R = " << meta.R << ", c1 = " << c1 << ", min Fhat = " << minpos;
      if (!res.pass) res.witness_r = w, res.witness_edge = we;
    } else if (h == "F5") {
      const double nu = meta.nu;
      auto ratio = [&](int e, const Vec4& u) {
        return nl.F_uu(e, u).operatorNorm() / (1.0 + std::pow(u.norm(), nu));
      };
      const double c = scan(ratio, 0.0, INFINITY, true, w, we);
      const double tail = at(ratio, radii.back(), true);
      const double before = at(ratio, radii.back() * 1e-2, true);
      res.pass = nu > 0.0 && nu < 1.0 && tail <= 1.05 * before;
      res.constant = 1.1 * c;
      os << "nu = " << nu << ", C1 = " << res.constant << ", tail ratio growth = " << tail / before;
      if (!res.pass) res.witness_r = radii.back();
    } else if (h == "F6") {
      auto q = [&](int e, const Vec4& u) { return nl.F(e, u) / u.squaredNorm(); };
      const double hi = at(q, radii.back(), false);
      const double lo = at(q, radii.back() * 1e-3, true);
      res.pass = hi >= 10.0 * lo;
      res.constant = hi / lo;
      os << "F/|u|^2 grows by " << hi / lo << " over the last three decades";
      if (!res.pass) res.witness_r = radii.back();
    } else if (h == "F7") {
      auto q2 = [&](int e, const Vec4& u) { return nl.Fhat(e, u) / u.squaredNorm(); };
      const double c2 = 0.9 * scan(q2, meta.r, INFINITY, false, w, we);
      const bool i_ok = c2 > 0.0 && at(q2, radii.back(), false) >= 0.5 * at(q2, meta.r, false);
      const double sigma = meta.sigma;
      bool ii_ok = sigma > 1.0;
      double c3 = NAN;
      if (ii_ok) {
        auto q3 = [&](int e, const Vec4& u) {
          const double r = u.norm();
          return std::pow(nl.F_u(e, u).norm(), sigma) / (nl.Fhat(e, u) * std::pow(r, sigma));
        };
        const double raw = scan(q3, meta.r, INFINITY, true, w, we);
        const double tail = at(q3, radii.back(), true), before = at(q3, radii.back() * 1e-2, true);
        ii_ok = std::isfinite(raw) && tail <= 1.05 * before;
        c3 = 1.1 * raw;
        os << "(ii) sigma = " << sigma << ", max |F_u|^sigma/(Fhat |u|^sigma) = " << raw << ", c3 = " << c3 << "; ";
      } else {
        os << "(ii) no exponent sigma > 1 for this nonlinearity; ";
      }
      os << "(i) c2 = " << c2 << (i_ok ? "" : " (Fhat/|u|^2 decays)");
      res.pass = i_ok && ii_ok;
      res.constant = c2;
      if (!res.pass) res.witness_r = radii.back();
    } else {
      throw std::invalid_argument("unknown hypothesis '" + h + "'");
    }
    res.detail = os.str();
    rep.results.push_back(res);
  }
  return rep;
}

ConsistencyReport hessian_consistency(const Nonlinearity& nl, const std::vector<Vec4>& samples,
                                      int e) {
  ConsistencyReport rep;
  for (const Vec4& u : samples) {
    const double r = u.norm();
    if (r == 0.0) continue;
    const double eps = 1e-5 * r;
    const Vec4 g = nl.F_u(e, u);
    const Mat4 H = nl.F_uu(e, u);
    Vec4 fd;
    Mat4 hd;
    for (int k = 0; k < 4; ++k) {
      Vec4 d = Vec4::Zero();
      d[k] = eps;
      fd[k] = (nl.F(e, u + d) - nl.F(e, u - d)) / (2.0 * eps);
      hd.col(k) = (nl.F_u(e, u + d) - nl.F_u(e, u - d)) / (2.0 * eps);
    }
    rep.gradient_defect = std::max(rep.gradient_defect, (fd - g).norm() / g.norm());
    rep.hessian_defect = std::max(rep.hessian_defect, (hd - H).norm() / H.norm());
    rep.gauge_defect = std::max(rep.gauge_defect, std::abs(g.dot(times_i(u))) / (g.norm() * r));
    rep.evenness_defect = std::max(rep.evenness_defect, (nl.F_u(e, -u) + g).norm() / g.norm());
  }
  return rep;
}

}  // namespace dgraph
