#include "dirac_graph/secular.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <Eigen/LU>

namespace dgraph {

namespace {

const Complex I1(0.0, 1.0);

struct QuotientData {
  MetricGraph graph;
  std::vector<double> mass;  // a + V_e per quotient edge
};

QuotientData quotient_data(const PeriodicGraph& g, const ProblemParameters& p) {
  if (!p.V.piecewise_constant())
    throw std::invalid_argument("secular oracle needs a piecewise-constant potential");
  p.validate();
  const PeriodicClosure cell = bloch_cell(g);
  QuotientData q{cell.graph(), {}};
  if (p.V.values().size() != 1 && static_cast<int>(p.V.values().size()) != cell.cell_edge_count())
    throw std::invalid_argument("potential needs one value per cell edge");
  for (int e = 0; e < q.graph.edge_count(); ++e)
    q.mass.push_back(p.a + p.V.edge_value(cell.edge_origin(e)));
  return q;
}

Complex determinant(const QuotientData& q, const BlochPhase& theta, double lambda) {
  const MetricGraph& G = q.graph;
  const int E = G.edge_count();
  Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(2 * E, 2 * E);
  // column 2e: u^1_e(0), column 2e + 1: u^2_e(0)
  struct Trace {
    Eigen::RowVector2cd u1, u2;  // coefficients acting on (u^1_e(0), u^2_e(0))
    int edge;
    double sign;
  };
  int row = 0;
  for (int v = 0; v < G.vertex_count(); ++v) {
    std::vector<Trace> traces;
    for (const EdgeEnd& end : G.incident(v)) {
      const Edge& ed = G.edge(end.edge);
      Trace t;
      t.edge = end.edge;
      if (end.end == End::start) {
        t.u1 << 1.0, 0.0;
        t.u2 << 0.0, 1.0;
        t.sign = 1.0;
      } else {
        const double m = q.mass[end.edge];
        const auto [c, s] = transfer_coefficients(m * m - lambda * lambda, ed.length);
        const Complex back = std::polar(1.0, -(theta[0] * ed.winding[0] + theta[1] * ed.winding[1]));
        t.u1 << back * c, back * s * I1 * (lambda + m);
        t.u2 << back * s * I1 * (lambda - m), back * c;
        t.sign = -1.0;
      }
      traces.push_back(t);
    }
    for (size_t k = 1; k < traces.size(); ++k) {
      C.block<1, 2>(row, 2 * traces[0].edge) += traces[0].u1;
      C.block<1, 2>(row, 2 * traces[k].edge) -= traces[k].u1;
      ++row;
    }
    for (const Trace& t : traces) C.block<1, 2>(row, 2 * t.edge) += t.sign * t.u2;
    ++row;
  }
  return C.partialPivLu().determinant();
}

}  // namespace

std::pair<double, double> transfer_coefficients(double q, double x) {
  const double z = q * x * x;
  if (std::abs(z) < 1e-4) {
    const double c = 1.0 + z / 2.0 + z * z / 24.0 + z * z * z / 720.0;
    const double s = x * (1.0 + z / 6.0 + z * z / 120.0 + z * z * z / 5040.0);
    return {c, s};
  }
  if (q > 0.0) {
    const double k = std::sqrt(q);
    return {std::cosh(k * x), std::sinh(k * x) / k};
  }
  const double k = std::sqrt(-q);
  return {std::cos(k * x), std::sin(k * x) / k};
}

Complex secular_determinant(const PeriodicGraph& g, const ProblemParameters& p,
                            const BlochPhase& theta, double lambda) {
  return determinant(quotient_data(g, p), theta, lambda);
}

SecularResult secular_bands(const PeriodicGraph& g, const ProblemParameters& p,
                            const BlochPhase& theta, double lambda_min, double lambda_max,
                            const SecularOptions& opt) {
  if (!(lambda_max > lambda_min)) throw std::invalid_argument("empty lambda window");
  const QuotientData q = quotient_data(g, p);
  const double step = opt.mesh_step > 0.0 ? opt.mesh_step : 1e-3 * p.a;
  const long n = std::max<long>(2, std::lround(std::ceil((lambda_max - lambda_min) / step)));
  const double h = (lambda_max - lambda_min) / n;

  std::vector<double> mesh(n + 1);
  std::vector<Complex> det(n + 1);
  size_t ref = 0;
  for (long i = 0; i <= n; ++i) {
    mesh[i] = lambda_min + i * h;
    det[i] = determinant(q, theta, mesh[i]);
    if (std::abs(det[i]) > std::abs(det[ref])) ref = i;
  }
  SecularResult out;
  const double top = std::abs(det[ref]);
  if (top == 0.0) throw std::runtime_error("secular determinant vanishes on the whole window");
  // the determinant is a theta-dependent constant phase times a real function
  const Complex phase = std::conj(det[ref]) / top;
  std::vector<double> f(n + 1);
  for (long i = 0; i <= n; ++i) {
    const Complex z = phase * det[i];
    f[i] = z.real();
    out.max_imag_residual = std::max(out.max_imag_residual, std::abs(z.imag()) / top);
  }
  auto real_det = [&](double x) { return (phase * determinant(q, theta, x)).real(); };
  const auto tol = [&](double lo, double hi) { return std::abs(hi - lo) <= opt.tolerance; };

  for (long i = 0; i < n; ++i) {
    if (f[i] == 0.0) {
      out.roots.push_back(mesh[i]);
      continue;
    }
    if (f[i] * f[i + 1] < 0.0) {
      boost::uintmax_t iters = 200;
      const auto br = boost::math::tools::toms748_solve(real_det, mesh[i], mesh[i + 1], f[i], f[i + 1],
                                                        tol, iters);
      out.roots.push_back(0.5 * (br.first + br.second));
    }
  }
  if (f[n] == 0.0) out.roots.push_back(mesh[n]);

  // touching minima: a double root shows no sign change
  for (long i = 1; i < n; ++i) {
    const double l = std::abs(f[i - 1]), c = std::abs(f[i]), r = std::abs(f[i + 1]);
    if (!(c <= l && c <= r) || f[i - 1] * f[i] <= 0.0 || f[i] * f[i + 1] <= 0.0) continue;
    auto absf = [&](double x) { return std::abs(real_det(x)); };
    const auto mn = boost::math::tools::brent_find_minima(absf, mesh[i - 1], mesh[i + 1], 52);
    const double ratio = mn.second / std::max(l, r);
    if (ratio < 1e-6) {
      out.roots.push_back(mn.first);
      out.roots.push_back(mn.first);
      out.tangential_roots.push_back(mn.first);
    } else if (ratio < 1e-2) {
      out.suspect_intervals.emplace_back(mesh[i - 1], mesh[i + 1]);
    }
  }
  std::sort(out.roots.begin(), out.roots.end());
  return out;
}

std::vector<double> secular_positive_roots(const PeriodicGraph& g, const ProblemParameters& p,
                                           const BlochPhase& theta, int count,
                                           const SecularOptions& opt) {
  std::vector<double> roots;
  double lo = 0.0, hi = std::max(4.0, 2.0 * (p.a + p.V.sup()));
  while (static_cast<int>(roots.size()) < count) {
    const SecularResult r = secular_bands(g, p, theta, lo, hi, opt);
    for (double x : r.roots)
      if (x > 0.0) roots.push_back(x);
    lo = hi;
    hi *= 2.0;
    if (hi > 1e4) throw std::runtime_error("secular root search did not find enough roots");
  }
  roots.resize(count);
  return roots;
}

}  // namespace dgraph
