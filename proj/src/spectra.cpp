#include "dirac_graph/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "dirac_graph/errors.hpp"

namespace dgraph {

namespace {

const Complex I1(0.0, 1.0);

struct DenseResult {
  Eigen::VectorXd values;
  Eigen::MatrixXcd vectors;  // symmetric coordinates
};

// u^2 -> i u^2 turns the symmetric form real when all couplings are imaginary.
DenseResult dense_real_gauge(const SparseMatrixC& S, int node_count, bool vectors) {
  const int n = static_cast<int>(S.rows());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < S.outerSize(); ++k)
    for (SparseMatrixC::InnerIterator it(S, k); it; ++it) {
      const bool rmid = it.row() >= node_count, cmid = it.col() >= node_count;
      double v = it.value().real();
      if (!rmid && cmid) v = -it.value().imag();
      if (rmid && !cmid) v = it.value().imag();
      A(it.row(), it.col()) = v;
    }
  DenseResult r;
  r.values.resize(n);
  const int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, vectors ? 'V' : 'N', 'U', n, A.data(), n,
                                  r.values.data());
  if (info != 0) throw SolverError("dsyevd failed with info " + std::to_string(info));
  if (vectors) {
    r.vectors = A.cast<Complex>();
    r.vectors.bottomRows(n - node_count) *= I1;
  }
  return r;
}

DenseResult dense_complex(const SparseMatrixC& S, bool vectors) {
  const int n = static_cast<int>(S.rows());
  Eigen::MatrixXcd A = Eigen::MatrixXcd(S);
  DenseResult r;
  r.values.resize(n);
  const int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, vectors ? 'V' : 'N', 'U', n, A.data(), n,
                                  r.values.data());
  if (info != 0) throw SolverError("zheevd failed with info " + std::to_string(info));
  if (vectors) r.vectors = std::move(A);
  return r;
}

DenseResult dense(const DiracOperator& op, bool vectors) {
  const SparseMatrixC S = op.symmetric();
  if (op.real_gauge_available()) return dense_real_gauge(S, op.grid().node_count(), vectors);
  return dense_complex(S, vectors);
}

// Shift-invert subspace iteration about zero for the `count` eigenvalues of
// smallest modulus.
DenseResult shift_invert(const SparseMatrixC& S, int count, double norm) {
  const int n = static_cast<int>(S.rows());
  const int block = std::min(n, count + std::max(10, count / 2));
  Eigen::SparseLU<SparseMatrixC> lu;
  lu.compute(S);
  if (lu.info() != Eigen::Success) throw SolverError("sparse LU of the operator failed");
  std::mt19937 rng(12345);
  std::normal_distribution<double> nd;
  Eigen::MatrixXcd X(n, block);
  for (int j = 0; j < block; ++j)
    for (int i = 0; i < n; ++i) X(i, j) = Complex(nd(rng), nd(rng));
  double worst = INFINITY;
  for (int iter = 0; iter < 500; ++iter) {
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(X);
    const Eigen::MatrixXcd Q = qr.householderQ() * Eigen::MatrixXcd::Identity(n, block);
    X = lu.solve(Q);
    // Ritz pairs of S^{-1}: plain Rayleigh-Ritz on the indefinite S would
    // produce spurious values near zero
    Eigen::MatrixXcd H = Q.adjoint() * X;
    H = 0.5 * (H + H.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    std::vector<int> order(block);
    for (int j = 0; j < block; ++j) order[j] = j;
    std::sort(order.begin(), order.end(), [&](int x, int y) {
      return std::abs(es.eigenvalues()[x]) > std::abs(es.eigenvalues()[y]);
    });
    DenseResult r;
    r.values.resize(count);
    r.vectors.resize(n, count);
    worst = 0.0;
    for (int j = 0; j < count; ++j) {
      Eigen::VectorXcd v = Q * es.eigenvectors().col(order[j]);
      v.normalize();
      const Eigen::VectorXcd Sv = S * v;
      r.values[j] = v.dot(Sv).real();
      r.vectors.col(j) = v;
      worst = std::max(worst, (Sv - r.values[j] * v).norm() / norm);
    }
    if (worst < 1e-11) {
      // orthonormalize within the converged block before returning
      Eigen::HouseholderQR<Eigen::MatrixXcd> qv(r.vectors);
      const Eigen::MatrixXcd V = qv.householderQ() * Eigen::MatrixXcd::Identity(n, count);
      Eigen::MatrixXcd Hv = V.adjoint() * (S * V);
      Hv = 0.5 * (Hv + Hv.adjoint()).eval();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ev(Hv);
      DenseResult s;
      s.values = ev.eigenvalues();
      s.vectors = V * ev.eigenvectors();
      return s;
    }
  }
  throw ConvergenceError("shift-invert iteration did not converge", worst);
}

}  // namespace

SpinorField SpectralDecomposition::vector(int i) const {
  if (vectors.cols() == 0) throw std::logic_error("decomposition holds no eigenvectors");
  return SpinorField(grid, vectors.col(i));
}

Eigen::VectorXd eigenvalues(const DiracOperator& op) { return dense(op, false).values; }

SpectralDecomposition decompose(const DiracOperator& op, int count, bool vectors) {
  const int n = op.size();
  if (count > n) throw std::invalid_argument("more eigenpairs requested than the dimension");
  const SparseMatrixC S = op.symmetric();
  SpectralDecomposition dec;
  dec.grid = op.grid_ptr();
  DenseResult r;
  if (n <= dense_limit || count < 0) {
    if (n > dense_limit) throw std::invalid_argument("full decomposition is limited to dense sizes");
    r = dense(op, vectors);
    dec.norm_estimate = r.values.cwiseAbs().maxCoeff();
    if (count >= 0 && count < n) {
      std::vector<int> order(n);
      for (int j = 0; j < n; ++j) order[j] = j;
      std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
        return std::abs(r.values[x]) < std::abs(r.values[y]);
      });
      order.resize(count);
      std::sort(order.begin(), order.end());
      DenseResult kept;
      kept.values.resize(count);
      if (vectors) kept.vectors.resize(n, count);
      for (int j = 0; j < count; ++j) {
        kept.values[j] = r.values[order[j]];
        if (vectors) kept.vectors.col(j) = r.vectors.col(order[j]);
      }
      r = std::move(kept);
    }
    dec.complete = count < 0 || count == n;
  } else {
    dec.norm_estimate = op.norm_bound();
    r = shift_invert(S, count, dec.norm_estimate);
  }
  dec.eigenvalues = r.values;
  const double zero_tol = 1e-9 * dec.norm_estimate;
  for (int i = 0; i < dec.size(); ++i) {
    if (std::abs(dec.eigenvalues[i]) < zero_tol) dec.zero.push_back(i);
    else if (dec.eigenvalues[i] > 0.0) dec.positive.push_back(i);
    else dec.negative.push_back(i);
  }
  if (vectors) {
    const Eigen::MatrixXcd SV = S * r.vectors;
    for (int i = 0; i < dec.size(); ++i)
      dec.max_residual = std::max(
          dec.max_residual,
          (SV.col(i) - r.values[i] * r.vectors.col(i)).norm() / dec.norm_estimate);
    const int m = std::min(64, dec.size());
    std::vector<int> cols;
    for (int j = 0; j < m; ++j) cols.push_back(static_cast<int>((static_cast<long>(j) * dec.size()) / m));
    Eigen::MatrixXcd sub(n, m);
    for (int j = 0; j < m; ++j) sub.col(j) = r.vectors.col(cols[j]);
    dec.orthonormality_defect =
        (sub.adjoint() * sub - Eigen::MatrixXcd::Identity(m, m)).cwiseAbs().maxCoeff();
    if (dec.max_residual > 1e-10)
      throw ConvergenceError("eigenpair residual check failed", dec.max_residual);
    dec.vectors = op.weights().cwiseSqrt().cwiseInverse().cast<Complex>().asDiagonal() * r.vectors;
  }
  return dec;
}

Eigen::VectorXcd coefficients(const SpectralDecomposition& dec, const SpinorField& f) {
  if (dec.vectors.cols() == 0) throw std::invalid_argument("decomposition holds no eigenvectors");
  if (!f.grid().same_layout(*dec.grid)) throw std::invalid_argument("field lives on a different grid");
  const Eigen::VectorXcd wf = dec.grid->weights().cast<Complex>().cwiseProduct(f.values());
  return dec.vectors.adjoint() * wf;
}

SpinorField synthesize(const SpectralDecomposition& dec, const Eigen::VectorXcd& c) {
  if (c.size() != dec.vectors.cols()) throw std::invalid_argument("coefficient count mismatch");
  return SpinorField(dec.grid, dec.vectors * c);
}

SpinorField fractional_apply(const SpectralDecomposition& dec, double s, const SpinorField& f) {
  if (!dec.complete) throw std::invalid_argument("fractional powers need a complete decomposition");
  if (!(s > 0.0 && s <= 1.0)) throw std::invalid_argument("exponent must lie in (0, 1]");
  Eigen::VectorXcd c = coefficients(dec, f);
  for (int i = 0; i < dec.size(); ++i) c[i] *= std::pow(std::abs(dec.eigenvalues[i]), s);
  return synthesize(dec, c);
}

SplitNorms split_norms(const SpectralDecomposition& dec, const SpinorField& f) {
  if (!dec.complete) throw std::invalid_argument("split norms need a complete decomposition");
  const Eigen::VectorXcd c = coefficients(dec, f);
  SplitNorms s;
  for (int i : dec.positive) {
    s.plus_sq += dec.eigenvalues[i] * std::norm(c[i]);
    s.l2_plus_sq += std::norm(c[i]);
  }
  for (int i : dec.negative) {
    s.minus_sq += -dec.eigenvalues[i] * std::norm(c[i]);
    s.l2_minus_sq += std::norm(c[i]);
  }
  for (int i : dec.zero) s.l2_zero_sq += std::norm(c[i]);
  s.y_sq = s.plus_sq + s.minus_sq;
  return s;
}

std::vector<int> spectral_window(const SpectralDecomposition& dec, double lo, double hi) {
  std::vector<int> idx;
  for (int i = 0; i < dec.size(); ++i)
    if (dec.eigenvalues[i] > lo && dec.eigenvalues[i] <= hi) idx.push_back(i);
  return idx;
}

NormInequalityReport check_norm_inequalities(const SpectralDecomposition& dec, double a,
                                             double omega, double gamma0, double gamma,
                                             int samples, unsigned seed) {
  if (!dec.complete) throw std::invalid_argument("norm checks need a complete decomposition");
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  const double slack = 1e-12;
  const double w = std::abs(omega);
  const std::vector<int> window = spectral_window(dec, gamma0, gamma);
  NormInequalityReport r;
  r.samples = samples;
  r.worst_lemma34_ratio = INFINITY;
  auto on_subspace = [&](const std::vector<int>& idx) {
    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(dec.size());
    for (int i : idx) c[i] = Complex(nd(rng), nd(rng));
    return c;
  };
  auto y_and_l2 = [&](const Eigen::VectorXcd& c) {
    double y = 0.0, l2 = 0.0;
    for (int i = 0; i < dec.size(); ++i) {
      y += std::abs(dec.eigenvalues[i]) * std::norm(c[i]);
      l2 += std::norm(c[i]);
    }
    return std::pair{y, l2};
  };
  for (int s = 0; s < samples; ++s) {
    SpinorField f(dec.grid);
    for (Eigen::Index i = 0; i < f.values().size(); ++i) f.values()[i] = Complex(nd(rng), nd(rng));
    const auto [y, l2] = y_and_l2(coefficients(dec, f));
    const double l2_direct = inner(f, f).real();
    r.worst_lemma34_ratio = std::min(r.worst_lemma34_ratio, y / (a * l2_direct));
    if (y < a * l2_direct * (1.0 - slack)) ++r.lemma34_violations;
    (void)l2;

    for (const auto* idx : {&dec.positive, &dec.negative}) {
      if (idx->empty()) continue;
      const auto [yy, ll] = y_and_l2(on_subspace(*idx));
      for (double sign : {1.0, -1.0}) {
        const double mid = yy + sign * omega * ll;
        if (mid < ((a - w) / a) * yy * (1.0 - slack) || mid > ((a + w) / a) * yy * (1.0 + slack))
          ++r.sandwich_violations;
      }
    }
    if (!window.empty()) {
      const auto [yy, ll] = y_and_l2(on_subspace(window));
      if (yy < gamma0 * ll * (1.0 - slack) || yy > gamma * ll * (1.0 + slack)) ++r.window_violations;
    }
  }
  return r;
}

std::vector<BlochPhase> theta_grid(int dim, int samples) {
  if (samples < 1) throw std::invalid_argument("need at least one theta sample");
  std::vector<BlochPhase> out;
  const double step = 2.0 * std::numbers::pi / samples;
  for (int j = 0; j < samples; ++j) {
    if (dim == 1) {
      out.push_back({j * step, 0.0});
      continue;
    }
    for (int k = 0; k < samples; ++k) out.push_back({j * step, k * step});
  }
  return out;
}

double BandStructure::min_abs() const {
  double m = INFINITY;
  for (const auto& b : bands) m = std::min(m, b.cwiseAbs().minCoeff());
  return m;
}

double BandStructure::max_negative() const {
  double m = -INFINITY;
  for (const auto& b : bands)
    for (double x : b)
      if (x < 0.0) m = std::max(m, x);
  return m;
}

double BandStructure::min_positive() const {
  double m = INFINITY;
  for (const auto& b : bands)
    for (double x : b)
      if (x > 0.0) m = std::min(m, x);
  return m;
}

std::vector<double> BandStructure::positive_band(int n) const {
  std::vector<double> out;
  for (const auto& b : bands) {
    int seen = 0;
    double value = NAN;
    for (double x : b)
      if (x > 0.0 && seen++ == n) {
        value = x;
        break;
      }
    if (std::isnan(value)) throw std::out_of_range("band index beyond the kept eigenvalues");
    out.push_back(value);
  }
  return out;
}

BandStructure band_sweep(const PeriodicGraph& g, double cells_per_unit_length,
                         const ProblemParameters& p, const std::vector<BlochPhase>& thetas,
                         int m) {
  for (const auto& t : thetas)
    for (double x : t)
      if (!(x >= 0.0 && x < 2.0 * std::numbers::pi + 1e-12))
        throw std::invalid_argument("theta samples must lie in [0, 2 pi)");
  const PeriodicClosure cell = bloch_cell(g);
  auto grid = GraphGrid::uniform(cell.graph(), cells_per_unit_length);
  if (m > grid->size()) throw std::invalid_argument("more bands requested than the cell dimension");
  BandStructure bs;
  bs.dim = g.dim();
  bs.thetas = thetas;
  for (const auto& t : thetas) {
    const Eigen::VectorXd ev = eigenvalues(assemble(cell, grid, p, t));
    std::vector<double> kept(ev.data(), ev.data() + ev.size());
    std::stable_sort(kept.begin(), kept.end(),
                     [](double x, double y) { return std::abs(x) < std::abs(y); });
    kept.resize(m);
    std::sort(kept.begin(), kept.end());
    bs.bands.push_back(Eigen::Map<Eigen::VectorXd>(kept.data(), m));
  }
  return bs;
}

GapReport verify_gap(const BandStructure& bands, const ProblemParameters& p, double tol_h) {
  GapReport r;
  r.min_abs_lambda = bands.min_abs();
  r.a = p.a;
  r.sup_V = p.V.sup();
  r.tol_h = tol_h;
  r.lemma31_pass = r.min_abs_lambda >= p.a - tol_h;
  r.lemma33_pass = r.min_abs_lambda <= p.a + r.sup_V + tol_h;
  return r;
}

double refinement_tolerance(const BandStructure& coarse, const BandStructure& fine) {
  return std::abs(fine.min_abs() - coarse.min_abs()) + 1e-12 * std::max(1.0, fine.min_abs());
}

CutoffSample cutoff_test_function(int N, const ProblemParameters& p,
                                  double cells_per_unit_length) {
  if (N < 1) throw std::invalid_argument("cutoff radius must be positive");
  const int M = 2 * N + 4;
  const PeriodicClosure c = close_periodically(build_example(ExampleKind::chain), {M});
  auto grid = GraphGrid::uniform(c.graph(), cells_per_unit_length);
  const DiracOperator op = assemble(c, grid, p);
  const int centre = N + 2;
  auto eta = [&](int v) {
    return std::clamp(static_cast<double>(N - std::abs(v - centre)), 0.0, 1.0);
  };
  SpinorField u(grid);
  double deriv = 0.0;
  for (int e = 0; e < c.graph().edge_count(); ++e) {
    const Edge& ed = c.graph().edge(e);
    const int n = grid->cells(e);
    const double h = grid->spacing(e);
    const double e0 = eta(ed.tail), e1 = eta(ed.head);
    for (int j = 0; j <= n; ++j) u.values()[grid->node_dof(e, j)] = e0 + (e1 - e0) * j / n;
    for (int j = 0; j < n; ++j) {
      const double d = std::abs(u.values()[grid->node_dof(e, j + 1)] - u.values()[grid->node_dof(e, j)]) / h;
      deriv += h * d * d;
    }
  }
  const double norm = std::sqrt(inner(u, u).real());
  u *= 1.0 / norm;
  const SpinorField Au = op.apply(u);
  CutoffSample s;
  s.N = N;
  s.derivative_sq = deriv / (norm * norm);
  s.norm_Av = std::sqrt(inner(Au, Au).real());
  s.norm = std::sqrt(inner(u, u).real());
  return s;
}

QuadratureValue interpolation_constant(double theta) {
  if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("theta must lie in (0, 1)");
  const double Y = 40.0 / std::min(theta, 1.0 - theta);
  auto integrand = [theta](double y) {
    if (y > 0.0) return std::exp(-theta * y) / (1.0 + std::exp(-y));
    return std::exp((1.0 - theta) * y) / (1.0 + std::exp(y));
  };
  auto trapezoid = [&](double h) {
    const long n = std::lround(2.0 * Y / h);
    double s = 0.5 * (integrand(-Y) + integrand(Y));
    for (long i = 1; i < n; ++i) s += integrand(-Y + i * h);
    return s * h;
  };
  const double coarse = trapezoid(0.02);
  const double fine = trapezoid(0.01);
  return {fine, std::abs(fine - coarse)};
}

double k_functional_scalar(double D, double t, double f_norm_sq) {
  return t * D / (1.0 + t * D) * f_norm_sq;
}

InterpolationReport interpolation_identity_check(const DiracOperator& op,
                                                 const SpectralDecomposition& dec,
                                                 double theta, const SpinorField& f,
                                                 int t_points, unsigned seed) {
  if (!dec.complete) throw std::invalid_argument("interpolation check needs a complete decomposition");
  if (t_points < 3) throw std::invalid_argument("need at least three t samples");
  InterpolationReport r;
  r.theta = theta;
  const QuadratureValue ct = interpolation_constant(theta);
  r.c_theta = ct.value;
  r.c_theta_error = ct.error_estimate;
  if (ct.error_estimate > 1e-8) throw ConvergenceError("C_theta quadrature did not settle", ct.error_estimate);

  const Eigen::VectorXcd c = coefficients(dec, f);
  Eigen::VectorXd D(dec.size());
  for (int i = 0; i < dec.size(); ++i) D[i] = 1.0 + dec.eigenvalues[i] * dec.eigenvalues[i];

  const Eigen::VectorXd& w = op.weights();
  const SparseMatrixC& K = op.stiffness();
  const Eigen::VectorXcd winv = w.cwiseInverse().cast<Complex>();
  const SparseMatrixC KWK = K * (winv.asDiagonal() * K);
  SparseMatrixC Wm(op.size(), op.size());
  Wm.setIdentity();
  Wm = w.cast<Complex>().asDiagonal() * Wm;
  const Eigen::VectorXcd wf = w.cast<Complex>().cwiseProduct(f.values());
  auto wnorm_sq = [&](const Eigen::VectorXcd& x) { return inner(w, x, x).real(); };
  auto k_value = [&](const Eigen::VectorXcd& x1, double t) {
    const Eigen::VectorXcd Mx = winv.cwiseProduct(K * x1);
    return wnorm_sq(f.values() - x1) + t * (wnorm_sq(x1) + wnorm_sq(Mx));
  };

  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  const double lmin = std::log(1e-8), lmax = std::log(1e8);
  const double step = (lmax - lmin) / (t_points - 1);
  Eigen::SimplicialLDLT<SparseMatrixC> ldlt;
  bool analysed = false;
  double integral = 0.0;
  for (int j = 0; j < t_points; ++j) {
    const double t = std::exp(lmin + j * step);
    const SparseMatrixC A = Wm + t * (Wm + KWK);
    if (!analysed) {
      ldlt.analyzePattern(A);
      analysed = true;
    }
    ldlt.factorize(A);
    if (ldlt.info() != Eigen::Success) throw SolverError("K-functional solve failed");
    const Eigen::VectorXcd x1 = ldlt.solve(wf);
    const double kd = k_value(x1, t);
    double ks = 0.0;
    for (int i = 0; i < dec.size(); ++i) ks += k_functional_scalar(D[i], t, std::norm(c[i]));
    r.max_route_disagreement = std::max(r.max_route_disagreement, std::abs(kd - ks) / ks);
    if (j % 40 == 0) {
      const double scale = 1e-3 * std::sqrt(wnorm_sq(x1)) / std::sqrt(static_cast<double>(op.size()));
      for (int trial = 0; trial < 5; ++trial) {
        Eigen::VectorXcd d(op.size());
        for (int i = 0; i < op.size(); ++i) d[i] = scale * Complex(nd(rng), nd(rng));
        ++r.minimality_trials;
        if (k_value(x1 + d, t) < kd) ++r.minimality_violations;
      }
    }
    const double wt = (j == 0 || j == t_points - 1) ? 0.5 : 1.0;
    integral += wt * std::pow(t, -theta) * kd * step;
  }
  const double f_sq = inner(w, f.values(), f.values()).real();
  const Eigen::VectorXcd Mf = winv.cwiseProduct(K * f.values());
  const double df = f_sq + wnorm_sq(Mf);
  integral += df * std::pow(1e-8, 1.0 - theta) / (1.0 - theta);
  integral += f_sq * std::pow(1e8, -theta) / theta;
  r.lhs = integral;
  double dtheta = 0.0;
  for (int i = 0; i < dec.size(); ++i) dtheta += std::pow(D[i], theta) * std::norm(c[i]);
  r.rhs = r.c_theta * dtheta;
  r.ratio = r.lhs / r.rhs;
  return r;
}

}  // namespace dgraph
