#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "dirac_graph/dirac.hpp"

namespace dgraph {

/// Eigenpairs of a discrete Dirac operator. Eigenvectors are stored in field
/// coordinates and are orthonormal in the weighted inner product.
struct SpectralDecomposition {
  std::shared_ptr<const GraphGrid> grid;
  Eigen::VectorXd eigenvalues;  // ascending
  Eigen::MatrixXcd vectors;     // empty when only eigenvalues were requested
  bool complete = false;        // every eigenpair present
  double norm_estimate = 0.0;   // ||A|| (max |lambda| when complete)
  double max_residual = 0.0;    // max ||A phi - lambda phi||_W / ||A||
  double orthonormality_defect = 0.0;
  std::vector<int> positive, negative, zero;

  int size() const { return static_cast<int>(eigenvalues.size()); }
  SpinorField vector(int i) const;
};

/// Dense LAPACK path up to this dimension, shift-invert subspace iteration
/// around zero above it.
constexpr int dense_limit = 4000;

/// count < 0 requests every eigenpair; otherwise the `count` eigenvalues of
/// smallest modulus. Throws ConvergenceError if the residual check fails.
SpectralDecomposition decompose(const DiracOperator& op, int count = -1, bool vectors = true);

/// All eigenvalues, ascending (dense only).
Eigen::VectorXd eigenvalues(const DiracOperator& op);

// Spectral calculus on a complete decomposition.

/// c_i = <phi_i, f>.
Eigen::VectorXcd coefficients(const SpectralDecomposition& dec, const SpinorField& f);
SpinorField synthesize(const SpectralDecomposition& dec, const Eigen::VectorXcd& c);
/// |A|^s f; rejects incomplete decompositions and s outside (0, 1].
SpinorField fractional_apply(const SpectralDecomposition& dec, double s, const SpinorField& f);

struct SplitNorms {
  double y_sq = 0.0;      // ||f||^2 = <|A| f, f>
  double plus_sq = 0.0;   // ||f^+||^2
  double minus_sq = 0.0;  // ||f^-||^2
  double l2_plus_sq = 0.0;
  double l2_minus_sq = 0.0;
  double l2_zero_sq = 0.0;
};
SplitNorms split_norms(const SpectralDecomposition& dec, const SpinorField& f);

/// Indices with lo < lambda_i <= hi.
std::vector<int> spectral_window(const SpectralDecomposition& dec, double lo, double hi);

struct NormInequalityReport {
  int samples = 0;
  int lemma34_violations = 0;    // a |u|_2^2 <= ||u||^2
  int sandwich_violations = 0;   // ((a-|w|)/a)||u||^2 <= ||u||^2 +- w|u|_2^2 <= ((a+|w|)/a)||u||^2
  int window_violations = 0;     // g0 |u|_2^2 <= ||u||^2 <= g |u|_2^2 on the (g0, g] window
  double worst_lemma34_ratio = 0.0;  // min ||u||^2 / (a |u|_2^2)
};

/// Random corpus check of the norm inequalities. Fields are Gaussian on the
/// grid (a |u|_2^2 <= ||u||^2) or on the spectral subspaces Y^+, Y^- and the window.
NormInequalityReport check_norm_inequalities(const SpectralDecomposition& dec, double a,
                                             double omega, double gamma0, double gamma,
                                             int samples, unsigned seed);

// Floquet-Bloch bands.

std::vector<BlochPhase> theta_grid(int dim, int samples_per_direction);

struct BandStructure {
  int dim = 1;
  std::vector<BlochPhase> thetas;
  std::vector<Eigen::VectorXd> bands;  // per theta: kept eigenvalues, ascending

  double min_abs() const;
  double max_negative() const;
  double min_positive() const;
  /// n-th positive eigenvalue (0-based) at every theta.
  std::vector<double> positive_band(int n) const;
};

/// Keeps the m eigenvalues of smallest modulus per theta on the Bloch cell.
BandStructure band_sweep(const PeriodicGraph& g, double cells_per_unit_length,
                         const ProblemParameters& p, const std::vector<BlochPhase>& thetas,
                         int m);

struct GapReport {
  double min_abs_lambda = 0.0;
  double a = 0.0;
  double sup_V = 0.0;
  double tol_h = 0.0;
  bool lemma31_pass = false;  // min |lambda| >= a - tol_h
  bool lemma33_pass = false;  // min |lambda| <= a + sup V + tol_h
};

GapReport verify_gap(const BandStructure& bands, const ProblemParameters& p, double tol_h);

/// tol_h from two resolutions: |min|lambda|_fine - min|lambda|_coarse| plus a
/// rounding floor.
double refinement_tolerance(const BandStructure& coarse, const BandStructure& fine);

struct CutoffSample {
  int N = 0;
  double derivative_sq = 0.0;  // |v_N'|_2^2
  double norm_Av = 0.0;        // |A v_N|_2
  double norm = 0.0;           // |v_N|_2, one up to rounding
};

/// Chain closure with 2N + 4 cells, eta_N = 1 on the N - 1 cells around the
/// centre vertex, linear ramps of one cell, v_N = (eta_N, 0) / |eta_N|_2.
CutoffSample cutoff_test_function(int N, const ProblemParameters& p,
                                  double cells_per_unit_length);

// Interpolation identity for the pair (L^2, D(A)) with D = 1 + A^2.

struct QuadratureValue {
  double value = 0.0;
  double error_estimate = 0.0;
};

/// C_theta = int_0^inf s^{-theta} (1 + s)^{-1} ds by trapezoid in y = ln s.
QuadratureValue interpolation_constant(double theta);

/// K(t, f) = <t D (1 + t D)^{-1} f, f> for a scalar D and |f|^2.
double k_functional_scalar(double D, double t, double f_norm_sq);

struct InterpolationReport {
  double theta = 0.5;
  double lhs = 0.0;  // int t^{-theta} K(t, f) dt / t
  double rhs = 0.0;  // C_theta <D^theta f, f>
  double ratio = 0.0;
  double c_theta = 0.0;
  double c_theta_error = 0.0;
  double max_route_disagreement = 0.0;  // spectral vs direct-solve K, relative
  int minimality_trials = 0;
  int minimality_violations = 0;
};

/// t-grid: t_points log-spaced over [1e-8, 1e8] plus analytic tail terms.
InterpolationReport interpolation_identity_check(const DiracOperator& op,
                                                 const SpectralDecomposition& dec,
                                                 double theta, const SpinorField& f,
                                                 int t_points, unsigned seed);

}  // namespace dgraph
