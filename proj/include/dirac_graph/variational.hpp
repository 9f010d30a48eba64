#pragma once

// Action functional, gradient, bound-state solver and linking diagnostics on
// a periodic closure.
//
// Psi(u) = sum_m h_m G(rho_m) with rho_m the midpoint density, so that the
// discrete identity Phi(u) - <G(u), u>/2 = sum_m h_m Fhat(rho_m) holds exactly.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dirac_graph/dirac.hpp"
#include "dirac_graph/errors.hpp"
#include "dirac_graph/nonlinearity.hpp"
#include "dirac_graph/spectra.hpp"

namespace dgraph {

struct ActionContext {
  std::shared_ptr<const PeriodicGraph> periodic;
  std::shared_ptr<const PeriodicClosure> closure;
  std::shared_ptr<const DiracOperator> op;
  std::shared_ptr<const SpectralDecomposition> decomposition;  // may be null
  ProblemParameters params;
  Nonlinearity nonlinearity;
  double cells_per_unit = 0.0;

  // midpoint m couples nodes mid_nodes[m] and itself
  std::vector<std::array<int, 2>> mid_nodes;
  Eigen::VectorXd mid_h;
  std::vector<int> mid_cell_edge;

  const GraphGrid& grid() const { return op->grid(); }
  const Eigen::VectorXd& weights() const { return op->weights(); }
  std::shared_ptr<const GraphGrid> grid_ptr() const { return op->grid_ptr(); }
};

/// Assembles the operator on the closure; with_decomposition runs the dense
/// eigensolver (needed by action() and linking_diagnostics()).
ActionContext make_context(const PeriodicGraph& g, const std::vector<int>& cells,
                           double cells_per_unit, const ProblemParameters& params,
                           const Nonlinearity& nl, bool with_decomposition);

double psi(const ActionContext& ctx, const SpinorField& f);
double fhat_integral(const ActionContext& ctx, const SpinorField& f);

/// Phi via the spectral splitting; cross-checked against the quadratic form.
/// Throws std::invalid_argument without a complete decomposition.
double action(const ActionContext& ctx, const SpinorField& f);
/// Phi via (1/2)<Au, u>; no decomposition needed.
double action_quadratic(const ActionContext& ctx, const SpinorField& f);

/// L^2 gradient Au + omega u - F_u(u).
SpinorField gradient(const ActionContext& ctx, const SpinorField& f);
double gradient_norm(const ActionContext& ctx, const SpinorField& f);

struct BoundState {
  SpinorField field;
  double omega = 0.0;
  double a = 0.0;
  double residual = 0.0;  // ||G(u)||_{L^2}
  double action = 0.0;
  double fhat_integral = 0.0;
  double l2_norm = 0.0;
  double cells_per_unit = 0.0;
  Shift cells{1, 1};
  int iterations = 0;
  int reseeds = 0;
};

class BoundStateError : public SolverError {
 public:
  enum class Reason { max_iter, converged_to_zero, deflated, stalled };
  BoundStateError(Reason r, const std::string& what) : SolverError(what), reason_(r) {}
  Reason reason() const { return reason_; }

 private:
  Reason reason_;
};

struct InitSpec {
  enum class Kind { band_edge_mode, bump, given };
  Kind kind = Kind::band_edge_mode;
  // band_edge_mode: amplitude guess refined by a line search on ||G||
  double scale = 0.5;
  // centre of the envelope / bump: closure edge and arclength on it
  int edge = 0;
  double position = 0.0;
  double width = 1.0;  // bump only
  double amplitude = 1.0;
  std::optional<SpinorField> field;

  static InitSpec band_edge(double scale);
  static InitSpec bump(int edge, double position, double width, double amplitude);
  static InitSpec given(SpinorField f);
};

struct SolveOptions {
  double tol = 1e-10;
  int max_iter = 80;
  double lm_start = 1e-3;
  double distinct_threshold = 0.1;
  int retry_budget = 8;
};

SpinorField initial_guess(const ActionContext& ctx, const InitSpec& init);

/// exp(-(d/width)^2) with d the graph distance to the point (edge, position);
/// amp1 times the profile on the nodes, amp2 times it on the midpoints.
SpinorField bump_field(std::shared_ptr<const GraphGrid> grid, int edge, double position,
                       double width, Complex amp1, Complex amp2 = 0.0);

/// Levenberg-Marquardt Newton on G(u) = 0 with the gauge constraint
/// Im <u_0, u> = 0 as an extra row. States whose orbit lies within
/// distinct_threshold of a deflated state are rejected and re-seeded.
BoundState solve_bound_state(const ActionContext& ctx, const InitSpec& init,
                             const SolveOptions& opt = {},
                             const std::vector<BoundState>& deflation = {});

/// min over k and phase of ||u2 - e^{i t} k*u1|| / max(||u1||, ||u2||).
double orbit_distance(const PeriodicClosure& c, const SpinorField& u1, const SpinorField& u2);

/// L^2 distance between a state on a grid and one on the twice refined grid
/// (u^1 injected at the coarse nodes, u^2 averaged over the two fine
/// midpoints), after optimal phase alignment.
double refinement_distance(const SpinorField& coarse, const SpinorField& fine);

struct LinkingReport {
  std::vector<double> rho_grid;
  std::vector<double> min_phi;  // inf Phi on the sampled Y^+ sphere, per radius
  double rho = 0.0;
  double eta = 0.0;
  double slope = 0.0;  // log min Phi vs log rho over the smallest radii
  int slope_points = 0;
  double R1 = 0.0;
  double max_boundary_q = 0.0;
  double max_y_minus = 0.0;
  double max_y_minus_bound_defect = 0.0;  // Phi + ((a - |w|)/(2a)) ||u||^2, should be <= 0
  int samples = 0;
  unsigned seed = 0;
  bool eta_positive = false;
  bool boundary_q_nonpositive = false;
  bool y_minus_nonpositive = false;
  std::vector<std::string> diagnostics;
};

LinkingReport linking_diagnostics(const ActionContext& ctx, const std::vector<double>& rho_grid,
                                  int samples, unsigned seed);

struct ResidualReport {
  std::vector<double> edge_residual;  // max |G| over the DOFs of each closure edge
  double residual = 0.0;
  VertexConditionReport vertex;
  std::vector<double> cell_profile;  // max |u| per cell
  double action = 0.0;
  double fhat_integral = 0.0;
  double identity_defect = 0.0;  // |Phi - int Fhat - <G,u>/2|
  double l2_norm = 0.0;
  bool has_split = false;
  double plus_sq = 0.0;
  double minus_sq = 0.0;
  bool lemma34 = true;  // ||u||^2 >= a |u|_2^2
};

ResidualReport residual_report(const ActionContext& ctx, const BoundState& b);

}  // namespace dgraph
