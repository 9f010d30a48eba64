#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "dirac_graph/field.hpp"
#include "dirac_graph/graph.hpp"

namespace dgraph {

using SparseMatrixC = Eigen::SparseMatrix<Complex>;

/// Cell-periodic potential, defined per fundamental-cell edge in the edge
/// coordinate x in [0, length]. Either piecewise constant or a cosine profile
/// offset + amplitude * cos(2 pi x / length) on every edge.
class Potential {
 public:
  enum class Kind { per_edge, cosine };

  static Potential zero() { return constant(0.0); }
  static Potential constant(double value);
  static Potential per_edge(std::vector<double> values);
  static Potential cosine(double offset, double amplitude);

  Kind kind() const { return kind_; }
  double value(int cell_edge, double x, double length) const;
  bool piecewise_constant() const { return kind_ == Kind::per_edge; }
  /// Constant value on a cell edge; only meaningful when piecewise_constant().
  double edge_value(int cell_edge) const;
  double sup() const;
  double inf() const;

  const std::vector<double>& values() const { return values_; }
  double offset() const { return offset_; }
  double amplitude() const { return amplitude_; }

 private:
  Kind kind_ = Kind::per_edge;
  std::vector<double> values_{0.0};  // one entry broadcasts to every edge
  double offset_ = 0.0;
  double amplitude_ = 0.0;
};

struct ProblemParameters {
  double a = 1.0;
  double omega = 0.0;
  Potential V = Potential::zero();

  /// Throws std::invalid_argument unless a > 0, |omega| < a, V >= 0.
  void validate() const;
};

struct PhysicalScaling {
  double hbar = 1.0;
  double c = 1.0;
  double m = 1.0;
  double vartheta = 0.0;
};

struct ReducedParameters {
  double a = 0.0;
  double omega = 0.0;
  bool omega_in_gap = true;  // false on or beyond the boundary |omega| = a
};

/// a = m c^2 / (hbar c), omega = vartheta / c.
ReducedParameters reduce_scaling(const PhysicalScaling& s);

using BlochPhase = std::array<double, 2>;

/// Discrete Dirac operator M = W^{-1} K with K Hermitian ("stiffness") and W
/// the diagonal quadrature weights. Rows follow the staggered stencil; vertex
/// rows are the half-cell flux balance in which the Kirchhoff sum of u^2
/// traces cancels.
class DiracOperator {
 public:
  DiracOperator(std::shared_ptr<const GraphGrid> grid, SparseMatrixC stiffness,
                Eigen::VectorXd node_mass, Eigen::VectorXd mid_mass,
                std::optional<BlochPhase> theta, ProblemParameters params);

  const GraphGrid& grid() const { return *grid_; }
  const std::shared_ptr<const GraphGrid>& grid_ptr() const { return grid_; }
  const SparseMatrixC& stiffness() const { return stiffness_; }
  const Eigen::VectorXd& weights() const { return grid_->weights(); }
  const std::optional<BlochPhase>& bloch_phase() const { return theta_; }
  const ProblemParameters& params() const { return params_; }
  int size() const { return grid_->size(); }

  /// a + V sampled at the nodes / midpoints.
  const Eigen::VectorXd& node_mass() const { return node_mass_; }
  const Eigen::VectorXd& mid_mass() const { return mid_mass_; }

  SparseMatrixC matrix() const;
  /// W^{-1/2} K W^{-1/2}: Hermitian, same spectrum as M.
  SparseMatrixC symmetric() const;
  /// max |S_ij - conj(S_ji)| of the symmetric form; zero by construction.
  double hermiticity_defect() const;
  /// True when every off-diagonal stiffness entry is purely imaginary, so the
  /// gauge u^2 -> i u^2 makes the operator real symmetric.
  bool real_gauge_available() const;
  /// Upper bound on the spectral radius (Gershgorin on the symmetric form).
  double norm_bound() const;

  Eigen::VectorXcd apply(const Eigen::VectorXcd& f) const;
  SpinorField apply(const SpinorField& f) const;

 private:
  std::shared_ptr<const GraphGrid> grid_;
  SparseMatrixC stiffness_;
  Eigen::VectorXd node_mass_;
  Eigen::VectorXd mid_mass_;
  std::optional<BlochPhase> theta_;
  ProblemParameters params_;
};

/// Potential samples at node / midpoint DOFs of a grid on a closure.
Eigen::VectorXd sample_potential_nodes(const PeriodicClosure& closure, const GraphGrid& grid,
                                       const Potential& V);
Eigen::VectorXd sample_potential_mids(const PeriodicClosure& closure, const GraphGrid& grid,
                                      const Potential& V);

/// Throws std::invalid_argument if the grid was not built on closure.graph().
DiracOperator assemble(const PeriodicClosure& closure, std::shared_ptr<const GraphGrid> grid,
                       const ProblemParameters& params,
                       std::optional<BlochPhase> theta = std::nullopt);

struct VertexConditionReport {
  std::vector<double> flux_defect;  // |sum_s s(xi) u^2_e(xi)| per vertex
  double max_flux_defect = 0.0;
  double max_continuity_defect = 0.0;  // u^1 is single valued: always zero
  std::string trace_rule = "u2 trace by one-sided extrapolation (3 u2[adj] - u2[next]) / 2";
};

/// Evaluates the Kirchhoff flux sum at every vertex. With a Bloch phase the
/// head traces are pulled back by exp(-i theta . winding).
VertexConditionReport check_vertex_conditions(const SpinorField& f,
                                              std::optional<BlochPhase> theta = std::nullopt);

}  // namespace dgraph
