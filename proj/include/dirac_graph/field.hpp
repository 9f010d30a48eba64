#pragma once

// Staggered discretization of spinor fields on a metric graph.
//
// The first spinor component lives on nodes x_j = j h_e (j = 0..n_e), where
// the endpoint nodes are shared vertex degrees of freedom; the second
// component lives on cell midpoints x_{j+1/2}. Quadrature weights are the
// trapezoid weights on nodes (a vertex gets half a cell from every incident
// edge end) and the cell width on midpoints.

#include <complex>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "dirac_graph/graph.hpp"

namespace dgraph {

using Complex = std::complex<double>;

class GraphGrid {
 public:
  /// cells_per_edge[e] >= 2 is the number of cells on edge e.
  GraphGrid(MetricGraph graph, std::vector<int> cells_per_edge);

  /// n_e = max(2, round(cells_per_unit_length * length_e)).
  static std::shared_ptr<const GraphGrid> uniform(const MetricGraph& graph,
                                                  double cells_per_unit_length);

  const MetricGraph& graph() const { return graph_; }

  int node_count() const { return node_count_; }
  int mid_count() const { return mid_count_; }
  int size() const { return node_count_ + mid_count_; }

  int cells(int e) const { return cells_.at(e); }
  double spacing(int e) const { return spacing_.at(e); }

  /// Global DOF of node j in [0, n_e] of edge e (endpoints map to vertices).
  int node_dof(int e, int j) const;
  /// Global DOF of midpoint j + 1/2, j in [0, n_e).
  int mid_dof(int e, int j) const { return node_count_ + mid_offset_.at(e) + j; }

  const Eigen::VectorXd& weights() const { return weights_; }

  /// Where each midpoint DOF sits: edge and arclength.
  int mid_edge(int mid_index) const { return mid_edge_.at(mid_index); }

  bool same_layout(const GraphGrid& other) const;

 private:
  MetricGraph graph_;
  std::vector<int> cells_;
  std::vector<double> spacing_;
  std::vector<int> node_offset_;
  std::vector<int> mid_offset_;
  std::vector<int> mid_edge_;
  int node_count_ = 0;
  int mid_count_ = 0;
  Eigen::VectorXd weights_;
};

/// Discretized C^2-valued field. `values` stacks the node block (u^1) and the
/// midpoint block (u^2). Vertex continuity of u^1 holds by construction.
class SpinorField {
 public:
  SpinorField() = default;
  explicit SpinorField(std::shared_ptr<const GraphGrid> grid);
  SpinorField(std::shared_ptr<const GraphGrid> grid, Eigen::VectorXcd values);

  const GraphGrid& grid() const { return *grid_; }
  const std::shared_ptr<const GraphGrid>& grid_ptr() const { return grid_; }
  const Eigen::VectorXcd& values() const { return values_; }
  Eigen::VectorXcd& values() { return values_; }

  auto u1() { return values_.head(grid_->node_count()); }
  auto u1() const { return values_.head(grid_->node_count()); }
  auto u2() { return values_.tail(grid_->mid_count()); }
  auto u2() const { return values_.tail(grid_->mid_count()); }

  SpinorField& operator+=(const SpinorField& o);
  SpinorField& operator-=(const SpinorField& o);
  SpinorField& operator*=(Complex c);

 private:
  std::shared_ptr<const GraphGrid> grid_;
  Eigen::VectorXcd values_;
};

SpinorField operator+(SpinorField a, const SpinorField& b);
SpinorField operator-(SpinorField a, const SpinorField& b);
SpinorField operator*(Complex c, SpinorField a);

void require_same_grid(const SpinorField& a, const SpinorField& b);

/// (k*u)(x) = u(T^{-k} x) on a periodic closure; k is reduced mod N. The grid
/// must assign equal cell counts to all copies of a cell edge.
SpinorField orbit_translate(const PeriodicClosure& closure, Shift k, const SpinorField& f);

/// Weighted L^2 inner product <f, g> = sum_i w_i conj(f_i) g_i.
Complex inner(const SpinorField& f, const SpinorField& g);
Complex inner(const Eigen::VectorXd& w, const Eigen::VectorXcd& f, const Eigen::VectorXcd& g);

/// Sampled |u|^2 on the cell midpoints: half-sums of |u^1|^2 at the two
/// bounding nodes plus |u^2|^2. Summing with the midpoint weights reproduces
/// the weighted L^2 norm exactly.
Eigen::VectorXd midpoint_density(const SpinorField& f);

/// Weighted L^p norm, p in [2, inf]; pass p = infinity for the sup norm.
double norm_lp(const SpinorField& f, double p);

/// Discrete H^1 norm: staggered first differences per edge plus the L^2 part.
double norm_h1(const SpinorField& f);

struct GagliardoNirenbergReport {
  double alpha = 0.0;
  double lhs = 0.0;                   // |u|_p
  double rhs_without_constant = 0.0;  // ||u||_{H^1}^alpha |u|_q^{1-alpha}
  double ratio = 0.0;
};

/// alpha = (2/(2+q)) (1 - q/p); rejects the zero field and p < q or q < 2.
GagliardoNirenbergReport check_gagliardo_nirenberg(const SpinorField& f, double p, double q);

}  // namespace dgraph
