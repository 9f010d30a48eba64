#include "dirac_graph/field.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dgraph {

GraphGrid::GraphGrid(MetricGraph graph, std::vector<int> cells_per_edge)
    : graph_(std::move(graph)), cells_(std::move(cells_per_edge)) {
  const int ne = graph_.edge_count();
  if (static_cast<int>(cells_.size()) != ne)
    throw std::invalid_argument("grid needs one cell count per edge");
  node_count_ = graph_.vertex_count();
  for (int e = 0; e < ne; ++e) {
    if (cells_[e] < 2) throw std::invalid_argument("each edge needs at least 2 cells");
    spacing_.push_back(graph_.edge(e).length / cells_[e]);
    node_offset_.push_back(node_count_);
    node_count_ += cells_[e] - 1;
    mid_offset_.push_back(mid_count_);
    mid_count_ += cells_[e];
    for (int j = 0; j < cells_[e]; ++j) mid_edge_.push_back(e);
  }
  weights_ = Eigen::VectorXd::Zero(size());
  for (int e = 0; e < ne; ++e) {
    const double h = spacing_[e];
    const Edge& ed = graph_.edge(e);
    weights_[ed.tail] += 0.5 * h;
    weights_[ed.head] += 0.5 * h;
    for (int j = 1; j < cells_[e]; ++j) weights_[node_dof(e, j)] = h;
    for (int j = 0; j < cells_[e]; ++j) weights_[mid_dof(e, j)] = h;
  }
}

std::shared_ptr<const GraphGrid> GraphGrid::uniform(const MetricGraph& graph,
                                                    double cells_per_unit_length) {
  if (!(cells_per_unit_length > 0.0))
    throw std::invalid_argument("grid resolution must be positive");
  std::vector<int> cells;
  for (const auto& e : graph.edges())
    cells.push_back(std::max(2, static_cast<int>(std::lround(cells_per_unit_length * e.length))));
  return std::make_shared<const GraphGrid>(graph, std::move(cells));
}

int GraphGrid::node_dof(int e, int j) const {
  const int n = cells_.at(e);
  if (j == 0) return graph_.edge(e).tail;
  if (j == n) return graph_.edge(e).head;
  if (j < 0 || j > n) throw std::out_of_range("node index outside edge");
  return node_offset_[e] + j - 1;
}

bool GraphGrid::same_layout(const GraphGrid& other) const {
  return this == &other || (cells_ == other.cells_ && graph_.same_shape(other.graph_));
}

SpinorField::SpinorField(std::shared_ptr<const GraphGrid> grid)
    : grid_(std::move(grid)), values_(Eigen::VectorXcd::Zero(grid_->size())) {}

SpinorField::SpinorField(std::shared_ptr<const GraphGrid> grid, Eigen::VectorXcd values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_->size())
    throw std::invalid_argument("field size does not match grid");
}

void require_same_grid(const SpinorField& a, const SpinorField& b) {
  if (!a.grid().same_layout(b.grid())) throw std::invalid_argument("fields live on different grids");
}

SpinorField& SpinorField::operator+=(const SpinorField& o) {
  require_same_grid(*this, o);
  values_ += o.values_;
  return *this;
}

SpinorField& SpinorField::operator-=(const SpinorField& o) {
  require_same_grid(*this, o);
  values_ -= o.values_;
  return *this;
}

SpinorField& SpinorField::operator*=(Complex c) {
  values_ *= c;
  return *this;
}

SpinorField operator+(SpinorField a, const SpinorField& b) { return a += b; }
SpinorField operator-(SpinorField a, const SpinorField& b) { return a -= b; }
SpinorField operator*(Complex c, SpinorField a) { return a *= c; }

SpinorField orbit_translate(const PeriodicClosure& closure, Shift k, const SpinorField& f) {
  const GraphGrid& grid = f.grid();
  if (!grid.graph().same_shape(closure.graph()))
    throw std::invalid_argument("field does not live on this closure");
  const std::vector<int> vperm = closure.translate_vertices(k);
  const std::vector<int> eperm = closure.translate_edges(k);
  const auto& v = f.values();
  Eigen::VectorXcd out(v.size());
  for (int x = 0; x < grid.graph().vertex_count(); ++x) out[vperm[x]] = v[x];
  for (int e = 0; e < grid.graph().edge_count(); ++e) {
    const int t = eperm[e];
    const int n = grid.cells(e);
    if (grid.cells(t) != n) throw std::invalid_argument("grid is not translation invariant");
    for (int j = 1; j < n; ++j) out[grid.node_dof(t, j)] = v[grid.node_dof(e, j)];
    for (int j = 0; j < n; ++j) out[grid.mid_dof(t, j)] = v[grid.mid_dof(e, j)];
  }
  return SpinorField(f.grid_ptr(), std::move(out));
}

Complex inner(const Eigen::VectorXd& w, const Eigen::VectorXcd& f, const Eigen::VectorXcd& g) {
  Complex sum = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) sum += w[i] * std::conj(f[i]) * g[i];
  return sum;
}

Complex inner(const SpinorField& f, const SpinorField& g) {
  require_same_grid(f, g);
  return inner(f.grid().weights(), f.values(), g.values());
}

Eigen::VectorXd midpoint_density(const SpinorField& f) {
  const GraphGrid& grid = f.grid();
  const auto& v = f.values();
  Eigen::VectorXd rho(grid.mid_count());
  for (int e = 0; e < grid.graph().edge_count(); ++e) {
    for (int j = 0; j < grid.cells(e); ++j) {
      const int m = grid.mid_dof(e, j);
      rho[m - grid.node_count()] = 0.5 * std::norm(v[grid.node_dof(e, j)]) +
                                   0.5 * std::norm(v[grid.node_dof(e, j + 1)]) + std::norm(v[m]);
    }
  }
  return rho;
}

double norm_lp(const SpinorField& f, double p) {
  if (!(p >= 2.0)) throw std::invalid_argument("L^p norms are supported for p >= 2 only");
  const GraphGrid& grid = f.grid();
  const Eigen::VectorXd rho = midpoint_density(f);
  if (std::isinf(p)) return std::sqrt(rho.maxCoeff());
  const auto w = grid.weights().tail(grid.mid_count());
  double sum = 0.0;
  for (Eigen::Index m = 0; m < rho.size(); ++m) sum += w[m] * std::pow(rho[m], 0.5 * p);
  return std::pow(sum, 1.0 / p);
}

double norm_h1(const SpinorField& f) {
  const GraphGrid& grid = f.grid();
  const auto& v = f.values();
  double deriv = 0.0;
  for (int e = 0; e < grid.graph().edge_count(); ++e) {
    const int n = grid.cells(e);
    const double h = grid.spacing(e);
    for (int j = 0; j < n; ++j)
      deriv += h * std::norm((v[grid.node_dof(e, j + 1)] - v[grid.node_dof(e, j)]) / h);
    // u^2 derivative at interior nodes; the two end half-cells reuse the
    // nearest interior difference
    for (int j = 1; j < n; ++j) {
      const double d2 = std::norm((v[grid.mid_dof(e, j)] - v[grid.mid_dof(e, j - 1)]) / h);
      double wgt = h;
      if (j == 1) wgt += 0.5 * h;
      if (j == n - 1) wgt += 0.5 * h;
      deriv += wgt * d2;
    }
  }
  const double l2 = inner(f, f).real();
  return std::sqrt(deriv + l2);
}

GagliardoNirenbergReport check_gagliardo_nirenberg(const SpinorField& f, double p, double q) {
  if (!(q >= 2.0)) throw std::invalid_argument("q must be at least 2");
  if (!(p >= q)) throw std::invalid_argument("p must be at least q");
  const double l2 = norm_lp(f, 2.0);
  if (l2 == 0.0) throw std::invalid_argument("Gagliardo-Nirenberg check needs a nonzero field");
  GagliardoNirenbergReport r;
  r.alpha = std::isinf(p) ? 2.0 / (2.0 + q) : (2.0 / (2.0 + q)) * (1.0 - q / p);
  r.lhs = norm_lp(f, p);
  r.rhs_without_constant = std::pow(norm_h1(f), r.alpha) * std::pow(norm_lp(f, q), 1.0 - r.alpha);
  r.ratio = r.lhs / r.rhs_without_constant;
  return r;
}

}  // namespace dgraph
