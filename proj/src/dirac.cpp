#include "dirac_graph/dirac.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dgraph {

namespace {

const Complex I1(0.0, 1.0);

double phase_angle(const std::optional<BlochPhase>& theta, const Shift& w) {
  if (!theta) return 0.0;
  return (*theta)[0] * w[0] + (*theta)[1] * w[1];
}

}  // namespace

Potential Potential::constant(double value) { return per_edge({value}); }

Potential Potential::per_edge(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("potential needs at least one value");
  for (double v : values)
    if (!std::isfinite(v)) throw std::invalid_argument("potential values must be finite");
  Potential p;
  p.kind_ = Kind::per_edge;
  p.values_ = std::move(values);
  return p;
}

Potential Potential::cosine(double offset, double amplitude) {
  if (!std::isfinite(offset) || !std::isfinite(amplitude))
    throw std::invalid_argument("potential values must be finite");
  Potential p;
  p.kind_ = Kind::cosine;
  p.offset_ = offset;
  p.amplitude_ = amplitude;
  return p;
}

double Potential::edge_value(int cell_edge) const {
  if (kind_ == Kind::cosine) return offset_;
  if (values_.size() == 1) return values_[0];
  if (cell_edge < 0 || cell_edge >= static_cast<int>(values_.size()))
    throw std::out_of_range("potential has no value for this edge");
  return values_[cell_edge];
}

double Potential::value(int cell_edge, double x, double length) const {
  if (kind_ == Kind::per_edge) return edge_value(cell_edge);
  return offset_ + amplitude_ * std::cos(2.0 * std::numbers::pi * x / length);
}

double Potential::sup() const {
  if (kind_ == Kind::cosine) return offset_ + std::abs(amplitude_);
  return *std::max_element(values_.begin(), values_.end());
}

double Potential::inf() const {
  if (kind_ == Kind::cosine) return offset_ - std::abs(amplitude_);
  return *std::min_element(values_.begin(), values_.end());
}

void ProblemParameters::validate() const {
  if (!(a > 0.0) || !std::isfinite(a)) throw std::invalid_argument("a must be positive");
  if (!std::isfinite(omega) || !(std::abs(omega) < a))
    throw std::invalid_argument("omega must satisfy |omega| < a");
  if (V.inf() < 0.0) throw std::invalid_argument("potential must be nonnegative");
}

ReducedParameters reduce_scaling(const PhysicalScaling& s) {
  if (!(s.hbar > 0.0) || !(s.c > 0.0) || !(s.m > 0.0))
    throw std::invalid_argument("hbar, c and m must be positive");
  ReducedParameters r;
  r.a = s.m * s.c * s.c / (s.hbar * s.c);
  r.omega = s.vartheta / s.c;
  r.omega_in_gap = std::abs(r.omega) < r.a;
  return r;
}

DiracOperator::DiracOperator(std::shared_ptr<const GraphGrid> grid, SparseMatrixC stiffness,
                             Eigen::VectorXd node_mass, Eigen::VectorXd mid_mass,
                             std::optional<BlochPhase> theta, ProblemParameters params)
    : grid_(std::move(grid)),
      stiffness_(std::move(stiffness)),
      node_mass_(std::move(node_mass)),
      mid_mass_(std::move(mid_mass)),
      theta_(theta),
      params_(std::move(params)) {}

SparseMatrixC DiracOperator::matrix() const {
  const Eigen::VectorXd winv = weights().cwiseInverse();
  return winv.cast<Complex>().asDiagonal() * stiffness_;
}

SparseMatrixC DiracOperator::symmetric() const {
  const Eigen::VectorXd s = weights().cwiseSqrt().cwiseInverse();
  SparseMatrixC out = stiffness_;
  // the scale factor is formed first so that (i, j) and (j, i) round identically
  for (int k = 0; k < out.outerSize(); ++k)
    for (SparseMatrixC::InnerIterator it(out, k); it; ++it)
      it.valueRef() *= s[it.row()] * s[it.col()];
  return out;
}

double DiracOperator::hermiticity_defect() const {
  const SparseMatrixC s = symmetric();
  const SparseMatrixC d = s - SparseMatrixC(s.adjoint());
  double worst = 0.0;
  for (int k = 0; k < d.outerSize(); ++k)
    for (SparseMatrixC::InnerIterator it(d, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
  return worst;
}

bool DiracOperator::real_gauge_available() const {
  for (int k = 0; k < stiffness_.outerSize(); ++k)
    for (SparseMatrixC::InnerIterator it(stiffness_, k); it; ++it) {
      if (it.row() == it.col()) continue;
      if (std::abs(it.value().real()) > 1e-14 * std::abs(it.value())) return false;
    }
  return true;
}

double DiracOperator::norm_bound() const {
  const SparseMatrixC s = symmetric();
  Eigen::VectorXd rows = Eigen::VectorXd::Zero(s.rows());
  for (int k = 0; k < s.outerSize(); ++k)
    for (SparseMatrixC::InnerIterator it(s, k); it; ++it) rows[it.row()] += std::abs(it.value());
  return rows.maxCoeff();
}

Eigen::VectorXcd DiracOperator::apply(const Eigen::VectorXcd& f) const {
  if (f.size() != size()) throw std::invalid_argument("vector size does not match operator");
  Eigen::VectorXcd out = stiffness_ * f;
  return out.cwiseQuotient(weights().cast<Complex>());
}

SpinorField DiracOperator::apply(const SpinorField& f) const {
  if (!f.grid().same_layout(*grid_)) throw std::invalid_argument("field lives on a different grid");
  return SpinorField(f.grid_ptr(), apply(f.values()));
}

Eigen::VectorXd sample_potential_nodes(const PeriodicClosure& closure, const GraphGrid& grid,
                                       const Potential& V) {
  const MetricGraph& g = grid.graph();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(grid.node_count());
  Eigen::VectorXd vw = Eigen::VectorXd::Zero(g.vertex_count());
  for (int e = 0; e < g.edge_count(); ++e) {
    const Edge& ed = g.edge(e);
    const int ce = closure.edge_origin(e);
    const int n = grid.cells(e);
    const double h = grid.spacing(e);
    out[ed.tail] += 0.5 * h * V.value(ce, 0.0, ed.length);
    out[ed.head] += 0.5 * h * V.value(ce, ed.length, ed.length);
    vw[ed.tail] += 0.5 * h;
    vw[ed.head] += 0.5 * h;
    for (int j = 1; j < n; ++j) out[grid.node_dof(e, j)] = V.value(ce, j * h, ed.length);
  }
  for (int v = 0; v < g.vertex_count(); ++v) out[v] /= vw[v];
  return out;
}

Eigen::VectorXd sample_potential_mids(const PeriodicClosure& closure, const GraphGrid& grid,
                                      const Potential& V) {
  const MetricGraph& g = grid.graph();
  Eigen::VectorXd out(grid.mid_count());
  for (int e = 0; e < g.edge_count(); ++e) {
    const int ce = closure.edge_origin(e);
    const double h = grid.spacing(e);
    for (int j = 0; j < grid.cells(e); ++j)
      out[grid.mid_dof(e, j) - grid.node_count()] = V.value(ce, (j + 0.5) * h, g.edge(e).length);
  }
  return out;
}

DiracOperator assemble(const PeriodicClosure& closure, std::shared_ptr<const GraphGrid> grid,
                       const ProblemParameters& params, std::optional<BlochPhase> theta) {
  params.validate();
  if (!grid->graph().same_shape(closure.graph()))
    throw std::invalid_argument("grid was not built on this closure");
  if (params.V.kind() == Potential::Kind::per_edge && params.V.values().size() != 1 &&
      static_cast<int>(params.V.values().size()) != closure.cell_edge_count())
    throw std::invalid_argument("potential needs one value per cell edge");
  const GraphGrid& gr = *grid;
  const MetricGraph& g = gr.graph();
  const Eigen::VectorXd vn = sample_potential_nodes(closure, gr, params.V);
  const Eigen::VectorXd vm = sample_potential_mids(closure, gr, params.V);
  const Eigen::VectorXd node_mass = (vn.array() + params.a).matrix();
  const Eigen::VectorXd mid_mass = (vm.array() + params.a).matrix();
  const Eigen::VectorXd& w = gr.weights();

  std::vector<Eigen::Triplet<Complex>> trips;
  trips.reserve(5 * gr.size());
  for (int i = 0; i < gr.node_count(); ++i) trips.emplace_back(i, i, node_mass[i] * w[i]);
  for (int e = 0; e < g.edge_count(); ++e) {
    const int n = gr.cells(e);
    const double h = gr.spacing(e);
    const Complex head_phase = std::polar(1.0, phase_angle(theta, g.edge(e).winding));
    for (int j = 0; j < n; ++j) {
      const int m = gr.mid_dof(e, j);
      const int left = gr.node_dof(e, j);
      const int right = gr.node_dof(e, j + 1);
      const Complex kr = (j == n - 1) ? -I1 * head_phase : -I1;
      const Complex kl = I1;
      trips.emplace_back(m, m, -mid_mass[m - gr.node_count()] * h);
      trips.emplace_back(m, right, kr);
      trips.emplace_back(right, m, std::conj(kr));
      trips.emplace_back(m, left, kl);
      trips.emplace_back(left, m, std::conj(kl));
    }
  }
  SparseMatrixC K(gr.size(), gr.size());
  K.setFromTriplets(trips.begin(), trips.end());
  K.makeCompressed();
  return DiracOperator(std::move(grid), std::move(K), node_mass, mid_mass, theta, params);
}

VertexConditionReport check_vertex_conditions(const SpinorField& f,
                                              std::optional<BlochPhase> theta) {
  const GraphGrid& gr = f.grid();
  const MetricGraph& g = gr.graph();
  const auto& v = f.values();
  VertexConditionReport r;
  std::vector<Complex> flux(g.vertex_count(), 0.0);
  for (int e = 0; e < g.edge_count(); ++e) {
    const int n = gr.cells(e);
    const Edge& ed = g.edge(e);
    const Complex t0 = 1.5 * v[gr.mid_dof(e, 0)] - 0.5 * v[gr.mid_dof(e, 1)];
    const Complex t1 = 1.5 * v[gr.mid_dof(e, n - 1)] - 0.5 * v[gr.mid_dof(e, n - 2)];
    flux[ed.tail] += t0;
    flux[ed.head] -= t1 * std::polar(1.0, -phase_angle(theta, ed.winding));
  }
  for (const Complex& c : flux) {
    r.flux_defect.push_back(std::abs(c));
    r.max_flux_defect = std::max(r.max_flux_defect, std::abs(c));
  }
  return r;
}

}  // namespace dgraph
