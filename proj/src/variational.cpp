#include "dirac_graph/variational.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <queue>
#include <random>
#include <sstream>

#include <Eigen/SparseCholesky>

namespace dgraph {

namespace {

using RealSparse = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

Eigen::VectorXd density(const ActionContext& ctx, const Eigen::VectorXcd& u) {
  const int nn = ctx.grid().node_count();
  Eigen::VectorXd rho(ctx.grid().mid_count());
  for (int m = 0; m < rho.size(); ++m) {
    const auto& [i0, i1] = ctx.mid_nodes[m];
    rho[m] = 0.5 * (std::norm(u[i0]) + std::norm(u[i1])) + std::norm(u[nn + m]);
  }
  return rho;
}

// co-vector r of Psi: dPsi = Re sum conj(r_i) phi_i
Eigen::VectorXcd psi_covector(const ActionContext& ctx, const Eigen::VectorXcd& u) {
  const int nn = ctx.grid().node_count();
  const Eigen::VectorXd rho = density(ctx, u);
  Eigen::VectorXcd r = Eigen::VectorXcd::Zero(u.size());
  for (int m = 0; m < rho.size(); ++m) {
    const double hg = ctx.mid_h[m] * ctx.nonlinearity.g1(ctx.mid_cell_edge[m], rho[m]);
    const auto& [i0, i1] = ctx.mid_nodes[m];
    r[i0] += hg * u[i0];
    r[i1] += hg * u[i1];
    r[nn + m] += 2.0 * hg * u[nn + m];
  }
  return r;
}

// W G(u)
Eigen::VectorXcd weighted_gradient(const ActionContext& ctx, const Eigen::VectorXcd& u) {
  const Eigen::VectorXd& w = ctx.weights();
  Eigen::VectorXcd R = ctx.op->stiffness() * u;
  R += ctx.params.omega * w.cwiseProduct(u);
  R -= psi_covector(ctx, u);
  return R;
}

double weighted_residual_norm(const Eigen::VectorXd& w, const Eigen::VectorXcd& R) {
  double s = 0.0;
  for (int i = 0; i < R.size(); ++i) s += std::norm(R[i]) / w[i];
  return std::sqrt(s);
}

double l2(const SpinorField& f) { return std::sqrt(std::max(0.0, inner(f, f).real())); }

Eigen::VectorXd to_real(const Eigen::VectorXcd& u) {
  Eigen::VectorXd z(2 * u.size());
  z << u.real(), u.imag();
  return z;
}

Eigen::VectorXcd to_complex(const Eigen::VectorXd& z) {
  const int n = z.size() / 2;
  Eigen::VectorXcd u(n);
  for (int i = 0; i < n; ++i) u[i] = Complex(z[i], z[n + i]);
  return u;
}

// Hessian of Phi in real coordinates, scaled by d = w^{-1/2} on both sides.
RealSparse scaled_hessian(const ActionContext& ctx, const Eigen::VectorXcd& u,
                          const std::vector<Triplet>& quadratic, const Eigen::VectorXd& d) {
  const int n = u.size();
  const int nn = ctx.grid().node_count();
  std::vector<Triplet> t = quadratic;
  const Eigen::VectorXd rho = density(ctx, u);
  for (int m = 0; m < rho.size(); ++m) {
    const int e = ctx.mid_cell_edge[m];
    const double h = ctx.mid_h[m];
    const double g1 = ctx.nonlinearity.g1(e, rho[m]);
    const double g2 = ctx.nonlinearity.g2(e, rho[m]);
    const int dofs[3] = {ctx.mid_nodes[m][0], ctx.mid_nodes[m][1], nn + m};
    const double c[3] = {0.5, 0.5, 1.0};
    int idx[6];
    double v[6];
    for (int k = 0; k < 3; ++k) {
      idx[k] = dofs[k];
      idx[3 + k] = n + dofs[k];
      v[k] = c[k] * u[dofs[k]].real();
      v[3 + k] = c[k] * u[dofs[k]].imag();
    }
    for (int k = 0; k < 6; ++k) {
      t.emplace_back(idx[k], idx[k], -2.0 * h * g1 * c[k % 3]);
      if (g2 != 0.0)
        for (int l = 0; l < 6; ++l) t.emplace_back(idx[k], idx[l], -4.0 * h * g2 * v[k] * v[l]);
    }
  }
  for (auto& x : t) x = Triplet(x.row(), x.col(), x.value() * d[x.row()] * d[x.col()]);
  RealSparse J(2 * n, 2 * n);
  J.setFromTriplets(t.begin(), t.end());
  return J;
}

std::vector<Triplet> quadratic_triplets(const ActionContext& ctx) {
  const int n = ctx.op->size();
  const Eigen::VectorXd& w = ctx.weights();
  std::vector<Triplet> t;
  const SparseMatrixC& K = ctx.op->stiffness();
  for (int k = 0; k < K.outerSize(); ++k)
    for (SparseMatrixC::InnerIterator it(K, k); it; ++it) {
      const int i = it.row(), j = it.col();
      const double re = it.value().real(), im = it.value().imag();
      if (re != 0.0) {
        t.emplace_back(i, j, re);
        t.emplace_back(n + i, n + j, re);
      }
      if (im != 0.0) {
        t.emplace_back(i, n + j, -im);
        t.emplace_back(n + i, j, im);
      }
    }
  for (int i = 0; i < n; ++i) {
    t.emplace_back(i, i, ctx.params.omega * w[i]);
    t.emplace_back(n + i, n + i, ctx.params.omega * w[i]);
  }
  return t;
}

// Graph distance from the point (edge, x0) to every vertex.
std::vector<double> vertex_distances(const MetricGraph& g, int edge, double x0) {
  std::vector<double> dist(g.vertex_count(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> q;
  const Edge& e0 = g.edge(edge);
  auto relax = [&](int v, double d) {
    if (d < dist[v]) {
      dist[v] = d;
      q.emplace(d, v);
    }
  };
  relax(e0.tail, x0);
  relax(e0.head, e0.length - x0);
  while (!q.empty()) {
    const auto [d, v] = q.top();
    q.pop();
    if (d > dist[v]) continue;
    for (const EdgeEnd& end : g.incident(v)) {
      const Edge& ed = g.edge(end.edge);
      relax(end.end == End::start ? ed.head : ed.tail, d + ed.length);
    }
  }
  return dist;
}

// Distance of every DOF location from the point (edge, x0).
Eigen::VectorXd dof_distances(const GraphGrid& grid, int edge, double x0) {
  const MetricGraph& g = grid.graph();
  const std::vector<double> dv = vertex_distances(g, edge, x0);
  Eigen::VectorXd d(grid.size());
  for (int v = 0; v < g.vertex_count(); ++v) d[v] = dv[v];
  for (int e = 0; e < g.edge_count(); ++e) {
    const Edge& ed = g.edge(e);
    const int n = grid.cells(e);
    const double h = grid.spacing(e);
    auto at = [&](double x) {
      double r = std::min(dv[ed.tail] + x, dv[ed.head] + ed.length - x);
      if (e == edge) r = std::min(r, std::abs(x - x0));
      return r;
    };
    for (int j = 1; j < n; ++j) d[grid.node_dof(e, j)] = at(j * h);
    for (int j = 0; j < n; ++j) d[grid.mid_dof(e, j)] = at((j + 0.5) * h);
  }
  return d;
}

// Lowest positive theta = 0 Bloch mode, copied periodically onto the closure.
Eigen::VectorXcd band_edge_mode(const ActionContext& ctx) {
  const PeriodicClosure cell = bloch_cell(*ctx.periodic);
  auto cgrid = GraphGrid::uniform(cell.graph(), ctx.cells_per_unit);
  const DiracOperator op = assemble(cell, cgrid, ctx.params, BlochPhase{0.0, 0.0});
  const SpectralDecomposition dec = decompose(op);
  int best = -1;
  for (int i : dec.positive)
    if (best < 0 || dec.eigenvalues[i] < dec.eigenvalues[best]) best = i;
  if (best < 0) throw SolverError("no positive Bloch eigenvalue at theta = 0");
  const Eigen::VectorXcd phi = dec.vectors.col(best);

  const GraphGrid& grid = ctx.grid();
  const PeriodicClosure& c = *ctx.closure;
  Eigen::VectorXcd u = Eigen::VectorXcd::Zero(grid.size());
  for (int e = 0; e < grid.graph().edge_count(); ++e) {
    const int o = c.edge_origin(e);
    const int n = grid.cells(e);
    if (cgrid->cells(o) != n) throw std::logic_error("cell and closure grids disagree");
    for (int j = 0; j <= n; ++j) u[grid.node_dof(e, j)] = phi[cgrid->node_dof(o, j)];
    for (int j = 0; j < n; ++j) u[grid.mid_dof(e, j)] = phi[cgrid->mid_dof(o, j)];
  }
  int imax = 0;
  u.head(grid.node_count()).cwiseAbs().maxCoeff(&imax);
  const double top = std::abs(u[imax]);
  if (top == 0.0) return u;
  return u * (std::conj(u[imax]) / (top * top));
}

double envelope_rate(const ActionContext& ctx) {
  const double a = ctx.params.a, w = ctx.params.omega;
  return std::sqrt(2.0 * a * (a + w));
}

// cell-edge / position variants used when a deflated orbit is hit
std::vector<InitSpec> reseeds(const ActionContext& ctx, const InitSpec& base) {
  const PeriodicClosure& c = *ctx.closure;
  const MetricGraph& g = c.graph();
  const int edge = std::clamp(base.edge, 0, g.edge_count() - 1);
  const int cell = c.cell_of_edge(edge);
  std::vector<int> edges;
  for (int e = 0; e < g.edge_count(); ++e)
    if (c.cell_of_edge(e) == cell) edges.push_back(e);
  std::vector<InitSpec> out;
  for (double frac : {0.5, 1.0, 0.25, 0.75})
    for (int e : edges) {
      InitSpec s;
      s.kind = InitSpec::Kind::band_edge_mode;
      s.scale = base.kind == InitSpec::Kind::bump ? base.amplitude : base.scale;
      s.edge = e;
      s.position = frac * g.edge(e).length;
      out.push_back(s);
    }
  return out;
}

struct LMResult {
  Eigen::VectorXcd u;
  double residual = 0.0;
  int iterations = 0;
};

LMResult levenberg_marquardt(const ActionContext& ctx, const Eigen::VectorXcd& u0,
                             const SolveOptions& opt) {
  const Eigen::VectorXd& w = ctx.weights();
  const int n = u0.size();
  if (std::sqrt(std::max(0.0, inner(w, u0, u0).real())) < 1e-6)
    throw BoundStateError(BoundStateError::Reason::converged_to_zero,
                          "initial guess is (numerically) zero: converged to zero");
  Eigen::VectorXd d(2 * n), dinv(2 * n);
  for (int i = 0; i < n; ++i) {
    d[i] = d[n + i] = 1.0 / std::sqrt(w[i]);
    dinv[i] = dinv[n + i] = std::sqrt(w[i]);
  }
  const std::vector<Triplet> quad = quadratic_triplets(ctx);

  // gauge row: Im <u0, u> in scaled coordinates, unit norm
  Eigen::VectorXd bn(2 * n);
  for (int i = 0; i < n; ++i) {
    bn[i] = -std::sqrt(w[i]) * u0[i].imag();
    bn[n + i] = std::sqrt(w[i]) * u0[i].real();
  }
  bn /= bn.norm();

  Eigen::VectorXd z = to_real(u0);
  auto evaluate = [&](const Eigen::VectorXd& zz, Eigen::VectorXd& rhat, double& chat) {
    const Eigen::VectorXd R = to_real(weighted_gradient(ctx, to_complex(zz)));
    rhat = d.cwiseProduct(R);
    chat = bn.dot(dinv.cwiseProduct(zz));
    return rhat.squaredNorm() + chat * chat;
  };

  Eigen::VectorXd rhat;
  double chat = 0.0;
  double merit = evaluate(z, rhat, chat);
  double lambda = opt.lm_start;
  const double lambda_floor = 1e-12;
  Eigen::SimplicialLDLT<RealSparse> solver;
  bool analyzed = false;
  RealSparse eye(2 * n, 2 * n);
  eye.setIdentity();

  for (int it = 0;; ++it) {
    const double res = rhat.norm();
    if (res <= opt.tol) {
      LMResult out{to_complex(z), res, it};
      if (std::sqrt(std::max(0.0, inner(w, out.u, out.u).real())) < 1e-6)
        throw BoundStateError(BoundStateError::Reason::converged_to_zero,
                              "Newton iteration converged to the trivial state");
      return out;
    }
    if (it >= opt.max_iter) {
      std::ostringstream os;
      os << "bound-state solver exceeded " << opt.max_iter << " iterations (residual " << res << ")";
      throw BoundStateError(BoundStateError::Reason::max_iter, os.str());
    }
    const RealSparse J = scaled_hessian(ctx, to_complex(z), quad, d);
    const RealSparse JJ = (J * J).pruned();
    const Eigen::VectorXd g = J * rhat + bn * chat;
    bool accepted = false;
    while (!accepted) {
      const RealSparse N = JJ + lambda * eye;
      if (!analyzed) {
        solver.analyzePattern(N);
        analyzed = true;
      }
      solver.factorize(N);
      if (solver.info() != Eigen::Success) throw SolverError("LM normal equations not factorizable");
      // rank-one gauge term by Sherman-Morrison
      const Eigen::VectorXd x = solver.solve(-g);
      const Eigen::VectorXd y = solver.solve(bn);
      const Eigen::VectorXd step = x - y * (bn.dot(x) / (1.0 + bn.dot(y)));
      const Eigen::VectorXd trial = z + d.cwiseProduct(step);
      Eigen::VectorXd r2;
      double c2 = 0.0;
      const double m2 = evaluate(trial, r2, c2);
      if (std::isfinite(m2) && m2 < merit) {
        z = trial;
        rhat = std::move(r2);
        chat = c2;
        merit = m2;
        lambda = std::max(lambda / 10.0, lambda_floor);
        accepted = true;
      } else {
        lambda *= 10.0;
        if (lambda > 1e12) {
          std::ostringstream os;
          os << "bound-state solver stalled at residual " << std::sqrt(merit);
          throw BoundStateError(BoundStateError::Reason::stalled, os.str());
        }
      }
    }
    if (std::sqrt(std::max(0.0, inner(w, to_complex(z), to_complex(z)).real())) < 1e-6)
      throw BoundStateError(BoundStateError::Reason::converged_to_zero,
                            "Newton iteration converged to the trivial state");
  }
}

}  // namespace

ActionContext make_context(const PeriodicGraph& g, const std::vector<int>& cells,
                           double cells_per_unit, const ProblemParameters& params,
                           const Nonlinearity& nl, bool with_decomposition) {
  params.validate();
  ActionContext ctx;
  ctx.periodic = std::make_shared<const PeriodicGraph>(g);
  ctx.closure = std::make_shared<const PeriodicClosure>(close_periodically(g, cells));
  auto grid = GraphGrid::uniform(ctx.closure->graph(), cells_per_unit);
  ctx.op = std::make_shared<const DiracOperator>(assemble(*ctx.closure, grid, params));
  ctx.params = params;
  ctx.nonlinearity = nl;
  ctx.cells_per_unit = cells_per_unit;
  if (nl.b().size() > 1 && static_cast<int>(nl.b().size()) != ctx.closure->cell_edge_count())
    throw std::invalid_argument("nonlinearity needs one coefficient per cell edge");
  const MetricGraph& G = grid->graph();
  ctx.mid_nodes.resize(grid->mid_count());
  ctx.mid_h.resize(grid->mid_count());
  ctx.mid_cell_edge.resize(grid->mid_count());
  for (int e = 0; e < G.edge_count(); ++e)
    for (int j = 0; j < grid->cells(e); ++j) {
      const int m = grid->mid_dof(e, j) - grid->node_count();
      ctx.mid_nodes[m] = {grid->node_dof(e, j), grid->node_dof(e, j + 1)};
      ctx.mid_h[m] = grid->spacing(e);
      ctx.mid_cell_edge[m] = ctx.closure->edge_origin(e);
    }
  if (with_decomposition)
    ctx.decomposition = std::make_shared<const SpectralDecomposition>(decompose(*ctx.op));
  return ctx;
}

double psi(const ActionContext& ctx, const SpinorField& f) {
  const Eigen::VectorXd rho = density(ctx, f.values());
  double s = 0.0;
  for (int m = 0; m < rho.size(); ++m)
    s += ctx.mid_h[m] * ctx.nonlinearity.f(ctx.mid_cell_edge[m], std::sqrt(rho[m]));
  return s;
}

double fhat_integral(const ActionContext& ctx, const SpinorField& f) {
  const Eigen::VectorXd rho = density(ctx, f.values());
  double s = 0.0;
  for (int m = 0; m < rho.size(); ++m)
    s += ctx.mid_h[m] * ctx.nonlinearity.fhat(ctx.mid_cell_edge[m], std::sqrt(rho[m]));
  return s;
}

double action_quadratic(const ActionContext& ctx, const SpinorField& f) {
  const Eigen::VectorXcd& u = f.values();
  const double quad = u.dot(ctx.op->stiffness() * u).real();
  const double mass = inner(f, f).real();
  return 0.5 * quad + 0.5 * ctx.params.omega * mass - psi(ctx, f);
}

double action(const ActionContext& ctx, const SpinorField& f) {
  if (!ctx.decomposition || !ctx.decomposition->complete)
    throw std::invalid_argument("action needs a complete spectral decomposition");
  const SplitNorms s = split_norms(*ctx.decomposition, f);
  const double split = 0.5 * (s.plus_sq - s.minus_sq);
  const double quad = 0.5 * f.values().dot(ctx.op->stiffness() * f.values()).real();
  if (std::abs(split - quad) > 1e-10 * std::max(1.0, 0.5 * s.y_sq)) {
    std::ostringstream os;
    os << "spectral splitting disagrees with the quadratic form: " << split << " vs " << quad;
    throw SolverError(os.str());
  }
  return split + 0.5 * ctx.params.omega * inner(f, f).real() - psi(ctx, f);
}

SpinorField gradient(const ActionContext& ctx, const SpinorField& f) {
  Eigen::VectorXcd R = weighted_gradient(ctx, f.values());
  R.array() /= ctx.weights().array();
  return SpinorField(f.grid_ptr(), std::move(R));
}

double gradient_norm(const ActionContext& ctx, const SpinorField& f) {
  return weighted_residual_norm(ctx.weights(), weighted_gradient(ctx, f.values()));
}

InitSpec InitSpec::band_edge(double scale) {
  InitSpec s;
  s.scale = scale;
  return s;
}

InitSpec InitSpec::bump(int edge, double position, double width, double amplitude) {
  InitSpec s;
  s.kind = Kind::bump;
  s.edge = edge;
  s.position = position;
  s.width = width;
  s.amplitude = amplitude;
  return s;
}

InitSpec InitSpec::given(SpinorField f) {
  InitSpec s;
  s.kind = Kind::given;
  s.field = std::move(f);
  return s;
}

SpinorField initial_guess(const ActionContext& ctx, const InitSpec& init) {
  const GraphGrid& grid = ctx.grid();
  if (init.kind == InitSpec::Kind::given) {
    if (!init.field || !init.field->grid().same_layout(grid))
      throw std::invalid_argument("given initial field does not match the grid");
    return SpinorField(ctx.grid_ptr(), init.field->values());
  }
  if (init.edge < 0 || init.edge >= grid.graph().edge_count())
    throw std::invalid_argument("initial-guess edge out of range");
  const Eigen::VectorXd dist = dof_distances(grid, init.edge, init.position);
  Eigen::VectorXcd u(grid.size());
  if (init.kind == InitSpec::Kind::bump)
    return bump_field(ctx.grid_ptr(), init.edge, init.position, init.width, init.amplitude);

  const Nonlinearity& nl = ctx.nonlinearity;
  double beta = envelope_rate(ctx), power = 1.0;
  if (nl.kind() == Nonlinearity::Kind::power) {
    beta *= 0.5 * (nl.exponent() - 2.0);
    power = 2.0 / (nl.exponent() - 2.0);
  }
  const Eigen::VectorXcd mode = band_edge_mode(ctx);
  for (int i = 0; i < u.size(); ++i) u[i] = mode[i] * std::pow(1.0 / std::cosh(beta * dist[i]), power);

  // amplitude by a line search on the relative residual
  double best = std::numeric_limits<double>::infinity(), best_s = init.scale;
  for (int k = -12; k <= 12; ++k) {
    const double s = init.scale * std::pow(10.0, k / 8.0);
    const Eigen::VectorXcd v = s * u;
    const double r = weighted_residual_norm(ctx.weights(), weighted_gradient(ctx, v)) /
                     std::sqrt(inner(ctx.weights(), v, v).real());
    if (r < best) {
      best = r;
      best_s = s;
    }
  }
  return SpinorField(ctx.grid_ptr(), best_s * u);
}

SpinorField bump_field(std::shared_ptr<const GraphGrid> grid, int edge, double position,
                       double width, Complex amp1, Complex amp2) {
  if (edge < 0 || edge >= grid->graph().edge_count()) throw std::invalid_argument("bump edge out of range");
  const Eigen::VectorXd dist = dof_distances(*grid, edge, position);
  SpinorField f(grid);
  for (int i = 0; i < grid->size(); ++i)
    f.values()[i] = (i < grid->node_count() ? amp1 : amp2) * std::exp(-std::pow(dist[i] / width, 2));
  return f;
}

BoundState solve_bound_state(const ActionContext& ctx, const InitSpec& init,
                             const SolveOptions& opt, const std::vector<BoundState>& deflation) {
  if (!(std::abs(ctx.params.omega) < ctx.params.a))
    throw HypothesisError("(omega) violated: |omega| must be below a");
  std::vector<InitSpec> seeds{init};
  if (!deflation.empty()) {
    const auto more = reseeds(ctx, init);
    seeds.insert(seeds.end(), more.begin(), more.end());
    if (static_cast<int>(seeds.size()) > opt.retry_budget + 1) seeds.resize(opt.retry_budget + 1);
  }
  std::string last_failure;
  for (size_t attempt = 0; attempt < seeds.size(); ++attempt) {
    LMResult r;
    try {
      r = levenberg_marquardt(ctx, initial_guess(ctx, seeds[attempt]).values(), opt);
    } catch (const BoundStateError& e) {
      if (deflation.empty()) throw;
      last_failure = e.what();
      continue;
    }
    BoundState b;
    b.field = SpinorField(ctx.grid_ptr(), std::move(r.u));
    bool fresh = true;
    for (const BoundState& d : deflation)
      if (orbit_distance(*ctx.closure, d.field, b.field) < opt.distinct_threshold) fresh = false;
    if (!fresh) {
      last_failure = "converged into a deflated orbit";
      continue;
    }
    b.omega = ctx.params.omega;
    b.a = ctx.params.a;
    b.residual = r.residual;
    b.action = action_quadratic(ctx, b.field);
    b.fhat_integral = fhat_integral(ctx, b.field);
    b.l2_norm = l2(b.field);
    b.cells_per_unit = ctx.cells_per_unit;
    b.cells = ctx.closure->cells();
    b.iterations = r.iterations;
    b.reseeds = static_cast<int>(attempt);
    return b;
  }
  throw BoundStateError(BoundStateError::Reason::deflated,
                        "no new orbit within the retry budget (last: " + last_failure + ")");
}

double orbit_distance(const PeriodicClosure& c, const SpinorField& u1, const SpinorField& u2) {
  require_same_grid(u1, u2);
  const double scale = std::max(l2(u1), l2(u2));
  if (scale == 0.0) return 0.0;
  const Shift N = c.cells();
  double best = std::numeric_limits<double>::infinity();
  for (int k1 = 0; k1 < N[1]; ++k1)
    for (int k0 = 0; k0 < N[0]; ++k0) {
      SpinorField t = orbit_translate(c, {k0, k1}, u1);
      const Complex z = inner(t, u2);
      const Complex phase = std::abs(z) > 0.0 ? z / std::abs(z) : Complex(1.0);
      t *= phase;
      best = std::min(best, l2(u2 - t));
    }
  return best / scale;
}

double refinement_distance(const SpinorField& coarse, const SpinorField& fine) {
  const GraphGrid& gc = coarse.grid();
  const GraphGrid& gf = fine.grid();
  if (!gc.graph().same_shape(gf.graph())) throw std::invalid_argument("grids on different graphs");
  SpinorField r(coarse.grid_ptr());
  const Eigen::VectorXcd& v = fine.values();
  for (int e = 0; e < gc.graph().edge_count(); ++e) {
    const int n = gc.cells(e);
    if (gf.cells(e) != 2 * n) throw std::invalid_argument("fine grid is not a twofold refinement");
    for (int j = 0; j <= n; ++j) r.values()[gc.node_dof(e, j)] = v[gf.node_dof(e, 2 * j)];
    for (int j = 0; j < n; ++j)
      r.values()[gc.mid_dof(e, j)] = 0.5 * (v[gf.mid_dof(e, 2 * j)] + v[gf.mid_dof(e, 2 * j + 1)]);
  }
  const Complex z = inner(r, coarse);
  if (std::abs(z) > 0.0) r *= z / std::abs(z);
  return l2(coarse - r);
}

LinkingReport linking_diagnostics(const ActionContext& ctx, const std::vector<double>& rho_grid,
                                  int samples, unsigned seed) {
  if (!ctx.decomposition || !ctx.decomposition->complete)
    throw std::invalid_argument("linking diagnostics need a complete spectral decomposition");
  if (rho_grid.empty() || samples < 1) throw std::invalid_argument("empty sample request");
  const SpectralDecomposition& dec = *ctx.decomposition;
  const double a = ctx.params.a, omega = ctx.params.omega;
  LinkingReport rep;
  rep.rho_grid = rho_grid;
  std::sort(rep.rho_grid.begin(), rep.rho_grid.end());
  rep.samples = samples;
  rep.seed = seed;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  // unit vector (Y norm) on the span of the given eigenvectors
  auto random_unit = [&](const std::vector<int>& idx) {
    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(dec.size());
    double y = 0.0;
    for (int i : idx) {
      c[i] = Complex(nd(rng), nd(rng));
      y += std::abs(dec.eigenvalues[i]) * std::norm(c[i]);
    }
    return synthesize(dec, c / std::sqrt(y));
  };
  auto psi_scaled = [&](const Eigen::VectorXd& dens, double R) {
    double s = 0.0;
    for (int m = 0; m < dens.size(); ++m)
      s += ctx.mid_h[m] * ctx.nonlinearity.f(ctx.mid_cell_edge[m], R * std::sqrt(dens[m]));
    return s;
  };

  // Y^+ spheres
  rep.min_phi.assign(rep.rho_grid.size(), std::numeric_limits<double>::infinity());
  for (int s = 0; s < samples; ++s) {
    const SpinorField v = random_unit(dec.positive);
    const Eigen::VectorXd dens = density(ctx, v.values());
    const double mass = inner(v, v).real();
    for (size_t k = 0; k < rep.rho_grid.size(); ++k) {
      const double r = rep.rho_grid[k];
      const double phi = 0.5 * r * r + 0.5 * omega * r * r * mass - psi_scaled(dens, r);
      rep.min_phi[k] = std::min(rep.min_phi[k], phi);
    }
  }
  const auto top = std::max_element(rep.min_phi.begin(), rep.min_phi.end());
  rep.eta = *top;
  rep.rho = rep.rho_grid[top - rep.min_phi.begin()];
  rep.eta_positive = rep.eta > 0.0;
  if (!rep.eta_positive) rep.diagnostics.push_back("inf Phi on every sampled Y+ sphere is <= 0");

  std::vector<double> lx, ly;
  for (size_t k = 0; k < rep.rho_grid.size() && lx.size() < 5; ++k)
    if (rep.min_phi[k] > 0.0) {
      lx.push_back(std::log(rep.rho_grid[k]));
      ly.push_back(std::log(rep.min_phi[k]));
    }
  rep.slope_points = static_cast<int>(lx.size());
  if (lx.size() >= 2) {
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / lx.size();
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / ly.size();
    double sxy = 0.0, sxx = 0.0;
    for (size_t i = 0; i < lx.size(); ++i) {
      sxy += (lx[i] - mx) * (ly[i] - my);
      sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    rep.slope = sxy / sxx;
  } else {
    rep.diagnostics.push_back("fewer than two positive radii for the slope fit");
  }

  // e_1: lowest positive eigenvector with ||e_1|| = 1
  int i1 = -1;
  for (int i : dec.positive)
    if (i1 < 0 || dec.eigenvalues[i] < dec.eigenvalues[i1]) i1 = i;
  if (i1 < 0) throw SolverError("no positive spectrum");
  const double lambda1 = dec.eigenvalues[i1];
  const SpinorField e1 = (1.0 / std::sqrt(lambda1)) * dec.vector(i1);

  // Y^- spheres, radii from the grid; boundary of Q samples stored as densities
  std::vector<Eigen::VectorXd> q_dens;
  std::vector<double> q_quad, q_mass;
  rep.max_y_minus = -std::numeric_limits<double>::infinity();
  rep.max_y_minus_bound_defect = -std::numeric_limits<double>::infinity();
  const double bound = (a - std::abs(omega)) / (2.0 * a);
  for (int s = 0; s < samples; ++s) {
    const SpinorField v = random_unit(dec.negative);
    const Eigen::VectorXd dens = density(ctx, v.values());
    const double mass = inner(v, v).real();
    for (double r : rep.rho_grid) {
      const double phi = -0.5 * r * r + 0.5 * omega * r * r * mass - psi_scaled(dens, r);
      rep.max_y_minus = std::max(rep.max_y_minus, phi);
      rep.max_y_minus_bound_defect = std::max(rep.max_y_minus_bound_defect, phi + bound * r * r);
    }
    // dQ: either u = R1 (cos t v + sin t e1) or u = x R1 v, x in [0, 1]
    if (s % 4 == 3) {
      const double x = ud(rng);
      q_dens.push_back(density(ctx, (x * v).values()));
      q_quad.push_back(-0.5 * x * x);
      q_mass.push_back(x * x * mass);
    } else {
      const double t = 0.5 * std::numbers::pi * ud(rng);
      const SpinorField u = std::cos(t) * v + Complex(std::sin(t)) * e1;
      q_dens.push_back(density(ctx, u.values()));
      q_quad.push_back(0.5 * (std::sin(t) * std::sin(t) - std::cos(t) * std::cos(t)));
      q_mass.push_back(inner(u, u).real());
    }
  }
  rep.y_minus_nonpositive = rep.max_y_minus <= 0.0 && rep.max_y_minus_bound_defect <= 1e-12;
  if (!rep.y_minus_nonpositive) rep.diagnostics.push_back("Phi > 0 or bound violated on a Y- sphere");

  auto max_boundary = [&](double R) {
    double mx = -std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < q_dens.size(); ++k)
      mx = std::max(mx, R * R * (q_quad[k] + 0.5 * omega * q_mass[k]) - psi_scaled(q_dens[k], R));
    return mx;
  };
  double R = std::max(1.0, rep.rho_grid.back());
  for (int k = 0; k < 60; ++k, R *= 2.0) {
    rep.R1 = R;
    rep.max_boundary_q = max_boundary(R);
    if (rep.max_boundary_q <= 0.0) break;
  }
  rep.boundary_q_nonpositive = rep.max_boundary_q <= 0.0;
  if (!rep.boundary_q_nonpositive) rep.diagnostics.push_back("no R1 found with Phi <= 0 on dQ");
  return rep;
}

ResidualReport residual_report(const ActionContext& ctx, const BoundState& b) {
  const SpinorField& u = b.field;
  const GraphGrid& grid = ctx.grid();
  ResidualReport rep;
  const SpinorField G = gradient(ctx, u);
  rep.residual = gradient_norm(ctx, u);
  const MetricGraph& g = grid.graph();
  const PeriodicClosure& c = *ctx.closure;
  rep.cell_profile.assign(c.cell_count(), 0.0);
  const Eigen::VectorXd rho = density(ctx, u.values());
  for (int e = 0; e < g.edge_count(); ++e) {
    double r = 0.0;
    for (int j = 0; j <= grid.cells(e); ++j) r = std::max(r, std::abs(G.values()[grid.node_dof(e, j)]));
    for (int j = 0; j < grid.cells(e); ++j) {
      const int m = grid.mid_dof(e, j);
      r = std::max(r, std::abs(G.values()[m]));
      double& p = rep.cell_profile[c.cell_of_edge(e)];
      p = std::max(p, std::sqrt(rho[m - grid.node_count()]));
    }
    rep.edge_residual.push_back(r);
  }
  rep.vertex = check_vertex_conditions(u);
  rep.action = action_quadratic(ctx, u);
  rep.fhat_integral = fhat_integral(ctx, u);
  rep.identity_defect = std::abs(rep.action - rep.fhat_integral - 0.5 * inner(G, u).real());
  rep.l2_norm = l2(u);
  if (ctx.decomposition && ctx.decomposition->complete) {
    const SplitNorms s = split_norms(*ctx.decomposition, u);
    rep.has_split = true;
    rep.plus_sq = s.plus_sq;
    rep.minus_sq = s.minus_sq;
    rep.lemma34 = s.y_sq >= ctx.params.a * rep.l2_norm * rep.l2_norm * (1.0 - 1e-12);
  }
  return rep;
}

}  // namespace dgraph
