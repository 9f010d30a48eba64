#include "dirac_graph/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <set>
#include <stdexcept>

namespace dgraph {

namespace {

int floor_div(int a, int b) {
  int q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

int floor_mod(int a, int b) { return a - b * floor_div(a, b); }

}  // namespace

bool is_connected(int vertex_count, const std::vector<Edge>& edges) {
  if (vertex_count <= 0) return false;
  std::vector<std::vector<int>> adj(vertex_count);
  for (const auto& e : edges) {
    adj[e.tail].push_back(e.head);
    adj[e.head].push_back(e.tail);
  }
  std::vector<char> seen(vertex_count, 0);
  std::queue<int> todo;
  todo.push(0);
  seen[0] = 1;
  int reached = 1;
  while (!todo.empty()) {
    int v = todo.front();
    todo.pop();
    for (int w : adj[v]) {
      if (!seen[w]) {
        seen[w] = 1;
        ++reached;
        todo.push(w);
      }
    }
  }
  return reached == vertex_count;
}

MetricGraph::MetricGraph(int vertex_count, std::vector<Edge> edges)
    : vertex_count_(vertex_count), edges_(std::move(edges)) {
  if (vertex_count_ <= 0) throw std::invalid_argument("graph needs at least one vertex");
  incidence_.assign(vertex_count_, {});
  for (int e = 0; e < edge_count(); ++e) {
    const Edge& ed = edges_[e];
    if (ed.tail < 0 || ed.tail >= vertex_count_ || ed.head < 0 || ed.head >= vertex_count_)
      throw std::invalid_argument("edge " + std::to_string(e) + " references unknown vertex");
    if (!(ed.length > 0.0) || !std::isfinite(ed.length))
      throw std::invalid_argument("edge " + std::to_string(e) + " has nonpositive length");
    incidence_[ed.tail].push_back({e, End::start});
    incidence_[ed.head].push_back({e, End::end});
  }
  for (int v = 0; v < vertex_count_; ++v)
    if (incidence_[v].empty())
      throw std::invalid_argument("vertex " + std::to_string(v) + " is isolated");
  if (!is_connected(vertex_count_, edges_)) throw std::invalid_argument("graph is not connected");
}

double MetricGraph::total_length() const {
  double sum = 0.0;
  for (const auto& e : edges_) sum += e.length;
  return sum;
}

bool MetricGraph::incidence_consistent() const {
  std::size_t ends = 0;
  for (int v = 0; v < vertex_count_; ++v) {
    for (const auto& inc : incidence_[v]) {
      const Edge& e = edges_.at(inc.edge);
      int at = inc.end == End::start ? e.tail : e.head;
      if (at != v) return false;
      ++ends;
    }
  }
  return ends == 2 * edges_.size();
}

bool MetricGraph::same_shape(const MetricGraph& other) const {
  if (vertex_count_ != other.vertex_count_ || edges_.size() != other.edges_.size()) return false;
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const Edge& a = edges_[e];
    const Edge& b = other.edges_[e];
    if (a.tail != b.tail || a.head != b.head || a.length != b.length || a.winding != b.winding)
      return false;
  }
  return true;
}

PeriodicGraph::PeriodicGraph(MetricGraph cell, int dim, std::vector<Gluing> gluings,
                             std::string name)
    : cell_(std::move(cell)), dim_(dim), gluings_(std::move(gluings)), name_(std::move(name)) {
  if (dim_ != 1 && dim_ != 2) throw std::invalid_argument("lattice dimension must be 1 or 2");
  if (static_cast<int>(gluings_.size()) != dim_)
    throw std::invalid_argument("need exactly one gluing per lattice generator");

  const int nv = cell_.vertex_count();
  std::vector<char> outgoing(nv, 0);
  for (int i = 0; i < dim_; ++i) {
    std::set<int> outs, ins;
    for (auto [o, in] : gluings_[i].pairs) {
      if (o < 0 || o >= nv || in < 0 || in >= nv)
        throw std::invalid_argument("gluing references unknown vertex");
      if (!outs.insert(o).second || !ins.insert(in).second)
        throw std::invalid_argument("gluing " + std::to_string(i) + " is not a bijection");
      outgoing[o] = 1;
    }
    for (int o : outs)
      if (ins.count(o))
        throw std::invalid_argument("gluing " + std::to_string(i) +
                                    " maps between overlapping vertex sets");
    if (gluings_[i].pairs.empty())
      throw std::invalid_argument("gluing " + std::to_string(i) + " is empty");
  }

  // Relation graph: o ~ in + e_i.
  struct Link {
    int to;
    Shift delta;  // shift(to) = shift(from) + delta
  };
  std::vector<std::vector<Link>> links(nv);
  for (int i = 0; i < dim_; ++i) {
    Shift ei{0, 0};
    ei[i] = 1;
    for (auto [o, in] : gluings_[i].pairs) {
      links[in].push_back({o, ei});
      links[o].push_back({in, Shift{-ei[0], -ei[1]}});
    }
  }

  orbit_.assign(nv, -1);
  shift_.assign(nv, Shift{0, 0});
  std::vector<int> component(nv, -1);
  for (int v = 0; v < nv; ++v) {
    if (component[v] >= 0) continue;
    std::vector<int> members{v};
    component[v] = v;
    for (std::size_t k = 0; k < members.size(); ++k)
      for (const auto& l : links[members[k]])
        if (component[l.to] < 0) {
          component[l.to] = v;
          members.push_back(l.to);
        }
    std::sort(members.begin(), members.end());
    int root = members.front();
    for (int m : members)
      if (!outgoing[m]) {
        root = m;
        break;
      }
    const int orbit = orbit_count_++;
    std::vector<char> assigned(nv, 0);
    std::queue<int> todo;
    todo.push(root);
    assigned[root] = 1;
    orbit_[root] = orbit;
    shift_[root] = {0, 0};
    while (!todo.empty()) {
      int x = todo.front();
      todo.pop();
      for (const auto& l : links[x]) {
        Shift s{shift_[x][0] + l.delta[0], shift_[x][1] + l.delta[1]};
        if (assigned[l.to]) {
          if (shift_[l.to] != s)
            throw std::invalid_argument("gluings do not define a free lattice action");
          continue;
        }
        assigned[l.to] = 1;
        orbit_[l.to] = orbit;
        shift_[l.to] = s;
        todo.push(l.to);
      }
    }
  }
  if (!patch_connected(*this))
    throw std::invalid_argument("periodic graph generated by the cell is not connected");
}

MetricGraph PeriodicGraph::quotient() const {
  std::vector<Edge> edges;
  for (const auto& e : cell_.edges()) {
    Shift st = shift_[e.tail], sh = shift_[e.head];
    edges.push_back({orbit_[e.tail], orbit_[e.head], e.length, {sh[0] - st[0], sh[1] - st[1]}});
  }
  return MetricGraph(orbit_count_, std::move(edges));
}

ExampleKind parse_example_kind(const std::string& name) {
  if (name == "chain") return ExampleKind::chain;
  if (name == "decorated_chain") return ExampleKind::decorated_chain;
  if (name == "ladder") return ExampleKind::ladder;
  if (name == "strip") return ExampleKind::strip;
  if (name == "square_lattice") return ExampleKind::square_lattice;
  throw std::invalid_argument("unknown example graph '" + name + "'");
}

std::string to_string(ExampleKind kind) {
  switch (kind) {
    case ExampleKind::chain: return "chain";
    case ExampleKind::decorated_chain: return "decorated_chain";
    case ExampleKind::ladder: return "ladder";
    case ExampleKind::strip: return "strip";
    case ExampleKind::square_lattice: return "square_lattice";
  }
  return "unknown";
}

PeriodicGraph build_example(ExampleKind kind, const ExampleParams& params) {
  const double l = params.edge_length;
  if (!(l > 0.0)) throw std::invalid_argument("edge length must be positive");
  switch (kind) {
    case ExampleKind::chain:
      // cell [0,1]: vertex 0 at x=0, vertex 1 at x=1
      return PeriodicGraph(MetricGraph(2, {{0, 1, l}}), 1, {Gluing{{{1, 0}}}}, "chain");
    case ExampleKind::decorated_chain: {
      const double stub = params.stub_length;
      if (!(stub > 0.0)) throw std::invalid_argument("stub length must be positive");
      // chain edge 0->1 and stub 0->2
      return PeriodicGraph(MetricGraph(3, {{0, 1, l}, {0, 2, stub}}), 1, {Gluing{{{1, 0}}}},
                           "decorated_chain");
    }
    case ExampleKind::ladder:
      // left rung 0 (lower) - 1 (upper); right copies 2, 3
      return PeriodicGraph(MetricGraph(4, {{0, 2, l}, {1, 3, l}, {0, 1, l}}), 1,
                           {Gluing{{{2, 0}, {3, 1}}}}, "ladder");
    case ExampleKind::strip:
      // left column 0 (lower), 1 (middle), 2 (upper); right copies 3, 4, 5
      return PeriodicGraph(
          MetricGraph(6, {{0, 3, l}, {1, 4, l}, {2, 5, l}, {0, 1, l}, {1, 2, l}}), 1,
          {Gluing{{{3, 0}, {4, 1}, {5, 2}}}}, "strip");
    case ExampleKind::square_lattice:
      // (0,0) = 0, (1,0) = 1, (0,1) = 2
      return PeriodicGraph(MetricGraph(3, {{0, 1, l}, {0, 2, l}}), 2,
                           {Gluing{{{1, 0}}}, Gluing{{{2, 0}}}}, "square_lattice");
  }
  throw std::invalid_argument("unknown example kind");
}

Shift PeriodicClosure::cell_coords(int linear_cell) const {
  return {linear_cell % cells_[0], linear_cell / cells_[0]};
}

int PeriodicClosure::linear_cell(Shift c) const {
  return floor_mod(c[0], cells_[0]) + cells_[0] * floor_mod(c[1], cells_[1]);
}

std::vector<int> PeriodicClosure::translate_vertices(Shift k) const {
  const int q = orbit_count_;
  std::vector<int> perm(graph_.vertex_count());
  for (int v = 0; v < graph_.vertex_count(); ++v) {
    Shift c = cell_coords(v / q);
    perm[v] = linear_cell({c[0] + k[0], c[1] + k[1]}) * q + v % q;
  }
  return perm;
}

std::vector<int> PeriodicClosure::translate_edges(Shift k) const {
  const int ne = cell_edge_count_;
  std::vector<int> perm(graph_.edge_count());
  for (int e = 0; e < graph_.edge_count(); ++e) {
    Shift c = cell_coords(e / ne);
    perm[e] = linear_cell({c[0] + k[0], c[1] + k[1]}) * ne + e % ne;
  }
  return perm;
}

bool PeriodicClosure::is_closure() const {
  for (int i = 0; i < dim_; ++i)
    if (cells_[i] < 3) return false;
  return true;
}

PeriodicClosure PeriodicClosure::lift(const PeriodicGraph& g, Shift cells) {
  PeriodicClosure c;
  c.dim_ = g.dim();
  c.cells_ = cells;
  c.orbit_count_ = g.orbit_count();
  c.cell_edge_count_ = g.cell().edge_count();
  const int q = c.orbit_count_;
  const int ncell = cells[0] * cells[1];

  auto place = [&](int cell_vertex, Shift base, Shift& wrap) {
    Shift s = g.shift_of(cell_vertex);
    Shift pos{base[0] + s[0], base[1] + s[1]};
    Shift at{};
    for (int i = 0; i < 2; ++i) {
      wrap[i] = floor_div(pos[i], cells[i]);
      at[i] = pos[i] - wrap[i] * cells[i];
    }
    return (at[0] + cells[0] * at[1]) * q + g.orbit_of(cell_vertex);
  };

  std::vector<Edge> edges;
  for (int lc = 0; lc < ncell; ++lc) {
    Shift base{lc % cells[0], lc / cells[0]};
    for (int e = 0; e < c.cell_edge_count_; ++e) {
      const Edge& ce = g.cell().edge(e);
      Shift wt{}, wh{};
      int t = place(ce.tail, base, wt);
      int h = place(ce.head, base, wh);
      edges.push_back({t, h, ce.length, {wh[0] - wt[0], wh[1] - wt[1]}});
      c.cell_of_edge_.push_back(lc);
      c.edge_origin_.push_back(e);
    }
  }
  c.graph_ = MetricGraph(q * ncell, std::move(edges));
  c.cell_of_vertex_.resize(q * ncell);
  for (int v = 0; v < q * ncell; ++v) c.cell_of_vertex_[v] = v / q;
  return c;
}

PeriodicClosure close_periodically(const PeriodicGraph& g, const std::vector<int>& cells) {
  if (static_cast<int>(cells.size()) != g.dim())
    throw std::invalid_argument("closure needs one cell count per lattice direction");
  Shift n{1, 1};
  for (int i = 0; i < g.dim(); ++i) {
    if (cells[i] < 3) throw std::invalid_argument("closure cell counts must be at least 3");
    n[i] = cells[i];
  }
  return PeriodicClosure::lift(g, n);
}

PeriodicClosure bloch_cell(const PeriodicGraph& g) { return PeriodicClosure::lift(g, {1, 1}); }

bool patch_connected(const PeriodicGraph& g) {
  const int d = g.dim();
  const int side = 3;
  const int q = g.orbit_count();
  const int ncell = d == 1 ? side : side * side;
  auto id = [&](int orbit, Shift pos) { return (pos[0] + side * pos[1]) * q + orbit; };
  auto inside = [&](Shift pos) {
    for (int i = 0; i < 2; ++i) {
      int lim = i < d ? side : 1;
      if (pos[i] < 0 || pos[i] >= lim) return false;
    }
    return true;
  };
  std::vector<Edge> edges;
  for (int lc = 0; lc < ncell; ++lc) {
    Shift base{lc % side, lc / side};
    for (const auto& ce : g.cell().edges()) {
      Shift st = g.shift_of(ce.tail), sh = g.shift_of(ce.head);
      Shift pt{base[0] + st[0], base[1] + st[1]};
      Shift ph{base[0] + sh[0], base[1] + sh[1]};
      if (inside(pt) && inside(ph))
        edges.push_back({id(g.orbit_of(ce.tail), pt), id(g.orbit_of(ce.head), ph), ce.length});
    }
  }
  return is_connected(q * ncell, edges);
}

}  // namespace dgraph
