#pragma once

// Metric graphs, Z^d-periodic graphs given by a fundamental cell plus gluing
// data, and finite periodic closures (rings / tori) of them.

#include <array>
#include <string>
#include <utility>
#include <vector>

namespace dgraph {

/// Lattice vector in Z^d, d <= 2. Unused trailing entries are zero.
using Shift = std::array<int, 2>;

enum class End { start, end };

struct EdgeEnd {
  int edge = 0;
  End end = End::start;
};

/// Edge coordinate runs tail -> head, x = 0 at the tail.
/// `winding` is the lattice shift crossed when walking from tail to head; it
/// is zero except on twisted closures and on Bloch quotient cells, where it
/// carries the phase exp(i theta . winding) on the head coupling.
struct Edge {
  int tail = 0;
  int head = 0;
  double length = 1.0;
  Shift winding{0, 0};
};

bool is_connected(int vertex_count, const std::vector<Edge>& edges);

class MetricGraph {
 public:
  MetricGraph() = default;
  /// Throws std::invalid_argument unless the graph is connected, every edge
  /// length is positive and finite, and every vertex has degree >= 1.
  MetricGraph(int vertex_count, std::vector<Edge> edges);

  int vertex_count() const { return vertex_count_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(int e) const { return edges_.at(e); }
  const std::vector<EdgeEnd>& incident(int v) const { return incidence_.at(v); }
  int degree(int v) const { return static_cast<int>(incidence_.at(v).size()); }
  double total_length() const;

  /// Round-trip check of the incidence map against the edge endpoint data.
  bool incidence_consistent() const;

  bool same_shape(const MetricGraph& other) const;

 private:
  int vertex_count_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<EdgeEnd>> incidence_;
};

/// Gluing for one lattice generator: copy k's `outgoing` vertex is the same
/// point as copy (k + e_i)'s `incoming` vertex.
struct Gluing {
  std::vector<std::pair<int, int>> pairs;  // (outgoing, incoming)
};

class PeriodicGraph {
 public:
  PeriodicGraph(MetricGraph cell, int dim, std::vector<Gluing> gluings,
                std::string name = {});

  const MetricGraph& cell() const { return cell_; }
  int dim() const { return dim_; }
  const std::vector<Gluing>& gluings() const { return gluings_; }
  const std::string& name() const { return name_; }

  /// Number of vertex orbits under the lattice action (quotient vertices).
  int orbit_count() const { return orbit_count_; }
  /// Orbit index of a cell vertex and the lattice shift s such that the
  /// vertex sits in copy s of its orbit representative.
  int orbit_of(int cell_vertex) const { return orbit_.at(cell_vertex); }
  Shift shift_of(int cell_vertex) const { return shift_.at(cell_vertex); }

  /// Quotient graph G / Z^d. Edges carry their lattice windings.
  MetricGraph quotient() const;

 private:
  MetricGraph cell_;
  int dim_;
  std::vector<Gluing> gluings_;
  std::string name_;
  int orbit_count_ = 0;
  std::vector<int> orbit_;
  std::vector<Shift> shift_;
};

enum class ExampleKind { chain, decorated_chain, ladder, strip, square_lattice };

struct ExampleParams {
  double edge_length = 1.0;
  double stub_length = 1.0;  // decorated chain only
};

ExampleKind parse_example_kind(const std::string& name);
std::string to_string(ExampleKind kind);

PeriodicGraph build_example(ExampleKind kind, const ExampleParams& params = {});

/// Finite cyclic closure of a periodic graph. Also used (with all cell counts
/// equal to one) for the Bloch quotient cell.
class PeriodicClosure {
 public:
  const MetricGraph& graph() const { return graph_; }
  int dim() const { return dim_; }
  Shift cells() const { return cells_; }
  int cell_count() const { return cells_[0] * cells_[1]; }
  int orbit_count() const { return orbit_count_; }
  int cell_edge_count() const { return cell_edge_count_; }

  int cell_of_vertex(int v) const { return cell_of_vertex_.at(v); }
  int cell_of_edge(int e) const { return cell_of_edge_.at(e); }
  /// Fundamental-cell edge that closure edge e is a copy of.
  int edge_origin(int e) const { return edge_origin_.at(e); }
  Shift cell_coords(int linear_cell) const;
  int linear_cell(Shift coords) const;

  /// Vertex / edge permutation of the translation by k (reduced mod N).
  std::vector<int> translate_vertices(Shift k) const;
  std::vector<int> translate_edges(Shift k) const;

  /// True when the action is a genuine closure (every N_i >= 3).
  bool is_closure() const;

  friend PeriodicClosure close_periodically(const PeriodicGraph& g,
                                            const std::vector<int>& cells);
  friend PeriodicClosure bloch_cell(const PeriodicGraph& g);

 private:
  static PeriodicClosure lift(const PeriodicGraph& g, Shift cells);

  MetricGraph graph_;
  int dim_ = 1;
  Shift cells_{1, 1};
  int orbit_count_ = 0;
  int cell_edge_count_ = 0;
  std::vector<int> cell_of_vertex_;
  std::vector<int> cell_of_edge_;
  std::vector<int> edge_origin_;
};

/// Throws std::invalid_argument if cells.size() != dim or any N_i < 3.
PeriodicClosure close_periodically(const PeriodicGraph& g,
                                   const std::vector<int>& cells);

/// Single-cell quotient with windings, the domain of Bloch-twisted operators.
PeriodicClosure bloch_cell(const PeriodicGraph& g);

/// Non-wrapped 3^d patch of cells; used to check that the infinite periodic
/// graph is connected.
bool patch_connected(const PeriodicGraph& g);

}  // namespace dgraph
