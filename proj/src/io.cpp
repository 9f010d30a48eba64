#include "dirac_graph/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dirac_graph/errors.hpp"

namespace dgraph {

namespace {

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

const Json& member(const Json& j, const char* key, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(path + "/" + key, "missing");
  return *it;
}

int as_int(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
  return j.get<int>();
}

}  // namespace

Json graph_to_json(const PeriodicGraph& g) {
  Json j;
  j["name"] = g.name();
  j["dim"] = g.dim();
  j["vertices"] = g.cell().vertex_count();
  j["edges"] = Json::array();
  for (const Edge& e : g.cell().edges())
    j["edges"].push_back({{"tail", e.tail}, {"head", e.head}, {"length", e.length}});
  j["gluings"] = Json::array();
  for (const Gluing& gl : g.gluings()) {
    Json pairs = Json::array();
    for (const auto& [o, i] : gl.pairs) pairs.push_back({o, i});
    j["gluings"].push_back({{"pairs", pairs}});
  }
  return j;
}

PeriodicGraph graph_from_json(const Json& j, const std::string& path) {
  const int dim = as_int(member(j, "dim", path), path + "/dim");
  if (dim < 1 || dim > 2) throw ConfigError(path + "/dim", "must be 1 or 2");
  const int nv = as_int(member(j, "vertices", path), path + "/vertices");
  if (nv < 1) throw ConfigError(path + "/vertices", "must be positive");
  const Json& edges = member(j, "edges", path);
  if (!edges.is_array() || edges.empty()) throw ConfigError(path + "/edges", "expected a non-empty array");
  std::vector<Edge> es;
  for (size_t k = 0; k < edges.size(); ++k) {
    const std::string p = path + "/edges/" + std::to_string(k);
    Edge e;
    e.tail = as_int(member(edges[k], "tail", p), p + "/tail");
    e.head = as_int(member(edges[k], "head", p), p + "/head");
    const Json& len = member(edges[k], "length", p);
    if (!len.is_number()) throw ConfigError(p + "/length", "expected a number");
    e.length = len.get<double>();
    if (e.tail < 0 || e.tail >= nv || e.head < 0 || e.head >= nv)
      throw ConfigError(p, "endpoint out of range");
    if (!(e.length > 0.0) || !std::isfinite(e.length)) throw ConfigError(p + "/length", "must be positive");
    es.push_back(e);
  }
  const Json& gl = member(j, "gluings", path);
  if (!gl.is_array() || static_cast<int>(gl.size()) != dim)
    throw ConfigError(path + "/gluings", "expected one gluing per lattice direction");
  std::vector<Gluing> gluings;
  for (size_t k = 0; k < gl.size(); ++k) {
    const std::string p = path + "/gluings/" + std::to_string(k) + "/pairs";
    const Json& pairs = member(gl[k], "pairs", path + "/gluings/" + std::to_string(k));
    if (!pairs.is_array()) throw ConfigError(p, "expected an array");
    Gluing g;
    for (size_t q = 0; q < pairs.size(); ++q) {
      const std::string pq = p + "/" + std::to_string(q);
      if (!pairs[q].is_array() || pairs[q].size() != 2) throw ConfigError(pq, "expected [outgoing, incoming]");
      g.pairs.emplace_back(as_int(pairs[q][0], pq + "/0"), as_int(pairs[q][1], pq + "/1"));
    }
    gluings.push_back(g);
  }
  const std::string name = j.contains("name") && j["name"].is_string() ? j["name"].get<std::string>() : "";
  try {
    return PeriodicGraph(MetricGraph(nv, es), dim, gluings, name);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path.empty() ? "/" : path, e.what());
  }
}

void write_field_csv(const SpinorField& f, std::ostream& os) {
  const GraphGrid& g = f.grid();
  const Eigen::VectorXcd& v = f.values();
  os << "edge_id,kind,local_index,arclength,re_u1,im_u1,re_u2,im_u2\n";
  for (int e = 0; e < g.graph().edge_count(); ++e) {
    const int n = g.cells(e);
    const double h = g.spacing(e);
    for (int j = 0; j <= n; ++j) {
      const Complex z = v[g.node_dof(e, j)];
      os << e << ",node," << j << ',' << num(j * h) << ',' << num(z.real()) << ',' << num(z.imag())
         << ",,\n";
    }
    for (int j = 0; j < n; ++j) {
      const Complex z = v[g.mid_dof(e, j)];
      os << e << ",mid," << j << ',' << num((j + 0.5) * h) << ",,," << num(z.real()) << ','
         << num(z.imag()) << '\n';
    }
  }
}

SpinorField read_field_csv(std::istream& is, std::shared_ptr<const GraphGrid> grid) {
  SpinorField f(grid);
  std::string line;
  std::getline(is, line);
  int row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<std::string> c;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) c.push_back(cell);
    while (c.size() < 8) c.emplace_back();
    try {
      const int e = std::stoi(c[0]), j = std::stoi(c[2]);
      if (c[1] == "node")
        f.values()[grid->node_dof(e, j)] = Complex(std::stod(c[4]), std::stod(c[5]));
      else if (c[1] == "mid")
        f.values()[grid->mid_dof(e, j)] = Complex(std::stod(c[6]), std::stod(c[7]));
      else
        throw std::invalid_argument("kind");
    } catch (const std::exception&) {
      throw std::invalid_argument("malformed field CSV at row " + std::to_string(row));
    }
  }
  return f;
}

void write_bands_csv(const BandStructure& b, std::ostream& os) {
  os << (b.dim == 2 ? "theta_1,theta_2,band_index,lambda\n" : "theta_1,band_index,lambda\n");
  for (size_t t = 0; t < b.thetas.size(); ++t)
    for (int k = 0; k < b.bands[t].size(); ++k) {
      os << num(b.thetas[t][0]) << ',';
      if (b.dim == 2) os << num(b.thetas[t][1]) << ',';
      os << k << ',' << num(b.bands[t][k]) << '\n';
    }
}

Json to_json(const GapReport& r) {
  return {{"min_abs_lambda", r.min_abs_lambda}, {"a", r.a},
          {"sup_V", r.sup_V},                   {"lemma31_pass", r.lemma31_pass},
          {"lemma33_pass", r.lemma33_pass},     {"tol_h", r.tol_h}};
}

void export_matrix_market(const DiracOperator& op, const std::string& path) {
  const SparseMatrixC M = op.matrix();
  std::ostringstream os;
  os << "%%MatrixMarket matrix coordinate complex general\n";
  os << M.rows() << ' ' << M.cols() << ' ' << M.nonZeros() << '\n';
  for (int k = 0; k < M.outerSize(); ++k)
    for (SparseMatrixC::InnerIterator it(M, k); it; ++it)
      os << it.row() + 1 << ' ' << it.col() + 1 << ' ' << num(it.value().real()) << ' '
         << num(it.value().imag()) << '\n';
  write_text(path, os.str());

  const GraphGrid& g = op.grid();
  Json side;
  side["dimension"] = op.size();
  side["node_count"] = g.node_count();
  side["mid_count"] = g.mid_count();
  side["ordering"] =
      "u1 on nodes: vertices first, then interior nodes edge by edge; then u2 on midpoints edge by edge";
  side["cells_per_edge"] = Json::array();
  for (int e = 0; e < g.graph().edge_count(); ++e) side["cells_per_edge"].push_back(g.cells(e));
  side["weights"] = std::vector<double>(g.weights().data(), g.weights().data() + g.size());
  if (op.bloch_phase())
    side["theta"] = {(*op.bloch_phase())[0], (*op.bloch_phase())[1]};
  else
    side["theta"] = nullptr;
  side["a"] = op.params().a;
  write_json(path + ".json", side);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
}

void write_json(const std::string& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

}  // namespace dgraph
