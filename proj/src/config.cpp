#include "dirac_graph/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "dirac_graph/errors.hpp"

namespace dgraph {

namespace {

class Reader {
 public:
  Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "/" : path_, "expected an object");
    for (auto it = j_.begin(); it != j_.end(); ++it) unused_.push_back(it.key());
  }

  bool has(const char* key) const { return j_.contains(key); }
  std::string at(const char* key) const { return path_ + "/" + key; }

  const Json& get(const char* key) {
    std::erase(unused_, std::string(key));
    auto it = j_.find(key);
    if (it == j_.end()) throw ConfigError(at(key), "missing");
    return *it;
  }

  double number(const char* key, double def, double lo = -INFINITY, double hi = INFINITY,
                bool open_lo = false) {
    if (!has(key)) return def;
    const Json& v = get(key);
    if (!v.is_number()) throw ConfigError(at(key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x) || x < lo || x > hi || (open_lo && x == lo)) {
      std::ostringstream os;
      os << "value " << x << " outside " << (open_lo ? "(" : "[") << lo << ", " << hi << "]";
      throw ConfigError(at(key), os.str());
    }
    return x;
  }

  int integer(const char* key, int def, int lo, int hi) {
    if (!has(key)) return def;
    const Json& v = get(key);
    if (!v.is_number_integer()) throw ConfigError(at(key), "expected an integer");
    const long long x = v.get<long long>();
    if (x < lo || x > hi)
      throw ConfigError(at(key), "value " + std::to_string(x) + " outside [" + std::to_string(lo) +
                                     ", " + std::to_string(hi) + "]");
    return static_cast<int>(x);
  }

  std::string string(const char* key, const std::string& def) {
    if (!has(key)) return def;
    const Json& v = get(key);
    if (!v.is_string()) throw ConfigError(at(key), "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const char* key, std::vector<double> def) {
    if (!has(key)) return def;
    const Json& v = get(key);
    if (!v.is_array() || v.empty()) throw ConfigError(at(key), "expected a non-empty array of numbers");
    std::vector<double> out;
    for (size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw ConfigError(at(key) + "/" + std::to_string(i), "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  void finish() const {
    if (!unused_.empty()) throw ConfigError(path_ + "/" + unused_.front(), "unknown key");
  }

 private:
  const Json& j_;
  std::string path_;
  std::vector<std::string> unused_;
};

Potential read_potential(const Json& j, const std::string& path) {
  if (j.is_number()) {
    const double v = j.get<double>();
    return Potential::constant(v);
  }
  Reader r(j, path);
  Potential V;
  int kinds = 0;
  if (r.has("constant")) {
    V = Potential::constant(r.number("constant", 0.0));
    ++kinds;
  }
  if (r.has("per_edge")) {
    V = Potential::per_edge(r.numbers("per_edge", {}));
    ++kinds;
  }
  if (r.has("cosine")) {
    Reader c(r.get("cosine"), r.at("cosine"));
    const double off = c.number("offset", 0.0);
    const double amp = c.number("amplitude", 0.0);
    c.finish();
    V = Potential::cosine(off, amp);
    ++kinds;
  }
  if (kinds != 1) throw ConfigError(path, "expected exactly one of constant, per_edge, cosine");
  r.finish();
  return V;
}

Json potential_json(const Potential& V) {
  if (V.kind() == Potential::Kind::cosine)
    return {{"cosine", {{"offset", V.offset()}, {"amplitude", V.amplitude()}}}};
  if (V.values().size() == 1) return {{"constant", V.values()[0]}};
  return {{"per_edge", V.values()}};
}

std::vector<int> read_cells(const Json& j, const std::string& path, int dim) {
  std::vector<int> out;
  if (j.is_number_integer()) {
    out.assign(dim, j.get<int>());
  } else if (j.is_array()) {
    for (size_t i = 0; i < j.size(); ++i) {
      if (!j[i].is_number_integer()) throw ConfigError(path + "/" + std::to_string(i), "expected an integer");
      out.push_back(j[i].get<int>());
    }
  } else {
    throw ConfigError(path, "expected an integer or an array of integers");
  }
  if (static_cast<int>(out.size()) != dim)
    throw ConfigError(path, "expected " + std::to_string(dim) + " cell counts");
  for (size_t i = 0; i < out.size(); ++i)
    if (out[i] < 3 || out[i] > 4096) throw ConfigError(path + "/" + std::to_string(i), "cell count outside [3, 4096]");
  return out;
}

}  // namespace

const std::vector<std::string>& verify_suites() {
  static const std::vector<std::string> s = {"gap",   "cutoff",  "interpolation", "norms",
                                             "hypotheses", "linking", "gn"};
  return s;
}

RunConfig load_config(const Json& j, const std::string& base_dir) {
  RunConfig c;
  Reader root(j, "");

  // graph
  {
    const Json& gj = root.get("graph");
    Reader g(gj, "/graph");
    if (g.has("file")) {
      const std::string file = g.string("file", "");
      std::filesystem::path p(file);
      if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
      std::ifstream in(p);
      if (!in) throw ConfigError("/graph/file", "cannot open " + p.string());
      Json doc;
      try {
        doc = Json::parse(in);
      } catch (const Json::parse_error& e) {
        throw ConfigError("/graph/file", std::string("invalid JSON: ") + e.what());
      }
      c.graph = std::make_shared<const PeriodicGraph>(graph_from_json(doc, "/graph/file"));
      c.graph_spec = graph_to_json(*c.graph);
    } else {
      const std::string name = g.string("example", "");
      ExampleKind kind;
      try {
        kind = parse_example_kind(name);
      } catch (const std::exception&) {
        throw ConfigError("/graph/example", "unknown example '" + name + "'");
      }
      ExampleParams ep;
      ep.edge_length = g.number("edge_length", 1.0, 0.0, 1e6, true);
      ep.stub_length = g.number("stub_length", 1.0, 0.0, 1e6, true);
      c.graph = std::make_shared<const PeriodicGraph>(build_example(kind, ep));
      c.graph_spec = {{"example", name}, {"edge_length", ep.edge_length}, {"stub_length", ep.stub_length}};
    }
    g.finish();
  }
  const int dim = c.graph->dim();
  c.closure = root.has("closure") ? read_cells(root.get("closure"), "/closure", dim)
                                  : std::vector<int>(dim, 16);
  c.resolution = root.number("resolution", 16.0, 0.0, 1e5, true);

  // problem
  if (root.has("problem")) {
    Reader p(root.get("problem"), "/problem");
    c.problem.a = p.number("a", 1.0, 0.0, INFINITY, true);
    c.problem.omega = p.number("omega", 0.0);
    if (p.has("V")) c.problem.V = read_potential(p.get("V"), "/problem/V");
    p.finish();
  }
  const auto& vals = c.problem.V.values();
  if (c.problem.V.kind() == Potential::Kind::per_edge && vals.size() > 1 &&
      static_cast<int>(vals.size()) != c.graph->cell().edge_count())
    throw ConfigError("/problem/V/per_edge", "expected one value per cell edge");

  // nonlinearity
  if (root.has("nonlinearity")) {
    Reader n(root.get("nonlinearity"), "/nonlinearity");
    c.nonlinearity.kind = n.string("kind", "");
    if (c.nonlinearity.kind == "power") {
      c.nonlinearity.p = n.number("p", 2.5);
    } else if (c.nonlinearity.kind == "asym_linear") {
      const Json& bj = n.get("b");
      if (bj.is_number()) {
        c.nonlinearity.b = {bj.get<double>()};
      } else {
        Reader b(bj, "/nonlinearity/b");
        if (b.has("per_edge"))
          c.nonlinearity.b = b.numbers("per_edge", {});
        else
          c.nonlinearity.b = {b.number("constant", 0.0)};
        b.finish();
      }
      if (c.nonlinearity.b.size() > 1 && static_cast<int>(c.nonlinearity.b.size()) != c.graph->cell().edge_count())
        throw ConfigError("/nonlinearity/b/per_edge", "expected one value per cell edge");
      for (double b : c.nonlinearity.b)
        if (!(b > 0.0)) throw ConfigError("/nonlinearity/b", "coefficients must be positive");
    } else {
      throw ConfigError("/nonlinearity/kind", "expected 'power' or 'asym_linear'");
    }
    n.finish();
  }

  // bands
  if (root.has("bands")) {
    Reader b(root.get("bands"), "/bands");
    c.theta_samples = b.integer("theta_samples", c.theta_samples, 1, 4096);
    c.band_count = b.integer("bands", c.band_count, 1, 4096);
    b.finish();
  }

  // solve
  c.small_closure.assign(dim, dim == 1 ? 6 : 3);
  if (root.has("solve")) {
    Reader s(root.get("solve"), "/solve");
    c.solve.tol = s.number("tol", 1e-10, 0.0, 1.0, true);
    c.solve.max_iter = s.integer("max_iter", c.solve.max_iter, 1, 100000);
    c.solve.distinct_threshold = s.number("distinct_threshold", 0.1, 0.0, 2.0, true);
    c.solve.retry_budget = s.integer("retry_budget", c.solve.retry_budget, 0, 1000);
    c.deflate = s.integer("deflate", 1, 1, 100);
    if (s.has("init")) {
      Reader i(s.get("init"), "/solve/init");
      const std::string kind = i.string("kind", "band_edge_mode");
      if (kind == "band_edge_mode") {
        c.init = InitSpec::band_edge(i.number("scale", 0.5, 0.0, 1e6, true));
        c.init.edge = i.integer("edge", 0, 0, 1 << 30);
        c.init.position = i.number("position", 0.0, 0.0);
      } else if (kind == "bump") {
        const int edge = i.integer("edge", 0, 0, 1 << 30);
        const double pos = i.number("position", 0.0, 0.0);
        const double width = i.number("width", 1.0, 0.0, 1e6, true);
        const double amp = i.number("amplitude", 1.0);
        c.init = InitSpec::bump(edge, pos, width, amp);
      } else {
        throw ConfigError("/solve/init/kind", "expected 'band_edge_mode' or 'bump'");
      }
      i.finish();
    }
    s.finish();
  }

  // verify
  c.linking_rho.clear();
  for (int k = -10; k <= 0; ++k) c.linking_rho.push_back(std::pow(10.0, k / 2.0));
  if (root.has("verify")) {
    Reader v(root.get("verify"), "/verify");
    if (v.has("which")) {
      const Json& w = v.get("which");
      if (!w.is_array()) throw ConfigError("/verify/which", "expected an array");
      for (size_t k = 0; k < w.size(); ++k) {
        const std::string p = "/verify/which/" + std::to_string(k);
        if (!w[k].is_string()) throw ConfigError(p, "expected a string");
        const std::string name = w[k].get<std::string>();
        if (std::find(verify_suites().begin(), verify_suites().end(), name) == verify_suites().end())
          throw ConfigError(p, "unknown verification suite '" + name + "'");
        c.which.push_back(name);
      }
    }
    if (v.has("small_closure")) c.small_closure = read_cells(v.get("small_closure"), "/verify/small_closure", dim);
    c.small_resolution = v.number("small_resolution", c.small_resolution, 0.0, 1e4, true);
    c.norm_samples = v.integer("norm_samples", c.norm_samples, 1, 1000000);
    c.interpolation_fields = v.integer("interpolation_fields", c.interpolation_fields, 1, 100000);
    c.interpolation_t_points = v.integer("interpolation_t_points", c.interpolation_t_points, 16, 100000);
    if (v.has("cutoff_N")) {
      c.cutoff_N.clear();
      for (double x : v.numbers("cutoff_N", {})) {
        if (x != std::floor(x) || x < 2) throw ConfigError("/verify/cutoff_N", "expected integers >= 2");
        c.cutoff_N.push_back(static_cast<int>(x));
      }
    }
    c.linking_samples = v.integer("linking_samples", c.linking_samples, 1, 10000000);
    c.linking_rho = v.numbers("linking_rho", c.linking_rho);
    for (double r : c.linking_rho)
      if (!(r > 0.0)) throw ConfigError("/verify/linking_rho", "radii must be positive");
    v.finish();
  }
  if (c.which.empty()) c.which = verify_suites();

  const int seed = root.integer("seed", 2024, 0, 2147483647);
  c.seed = static_cast<unsigned>(seed);
  c.out = root.string("output", ".");
  root.finish();

  // resolved document
  Json& r = c.resolved;
  r["graph"] = c.graph_spec;
  r["closure"] = c.closure;
  r["resolution"] = c.resolution;
  r["problem"] = {{"a", c.problem.a}, {"omega", c.problem.omega}, {"V", potential_json(c.problem.V)}};
  if (c.nonlinearity.kind == "power")
    r["nonlinearity"] = {{"kind", "power"}, {"p", c.nonlinearity.p}};
  else if (c.nonlinearity.kind == "asym_linear")
    r["nonlinearity"] = {{"kind", "asym_linear"}, {"b", {{"per_edge", c.nonlinearity.b}}}};
  r["bands"] = {{"theta_samples", c.theta_samples}, {"bands", c.band_count}};
  Json init;
  if (c.init.kind == InitSpec::Kind::bump)
    init = {{"kind", "bump"}, {"edge", c.init.edge}, {"position", c.init.position},
            {"width", c.init.width}, {"amplitude", c.init.amplitude}};
  else
    init = {{"kind", "band_edge_mode"}, {"scale", c.init.scale}, {"edge", c.init.edge},
            {"position", c.init.position}};
  r["solve"] = {{"tol", c.solve.tol},
                {"max_iter", c.solve.max_iter},
                {"distinct_threshold", c.solve.distinct_threshold},
                {"retry_budget", c.solve.retry_budget},
                {"deflate", c.deflate},
                {"init", init}};
  r["verify"] = {{"which", c.which},
                 {"small_closure", c.small_closure},
                 {"small_resolution", c.small_resolution},
                 {"norm_samples", c.norm_samples},
                 {"interpolation_fields", c.interpolation_fields},
                 {"interpolation_t_points", c.interpolation_t_points},
                 {"cutoff_N", c.cutoff_N},
                 {"linking_samples", c.linking_samples},
                 {"linking_rho", c.linking_rho}};
  r["seed"] = c.seed;
  r["output"] = c.out;
  return c;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("/", "cannot open config file " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("/", std::string("invalid JSON: ") + e.what());
  }
  return load_config(j, std::filesystem::path(path).parent_path().string().empty()
                            ? "."
                            : std::filesystem::path(path).parent_path().string());
}

Nonlinearity make_nonlinearity(const RunConfig& c) {
  if (c.nonlinearity.kind == "power") return Nonlinearity::power(c.nonlinearity.p);
  if (c.nonlinearity.kind == "asym_linear") return Nonlinearity::asym_linear(c.nonlinearity.b, c.problem);
  throw ConfigError("/nonlinearity", "missing");
}

}  // namespace dgraph
