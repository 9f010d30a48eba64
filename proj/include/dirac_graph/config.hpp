#pragma once

// Run configuration for the command-line front end. One JSON document; the
// schema is docs/config.schema.json. Errors carry the JSON pointer of the
// offending value.

#include <memory>
#include <string>
#include <vector>

#include "dirac_graph/io.hpp"
#include "dirac_graph/nonlinearity.hpp"
#include "dirac_graph/variational.hpp"

namespace dgraph {

struct NonlinearitySpec {
  std::string kind;  // empty when absent
  double p = 2.5;
  std::vector<double> b;
};

struct RunConfig {
  std::shared_ptr<const PeriodicGraph> graph;
  Json graph_spec;
  std::vector<int> closure;
  double resolution = 16.0;  // cells per unit length
  ProblemParameters problem;
  NonlinearitySpec nonlinearity;

  // bands
  int theta_samples = 16;
  int band_count = 8;

  // solve
  InitSpec init;
  SolveOptions solve;
  int deflate = 1;

  // verify
  std::vector<std::string> which;
  std::vector<int> small_closure;
  double small_resolution = 8.0;
  int norm_samples = 100;
  int interpolation_fields = 20;
  int interpolation_t_points = 400;
  std::vector<int> cutoff_N{16, 32, 64};
  int linking_samples = 1000;
  std::vector<double> linking_rho;

  unsigned seed = 2024;
  std::string out = ".";

  /// Fully resolved document (defaults filled in), embedded in every output.
  Json resolved;
};

const std::vector<std::string>& verify_suites();

/// Parses and range-checks; relative graph file paths resolve against base_dir.
/// The hypotheses (omega) and (V1) are not checked here.
RunConfig load_config(const Json& j, const std::string& base_dir = ".");
RunConfig load_config_file(const std::string& path);

/// Throws HypothesisError for out-of-range exponents / (F3) margins.
Nonlinearity make_nonlinearity(const RunConfig& c);

}  // namespace dgraph
