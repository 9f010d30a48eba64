#pragma once

// File formats: graph JSON, field CSV, band CSV, Matrix Market operator export.

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "dirac_graph/dirac.hpp"
#include "dirac_graph/spectra.hpp"

namespace dgraph {

using Json = nlohmann::ordered_json;

/// {name, dim, vertices, edges: [{tail, head, length}], gluings: [{pairs: [[out, in], ...]}]}
Json graph_to_json(const PeriodicGraph& g);
/// Throws ConfigError with a JSON-pointer path under `path`.
PeriodicGraph graph_from_json(const Json& j, const std::string& path = "");

/// Columns edge_id, kind, local_index, arclength, re_u1, im_u1, re_u2, im_u2;
/// node rows leave the u2 columns empty and midpoint rows the u1 columns.
void write_field_csv(const SpinorField& f, std::ostream& os);
SpinorField read_field_csv(std::istream& is, std::shared_ptr<const GraphGrid> grid);

/// Columns theta_1[, theta_2], band_index, lambda.
void write_bands_csv(const BandStructure& b, std::ostream& os);

Json to_json(const GapReport& r);

/// Complex coordinate Matrix Market file of M = W^{-1} K plus `<path>.json`
/// with the DOF layout, weights and Bloch phase.
void export_matrix_market(const DiracOperator& op, const std::string& path);

void write_text(const std::string& path, const std::string& text);
void write_json(const std::string& path, const Json& j);

}  // namespace dgraph
