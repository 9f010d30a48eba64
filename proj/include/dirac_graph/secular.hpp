#pragma once

// Exact eigenvalue oracle for piecewise-constant potentials. On every edge the
// eigenvalue equation is u' = M(lambda) u with
//   M(lambda) = [[0, i(lambda + m)], [i(lambda - m), 0]],   m = a + V_e,
// so exp(x M) = C(x) I + S(x) M with M^2 = (m^2 - lambda^2) I. The vertex
// conditions of the Bloch quotient cell give a 2|E| x 2|E| matrix whose
// determinant vanishes exactly at the Bloch eigenvalues.

#include <utility>
#include <vector>

#include "dirac_graph/dirac.hpp"

namespace dgraph {

/// Entries C(x), S(x) of exp(x M) for q = m^2 - lambda^2 (any sign).
std::pair<double, double> transfer_coefficients(double q, double x);

/// Raw determinant of the vertex-condition matrix (complex, phase fixed by theta).
Complex secular_determinant(const PeriodicGraph& g, const ProblemParameters& p,
                            const BlochPhase& theta, double lambda);

struct SecularOptions {
  double mesh_step = 0.0;  // 0 selects 1e-3 * a
  double tolerance = 1e-12;
};

struct SecularResult {
  std::vector<double> roots;               // ascending, with multiplicity
  std::vector<double> tangential_roots;    // double roots found as touching minima
  std::vector<std::pair<double, double>> suspect_intervals;  // minima that might hide roots
  double max_imag_residual = 0.0;          // |Im| / max |det| after phase normalisation
};

/// Roots in [lambda_min, lambda_max]. Requires a piecewise-constant potential.
SecularResult secular_bands(const PeriodicGraph& g, const ProblemParameters& p,
                            const BlochPhase& theta, double lambda_min, double lambda_max,
                            const SecularOptions& opt = {});

/// The first `count` roots above zero, extending the search window as needed.
std::vector<double> secular_positive_roots(const PeriodicGraph& g, const ProblemParameters& p,
                                           const BlochPhase& theta, int count,
                                           const SecularOptions& opt = {});

}  // namespace dgraph
