#pragma once

#include <string>
#include <vector>

#include "strata/double_description.hpp"
#include "strata/types.hpp"

namespace strata {

/// V-representation: convex hull of `vertices` plus conic hull of `rays`.
/// Rays are normalized to unit infinity norm. A lineality direction appears
/// as a pair of opposite rays.
struct PolyhedronV {
  std::vector<Vector> vertices;
  std::vector<Vector> rays;
};

/// H-representation {x : G x <= h}. Implicit equalities appear as paired
/// opposite rows. `rational_G`/`rational_h` carry the exact coefficients
/// when the polyhedron was computed exactly.
struct PolyhedronH {
  Matrix G;
  Vector h;
  std::vector<RationalVector> rational_G;
  std::vector<Rational> rational_h;
};

/// Exact V-representation of a polyhedron {r : W r <= c}, via double
/// description of the homogenization. Kept in rationals so downstream
/// evaluation (closed-form bound expressions) is exact.
struct RationalPolyhedronV {
  std::vector<RationalVector> vertices;
  std::vector<RationalVector> rays; // includes +/- pairs for lineality

  PolyhedronV to_double() const;
};

RationalPolyhedronV enumerate_polyhedron(const RationalMatrix& W, const RationalVector& c,
                                         Index row_cap = 5000);

/// Vertices and extreme rays of the dual feasible set {r : A0' r <= c} of the
/// bound linear program. Evaluating beta0' r over the vertices reproduces the
/// closed-form bound envelope.
RationalPolyhedronV enumerate_dual(const Matrix& A0, const Vector& c, Index row_cap = 5000);

/// V-representation of {q : 1'q = 1, q >= 0} over an admissible set: the unit
/// vectors, no rays.
PolyhedronV vrep_of_simplex(Index n_admissible);

/// H-representation of the convex hull of the columns of A1 (the set of
/// observable cell vectors the model can generate). The emitted inequalities
/// are the model's sharp testable implications.
PolyhedronH image_polytope_hrep(const Matrix& A1, Index hull_dim_cap = 64);

/// Vertex enumeration of {x : G x <= h} in doubles (used for round-trip
/// checks of emitted H-representations).
PolyhedronV vertices_from_hrep(const PolyhedronH& poly);

/// One inequality per line, exact signed rational coefficients over named
/// cells.
std::string hrep_to_text(const PolyhedronH& poly, const std::vector<std::string>& col_names);

} // namespace strata
