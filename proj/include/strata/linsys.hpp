#pragma once

#include <optional>
#include <string>
#include <vector>

#include "strata/empirics.hpp"
#include "strata/model.hpp"

namespace strata {

/// The linear system whose nonnegative solvability characterizes the null.
///
/// Row layout:   [ observable cells (|M|) | mass | parameter | relaxations... ]
/// Column layout:[ response types (canonical order) | one slack per relaxation ]
///
/// Cell rows hold 1{y(d)=y, d(z)=d}; the mass row holds 1{r in R} (all ones
/// in reduced mode); the parameter row holds (g(r) - theta0) 1{r in R'}.
/// Each relaxation contributes a row with +/-1 over its types and a +1 slack.
struct SystemMatrix {
  Matrix A;
  Support support;
  Index n_cells = 0;  // |M|
  Index n_types = 0;  // type columns (slack columns follow)
  Index mass_row = 0; // == n_cells
  Index param_row = 0;
  double theta0 = 0.0;
  bool reduced = true;
  std::vector<std::int64_t> col_types;  // canonical index per type column
  Vector relax_targets;                 // beta entries for relaxation rows

  Index rows() const { return A.rows(); }
  Index cols() const { return A.cols(); }
  Index n_relax() const { return rows() - n_cells - 2; }

  /// All rows except the parameter row (cells, mass, relaxations).
  Matrix A0() const;
  /// The observable-cell block only.
  Matrix A1() const { return A.topRows(n_cells); }
  /// A0 plus a final row 1{r in R'}: the system pinning the stratum mass.
  Matrix A_stratum(const std::vector<char>& in_stratum) const;

  std::string row_name(Index row) const;
  std::string col_name(Index col) const;

  /// Dense CSV dump with a header row of column labels.
  std::string to_csv() const;
};

SystemMatrix build_A(const StrataModel& model, const ParameterSpec& param, double theta0,
                     bool reduced = true, std::int64_t cap = 10000000);

/// beta(P): observable cells in system row order, then the mass target 1,
/// the parameter target 0 (or pi when building beta(P, pi)), then relaxation
/// targets.
struct BetaVector {
  Vector v;
  Index n_cells = 0;

  Vector cells() const { return v.head(n_cells); }
};

BetaVector beta_from_observed(const ObservedDistribution& p, const SystemMatrix& sys,
                              std::optional<double> tail_pi = std::nullopt);

/// beta0(P): beta without the parameter row (matches SystemMatrix::A0()).
Vector beta0_from_observed(const ObservedDistribution& p, const SystemMatrix& sys);

struct PseudoInverse {
  Matrix pinv;      // A+
  Matrix projector; // A A+
  Index rank = 0;
};

PseudoInverse pseudo_inverse(const Matrix& A, double rank_tol = 1e-10);

/// Push-forward of a latent distribution to observable cells: A1 q.
Vector latent_to_observed(const LatentDistribution& q, const SystemMatrix& sys);

} // namespace strata
