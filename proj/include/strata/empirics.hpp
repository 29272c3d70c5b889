#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "strata/support.hpp"

namespace strata {

struct SystemMatrix;

/// Observed cell probabilities p_{yd|z} plus the instrument marginal and the
/// sample size behind them (n = 0 marks a population-given distribution).
struct ObservedDistribution {
  Support support;
  Vector cells;      // size |M|, conditional on z, canonical cell layout
  Vector z_marginal; // size |Z|
  std::int64_t n = 0;
  std::vector<std::int64_t> counts; // per cell, empty unless built from counts

  double cell(Index y, Index d, Index z) const { return cells[support.cell_index(y, d, z)]; }

  static ObservedDistribution from_cells(Support s, Vector cells, Vector z_marginal,
                                         std::int64_t n = 0);
  static ObservedDistribution from_counts(Support s, std::vector<std::int64_t> counts);
};

/// One observation, by support codes.
struct Record {
  int y, d, z;
};

/// Tabulates records into an ObservedDistribution. Every instrument value
/// must appear at least once; unseen (y,d) cells get probability zero.
ObservedDistribution ingest(const Support& s, const std::vector<Record>& records);

/// Studentizing matrices: omega_e is the PSD square root of the asymptotic
/// covariance Sigma of sqrt(n)(beta_hat - beta), omega_i the PSD root of
/// (AA+) Sigma (AA+)'. Rows for the constant tail entries of beta are zero.
struct StudentizerPair {
  Matrix omega_e;
  Matrix omega_i;
  Matrix sigma; // the covariance itself, kept for diagnostics and tests
};

StudentizerPair estimate_studentizers(const ObservedDistribution& p, const Matrix& A);
StudentizerPair estimate_studentizers(const ObservedDistribution& p, const Matrix& A,
                                      const Matrix& projector);

/// Asymptotic covariance of sqrt(n)(beta_hat - beta) under per-stratum
/// multinomial sampling, padded with zero rows for the non-cell rows.
Matrix beta_covariance(const ObservedDistribution& p, Index n_rows);

/// Symmetric PSD square root via eigendecomposition (negative eigenvalues
/// within tolerance are clamped to zero).
Matrix psd_sqrt(const Matrix& m);

} // namespace strata
