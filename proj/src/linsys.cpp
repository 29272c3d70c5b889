#include "strata/linsys.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <set>
#include <sstream>

namespace strata {

Matrix SystemMatrix::A0() const {
  Matrix out(rows() - 1, cols());
  out.topRows(param_row) = A.topRows(param_row);
  out.bottomRows(rows() - param_row - 1) = A.bottomRows(rows() - param_row - 1);
  return out;
}

Matrix SystemMatrix::A_stratum(const std::vector<char>& in_stratum) const {
  Matrix out = A;
  out.row(param_row).setZero();
  for (Index j = 0; j < n_types; ++j)
    if (in_stratum[j]) out(param_row, j) = 1.0;
  return out;
}

std::string SystemMatrix::row_name(Index row) const {
  if (row < n_cells) return support.cell_name(row);
  if (row == mass_row) return "mass";
  if (row == param_row) return "parameter";
  return "relax_" + std::to_string(row - n_cells - 2);
}

std::string SystemMatrix::col_name(Index col) const {
  if (col < n_types) return response_type_name(support, response_type_at(support, col_types[col]));
  return "slack_" + std::to_string(col - n_types);
}

std::string SystemMatrix::to_csv() const {
  std::ostringstream out;
  out << "row";
  for (Index j = 0; j < cols(); ++j) out << "," << col_name(j);
  out << "\n";
  for (Index i = 0; i < rows(); ++i) {
    out << row_name(i);
    for (Index j = 0; j < cols(); ++j) out << "," << A(i, j);
    out << "\n";
  }
  return out.str();
}

SystemMatrix build_A(const StrataModel& model, const ParameterSpec& param, double theta0,
                     bool reduced, std::int64_t cap) {
  const Support& s = model.support;
  SystemMatrix sys;
  sys.support = s;
  sys.theta0 = theta0;
  sys.reduced = reduced;
  sys.n_cells = s.n_cells();

  if (reduced) {
    sys.col_types = model.admissible;
  } else {
    std::int64_t total = s.n_response_types(cap);
    sys.col_types.resize(total);
    for (std::int64_t i = 0; i < total; ++i) sys.col_types[i] = i;
  }
  sys.n_types = static_cast<Index>(sys.col_types.size());

  Index n_relax = static_cast<Index>(model.relaxations.size());
  Index rows = sys.n_cells + 2 + n_relax;
  Index cols = sys.n_types + n_relax;
  sys.mass_row = sys.n_cells;
  sys.param_row = sys.n_cells + 1;
  sys.A = Matrix::Zero(rows, cols);
  sys.relax_targets.resize(n_relax);

  MaterializedParameter mat = materialize(param, model);
  std::set<std::int64_t> stratum(mat.stratum_indices.begin(), mat.stratum_indices.end());

  for (Index j = 0; j < sys.n_types; ++j) {
    std::int64_t canonical = sys.col_types[j];
    ResponseType r = response_type_at(s, canonical);
    for (Index z = 0; z < s.nz(); ++z) {
      int d = r.treatment[z];
      int y = r.outcome[d];
      sys.A(s.cell_index(y, d, z), j) = 1.0;
    }
    if (reduced || model.admits(canonical)) sys.A(sys.mass_row, j) = 1.0;
  }

  // parameter row: (g(r) - theta0) 1{r in R'}
  if (reduced) {
    for (Index j = 0; j < sys.n_types; ++j)
      if (mat.in_stratum[j]) sys.A(sys.param_row, j) = mat.g_values[j] - theta0;
  } else {
    for (Index j = 0; j < sys.n_types; ++j) {
      std::int64_t canonical = sys.col_types[j];
      if (!stratum.count(canonical)) continue;
      ResponseType r = response_type_at(s, canonical);
      sys.A(sys.param_row, j) = param.g(s, r) - theta0;
    }
  }

  // relaxation rows: sum over listed types (+1 at_most / -1 at_least) + slack
  for (Index k = 0; k < n_relax; ++k) {
    const Relaxation& rel = model.relaxations[k];
    Index row = sys.n_cells + 2 + k;
    double sign = rel.direction == Relaxation::Direction::at_most ? 1.0 : -1.0;
    for (auto canonical : rel.type_indices) {
      auto it = std::lower_bound(sys.col_types.begin(), sys.col_types.end(), canonical);
      if (it != sys.col_types.end() && *it == canonical)
        sys.A(row, it - sys.col_types.begin()) = sign;
    }
    sys.A(row, sys.n_types + k) = 1.0; // slack
    sys.relax_targets[k] = sign * rel.epsilon;
  }

  return sys;
}

BetaVector beta_from_observed(const ObservedDistribution& p, const SystemMatrix& sys,
                              std::optional<double> tail_pi) {
  if (p.cells.size() != sys.n_cells)
    throw std::invalid_argument("observed distribution does not match system dimensions");
  BetaVector b;
  b.n_cells = sys.n_cells;
  b.v.resize(sys.rows());
  b.v.head(sys.n_cells) = p.cells;
  b.v[sys.mass_row] = 1.0;
  b.v[sys.param_row] = tail_pi.value_or(0.0);
  b.v.tail(sys.n_relax()) = sys.relax_targets;
  return b;
}

Vector beta0_from_observed(const ObservedDistribution& p, const SystemMatrix& sys) {
  BetaVector full = beta_from_observed(p, sys);
  Vector out(sys.rows() - 1);
  out.head(sys.param_row) = full.v.head(sys.param_row);
  out.tail(sys.rows() - sys.param_row - 1) = full.v.tail(sys.rows() - sys.param_row - 1);
  return out;
}

PseudoInverse pseudo_inverse(const Matrix& A, double rank_tol) {
  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  double cutoff = sv.size() > 0 ? rank_tol * sv[0] : 0.0;
  Index rank = 0;
  for (Index i = 0; i < sv.size(); ++i)
    if (sv[i] > cutoff) ++rank;

  PseudoInverse out;
  out.rank = rank;
  Matrix U = svd.matrixU().leftCols(rank);
  Matrix V = svd.matrixV().leftCols(rank);
  Vector inv = sv.head(rank).cwiseInverse();
  out.pinv = V * inv.asDiagonal() * U.transpose();
  out.projector = U * U.transpose();
  return out;
}

Vector latent_to_observed(const LatentDistribution& q, const SystemMatrix& sys) {
  Vector x = Vector::Zero(sys.cols());
  for (const auto& [canonical, mass] : q.mass) {
    auto it = std::lower_bound(sys.col_types.begin(), sys.col_types.end(), canonical);
    if (it == sys.col_types.end() || *it != canonical) {
      if (mass > 1e-12)
        throw std::invalid_argument("latent mass on a response type outside the system columns");
      continue;
    }
    x[it - sys.col_types.begin()] = mass;
  }
  return sys.A1() * x;
}

} // namespace strata
