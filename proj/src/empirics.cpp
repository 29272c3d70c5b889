#include "strata/empirics.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

#include "strata/linsys.hpp"

namespace strata {

ObservedDistribution ObservedDistribution::from_cells(Support s, Vector cells, Vector z_marginal,
                                                      std::int64_t n) {
  if (cells.size() != s.n_cells())
    throw std::invalid_argument("cell vector does not match support");
  if (z_marginal.size() != s.nz())
    throw std::invalid_argument("instrument marginal does not match support");
  for (Index i = 0; i < cells.size(); ++i)
    if (cells[i] < -1e-12) throw std::invalid_argument("negative cell probability");
  Index block = s.ny() * s.nd();
  for (Index z = 0; z < s.nz(); ++z) {
    double sum = cells.segment(z * block, block).sum();
    if (std::abs(sum - 1.0) > 1e-10)
      throw std::invalid_argument("cells for instrument stratum " + s.z_labels[z] +
                                  " sum to " + std::to_string(sum));
  }
  if (std::abs(z_marginal.sum() - 1.0) > 1e-10)
    throw std::invalid_argument("instrument marginal does not sum to 1");
  ObservedDistribution p;
  p.support = std::move(s);
  p.cells = std::move(cells);
  p.z_marginal = std::move(z_marginal);
  p.n = n;
  return p;
}

ObservedDistribution ObservedDistribution::from_counts(Support s,
                                                       std::vector<std::int64_t> counts) {
  if (static_cast<Index>(counts.size()) != s.n_cells())
    throw std::invalid_argument("count vector does not match support");
  Index block = s.ny() * s.nd();
  Vector cells = Vector::Zero(s.n_cells());
  Vector z_marginal = Vector::Zero(s.nz());
  std::int64_t total = 0;
  for (Index z = 0; z < s.nz(); ++z) {
    std::int64_t nz = 0;
    for (Index i = 0; i < block; ++i) {
      std::int64_t c = counts[z * block + i];
      if (c < 0) throw std::invalid_argument("negative count");
      nz += c;
    }
    if (nz == 0)
      throw std::invalid_argument("no observations with instrument value " + s.z_labels[z]);
    for (Index i = 0; i < block; ++i)
      cells[z * block + i] = static_cast<double>(counts[z * block + i]) / static_cast<double>(nz);
    z_marginal[z] = static_cast<double>(nz);
    total += nz;
  }
  z_marginal /= static_cast<double>(total);
  ObservedDistribution p = from_cells(std::move(s), std::move(cells), std::move(z_marginal), total);
  p.counts = std::move(counts);
  return p;
}

ObservedDistribution ingest(const Support& s, const std::vector<Record>& records) {
  std::vector<std::int64_t> counts(s.n_cells(), 0);
  for (const auto& rec : records) {
    if (rec.y < 0 || rec.y >= s.ny() || rec.d < 0 || rec.d >= s.nd() || rec.z < 0 ||
        rec.z >= s.nz())
      throw std::invalid_argument("record outside the declared support");
    ++counts[s.cell_index(rec.y, rec.d, rec.z)];
  }
  return ObservedDistribution::from_counts(s, std::move(counts));
}

Matrix beta_covariance(const ObservedDistribution& p, Index n_rows) {
  const Support& s = p.support;
  Index block = s.ny() * s.nd();
  Matrix sigma = Matrix::Zero(n_rows, n_rows);
  for (Index z = 0; z < s.nz(); ++z) {
    if (p.z_marginal[z] <= 0.0)
      throw std::invalid_argument("instrument marginal must be strictly positive");
    Vector pz = p.cells.segment(z * block, block);
    Matrix blk = (Matrix(pz.asDiagonal()) - pz * pz.transpose()) / p.z_marginal[z];
    sigma.block(z * block, z * block, block, block) = blk;
  }
  return sigma;
}

Matrix psd_sqrt(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  if (es.eigenvalues().minCoeff() < -1e-8)
    throw std::invalid_argument("matrix is not positive semidefinite");
  Vector lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

StudentizerPair estimate_studentizers(const ObservedDistribution& p, const Matrix& A) {
  return estimate_studentizers(p, A, pseudo_inverse(A).projector);
}

StudentizerPair estimate_studentizers(const ObservedDistribution& p, const Matrix& A,
                                      const Matrix& projector) {
  if (p.n <= 0) throw std::invalid_argument("studentizers need a positive sample size");
  Matrix sigma = beta_covariance(p, A.rows());
  StudentizerPair out;
  out.sigma = sigma;
  out.omega_e = psd_sqrt(sigma);
  Matrix proj_sigma = projector * sigma * projector.transpose();
  out.omega_i = psd_sqrt(0.5 * (proj_sigma + proj_sigma.transpose()));
  return out;
}

} // namespace strata
