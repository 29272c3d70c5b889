#include "strata/inference.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "strata/parallel.hpp"

namespace strata {

namespace {

double auto_lambda(std::int64_t n) {
  if (n < 3) return 1.0;
  return std::min(1.0, 1.0 / std::sqrt(std::log(static_cast<double>(n))));
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// quantile of convention "higher": inf{x : F(x) >= q}
double quantile_higher(std::vector<double> draws, double q) {
  std::sort(draws.begin(), draws.end());
  const auto B = static_cast<std::int64_t>(draws.size());
  std::int64_t k = static_cast<std::int64_t>(std::ceil(q * static_cast<double>(B)));
  k = std::min(std::max<std::int64_t>(k, 1), B);
  return draws[static_cast<std::size_t>(k - 1)];
}

} // namespace

LinearSystem full_system(const SystemMatrix& sys) {
  LinearSystem out;
  out.A = sys.A;
  out.n_cells = sys.n_cells;
  out.pinned.resize(2 + sys.n_relax());
  out.pinned[0] = 1.0;
  out.pinned[1] = 0.0;
  out.pinned.tail(sys.n_relax()) = sys.relax_targets;
  return out;
}

LinearSystem consistency_system(const SystemMatrix& sys) {
  LinearSystem out;
  out.A = sys.A0();
  out.n_cells = sys.n_cells;
  out.pinned.resize(1 + sys.n_relax());
  out.pinned[0] = 1.0;
  out.pinned.tail(sys.n_relax()) = sys.relax_targets;
  return out;
}

EqualitySup::EqualitySup(const Matrix& omega, double rank_tol) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(omega);
  const Vector& lam = es.eigenvalues();
  double lmax = lam.cwiseAbs().maxCoeff();
  double cutoff = std::max(rank_tol * lmax, 1e-14);
  std::vector<Index> keep, drop;
  for (Index i = 0; i < lam.size(); ++i)
    (lam[i] > cutoff ? keep : drop).push_back(i);
  Index r = static_cast<Index>(keep.size());
  Index m = omega.rows();
  range_.resize(m, r);
  null_.resize(m, m - r);
  Vector inv(r);
  for (Index k = 0; k < r; ++k) {
    range_.col(k) = es.eigenvectors().col(keep[k]);
    inv[k] = 1.0 / lam[keep[k]];
  }
  for (Index k = 0; k < m - r; ++k) null_.col(k) = es.eigenvectors().col(drop[k]);
  pinv_ = range_ * inv.asDiagonal() * range_.transpose();
  full_rank_ = (r == m);
}

double EqualitySup::value(const Vector& v) const {
  Vector w = pinv_ * v;
  if (full_rank_) return w.cwiseAbs().maxCoeff();
  if (w.cwiseAbs().maxCoeff() < 1e-300) return 0.0;
  // max w't subject to ||t||_1 <= 1, t in range(omega):
  // variables t+ , t-, slack u
  const Index m = w.size();
  const Index k = null_.cols();
  StandardLP lp;
  lp.sense = Sense::max;
  lp.c.resize(2 * m + 1);
  lp.c.head(m) = w;
  lp.c.segment(m, m) = -w;
  lp.c[2 * m] = 0.0;
  lp.M.resize(k + 1, 2 * m + 1);
  lp.M.block(0, 0, k, m) = null_.transpose();
  lp.M.block(0, m, k, m) = -null_.transpose();
  lp.M.col(2 * m).setZero();
  lp.M.row(k).setOnes();
  lp.b = Vector::Zero(k + 1);
  lp.b[k] = 1.0;
  LPResult res = solve(lp);
  if (res.status != LPStatus::optimal)
    throw std::runtime_error("equality-part program failed to solve");
  return res.value;
}

InequalitySup::InequalitySup(const PseudoInverse& pinv, const Matrix& omega_i) {
  const Index m = pinv.projector.rows();
  const Index n = pinv.pinv.rows();
  m_ = m;
  // variables: [s (m, free), t+ (m), t- (m), u (1)]
  Matrix W = omega_i * pinv.projector;
  A_eq_.resize(m + 1, 3 * m + 1);
  A_eq_.setZero();
  A_eq_.block(0, 0, m, m) = W;
  A_eq_.block(0, m, m, m) = -Matrix::Identity(m, m);
  A_eq_.block(0, 2 * m, m, m) = Matrix::Identity(m, m);
  A_eq_.row(m).setZero();
  A_eq_.row(m).segment(m, 2 * m).setOnes();
  A_eq_(m, 3 * m) = 1.0;
  b_eq_ = Vector::Zero(m + 1);
  b_eq_[m] = 1.0;
  A_le_.resize(n, 3 * m + 1);
  A_le_.setZero();
  A_le_.block(0, 0, n, m) = pinv.pinv;
  b_le_ = Vector::Zero(n);
  obj_map_ = pinv.pinv.transpose() * pinv.pinv;
}

InequalitySup::Result InequalitySup::value(const Vector& target) const {
  InequalityLP lp;
  lp.sense = Sense::max;
  lp.c = Vector::Zero(3 * m_ + 1);
  lp.c.head(m_) = obj_map_ * target;
  lp.A_eq = A_eq_;
  lp.b_eq = b_eq_;
  lp.A_le = A_le_;
  lp.b_le = b_le_;
  lp.nonneg.assign(3 * m_ + 1, 1);
  for (Index i = 0; i < m_; ++i) lp.nonneg[i] = 0;
  LPResult res = solve(lp);
  Result out;
  if (res.status == LPStatus::unbounded) {
    out.value = std::numeric_limits<double>::infinity();
    out.s = res.solution.head(m_);
    return out;
  }
  if (res.status != LPStatus::optimal)
    throw std::runtime_error("inequality-part program failed to solve");
  out.value = res.value;
  out.s = res.solution.head(m_);
  return out;
}

StatisticParts test_statistic(const LinearSystem& lsys, const PseudoInverse& pinv,
                              const Vector& beta_hat, const StudentizerPair& st,
                              std::int64_t n) {
  if (st.omega_e.rows() != lsys.rows())
    throw std::invalid_argument("studentizer does not match system dimensions");
  double sqrt_n = std::sqrt(static_cast<double>(n));
  EqualitySup eq(st.omega_e);
  InequalitySup ineq(pinv, st.omega_i);
  Vector resid = beta_hat - pinv.projector * beta_hat;
  StatisticParts out;
  out.equality = sqrt_n * eq.value(resid);
  out.inequality = sqrt_n * ineq.value(beta_hat).value;
  out.statistic = std::max(out.equality, out.inequality);
  return out;
}

RestrictedEstimate restricted_estimator(const LinearSystem& lsys, const PseudoInverse& pinv,
                                        const Vector& beta_hat, const StudentizerPair& st) {
  const Index n_cols = lsys.A.cols();
  const Index n_pinned = lsys.pinned.size();
  InequalitySup ineq(pinv, st.omega_i);

  // master: min tau subject to (A x)_pinned = targets, cuts tau >= c_k + d_k'x
  // variables [x (n_cols), tau]
  std::vector<Vector> cut_d;
  std::vector<double> cut_c;

  auto solve_master = [&]() {
    InequalityLP lp;
    lp.sense = Sense::min;
    lp.c = Vector::Zero(n_cols + 1);
    lp.c[n_cols] = 1.0;
    lp.A_eq.resize(n_pinned, n_cols + 1);
    lp.A_eq.setZero();
    lp.A_eq.block(0, 0, n_pinned, n_cols) = lsys.A.bottomRows(n_pinned);
    lp.b_eq = lsys.pinned;
    Index n_cuts = static_cast<Index>(cut_d.size());
    lp.A_le.resize(n_cuts, n_cols + 1);
    lp.b_le.resize(n_cuts);
    for (Index k = 0; k < n_cuts; ++k) {
      lp.A_le.row(k).head(n_cols) = cut_d[k].transpose();
      lp.A_le(k, n_cols) = -1.0;
      lp.b_le[k] = -cut_c[k];
    }
    lp.nonneg.assign(n_cols + 1, 1);
    return solve(lp);
  };

  auto criterion = [&](const Vector& b, Vector* s_plus, Vector* s_minus) {
    Vector diff = beta_hat - b;
    auto up = ineq.value(diff);
    auto dn = ineq.value(Vector(-diff));
    if (s_plus) *s_plus = up.s;
    if (s_minus) *s_minus = dn.s;
    return std::max(up.value, dn.value);
  };

  RestrictedEstimate out;

  // when beta_hat itself is feasible (A x = beta_hat for some x >= 0 with the
  // right tail) the criterion is zero at b = beta_hat
  if ((beta_hat.tail(n_pinned) - lsys.pinned).cwiseAbs().maxCoeff() < 1e-12) {
    StandardLP feas;
    feas.M = lsys.A;
    feas.b = beta_hat;
    feas.c = Vector::Zero(n_cols);
    if (solve(feas).status == LPStatus::optimal) {
      out.beta_r = beta_hat;
      out.criterion = 0.0;
      return out;
    }
  }

  LPResult master = solve_master();
  if (master.status != LPStatus::optimal) {
    out.feasible = false;
    out.beta_r = lsys.assemble_beta(Vector::Zero(lsys.n_cells));
    out.criterion = std::numeric_limits<double>::quiet_NaN();
    return out;
  }

  const Matrix pinvA = pinv.pinv * lsys.A; // A+ A
  const Vector pinv_beta = pinv.pinv * beta_hat;
  double best_ub = std::numeric_limits<double>::infinity();
  Vector best_b;
  for (int iter = 0; iter < 200; ++iter) {
    Vector x = master.solution.head(n_cols);
    Vector b = lsys.A * x;
    Vector sp, sm;
    double f = criterion(b, &sp, &sm);
    out.cuts = iter + 1;
    if (f < best_ub) {
      best_ub = f;
      best_b = b;
    }
    double lb = master.solution[n_cols];
    if (best_ub - lb < 1e-7) break;
    if (iter == 199)
      throw std::runtime_error("restricted estimator did not converge in 200 cuts (gap " +
                               std::to_string(best_ub - lb) + ")");
    for (int sign = 0; sign < 2; ++sign) {
      const Vector& s = sign == 0 ? sp : sm;
      double sg = sign == 0 ? 1.0 : -1.0;
      // f(b) >= sg * <A+ s, A+ (beta_hat - A x)>
      Vector as = pinv.pinv * s; // A+ s
      cut_c.push_back(sg * as.dot(pinv_beta));
      cut_d.push_back(Vector(-sg * pinvA.transpose() * as));
    }
    master = solve_master();
    if (master.status != LPStatus::optimal)
      throw std::runtime_error("restricted-estimator master program failed");
  }
  out.beta_r = best_b;
  out.criterion = best_ub;
  return out;
}

Vector bootstrap_cells(const ObservedDistribution& p, std::uint64_t seed,
                       std::int64_t replicate) {
  const Support& s = p.support;
  const Index block = s.ny() * s.nd();
  std::mt19937_64 rng(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(replicate) + 1)));
  Vector cells = Vector::Zero(p.cells.size());
  for (Index z = 0; z < s.nz(); ++z) {
    auto n_z = static_cast<std::int64_t>(std::llround(
        p.z_marginal[z] * static_cast<double>(p.n)));
    // sequential binomial thinning = one multinomial draw with fixed n_z
    std::int64_t remaining = n_z;
    double mass_left = 1.0;
    for (Index i = 0; i < block && remaining > 0; ++i) {
      double q = p.cells[z * block + i];
      if (q <= 0.0) continue;
      std::int64_t draw;
      if (q >= mass_left) {
        draw = remaining;
      } else {
        std::binomial_distribution<std::int64_t> bin(remaining, q / mass_left);
        draw = bin(rng);
      }
      cells[z * block + i] = static_cast<double>(draw) / static_cast<double>(n_z);
      remaining -= draw;
      mass_left -= q;
    }
  }
  return cells;
}

CriticalValueResult critical_value(const ObservedDistribution& data, const LinearSystem& lsys,
                                   const PseudoInverse& pinv, const StudentizerPair& st,
                                   const Vector& beta_r, const TestConfig& cfg) {
  if (cfg.bootstrap_B < 2) throw std::invalid_argument("bootstrap_B must be at least 2");
  double lambda = cfg.lambda_n > 0.0 ? cfg.lambda_n : auto_lambda(data.n);
  double sqrt_n = std::sqrt(static_cast<double>(data.n));
  EqualitySup eq(st.omega_e);
  InequalitySup ineq(pinv, st.omega_i);
  Vector shift = lambda * beta_r;

  std::vector<double> draws(cfg.bootstrap_B);
  parallel_for(cfg.bootstrap_B, cfg.threads, [&](Index b) {
    Vector cells = bootstrap_cells(data, cfg.seed, b);
    Vector diff = Vector::Zero(lsys.rows());
    diff.head(lsys.n_cells) = cells - data.cells;
    Vector resid = diff - pinv.projector * diff;
    double eq_part = sqrt_n * eq.value(resid);
    double ineq_part = sqrt_n * ineq.value(diff + shift).value;
    draws[b] = std::max(eq_part, ineq_part);
  });

  CriticalValueResult out;
  out.value = quantile_higher(draws, 1.0 - cfg.alpha);
  out.draws = std::move(draws);
  return out;
}

namespace {

TestOutcome run_test(const LinearSystem& lsys, const ObservedDistribution& data,
                     const Vector& beta_hat, const TestConfig& cfg, double theta0) {
  PseudoInverse pinv = pseudo_inverse(lsys.A);
  StudentizerPair st = estimate_studentizers(data, lsys.A, pinv.projector);
  StatisticParts parts = test_statistic(lsys, pinv, beta_hat, st, data.n);
  RestrictedEstimate restricted = restricted_estimator(lsys, pinv, beta_hat, st);
  Vector beta_r = restricted.feasible ? restricted.beta_r : Vector(Vector::Zero(lsys.rows()));
  CriticalValueResult crit = critical_value(data, lsys, pinv, st, beta_r, cfg);

  TestOutcome out;
  out.statistic = parts.statistic;
  out.equality_part = parts.equality;
  out.inequality_part = parts.inequality;
  out.critical_value = crit.value;
  out.reject = parts.statistic > crit.value;
  out.lambda_used = cfg.lambda_n > 0.0 ? cfg.lambda_n : auto_lambda(data.n);
  out.theta0 = theta0;
  out.n = data.n;
  out.restricted_estimator_feasible = restricted.feasible;
  if (cfg.keep_bootstrap_draws) out.bootstrap_draws = std::move(crit.draws);
  return out;
}

} // namespace

TestOutcome test(double theta0, const StrataModel& model, const ParameterSpec& param,
                 const ObservedDistribution& data, const TestConfig& cfg) {
  if (data.n <= 0) throw std::invalid_argument("testing needs sampled data (n > 0)");
  SystemMatrix sys = build_A(model, param, theta0, true);
  LinearSystem lsys = full_system(sys);
  Vector beta_hat = beta_from_observed(data, sys).v;
  return run_test(lsys, data, beta_hat, cfg, theta0);
}

TestOutcome specification_test(const StrataModel& model, const ObservedDistribution& data,
                               const TestConfig& cfg) {
  if (data.n <= 0) throw std::invalid_argument("testing needs sampled data (n > 0)");
  ParameterSpec mass;
  mass.kind = ParameterSpec::Kind::stratum_mass;
  mass.name = "stratum_mass";
  mass.conditioning.all = true;
  SystemMatrix sys = build_A(model, mass, 0.0, true);
  LinearSystem lsys = consistency_system(sys);
  Vector beta_hat = beta0_from_observed(data, sys);
  return run_test(lsys, data, beta_hat, cfg, 0.0);
}

ConfidenceRegion confidence_region(const StrataModel& model, const ParameterSpec& param,
                                   const ObservedDistribution& data, const TestConfig& cfg) {
  if (data.n <= 0) throw std::invalid_argument("testing needs sampled data (n > 0)");

  Index grid_n = cfg.grid_n > 0 ? cfg.grid_n : 101;
  double lo = cfg.grid_lo, hi = cfg.grid_hi;
  if (cfg.grid_n == 0 || hi <= lo) {
    PartialMassOptions opts;
    opts.grid_n = 201;
    BoundResult env = compute_bounds(model, param, data, opts);
    if (env.status != BoundStatus::nonempty) {
      // fall back to the raw range of g over the stratum
      MaterializedParameter mat = materialize(param, model);
      lo = mat.g_values.minCoeff();
      hi = mat.g_values.maxCoeff();
    } else {
      lo = env.lower;
      hi = env.upper;
    }
    double h = std::max((hi - lo) / std::max<Index>(grid_n - 9, 1), 1e-3);
    lo -= 4 * h;
    hi += 4 * h;
  }

  // bootstrap resamples shared across the grid
  std::vector<Vector> boot_cells(cfg.bootstrap_B);
  parallel_for(cfg.bootstrap_B, cfg.threads, [&](Index b) {
    boot_cells[b] = bootstrap_cells(data, cfg.seed, b);
  });

  ConfidenceRegion region;
  region.alpha = cfg.alpha;
  region.grid.resize(grid_n);
  region.accepted.assign(grid_n, 0);
  double sqrt_n = std::sqrt(static_cast<double>(data.n));

  for (Index gi = 0; gi < grid_n; ++gi) {
    double theta0 = grid_n == 1 ? lo : lo + (hi - lo) * gi / (grid_n - 1);
    region.grid[gi] = theta0;
    SystemMatrix sys = build_A(model, param, theta0, true);
    LinearSystem lsys = full_system(sys);
    Vector beta_hat = beta_from_observed(data, sys).v;
    PseudoInverse pinv = pseudo_inverse(lsys.A);
    StudentizerPair st = estimate_studentizers(data, lsys.A, pinv.projector);
    StatisticParts parts = test_statistic(lsys, pinv, beta_hat, st, data.n);
    RestrictedEstimate restricted = restricted_estimator(lsys, pinv, beta_hat, st);
    double lambda = cfg.lambda_n > 0.0 ? cfg.lambda_n : auto_lambda(data.n);
    Vector shift = restricted.feasible ? Vector(lambda * restricted.beta_r)
                                       : Vector(Vector::Zero(lsys.rows()));
    EqualitySup eq(st.omega_e);
    InequalitySup ineq(pinv, st.omega_i);
    std::vector<double> draws(cfg.bootstrap_B);
    parallel_for(cfg.bootstrap_B, cfg.threads, [&](Index b) {
      Vector diff = Vector::Zero(lsys.rows());
      diff.head(lsys.n_cells) = boot_cells[b] - data.cells;
      Vector resid = diff - pinv.projector * diff;
      draws[b] = std::max(sqrt_n * eq.value(resid), sqrt_n * ineq.value(diff + shift).value);
    });
    double crit = quantile_higher(draws, 1.0 - cfg.alpha);
    region.accepted[gi] = parts.statistic <= crit ? 1 : 0;
  }

  for (Index i = 0; i < grid_n; ++i) {
    if (!region.accepted[i]) continue;
    Index j = i;
    while (j + 1 < grid_n && region.accepted[j + 1]) ++j;
    region.intervals.emplace_back(region.grid[i], region.grid[j]);
    i = j;
  }
  return region;
}

} // namespace strata
