#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "strata/empirics.hpp"
#include "strata/idset.hpp"
#include "strata/linsys.hpp"

namespace strata {

struct TestConfig {
  double alpha = 0.05;
  int bootstrap_B = 500;
  double lambda_n = 0.0; // <= 0 means auto: min(1, 1/sqrt(log n))
  std::uint64_t seed = 20260801;
  int threads = 0; // 0: resolve from env / hardware
  double grid_lo = 0.0, grid_hi = 0.0;
  Index grid_n = 0; // 0: derive from the estimated bound envelope
  bool keep_bootstrap_draws = false;
};

struct TestOutcome {
  double statistic = 0.0;
  double critical_value = 0.0;
  bool reject = false;
  double equality_part = 0.0;
  double inequality_part = 0.0;
  double lambda_used = 0.0;
  double theta0 = 0.0;
  std::int64_t n = 0;
  bool restricted_estimator_feasible = true;
  std::vector<double> bootstrap_draws; // populated when requested
};

/// The inference machinery runs on this reduced view of the linear system:
/// the matrix, the number of estimable (cell) rows, and the fixed targets of
/// the remaining rows.
struct LinearSystem {
  Matrix A;
  Index n_cells = 0;
  Vector pinned; // targets for rows n_cells..rows()-1

  Index rows() const { return A.rows(); }
  Vector assemble_beta(const Vector& cells) const {
    Vector b(rows());
    b.head(n_cells) = cells;
    b.tail(pinned.size()) = pinned;
    return b;
  }
};

LinearSystem full_system(const SystemMatrix& sys);        // mass, parameter, relaxations
LinearSystem consistency_system(const SystemMatrix& sys); // drops the parameter row

/// sup over {s : ||omega s||_1 <= 1} of <s, v>, with s confined to the range
/// of omega (directions omega annihilates carry no sampling variation and
/// are untestable). Closed form when omega has full rank, a linear program
/// otherwise.
class EqualitySup {
public:
  EqualitySup(const Matrix& omega, double rank_tol = 1e-10);
  double value(const Vector& v) const;

private:
  Matrix range_;     // orthonormal basis of range(omega)
  Matrix null_;      // orthonormal basis of its complement
  Matrix pinv_;      // omega^+
  bool full_rank_ = false;
};

/// sup over {s : A+ s <= 0, ||omega_i AA+ s||_1 <= 1} of <A+ s, A+ target>,
/// as a linear program. Returns +infinity when the program is unbounded.
class InequalitySup {
public:
  InequalitySup(const PseudoInverse& pinv, const Matrix& omega_i);
  struct Result {
    double value = 0.0;
    Vector s; // attaining direction
  };
  Result value(const Vector& target) const;

private:
  Matrix A_eq_;
  Vector b_eq_;
  Matrix A_le_;
  Vector b_le_;
  Matrix obj_map_; // (A+)' A+
  Index m_ = 0;
};

struct StatisticParts {
  double equality = 0.0;
  double inequality = 0.0;
  double statistic = 0.0;
};

StatisticParts test_statistic(const LinearSystem& lsys, const PseudoInverse& pinv,
                              const Vector& beta_hat, const StudentizerPair& st,
                              std::int64_t n);

struct RestrictedEstimate {
  Vector beta_r;
  double criterion = 0.0;
  bool feasible = true;
  int cuts = 0;
};

/// Minimizes sup_{s in V_i} |<A+ s, A+ (beta_hat - b)>| over b = Ax, x >= 0
/// with the non-cell rows of b pinned, by cutting planes (each cut comes from
/// an inner sup). Throws if 200 cuts do not close the gap below 1e-7.
RestrictedEstimate restricted_estimator(const LinearSystem& lsys, const PseudoInverse& pinv,
                                        const Vector& beta_hat, const StudentizerPair& st);

/// Stratified bootstrap cell frequencies: per instrument stratum, n_z draws
/// from the empirical cell distribution. Deterministic in (seed, replicate).
Vector bootstrap_cells(const ObservedDistribution& p, std::uint64_t seed,
                       std::int64_t replicate);

struct CriticalValueResult {
  double value = 0.0;
  std::vector<double> draws;
};

/// Bootstrap critical value: per replicate, the recentered statistic with
/// the slackness shift lambda * beta_r folded into the inequality objective;
/// then the 1-alpha empirical quantile (right-continuous inverse).
CriticalValueResult critical_value(const ObservedDistribution& data, const LinearSystem& lsys,
                                   const PseudoInverse& pinv, const StudentizerPair& st,
                                   const Vector& beta_r, const TestConfig& cfg);

/// Tests H0: theta0 lies in the identified set.
TestOutcome test(double theta0, const StrataModel& model, const ParameterSpec& param,
                 const ObservedDistribution& data, const TestConfig& cfg);

struct ConfidenceRegion {
  std::vector<double> grid;
  std::vector<char> accepted;
  std::vector<std::pair<double, double>> intervals; // maximal accepted runs
  double alpha = 0.0;
  bool empty() const { return intervals.empty(); }
};

/// Test inversion over a theta grid (bootstrap draws shared across the grid).
ConfidenceRegion confidence_region(const StrataModel& model, const ParameterSpec& param,
                                   const ObservedDistribution& data, const TestConfig& cfg);

/// Tests H0: some latent distribution in the model rationalizes the data
/// (the same pipeline on the system without its parameter row).
TestOutcome specification_test(const StrataModel& model, const ObservedDistribution& data,
                               const TestConfig& cfg);

} // namespace strata
