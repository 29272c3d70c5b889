#pragma once

#include <optional>
#include <string>

#include "strata/linsys.hpp"
#include "strata/lp.hpp"

namespace strata {

enum class BoundStatus {
  nonempty,
  empty_model,   // no latent distribution rationalizes the data
  empty_stratum, // no rationalizing distribution puts mass on the stratum
};

struct BoundDiagnostics {
  Index grid_size = 0;
  Index lp_count = 0;
  Index skipped_grid_points = 0; // infeasible inner programs (endpoint noise)
};

/// An identified-set interval with attainment flags and the stratum-mass
/// interval it was built over. Witness vectors are the optimizing latent
/// distributions (over the system's columns) at each endpoint.
struct BoundResult {
  double lower = 0.0;
  double upper = 0.0;
  bool lower_attained = true;
  bool upper_attained = true;
  BoundStatus status = BoundStatus::nonempty;
  double pi_lower = 0.0;
  double pi_upper = 0.0;
  Vector witness_lower, witness_upper;
  double witness_lower_pi = 0.0, witness_upper_pi = 0.0;
  BoundDiagnostics diagnostics;
};

struct ConsistencyResult {
  bool feasible = false;
  Vector farkas;                // over the A0 rows when infeasible
  std::string violated_inequality; // rendered over named cells
};

/// Is there any q >= 0 with A0 q = beta0(P)?
ConsistencyResult check_consistency(const SystemMatrix& sys, const ObservedDistribution& p);

struct StratumMassInterval {
  BoundStatus status = BoundStatus::nonempty;
  double lo = 0.0;
  double hi = 0.0;
  Vector witness_lo, witness_hi;

  bool is_point(double tol = 1e-7) const { return hi - lo <= tol; }
};

/// Sharp closed interval for Q{R in R'} over all rationalizing Q.
StratumMassInterval stratum_mass_interval(const StrataModel& model, const StratumSpec& stratum,
                                          const ObservedDistribution& p);

/// Bounds when the stratum mass is point identified at `mass` (> 0): one
/// linear program per endpoint, both endpoints attained.
BoundResult bounds_identified_mass(const StrataModel& model, const ParameterSpec& param,
                                   const ObservedDistribution& p, double mass);

struct PartialMassOptions {
  int grid_n = 1001;
  double pi_floor = 1e-6;
  int threads = 1;
  // when set, the outer search runs over this interval instead of the sharp
  // mass interval (useful to reproduce bounds built on looser mass intervals)
  std::optional<std::pair<double, double>> pi_override;
};

/// Bounds when the stratum mass is partially identified: a grid over the
/// mass interval with two inner linear programs per point and a bracketing
/// refinement around each optimum.
BoundResult bounds_partial_mass(const StrataModel& model, const ParameterSpec& param,
                                const ObservedDistribution& p,
                                const PartialMassOptions& opts = {});

/// Dispatches on whether the stratum-mass interval is a point.
BoundResult compute_bounds(const StrataModel& model, const ParameterSpec& param,
                           const ObservedDistribution& p, const PartialMassOptions& opts = {});

/// Closed-form envelope of the bound linear programs: the lower endpoint is
/// the maximum of the `lower` expressions over the cells, the upper endpoint
/// the minimum of the `upper` ones. Expressions come from exact vertex
/// enumeration of the dual feasible sets, which do not depend on P.
struct EnvelopeExpression {
  Vector cell_coeffs;
  double constant = 0.0;
  double value_at_data = 0.0;
  std::string text;
};

struct ClosedFormEnvelope {
  std::vector<EnvelopeExpression> lower;
  std::vector<EnvelopeExpression> upper;

  double lower_value() const;
  double upper_value() const;
};

ClosedFormEnvelope closed_form_envelope(const SystemMatrix& sys, const Vector& objective,
                                        const ObservedDistribution& p);

} // namespace strata
