#include "strata/idset.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "strata/parallel.hpp"
#include "strata/polyhedra.hpp"

namespace strata {

namespace {

constexpr double kMassTol = 1e-9;

Vector g_objective(const SystemMatrix& sys, const MaterializedParameter& mat) {
  Vector c = Vector::Zero(sys.cols());
  for (Index j = 0; j < sys.n_types; ++j)
    if (mat.in_stratum[j]) c[j] = mat.g_values[j];
  return c;
}

std::string render_farkas(const SystemMatrix& sys, const Vector& y, const Vector& beta0) {
  // y'A0 <= 0 while y'beta0 > 0: print the violated inequality y'beta <= 0
  std::ostringstream out;
  out.precision(6);
  bool first = true;
  double constant = 0.0;
  Index row = 0;
  for (Index i = 0; i < sys.rows(); ++i) {
    if (i == sys.param_row) continue;
    double w = y[row];
    if (i < sys.n_cells) {
      if (std::abs(w) > 1e-9) {
        if (!first) out << (w < 0 ? " - " : " + ");
        else if (w < 0) out << "-";
        out << std::abs(w) << "*" << sys.support.cell_name(i);
        first = false;
      }
    } else {
      constant += w * beta0[row];
    }
    ++row;
  }
  if (first) out << "0";
  if (std::abs(constant) > 1e-9) out << (constant < 0 ? " - " : " + ") << std::abs(constant);
  out << " <= 0 is implied by the model but evaluates to " << y.dot(beta0);
  return out.str();
}

} // namespace

ConsistencyResult check_consistency(const SystemMatrix& sys, const ObservedDistribution& p) {
  StandardLP lp;
  lp.M = sys.A0();
  lp.b = beta0_from_observed(p, sys);
  lp.c = Vector::Zero(sys.cols());
  LPResult res = solve(lp);
  ConsistencyResult out;
  out.feasible = res.status == LPStatus::optimal;
  if (!out.feasible) {
    out.farkas = res.dual;
    out.violated_inequality = render_farkas(sys, res.dual, lp.b);
  }
  return out;
}

StratumMassInterval stratum_mass_interval(const StrataModel& model, const StratumSpec& stratum,
                                          const ObservedDistribution& p) {
  ParameterSpec mass_param;
  mass_param.kind = ParameterSpec::Kind::stratum_mass;
  mass_param.name = "stratum_mass";
  mass_param.conditioning = stratum;
  SystemMatrix sys = build_A(model, mass_param, 0.0, true);
  MaterializedParameter mat = materialize(mass_param, model);

  StratumMassInterval out;
  StandardLP lp;
  lp.M = sys.A0();
  lp.b = beta0_from_observed(p, sys);
  lp.c = g_objective(sys, mat); // indicator of the target stratum

  lp.sense = Sense::min;
  LPResult lo = solve(lp);
  if (lo.status != LPStatus::optimal) {
    out.status = BoundStatus::empty_model;
    return out;
  }
  lp.sense = Sense::max;
  LPResult hi = solve(lp);
  out.status = BoundStatus::nonempty;
  out.lo = lo.value;
  out.hi = hi.value;
  out.witness_lo = lo.solution;
  out.witness_hi = hi.solution;
  return out;
}

BoundResult bounds_identified_mass(const StrataModel& model, const ParameterSpec& param,
                                   const ObservedDistribution& p, double mass) {
  BoundResult out;
  if (mass <= kMassTol) {
    out.status = BoundStatus::empty_stratum;
    return out;
  }
  SystemMatrix sys = build_A(model, param, 0.0, true);
  MaterializedParameter mat = materialize(param, model);

  StandardLP lp;
  lp.M = sys.A0();
  lp.b = beta0_from_observed(p, sys);
  lp.c = g_objective(sys, mat) / mass;

  lp.sense = Sense::min;
  LPResult lo = solve(lp);
  if (lo.status != LPStatus::optimal) {
    out.status = BoundStatus::empty_model;
    return out;
  }
  lp.sense = Sense::max;
  LPResult hi = solve(lp);
  out.lower = lo.value;
  out.upper = hi.value;
  out.lower_attained = out.upper_attained = true;
  out.pi_lower = out.pi_upper = mass;
  out.witness_lower = lo.solution;
  out.witness_upper = hi.solution;
  out.witness_lower_pi = out.witness_upper_pi = mass;
  out.diagnostics.lp_count = 2;
  return out;
}

BoundResult bounds_partial_mass(const StrataModel& model, const ParameterSpec& param,
                                const ObservedDistribution& p, const PartialMassOptions& opts) {
  BoundResult out;

  SystemMatrix sys = build_A(model, param, 0.0, true);
  MaterializedParameter mat = materialize(param, model);

  ConsistencyResult consistent = check_consistency(sys, p);
  if (!consistent.feasible) {
    out.status = BoundStatus::empty_model;
    return out;
  }

  StratumMassInterval pi = stratum_mass_interval(model, param.conditioning, p);
  if (pi.status != BoundStatus::nonempty) {
    out.status = pi.status;
    return out;
  }
  if (opts.pi_override) {
    pi.lo = opts.pi_override->first;
    pi.hi = opts.pi_override->second;
  }
  out.pi_lower = pi.lo;
  out.pi_upper = pi.hi;
  if (pi.hi <= std::max(kMassTol, opts.pi_floor)) {
    out.status = BoundStatus::empty_stratum;
    return out;
  }

  const bool pi_reaches_zero = pi.lo <= kMassTol;
  const double grid_lo = std::max(pi.lo, opts.pi_floor);
  const double grid_hi = pi.hi;
  const Index grid_n = std::max(2, opts.grid_n);

  Matrix A_str = sys.A_stratum(mat.in_stratum);
  Vector d = g_objective(sys, mat);

  struct PointValue {
    bool feasible_min = false, feasible_max = false;
    double vmin = 0, vmax = 0;
    Vector qmin, qmax;
  };

  auto solve_at = [&](double pi_value) {
    PointValue pv;
    StandardLP lp;
    lp.M = A_str;
    lp.b = beta_from_observed(p, sys, pi_value).v;
    lp.c = d;
    lp.sense = Sense::min;
    LPResult lo = solve(lp);
    if (lo.status == LPStatus::optimal) {
      pv.feasible_min = true;
      pv.vmin = lo.value / pi_value;
      pv.qmin = lo.solution;
    }
    lp.sense = Sense::max;
    LPResult hi = solve(lp);
    if (hi.status == LPStatus::optimal) {
      pv.feasible_max = true;
      pv.vmax = hi.value / pi_value;
      pv.qmax = hi.solution;
    }
    return pv;
  };

  std::vector<double> grid(grid_n);
  for (Index i = 0; i < grid_n; ++i)
    grid[i] = grid_lo + (grid_hi - grid_lo) * static_cast<double>(i) /
                            static_cast<double>(grid_n - 1);

  std::vector<PointValue> values(grid_n);
  parallel_for(grid_n, opts.threads, [&](Index i) { values[i] = solve_at(grid[i]); });

  double best_lo = std::numeric_limits<double>::infinity();
  double best_hi = -std::numeric_limits<double>::infinity();
  Index arg_lo = -1, arg_hi = -1;
  Index skipped = 0;
  for (Index i = 0; i < grid_n; ++i) {
    const auto& pv = values[i];
    if (!pv.feasible_min || !pv.feasible_max) {
      ++skipped;
      continue;
    }
    if (pv.vmin < best_lo) {
      best_lo = pv.vmin;
      arg_lo = i;
      out.witness_lower = pv.qmin;
      out.witness_lower_pi = grid[i];
    }
    if (pv.vmax > best_hi) {
      best_hi = pv.vmax;
      arg_hi = i;
      out.witness_upper = pv.qmax;
      out.witness_upper_pi = grid[i];
    }
  }
  out.diagnostics.grid_size = grid_n;
  out.diagnostics.skipped_grid_points = skipped;
  out.diagnostics.lp_count = 2 * grid_n + 4;
  if (arg_lo < 0 || arg_hi < 0) {
    out.status = BoundStatus::empty_stratum;
    return out;
  }

  // bracketing refinement around each grid optimum
  auto refine = [&](Index arg, bool minimize, double& best, Vector& witness,
                    double& witness_pi) {
    double a = grid[std::max<Index>(arg - 1, 0)];
    double b = grid[std::min<Index>(arg + 1, grid_n - 1)];
    for (int it = 0; it < 5; ++it) {
      double m1 = a + (b - a) / 3.0, m2 = b - (b - a) / 3.0;
      PointValue p1 = solve_at(m1), p2 = solve_at(m2);
      out.diagnostics.lp_count += 4;
      double v1 = minimize ? p1.vmin : p1.vmax;
      double v2 = minimize ? p2.vmin : p2.vmax;
      bool ok1 = minimize ? p1.feasible_min : p1.feasible_max;
      bool ok2 = minimize ? p2.feasible_min : p2.feasible_max;
      if (ok1 && (minimize ? v1 < best : v1 > best)) {
        best = v1;
        witness = minimize ? p1.qmin : p1.qmax;
        witness_pi = m1;
      }
      if (ok2 && (minimize ? v2 < best : v2 > best)) {
        best = v2;
        witness = minimize ? p2.qmin : p2.qmax;
        witness_pi = m2;
      }
      bool move_right = minimize ? (v2 < v1) : (v2 > v1);
      if (move_right) a = m1;
      else b = m2;
    }
  };
  refine(arg_lo, true, best_lo, out.witness_lower, out.witness_lower_pi);
  refine(arg_hi, false, best_hi, out.witness_upper, out.witness_upper_pi);

  out.lower = best_lo;
  out.upper = best_hi;
  // the infimum is open when it is approached at the guarded end pi -> 0
  out.lower_attained = !(pi_reaches_zero && arg_lo == 0);
  out.upper_attained = !(pi_reaches_zero && arg_hi == 0);
  out.status = BoundStatus::nonempty;
  return out;
}

BoundResult compute_bounds(const StrataModel& model, const ParameterSpec& param,
                           const ObservedDistribution& p, const PartialMassOptions& opts) {
  if (param.kind == ParameterSpec::Kind::stratum_mass) {
    // conditioning set is all of R, whose mass is 1 by assumption
    SystemMatrix sys = build_A(model, param, 0.0, true);
    if (!check_consistency(sys, p).feasible) {
      BoundResult out;
      out.status = BoundStatus::empty_model;
      return out;
    }
    return bounds_identified_mass(model, param, p, 1.0);
  }
  StratumMassInterval pi = stratum_mass_interval(model, param.conditioning, p);
  if (pi.status != BoundStatus::nonempty) {
    BoundResult out;
    out.status = pi.status;
    return out;
  }
  if (pi.is_point()) {
    double mass = 0.5 * (pi.lo + pi.hi);
    BoundResult out = bounds_identified_mass(model, param, p, mass);
    out.pi_lower = pi.lo;
    out.pi_upper = pi.hi;
    return out;
  }
  return bounds_partial_mass(model, param, p, opts);
}

double ClosedFormEnvelope::lower_value() const {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& e : lower) best = std::max(best, e.value_at_data);
  return best;
}

double ClosedFormEnvelope::upper_value() const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& e : upper) best = std::min(best, e.value_at_data);
  return best;
}

namespace {

std::string render_expression(const SystemMatrix& sys, const RationalVector& vertex,
                              double sign) {
  std::ostringstream out;
  bool first = true;
  Index row = 0;
  for (Index i = 0; i < sys.rows(); ++i) {
    if (i == sys.param_row) continue;
    Rational a = vertex[row] * to_rational(sign);
    ++row;
    if (a == 0) continue;
    std::string name = i < sys.n_cells ? sys.support.cell_name(i)
                                       : (i == sys.mass_row ? "1" : "eps_" +
                                          std::to_string(i - sys.n_cells - 2));
    if (first) {
      if (a < 0) { out << "-"; a = -a; }
    } else {
      out << (a < 0 ? " - " : " + ");
      if (a < 0) a = -a;
    }
    if (a != 1 || name == "1") out << a;
    if (a != 1 && name != "1") out << "*";
    if (name != "1") out << name;
    first = false;
  }
  if (first) out << "0";
  return out.str();
}

std::vector<EnvelopeExpression> envelope_from_vertices(const SystemMatrix& sys,
                                                       const RationalPolyhedronV& poly,
                                                       const Vector& beta0, double sign) {
  std::vector<EnvelopeExpression> out;
  for (const auto& vertex : poly.vertices) {
    EnvelopeExpression e;
    e.cell_coeffs.resize(sys.n_cells);
    double constant = 0.0;
    Index row = 0;
    double value = 0.0;
    for (Index i = 0; i < sys.rows(); ++i) {
      if (i == sys.param_row) continue;
      double v = sign * static_cast<double>(vertex[row]);
      if (i < sys.n_cells) e.cell_coeffs[i] = v;
      else constant += v * beta0[row];
      value += v * beta0[row];
      ++row;
    }
    e.constant = constant;
    e.value_at_data = value;
    e.text = render_expression(sys, vertex, sign);
    out.push_back(std::move(e));
  }
  return out;
}

} // namespace

ClosedFormEnvelope closed_form_envelope(const SystemMatrix& sys, const Vector& objective,
                                        const ObservedDistribution& p) {
  Matrix A0 = sys.A0();
  Vector beta0 = beta0_from_observed(p, sys);
  ClosedFormEnvelope out;
  // lower endpoint: dual of the minimizing program, feasible set {A0' r <= c}
  RationalPolyhedronV lo = enumerate_dual(A0, objective);
  out.lower = envelope_from_vertices(sys, lo, beta0, 1.0);
  // upper endpoint: max c'q = -min(-c)'q, so negate the dual vertices
  RationalPolyhedronV hi = enumerate_dual(A0, Vector(-objective));
  out.upper = envelope_from_vertices(sys, hi, beta0, -1.0);
  return out;
}

} // namespace strata
