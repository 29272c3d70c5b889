#pragma once

#include <string>
#include <vector>

#include "strata/types.hpp"

namespace strata {

enum class Sense { min, max };
enum class LPStatus { optimal, infeasible, unbounded };

/// Standard-form program: optimize c'x subject to M x = b, x >= 0.
struct StandardLP {
  Vector c;
  Matrix M;
  Vector b;
  Sense sense = Sense::min;
};

struct LPResult {
  LPStatus status = LPStatus::optimal;
  double value = 0.0;
  Vector solution; // primal x (length n); last iterate when unbounded
  Vector dual;     // y with b'y = value at optimum; Farkas vector when infeasible
                   // (y'M <= 0 and y'b > 0)
  Index iterations = 0;

  bool optimal() const { return status == LPStatus::optimal; }
};

/// Dense two-phase simplex. Pivoting follows Bland's rule throughout, so the
/// path (and hence the output) is a deterministic function of the input.
LPResult solve(const StandardLP& lp);

/// General-form program: optimize c'x subject to A_eq x = b_eq,
/// A_le x <= b_le, with x_i >= 0 where nonneg[i] and free otherwise.
/// Solved by reduction to standard form (free variables split, slacks added).
struct InequalityLP {
  Vector c;
  Matrix A_eq;
  Vector b_eq;
  Matrix A_le;
  Vector b_le;
  std::vector<char> nonneg; // per variable; empty means all nonnegative
  Sense sense = Sense::min;

  Index n_vars() const { return c.size(); }
};

LPResult solve(const InequalityLP& lp);

} // namespace strata
