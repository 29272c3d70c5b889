#include "strata/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace strata {

namespace {

constexpr double kCostTol = 1e-9;
constexpr double kPivotTol = 1e-10;
constexpr double kFeasTol = 1e-9;
constexpr Index kMaxIterations = 200000;

// Tableau simplex over [original columns | artificial identity | rhs].
// The artificial block doubles as B^{-1}, which the dual reads off.
class Tableau {
public:
  Tableau(const Matrix& M, const Vector& b) : m_(M.rows()), n_(M.cols()) {
    T_.resize(m_, n_ + m_ + 1);
    T_.leftCols(n_) = M;
    T_.col(n_ + m_) = b;
    row_sign_ = Vector::Ones(m_);
    for (Index i = 0; i < m_; ++i) {
      if (b[i] < 0.0) {
        T_.row(i) = -T_.row(i);
        row_sign_[i] = -1.0;
      }
    }
    // artificial identity goes in after the sign flips so it stays B^{-1}
    T_.block(0, n_, m_, m_).setIdentity();
    basis_.resize(m_);
    for (Index i = 0; i < m_; ++i) basis_[i] = n_ + i;
  }

  // returns false when unbounded in the current phase; only original columns
  // may enter (artificials leave and stay out)
  bool run(const Vector& cost, Index& iterations) {
    compute_reduced(cost);
    while (true) {
      Index enter = -1;
      for (Index j = 0; j < n_; ++j)
        if (reduced_[j] < -kCostTol) { enter = j; break; } // Bland: first eligible
      if (enter < 0) return true;

      Index leave = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (Index i = 0; i < m_; ++i) {
        double a = T_(i, enter);
        if (a <= kPivotTol) continue;
        double ratio = std::max(rhs(i), 0.0) / a;
        if (leave < 0 || ratio < best_ratio - kFeasTol) {
          best_ratio = ratio;
          leave = i;
        } else if (ratio <= best_ratio + kFeasTol && basis_[i] < basis_[leave]) {
          best_ratio = std::min(best_ratio, ratio);
          leave = i;
        }
      }
      if (leave < 0) {
        unbounded_col_ = enter;
        return false;
      }
      pivot(leave, enter);
      if (++iterations > kMaxIterations)
        throw std::runtime_error("simplex iteration limit exceeded");
    }
  }

  double rhs(Index i) const { return T_(i, n_ + m_); }
  Index basis(Index i) const { return basis_[i]; }
  Index n() const { return n_; }
  Index m() const { return m_; }
  double objective(const Vector& cost) const {
    double v = 0.0;
    for (Index i = 0; i < m_; ++i)
      if (basis_[i] < cost.size()) v += cost[basis_[i]] * rhs(i);
    return v;
  }

  Vector primal() const {
    Vector x = Vector::Zero(n_);
    for (Index i = 0; i < m_; ++i)
      if (basis_[i] < n_) x[basis_[i]] = std::max(rhs(i), 0.0);
    return x;
  }

  // y' = c_B' B^{-1}, mapped back to the original row signs
  Vector dual(const Vector& cost) const {
    Vector y = Vector::Zero(m_);
    for (Index i = 0; i < m_; ++i) {
      double cb = basis_[i] < cost.size() ? cost[basis_[i]] : 0.0;
      if (cb == 0.0) continue;
      y += cb * T_.row(i).segment(n_, m_).transpose();
    }
    return y.cwiseProduct(row_sign_);
  }

  Vector ray() const {
    // recession direction from the unbounded entering column
    Vector d = Vector::Zero(n_);
    if (unbounded_col_ < n_) d[unbounded_col_] = 1.0;
    for (Index i = 0; i < m_; ++i)
      if (basis_[i] < n_) d[basis_[i]] = -T_(i, unbounded_col_);
    return d;
  }

  // pivot basic artificials out where possible; a row that stays artificial
  // is a redundant constraint and keeps its artificial basic at zero
  void expel_artificials() {
    for (Index i = 0; i < m_; ++i) {
      if (basis_[i] < n_) continue;
      Index enter = -1;
      for (Index j = 0; j < n_; ++j)
        if (std::abs(T_(i, j)) > 1e-7) { enter = j; break; }
      if (enter >= 0) pivot(i, enter);
    }
  }

  void compute_reduced(const Vector& cost) {
    reduced_.resize(n_ + m_);
    Vector cb = Vector::Zero(m_);
    for (Index i = 0; i < m_; ++i)
      if (basis_[i] < cost.size()) cb[i] = cost[basis_[i]];
    for (Index j = 0; j < n_ + m_; ++j) {
      double cj = j < cost.size() ? cost[j] : 0.0;
      reduced_[j] = cj - cb.dot(T_.col(j));
    }
  }

private:
  void pivot(Index r, Index c) {
    T_.row(r) /= T_(r, c);
    for (Index i = 0; i < m_; ++i) {
      if (i == r) continue;
      double f = T_(i, c);
      if (f != 0.0) T_.row(i) -= f * T_.row(r);
    }
    double fr = reduced_[c];
    if (fr != 0.0)
      reduced_ -= fr * T_.row(r).head(n_ + m_).transpose();
    basis_[r] = c;
  }

  Index m_, n_;
  Matrix T_;
  Vector reduced_;
  Vector row_sign_;
  std::vector<Index> basis_;
  Index unbounded_col_ = -1;
};

} // namespace

LPResult solve(const StandardLP& lp) {
  const Index m = lp.M.rows();
  const Index n = lp.M.cols();
  if (lp.b.size() != m || lp.c.size() != n)
    throw std::invalid_argument("LP dimension mismatch");
  if (!lp.M.allFinite() || !lp.b.allFinite() || !lp.c.allFinite())
    throw std::invalid_argument("LP data must be finite");

  LPResult res;
  Tableau tab(lp.M, lp.b);

  // phase 1: minimize the artificial mass
  Vector phase1_cost = Vector::Zero(n + m);
  phase1_cost.tail(m).setOnes();
  Index iterations = 0;
  tab.run(phase1_cost, iterations); // bounded by construction
  double infeas = tab.objective(phase1_cost);
  double scale = 1.0 + (m > 0 ? lp.b.cwiseAbs().maxCoeff() : 0.0);
  if (infeas > kFeasTol * scale) {
    res.status = LPStatus::infeasible;
    res.value = std::numeric_limits<double>::quiet_NaN();
    res.dual = tab.dual(phase1_cost);
    res.solution = Vector::Zero(n);
    res.iterations = iterations;
    return res;
  }
  tab.expel_artificials();

  // phase 2
  Vector cost = lp.sense == Sense::min ? lp.c : Vector(-lp.c);
  Vector full_cost = Vector::Zero(n + m);
  full_cost.head(n) = cost;
  bool bounded = tab.run(full_cost, iterations);
  res.iterations = iterations;
  if (!bounded) {
    res.status = LPStatus::unbounded;
    res.value = lp.sense == Sense::min ? -std::numeric_limits<double>::infinity()
                                       : std::numeric_limits<double>::infinity();
    res.solution = tab.ray();
    res.dual = Vector::Zero(m);
    return res;
  }
  res.status = LPStatus::optimal;
  res.solution = tab.primal();
  double v = tab.objective(full_cost);
  res.value = lp.sense == Sense::min ? v : -v;
  res.dual = tab.dual(full_cost);
  if (lp.sense == Sense::max) res.dual = -res.dual;
  return res;
}

LPResult solve(const InequalityLP& lp) {
  const Index nv = lp.n_vars();
  std::vector<char> nonneg = lp.nonneg;
  if (nonneg.empty()) nonneg.assign(nv, 1);
  if (static_cast<Index>(nonneg.size()) != nv)
    throw std::invalid_argument("nonneg flags do not match variable count");
  const Index n_free = static_cast<Index>(std::count(nonneg.begin(), nonneg.end(), 0));
  const Index m_eq = lp.A_eq.rows();
  const Index m_le = lp.A_le.rows();
  const Index n_std = nv + n_free + m_le;

  // column map: var i -> (col, neg_col or -1)
  std::vector<std::pair<Index, Index>> cmap(nv);
  Index next = 0, next_neg = nv;
  for (Index i = 0; i < nv; ++i) {
    cmap[i] = {next++, nonneg[i] ? -1 : next_neg++};
  }

  StandardLP std_lp;
  std_lp.sense = lp.sense;
  std_lp.c = Vector::Zero(n_std);
  std_lp.M = Matrix::Zero(m_eq + m_le, n_std);
  std_lp.b = Vector(m_eq + m_le);
  if (m_eq > 0) std_lp.b.head(m_eq) = lp.b_eq;
  if (m_le > 0) std_lp.b.tail(m_le) = lp.b_le;

  for (Index i = 0; i < nv; ++i) {
    auto [cp, cn] = cmap[i];
    std_lp.c[cp] = lp.c[i];
    if (m_eq > 0) std_lp.M.col(cp).head(m_eq) = lp.A_eq.col(i);
    if (m_le > 0) std_lp.M.col(cp).tail(m_le) = lp.A_le.col(i);
    if (cn >= 0) {
      std_lp.c[cn] = -lp.c[i];
      std_lp.M.col(cn) = -std_lp.M.col(cp);
    }
  }
  for (Index k = 0; k < m_le; ++k) std_lp.M(m_eq + k, nv + n_free + k) = 1.0;

  LPResult inner = solve(std_lp);
  LPResult res = inner;
  res.solution = Vector::Zero(nv);
  if (inner.solution.size() == n_std) {
    for (Index i = 0; i < nv; ++i) {
      auto [cp, cn] = cmap[i];
      res.solution[i] = inner.solution[cp] - (cn >= 0 ? inner.solution[cn] : 0.0);
    }
  }
  return res;
}

} // namespace strata
