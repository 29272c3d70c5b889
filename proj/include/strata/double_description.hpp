#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>
#ifdef STRATA_DD_DEBUG
#include <iostream>
#endif

#include "strata/types.hpp"

namespace strata {

/// Generators of a polyhedral cone {x : B x >= 0}: extreme rays plus a basis
/// of the lineality space. cone = cone(rays) + span(lineality).
template <typename Scalar>
struct ConeGenerators {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  std::vector<Vec> rays;
  std::vector<Vec> lineality;
};

namespace detail {

template <typename Scalar>
struct DDTraits {
  static bool is_zero(const Scalar& x) { return x == 0; }
  static int sign(const Scalar& x) { return x > 0 ? 1 : (x < 0 ? -1 : 0); }
};

template <>
struct DDTraits<double> {
  static constexpr double eps = 1e-9;
  static bool is_zero(double x) { return std::abs(x) <= eps; }
  static int sign(double x) { return x > eps ? 1 : (x < -eps ? -1 : 0); }
};

// scale so the largest-magnitude entry is +/-1 (double) or entries are a
// primitive integer vector (rational); canonical across equivalent rays
template <typename Scalar>
void normalize_ray(Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& v);

inline void normalize_ray_impl(Eigen::Matrix<double, Eigen::Dynamic, 1>& v) {
  double m = v.cwiseAbs().maxCoeff();
  if (m > 0) v /= m;
}

inline void normalize_ray_impl(Eigen::Matrix<Rational, Eigen::Dynamic, 1>& v) {
  Rational scale(0);
  for (Index i = 0; i < v.size(); ++i) {
    Rational a = v[i] < 0 ? Rational(-v[i]) : v[i];
    if (a > scale) scale = a;
  }
  if (scale != 0)
    for (Index i = 0; i < v.size(); ++i) v[i] /= scale;
}

template <typename Scalar>
void normalize_ray(Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& v) {
  normalize_ray_impl(v);
}

} // namespace detail

/// Incremental double description: processes the inequality rows of B in
/// order, maintaining (lineality, extreme rays) of the intermediate cone.
/// Adjacency between rays uses the combinatorial zero-set test. With the
/// Rational scalar the computation is exact.
template <typename Scalar>
ConeGenerators<Scalar> double_description(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& B) {
  using Traits = detail::DDTraits<Scalar>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Index d = B.cols();
  const Index m = B.rows();

  struct Ray {
    Vec v;
    std::vector<char> zero; // per processed constraint: is the ray tight?
  };

  std::vector<Vec> lineality;
  for (Index i = 0; i < d; ++i) {
    Vec e = Vec::Zero(d);
    e[i] = Scalar(1);
    lineality.push_back(e);
  }
  std::vector<Ray> rays;

  for (Index k = 0; k < m; ++k) {
    Vec a = B.row(k).transpose();

    // reduce the lineality space against this constraint
    Index pivot = -1;
    for (std::size_t i = 0; i < lineality.size(); ++i) {
      if (!Traits::is_zero(a.dot(lineality[i]))) { pivot = static_cast<Index>(i); break; }
    }
    if (pivot >= 0) {
      Vec l0 = lineality[pivot];
      Scalar s0 = a.dot(l0);
      if (Traits::sign(s0) < 0) { l0 = -l0; s0 = -s0; }
      lineality.erase(lineality.begin() + pivot);
      for (auto& l : lineality) {
        Scalar s = a.dot(l);
        if (!Traits::is_zero(s)) l -= (s / s0) * l0;
      }
      for (auto& r : rays) {
        Scalar s = a.dot(r.v);
        if (!Traits::is_zero(s)) r.v -= (s / s0) * l0;
        detail::normalize_ray(r.v);
        r.zero.push_back(1);
      }
      Ray nr;
      nr.v = l0;
      detail::normalize_ray(nr.v);
      nr.zero.assign(k, 1); // was lineality: tight on every earlier constraint
      nr.zero.push_back(0);
      rays.push_back(std::move(nr));
#ifdef STRATA_DD_DEBUG
      std::cerr << "constraint " << k << " (lineality pivot): rays=" << rays.size()
                << " lineality=" << lineality.size() << "\n";
#endif
      continue;
    }

    // classic DD step
    std::vector<Ray> pos, zero, neg;
    for (auto& r : rays) {
      int s = Traits::sign(a.dot(r.v));
      if (s > 0) pos.push_back(std::move(r));
      else if (s == 0) zero.push_back(std::move(r));
      else neg.push_back(std::move(r));
    }
    for (auto& r : pos) r.zero.push_back(0);
    for (auto& r : zero) r.zero.push_back(1);

    auto adjacent = [&](const Ray& p, const Ray& q) {
      // no third generator is tight on every constraint where both are tight
      std::vector<char> common(k, 0);
      for (Index i = 0; i < k; ++i) common[i] = p.zero[i] & q.zero[i];
      auto dominated_by = [&](const Ray& r) {
        for (Index i = 0; i < k; ++i)
          if (common[i] && !r.zero[i]) return false;
        return true;
      };
      for (const auto& r : pos)
        if (&r != &p && dominated_by(r)) return false;
      for (const auto& r : zero)
        if (dominated_by(r)) return false;
      for (const auto& r : neg)
        if (&r != &q && dominated_by(r)) return false;
      return true;
    };

    std::vector<Ray> combined;
    for (const auto& pr : pos) {
      for (const auto& nr : neg) {
        if (!adjacent(pr, nr)) continue;
        Ray w;
        Scalar sp = a.dot(pr.v);
        Scalar sn = a.dot(nr.v);
        w.v = sp * nr.v - sn * pr.v;
        detail::normalize_ray(w.v);
        bool all_zero = true;
        for (Index i = 0; i < d && all_zero; ++i)
          if (!Traits::is_zero(w.v[i])) all_zero = false;
        if (all_zero) continue;
        w.zero.resize(k + 1);
        for (Index i = 0; i < k; ++i) w.zero[i] = pr.zero[i] & nr.zero[i];
        w.zero[k] = 1;
        combined.push_back(std::move(w));
      }
    }
    std::vector<Ray> next = std::move(pos);
    for (auto& r : zero) next.push_back(std::move(r));
    for (auto& w : combined) next.push_back(std::move(w));
    rays = std::move(next);
#ifdef STRATA_DD_DEBUG
    std::cerr << "constraint " << k << ": rays=" << rays.size()
              << " lineality=" << lineality.size() << "\n";
#endif
  }

  ConeGenerators<Scalar> out;
  out.lineality = std::move(lineality);
  for (auto& r : rays) out.rays.push_back(std::move(r.v));

  // deterministic output order
  auto lex_less = [](const typename ConeGenerators<Scalar>::Vec& x,
                     const typename ConeGenerators<Scalar>::Vec& y) {
    for (Index i = 0; i < x.size(); ++i) {
      if (x[i] < y[i]) return true;
      if (y[i] < x[i]) return false;
    }
    return false;
  };
  std::sort(out.rays.begin(), out.rays.end(), lex_less);
  std::sort(out.lineality.begin(), out.lineality.end(), lex_less);
  return out;
}

} // namespace strata
