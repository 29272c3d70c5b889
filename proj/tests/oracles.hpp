// Independent oracles used by the test suites. Everything here is computed
// without touching the solver paths it is used to check.
#pragma once

#include <algorithm>
#include <random>
#include <vector>

#include "strata/linsys.hpp"
#include "strata/model.hpp"
#include "strata/polyhedra.hpp"

namespace oracle {

using namespace strata;

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

// Dirichlet(1) draw over the admissible set; returns the latent vector in
// admissible order
inline Vector random_latent(const StrataModel& model, std::mt19937_64& gen) {
  std::exponential_distribution<double> expo(1.0);
  Vector q(static_cast<Index>(model.admissible.size()));
  for (Index i = 0; i < q.size(); ++i) q[i] = expo(gen);
  return q / q.sum();
}

// observable distribution generated by a latent vector (consistent by
// construction); population distribution (n = 0) unless n is given
inline ObservedDistribution observed_from_latent(const StrataModel& model, const Vector& q,
                                                 std::int64_t n = 0) {
  ParameterSpec mass;
  mass.kind = ParameterSpec::Kind::stratum_mass;
  mass.conditioning.all = true;
  SystemMatrix sys = build_A(model, mass, 0.0, true);
  Vector x = Vector::Zero(sys.cols());
  x.head(q.size()) = q;
  Vector cells = sys.A1() * x;
  Vector zm = Vector::Constant(model.support.nz(), 1.0 / model.support.nz());
  ObservedDistribution p =
      ObservedDistribution::from_cells(model.support, std::move(cells), std::move(zm), n);
  return p;
}

// multinomial sample of size n per instrument arm (equal arm sizes)
inline ObservedDistribution sample_observed(const ObservedDistribution& pop, std::int64_t n,
                                            std::mt19937_64& gen) {
  const Support& s = pop.support;
  Index block = s.ny() * s.nd();
  std::vector<std::int64_t> counts(s.n_cells(), 0);
  std::int64_t per_arm = n / s.nz();
  for (Index z = 0; z < s.nz(); ++z) {
    std::int64_t remaining = per_arm;
    double mass_left = 1.0;
    for (Index i = 0; i < block && remaining > 0; ++i) {
      double q = pop.cells[z * block + i];
      if (q <= 0.0) continue;
      std::int64_t draw;
      if (q >= mass_left) draw = remaining;
      else {
        std::binomial_distribution<std::int64_t> bin(remaining, q / mass_left);
        draw = bin(gen);
      }
      counts[z * block + i] += draw;
      remaining -= draw;
      mass_left -= q;
    }
  }
  return ObservedDistribution::from_counts(s, std::move(counts));
}

// ---- binary-instrument closed forms ------------------------------------

// published 8-expression lower envelope for the average treatment effect
// with a binary outcome, treatment and instrument and no response-type
// restriction
inline double balke_pearl_ate_lower(const ObservedDistribution& p) {
  auto c = [&](Index y, Index d, Index z) { return p.cell(y, d, z); };
  std::vector<double> terms = {
      c(1, 1, 1) + c(0, 0, 0) - 1.0,
      c(1, 1, 0) + c(0, 0, 1) - 1.0,
      c(1, 1, 0) - c(1, 1, 1) - c(1, 0, 1) - c(0, 1, 0) - c(1, 0, 0),
      c(1, 1, 1) - c(1, 1, 0) - c(1, 0, 0) - c(0, 1, 1) - c(1, 0, 1),
      -c(0, 1, 1) - c(1, 0, 1),
      -c(0, 1, 0) - c(1, 0, 0),
      c(0, 0, 1) - c(0, 1, 1) - c(1, 0, 1) - c(0, 1, 0) - c(0, 0, 0),
      c(0, 0, 0) - c(0, 1, 0) - c(1, 0, 0) - c(0, 1, 1) - c(0, 0, 1),
  };
  return *std::max_element(terms.begin(), terms.end());
}

inline double wald_ratio(const ObservedDistribution& p) {
  const Support& s = p.support;
  auto ey = [&](Index z) {
    double v = 0.0;
    for (Index y = 0; y < s.ny(); ++y)
      for (Index d = 0; d < s.nd(); ++d) v += s.y_numeric[y] * p.cell(y, d, z);
    return v;
  };
  auto ed = [&](Index z) {
    double v = 0.0;
    for (Index y = 0; y < s.ny(); ++y)
      for (Index d = 0; d < s.nd(); ++d) v += static_cast<double>(d) * p.cell(y, d, z);
    return v;
  };
  return (ey(1) - ey(0)) / (ed(1) - ed(0));
}

// instrumental inequalities for the binary design: sum over y of
// max over z of p_{yd|z} is at most 1, expanded into affine inequalities
struct AffineInequality {
  Vector coeffs; // over cells
  double rhs;
};

inline std::vector<AffineInequality> pearl_instrumental_inequalities(const Support& s) {
  std::vector<AffineInequality> out;
  for (Index d = 0; d < s.nd(); ++d) {
    for (Index z0 = 0; z0 < s.nz(); ++z0) {
      for (Index z1 = 0; z1 < s.nz(); ++z1) {
        AffineInequality iq;
        iq.coeffs = Vector::Zero(s.n_cells());
        iq.coeffs[s.cell_index(0, d, z0)] += 1.0;
        iq.coeffs[s.cell_index(1, d, z1)] += 1.0;
        iq.rhs = 1.0;
        out.push_back(std::move(iq));
      }
    }
  }
  return out;
}

// ---- exhaustive search over the rationalizing polytope ------------------

// exact vertices of {q : A0 q = beta0, q >= 0}
inline std::vector<Vector> feasible_polytope_vertices(const Matrix& A0, const Vector& beta0) {
  Index n = A0.cols(), m = A0.rows();
  RationalMatrix W(2 * m + n, n);
  RationalVector c(2 * m + n);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < n; ++j) {
      W(i, j) = to_rational(A0(i, j));
      W(m + i, j) = -W(i, j);
    }
    c[i] = to_rational(beta0[i]);
    c[m + i] = -c[i];
  }
  for (Index j = 0; j < n; ++j) {
    for (Index k = 0; k < n; ++k) W(2 * m + j, k) = 0;
    W(2 * m + j, j) = -1;
    c[2 * m + j] = 0;
  }
  RationalPolyhedronV poly = enumerate_polyhedron(W, c, 10000);
  std::vector<Vector> out;
  for (const auto& v : poly.vertices) {
    Vector x(n);
    for (Index j = 0; j < n; ++j) x[j] = static_cast<double>(v[j]);
    out.push_back(std::move(x));
  }
  return out;
}

// theta(q) = sum g*1{stratum}*q / sum 1{stratum}*q over every vertex, every
// pairwise segment (grid 1/step between vertices) and seeded random interior
// mixtures; the reported range must cover everything this search visits
struct ThetaRange {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  bool any = false;

  void visit(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    any = true;
  }
};

inline ThetaRange brute_force_theta_range(const Matrix& A0, const Vector& beta0,
                                          const Vector& g, const std::vector<char>& in_stratum,
                                          int step, std::uint64_t seed) {
  std::vector<Vector> verts = feasible_polytope_vertices(A0, beta0);
  Vector num_c = g, den_c = Vector::Zero(g.size());
  for (Index j = 0; j < g.size(); ++j) {
    num_c[j] = in_stratum[static_cast<std::size_t>(j)] ? g[j] : 0.0;
    den_c[j] = in_stratum[static_cast<std::size_t>(j)] ? 1.0 : 0.0;
  }
  ThetaRange range;
  auto eval = [&](const Vector& q) {
    double den = den_c.dot(q);
    if (den <= 1e-12) return;
    range.visit(num_c.dot(q) / den);
  };
  for (const auto& v : verts) eval(v);
  for (std::size_t a = 0; a < verts.size(); ++a)
    for (std::size_t b = a + 1; b < verts.size(); ++b)
      for (int k = 1; k < step; ++k) {
        double t = static_cast<double>(k) / step;
        eval((1.0 - t) * verts[a] + t * verts[b]);
      }
  std::mt19937_64 gen(seed);
  std::exponential_distribution<double> expo(1.0);
  for (int trial = 0; trial < 2000 && verts.size() >= 2; ++trial) {
    Vector w(static_cast<Index>(verts.size()));
    for (Index i = 0; i < w.size(); ++i) w[i] = expo(gen);
    w /= w.sum();
    Vector q = Vector::Zero(verts[0].size());
    for (std::size_t i = 0; i < verts.size(); ++i) q += w[static_cast<Index>(i)] * verts[i];
    eval(q);
  }
  return range;
}

} // namespace oracle
