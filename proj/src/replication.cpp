#include "strata/replication.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace strata::cs {

Support cs_support() { return Support::integers(2, 3, 3); }

StrataModel cs_model_mono1() { return catalog("cheng_small_mono1", cs_support()); }

ObservedDistribution CSDistributionP::to_observed() const {
  Support s = cs_support();
  Vector cells = Vector::Zero(s.n_cells());
  auto set = [&](Index y, Index d, Index z, double v) { cells[s.cell_index(y, d, z)] = v; };
  set(0, 0, 0, p00_0);
  set(1, 0, 0, p10_0);
  set(0, 0, 1, p00_1);
  set(1, 0, 1, p10_1);
  set(0, 1, 1, p01_1);
  set(1, 1, 1, p11_1);
  set(0, 0, 2, p00_2);
  set(1, 0, 2, p10_2);
  set(0, 2, 2, p02_2);
  set(1, 2, 2, p12_2);
  Vector zm = Vector::Constant(3, 1.0 / 3.0);
  return ObservedDistribution::from_cells(std::move(s), std::move(cells), std::move(zm));
}

CSDistributionP CSDistributionP::from_observed(const ObservedDistribution& p) {
  const Support& s = p.support;
  if (s.ny() != 2 || s.nd() != 3 || s.nz() != 3)
    throw std::invalid_argument("distribution is not on the 2x3x3 design");
  CSDistributionP out;
  out.p00_0 = p.cell(0, 0, 0);
  out.p10_0 = p.cell(1, 0, 0);
  out.p00_1 = p.cell(0, 0, 1);
  out.p10_1 = p.cell(1, 0, 1);
  out.p01_1 = p.cell(0, 1, 1);
  out.p11_1 = p.cell(1, 1, 1);
  out.p00_2 = p.cell(0, 0, 2);
  out.p10_2 = p.cell(1, 0, 2);
  out.p02_2 = p.cell(0, 2, 2);
  out.p12_2 = p.cell(1, 2, 2);
  return out;
}

LatentDistribution CSDistributionQ::to_latent(double tolerance) const {
  Support s = cs_support();
  std::map<std::int64_t, double> m;
  for (const auto& [key, q] : mass) {
    const auto& [ys, ds] = key;
    if (ys.size() != 3 || ds.size() != 3) throw std::invalid_argument("bad type key");
    ResponseType r;
    for (char c : ys) r.outcome.push_back(c - '0');
    for (char c : ds) r.treatment.push_back(c - '0');
    m[response_type_index(s, r)] += q;
  }
  return LatentDistribution(std::move(s), std::move(m), tolerance);
}

CSDistributionP table1() {
  CSDistributionP p;
  p.p00_0 = 0.764;
  p.p10_0 = 0.236;
  p.p00_1 = 0.412;
  p.p10_1 = 0.107;
  p.p01_1 = 0.301;
  p.p11_1 = 0.180;
  p.p00_2 = 0.117;
  p.p10_2 = 0.169;
  p.p02_2 = 0.475;
  p.p12_2 = 0.239;
  return p;
}

CSDistributionQ table2() {
  CSDistributionQ q;
  auto put = [&](const char* ys, const char* ds, double v) { q.mass[{ys, ds}] = v; };
  put("000", "000", 0.002); put("000", "010", 0.002); put("000", "002", 0.017); put("000", "012", 0.025);
  put("001", "000", 0.002); put("001", "010", 0.002); put("001", "002", 0.002); put("001", "012", 0.195);
  put("010", "000", 0.101); put("010", "010", 0.002); put("010", "002", 0.272); put("010", "012", 0.120);
  put("011", "000", 0.002); put("011", "010", 0.004); put("011", "002", 0.014); put("011", "012", 0.002);
  put("100", "000", 0.002); put("100", "010", 0.002); put("100", "002", 0.022); put("100", "012", 0.011);
  put("101", "000", 0.034); put("101", "010", 0.062); put("101", "002", 0.015); put("101", "012", 0.002);
  put("110", "000", 0.002); put("110", "010", 0.002); put("110", "002", 0.006); put("110", "012", 0.002);
  put("111", "000", 0.024); put("111", "010", 0.041); put("111", "002", 0.002); put("111", "012", 0.007);
  return q;
}

Interval cs_pi_tilde(const CSDistributionP& p) {
  return {std::max(0.0, p.p_d1_z1() - p.p_d0_z2()), std::min(p.p_d1_z1(), p.p_d2_z2())};
}

std::array<double, 4> cs_pi_sharp_lower_terms(const CSDistributionP& p) {
  return {0.0,
          p.p01_1 + p.p11_1 - (p.p00_2 + p.p10_2),
          p.p10_0 - p.p10_1 - p.p10_2,
          1.0 - p.p00_1 - p.p00_2 - p.p10_0};
}

std::array<double, 4> cs_pi_sharp_upper_terms(const CSDistributionP& p) {
  return {p.p01_1 + p.p11_1,
          p.p02_2 + p.p12_2,
          1.0 - p.p00_1 - p.p10_2,
          1.0 - p.p10_1 - p.p00_2};
}

Interval cs_pi_sharp_closed_form(const CSDistributionP& p) {
  auto lo = cs_pi_sharp_lower_terms(p);
  auto hi = cs_pi_sharp_upper_terms(p);
  return {*std::max_element(lo.begin(), lo.end()), *std::min_element(hi.begin(), hi.end())};
}

InnerInterval cs_inner_interval(const CSDistributionP& p, double pi) {
  if (pi <= 0.0 || pi > 1.0) throw std::invalid_argument("pi must lie in (0, 1]");
  InnerInterval out;
  out.scaled = {std::max(0.0, pi - p.p01_1), std::min(pi, p.p11_1)};
  double p1_11 = p.p11_1 / p.p_d1_z1(); // P{Y=1 | D=1, Z=1}
  double ratio = pi / p.p_d1_z1();
  out.conditional = {std::max(0.0, 1.0 - (1.0 - p1_11) / ratio), std::min(1.0, p1_11 / ratio)};
  return out;
}

InnerInterval cs_inner_interval_y0(const CSDistributionP& p, double pi) {
  if (pi <= 0.0 || pi > 1.0) throw std::invalid_argument("pi must lie in (0, 1]");
  // the Y(0) mass in the always-complier stratum is pinned by the three
  // assignment arms up to the never-taker component e:
  //   a = P(Y=1,D=0|Z=0) - P(Y=1,D=0|Z=1) - P(Y=1,D=0|Z=2) + e
  double pi_010 = p.p_d1_z1() - pi;
  double pi_002 = p.p_d2_z2() - pi;
  double pi_000 = 1.0 - p.p_d1_z1() - p.p_d2_z2() + pi;
  double c0 = p.p10_0 - p.p10_1 - p.p10_2;
  double e_min = std::max({0.0, p.p10_2 - pi_010, p.p10_1 - pi_002});
  double e_max = std::min({pi_000, p.p10_1, p.p10_2});
  InnerInterval out;
  out.scaled = {std::max(0.0, c0 + e_min), std::min(pi, c0 + e_max)};
  out.conditional = {out.scaled.lo / pi, out.scaled.hi / pi};
  return out;
}

namespace {

double envelope_lower(const CSDistributionP& p, double pi) {
  return cs_inner_interval(p, pi).conditional.lo - cs_inner_interval_y0(p, pi).conditional.hi;
}

double envelope_upper(const CSDistributionP& p, double pi) {
  return cs_inner_interval(p, pi).conditional.hi - cs_inner_interval_y0(p, pi).conditional.lo;
}

// five rounds of bracket shrinking around a grid optimum
template <typename F>
double refine(F f, double a, double b, bool minimize) {
  double best = minimize ? std::min(f(a), f(b)) : std::max(f(a), f(b));
  for (int it = 0; it < 5; ++it) {
    double m1 = a + (b - a) / 3.0, m2 = b - (b - a) / 3.0;
    double f1 = f(m1), f2 = f(m2);
    best = minimize ? std::min({best, f1, f2}) : std::max({best, f1, f2});
    if (minimize ? (f1 < f2) : (f1 > f2)) b = m2;
    else a = m1;
  }
  return best;
}

} // namespace

CSBounds cs_final_bounds(const CSDistributionP& p, Interval pi_interval, int grid_n) {
  if (grid_n < 2) throw std::invalid_argument("grid_n must be at least 2");
  double lo = std::max(pi_interval.lo, 1e-9);
  double hi = pi_interval.hi;
  if (hi < lo) throw std::invalid_argument("empty pi interval");

  CSBounds out;
  double best_lo = std::numeric_limits<double>::infinity();
  double best_hi = -std::numeric_limits<double>::infinity();
  int arg_lo = 0, arg_hi = 0;
  for (int i = 0; i < grid_n; ++i) {
    double pi = lo + (hi - lo) * i / (grid_n - 1);
    double l = envelope_lower(p, pi);
    double u = envelope_upper(p, pi);
    if (l < best_lo) { best_lo = l; arg_lo = i; }
    if (u > best_hi) { best_hi = u; arg_hi = i; }
    if (u < l && !out.envelope_crossing) {
      out.envelope_crossing = true;
      out.crossing_pi = pi;
    }
  }
  double step = (hi - lo) / (grid_n - 1);
  auto bracket = [&](int i) {
    return std::pair<double, double>{std::max(lo, lo + (i - 1) * step),
                                     std::min(hi, lo + (i + 1) * step)};
  };
  auto [la, lb] = bracket(arg_lo);
  best_lo = std::min(best_lo,
                     refine([&](double x) { return envelope_lower(p, x); }, la, lb, true));
  auto [ua, ub] = bracket(arg_hi);
  best_hi = std::max(best_hi,
                     refine([&](double x) { return envelope_upper(p, x); }, ua, ub, false));
  out.bound = {best_lo, best_hi};
  return out;
}

std::string emit_figure_data(const CSDistributionP& p, int grid_n) {
  Interval tilde = cs_pi_tilde(p);
  Interval sharp = cs_pi_sharp_closed_form(p);
  std::ostringstream out;
  out << "pi,lower,upper,pi_tilde_lo,pi_tilde_hi,pi_sharp_lo,pi_sharp_hi\n";
  out.precision(12);
  for (int i = 0; i < grid_n; ++i) {
    double pi = tilde.lo + (tilde.hi - tilde.lo) * i / (grid_n - 1);
    if (pi <= 0.0) pi = std::min(1e-9, tilde.hi);
    out << pi << "," << envelope_lower(p, pi) << "," << envelope_upper(p, pi) << ","
        << tilde.lo << "," << tilde.hi << "," << sharp.lo << "," << sharp.hi << "\n";
  }
  return out.str();
}

} // namespace strata::cs
