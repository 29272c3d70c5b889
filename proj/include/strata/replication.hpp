#pragma once

#include <array>
#include <map>
#include <string>

#include "strata/empirics.hpp"
#include "strata/model.hpp"

namespace strata::cs {

/// The three-arm one-sided-noncompliance design: Y = {0,1}, D = Z = {0,1,2},
/// control always available, other arms only when assigned. The worked
/// numerical example lives in table1()/table2(); the closed forms below are
/// the published three-step bound construction plus its sharp counterpart
/// for the always-complier stratum (d-map (0,1,2)).

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double x, double tol = 0.0) const { return x >= lo - tol && x <= hi + tol; }
  double width() const { return hi - lo; }
};

Support cs_support();
StrataModel cs_model_mono1();

/// The ten observable cells (assignment z = 0 admits only d = 0).
struct CSDistributionP {
  double p00_0, p10_0;
  double p00_1, p10_1, p01_1, p11_1;
  double p00_2, p10_2, p02_2, p12_2;

  double p_d1_z1() const { return p01_1 + p11_1; } // P{D=1|Z=1}
  double p_d2_z2() const { return p02_2 + p12_2; } // P{D=2|Z=2}
  double p_d0_z2() const { return p00_2 + p10_2; } // P{D=0|Z=2}

  ObservedDistribution to_observed() const;
  static CSDistributionP from_observed(const ObservedDistribution& p);
};

/// Latent masses keyed by (outcome map "y0y1y2", treatment map "d0d1d2").
struct CSDistributionQ {
  std::map<std::pair<std::string, std::string>, double> mass;

  LatentDistribution to_latent(double tolerance = 5e-3) const;
};

CSDistributionP table1();
CSDistributionQ table2();

/// Step-1 interval for the always-complier mass:
/// [max{0, P(D=1|Z=1) - P(D=0|Z=2)}, min{P(D=1|Z=1), P(D=2|Z=2)}].
/// Valid but not sharp.
Interval cs_pi_tilde(const CSDistributionP& p);

/// Sharp closed form for the same mass: max of four / min of four affine
/// expressions in the cells.
Interval cs_pi_sharp_closed_form(const CSDistributionP& p);
std::array<double, 4> cs_pi_sharp_lower_terms(const CSDistributionP& p);
std::array<double, 4> cs_pi_sharp_upper_terms(const CSDistributionP& p);

/// Interval for E_Q[Y(d) 1{always-complier}] given the stratum mass pi,
/// in both the mass-scaled and the conditional parametrization
/// (conditional = scaled / pi).
struct InnerInterval {
  Interval scaled;
  Interval conditional;
};

InnerInterval cs_inner_interval(const CSDistributionP& p, double pi);    // d = 1
InnerInterval cs_inner_interval_y0(const CSDistributionP& p, double pi); // d = 0

/// Grid minimization/maximization of the conditional contrast envelope
/// lower(pi) = L1(pi) - U0(pi), upper(pi) = U1(pi) - L0(pi) over the given
/// mass interval. With the step-1 interval this reproduces the published
/// bound; with the sharp interval it reproduces the sharp bound.
struct CSBounds {
  Interval bound;
  bool envelope_crossing = false; // upper dips below lower somewhere on the grid
  double crossing_pi = 0.0;
};

CSBounds cs_final_bounds(const CSDistributionP& p, Interval pi_interval, int grid_n = 2001);

/// Plot-ready table: pi, conditional lower/upper envelope, and the two mass
/// intervals (constant columns). CSV with a header row.
std::string emit_figure_data(const CSDistributionP& p, int grid_n = 101);

} // namespace strata::cs
