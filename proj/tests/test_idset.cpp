#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "strata/idset.hpp"
#include "strata/polyhedra.hpp"
#include "strata/replication.hpp"

using namespace strata;

namespace {

ParameterSpec mass_param(StratumSpec cond) {
  ParameterSpec p;
  p.kind = ParameterSpec::Kind::stratum_mass;
  p.conditioning = std::move(cond);
  p.name = "stratum_mass";
  return p;
}

StratumSpec always_takers_012() {
  StratumSpec s;
  s.treatment_maps = {{0, 1, 2}};
  return s;
}

StrataModel perfect_compliance_binary() {
  Support s = Support::integers(2, 2, 2);
  std::vector<ResponseType> types;
  for (int y0 = 0; y0 < 2; ++y0)
    for (int y1 = 0; y1 < 2; ++y1) types.push_back({{y0, y1}, {0, 1}});
  return StrataModel::from_types(s, types);
}

} // namespace

TEST_CASE("worked-example distribution is consistent with one-sided compliance") {
  StrataModel m = cs::cs_model_mono1();
  SystemMatrix sys = build_A(m, mass_param(always_takers_012()), 0.0, true);
  ObservedDistribution p = cs::table1().to_observed();
  ConsistencyResult res = check_consistency(sys, p);
  CHECK(res.feasible);
}

TEST_CASE("mass on an excluded arm is infeasible with a readable certificate") {
  // one-sided compliance forces D = 0 when Z = 0; put mass on (y,d) = (0,1)
  Support s = cs::cs_support();
  Vector cells = Vector::Zero(s.n_cells());
  cells[s.cell_index(0, 1, 0)] = 1.0; // impossible under the model
  cells[s.cell_index(0, 0, 1)] = 1.0;
  cells[s.cell_index(0, 0, 2)] = 1.0;
  ObservedDistribution p = ObservedDistribution::from_cells(
      s, cells, Vector::Constant(3, 1.0 / 3.0));
  StrataModel m = cs::cs_model_mono1();
  SystemMatrix sys = build_A(m, mass_param(always_takers_012()), 0.0, true);
  ConsistencyResult res = check_consistency(sys, p);
  CHECK(!res.feasible);
  CHECK(res.violated_inequality.find("p[") != std::string::npos);
  CHECK(res.farkas.dot(beta0_from_observed(p, sys)) > 1e-9);
  Matrix A0 = sys.A0();
  CHECK((A0.transpose() * res.farkas).maxCoeff() <= 1e-8);
}

TEST_CASE("perturbing consistent data across a facet flips the verdict") {
  Support s = Support::integers(2, 2, 2);
  std::vector<std::int64_t> all(16);
  for (std::int64_t i = 0; i < 16; ++i) all[i] = i;
  StrataModel m = StrataModel::from_indices(s, all);
  StratumSpec cond;
  cond.all = true;
  SystemMatrix sys = build_A(m, mass_param(cond), 0.0, true);
  PolyhedronH poly = image_polytope_hrep(sys.A1());

  auto gen = oracle::rng(47);
  int flips = 0;
  for (int trial = 0; trial < 20; ++trial) {
    ObservedDistribution p = oracle::observed_from_latent(m, oracle::random_latent(m, gen));
    CHECK(check_consistency(sys, p).feasible);
    // walk along a facet normal until the inequality breaks, keeping each
    // z-block a probability vector
    for (Index row = 0; row < poly.G.rows(); ++row) {
      Vector cells = p.cells + 0.75 * poly.G.row(row).transpose();
      Index block = s.ny() * s.nd();
      bool valid = true;
      for (Index z = 0; z < s.nz() && valid; ++z) {
        for (Index i = 0; i < block; ++i)
          if (cells[z * block + i] < 0) valid = false;
        double sum = cells.segment(z * block, block).sum();
        if (std::abs(sum - 1.0) > 1e-9) valid = false;
      }
      if (!valid) continue;
      if (poly.G.row(row).dot(cells) <= poly.h[row] + 1e-9) continue;
      ObservedDistribution bad =
          ObservedDistribution::from_cells(s, cells, p.z_marginal);
      CHECK(!check_consistency(sys, bad).feasible);
      ++flips;
      break;
    }
  }
  CHECK(flips > 0);
}

TEST_CASE("sharp stratum-mass interval of the worked example") {
  StrataModel m = cs::cs_model_mono1();
  ObservedDistribution p = cs::table1().to_observed();
  StratumMassInterval pi = stratum_mass_interval(m, always_takers_012(), p);
  REQUIRE(pi.status == BoundStatus::nonempty);
  CHECK(std::abs(pi.lo - 0.235) <= 1e-6);
  CHECK(std::abs(pi.hi - 0.419) <= 1e-6);
}

TEST_CASE("full-model mass is always the unit interval point") {
  StrataModel m = perfect_compliance_binary();
  auto gen = oracle::rng(53);
  ObservedDistribution p = oracle::observed_from_latent(m, oracle::random_latent(m, gen));
  StratumSpec all;
  all.all = true;
  StratumMassInterval pi = stratum_mass_interval(m, all, p);
  CHECK(pi.lo == doctest::Approx(1.0));
  CHECK(pi.hi == doctest::Approx(1.0));
}

TEST_CASE("stratum mass agrees with exhaustive search on small models") {
  auto gen = oracle::rng(59);
  Support s = Support::integers(2, 2, 2);
  int tested = 0;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<std::int64_t> idx;
    std::uniform_int_distribution<std::int64_t> pick(0, 15);
    while (idx.size() < 5) idx.push_back(pick(gen));
    StrataModel m = StrataModel::from_indices(s, idx);
    if (m.admissible.size() < 2) continue;
    StratumSpec cond;
    cond.explicit_types = {response_type_at(s, m.admissible[0]),
                           response_type_at(s, m.admissible[1])};
    ObservedDistribution p = oracle::observed_from_latent(m, oracle::random_latent(m, gen));
    StratumMassInterval pi = stratum_mass_interval(m, cond, p);
    REQUIRE(pi.status == BoundStatus::nonempty);

    SystemMatrix sys = build_A(m, mass_param(cond), 0.0, true);
    MaterializedParameter mat = materialize(mass_param(cond), m);
    Vector g(sys.cols());
    for (Index j = 0; j < sys.cols(); ++j) g[j] = mat.g_values[j];
    std::vector<char> in(static_cast<std::size_t>(sys.cols()), 1);
    auto range = oracle::brute_force_theta_range(sys.A0(), beta0_from_observed(p, sys), g, in,
                                                 200, 61 + trial);
    REQUIRE(range.any);
    CHECK(range.lo >= pi.lo - 0.01);
    CHECK(range.hi <= pi.hi + 0.01);
    CHECK(range.lo <= pi.lo + 0.01);
    CHECK(range.hi >= pi.hi - 0.01);
    ++tested;
  }
  CHECK(tested >= 8);
}

TEST_CASE("perfect compliance point identifies the effect") {
  StrataModel m = perfect_compliance_binary();
  StratumSpec all;
  all.all = true;
  ParameterSpec ate = standard_parameters("ate_contrast", 1, 0, all);
  auto gen = oracle::rng(67);
  for (int trial = 0; trial < 100; ++trial) {
    ObservedDistribution p = oracle::observed_from_latent(m, oracle::random_latent(m, gen));
    BoundResult r = bounds_identified_mass(m, ate, p, 1.0);
    REQUIRE(r.status == BoundStatus::nonempty);
    // plug-in oracle: E[Y|D=1,Z=1] - E[Y|D=0,Z=0]
    double ey1 = p.cell(1, 1, 1) / (p.cell(0, 1, 1) + p.cell(1, 1, 1));
    double ey0 = p.cell(1, 0, 0) / (p.cell(0, 0, 0) + p.cell(1, 0, 0));
    CHECK(std::abs(r.lower - (ey1 - ey0)) <= 1e-8);
    CHECK(std::abs(r.upper - (ey1 - ey0)) <= 1e-8);
    CHECK(r.lower_attained);
    CHECK(r.upper_attained);
  }
}

TEST_CASE("binary no-defier complier effect equals the instrument ratio") {
  StrataModel m = catalog("no_defier_generalized", Support::integers(2, 2, 2));
  StratumSpec compliers;
  compliers.treatment_maps = {{0, 1}};
  ParameterSpec late = standard_parameters("ate_contrast", 1, 0, compliers);
  auto gen = oracle::rng(71);
  for (int trial = 0; trial < 100; ++trial) {
    ObservedDistribution p = oracle::observed_from_latent(m, oracle::random_latent(m, gen));
    StratumMassInterval pi = stratum_mass_interval(m, compliers, p);
    REQUIRE(pi.status == BoundStatus::nonempty);
    CHECK(pi.is_point(1e-8));
    if (pi.hi < 1e-3) continue; // tiny complier mass: ratio ill-conditioned
    BoundResult r = bounds_identified_mass(m, late, p, 0.5 * (pi.lo + pi.hi));
    REQUIRE(r.status == BoundStatus::nonempty);
    double wald = oracle::wald_ratio(p);
    CHECK(std::abs(r.lower - wald) <= 1e-7 * (1.0 + std::abs(wald)));
    CHECK(std::abs(r.upper - wald) <= 1e-7 * (1.0 + std::abs(wald)));
  }
}

TEST_CASE("constant g pins the interval at the constant") {
  StrataModel m = cs::cs_model_mono1();
  ObservedDistribution p = cs::table1().to_observed();
  ParameterSpec constant;
  constant.kind = ParameterSpec::Kind::custom;
  constant.name = "constant";
  constant.conditioning = always_takers_012();
  for (auto idx : m.admissible) constant.custom_g[idx] = 0.75;
  BoundResult r = bounds_partial_mass(m, constant, p);
  REQUIRE(r.status == BoundStatus::nonempty);
  CHECK(std::abs(r.lower - 0.75) <= 1e-7);
  CHECK(std::abs(r.upper - 0.75) <= 1e-7);

  ParameterSpec zero = standard_parameters("ate_contrast", 1, 1, always_takers_012());
  BoundResult rz = bounds_partial_mass(m, zero, p);
  CHECK(rz.lower == doctest::Approx(0.0));
  CHECK(rz.upper == doctest::Approx(0.0));
}

TEST_CASE("worked-example effect bounds through the grid search") {
  StrataModel m = cs::cs_model_mono1();
  ObservedDistribution p = cs::table1().to_observed();
  ParameterSpec ate = standard_parameters("ate_contrast", 1, 0, always_takers_012());
  PartialMassOptions opts;
  opts.grid_n = 2001;
  BoundResult r = bounds_partial_mass(m, ate, p, opts);
  REQUIRE(r.status == BoundStatus::nonempty);
  CHECK(std::abs(r.lower - (-0.219)) <= 2e-3);
  CHECK(std::abs(r.upper - 0.766) <= 2e-3);
  CHECK(std::abs(r.pi_lower - 0.235) <= 1e-6);
  CHECK(std::abs(r.pi_upper - 0.419) <= 1e-6);
  CHECK(r.lower_attained);
  CHECK(r.upper_attained);

  // witness certificates at both endpoints
  SystemMatrix sys = build_A(m, ate, 0.0, true);
  MaterializedParameter mat = materialize(ate, m);
  Matrix A_str = sys.A_stratum(mat.in_stratum);
  for (bool upper : {false, true}) {
    const Vector& q = upper ? r.witness_upper : r.witness_lower;
    double pi = upper ? r.witness_upper_pi : r.witness_lower_pi;
    double endpoint = upper ? r.upper : r.lower;
    REQUIRE(q.size() == sys.cols());
    Vector beta = beta_from_observed(p, sys, pi).v;
    CHECK((A_str * q - beta).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(q.minCoeff() >= -1e-10);
    double val = 0.0;
    for (Index j = 0; j < sys.n_types; ++j)
      if (mat.in_stratum[j]) val += mat.g_values[j] * q[j];
    CHECK(std::abs(val / pi - endpoint) <= 1e-8);
  }
}

TEST_CASE("wider mass interval cannot tighten the grid bounds") {
  StrataModel m = cs::cs_model_mono1();
  ObservedDistribution p = cs::table1().to_observed();
  ParameterSpec ate = standard_parameters("ate_contrast", 1, 0, always_takers_012());
  PartialMassOptions opts;
  opts.grid_n = 801;
  opts.pi_override = {{0.195, 0.481}}; // the loose step-1 interval
  BoundResult r = bounds_partial_mass(m, ate, p, opts);
  REQUIRE(r.status == BoundStatus::nonempty);
  // the joint system is infeasible outside the sharp interval: those grid
  // points are skipped and reported, and the optimum is unchanged
  CHECK(r.diagnostics.skipped_grid_points > 0);
  CHECK(std::abs(r.lower - (-0.219)) <= 2e-3);
  CHECK(std::abs(r.upper - 0.766) <= 2e-3);
}

TEST_CASE("identified and partial routes agree when the mass is a point") {
  StrataModel m = catalog("no_defier_generalized", Support::integers(2, 2, 2));
  StratumSpec compliers;
  compliers.treatment_maps = {{0, 1}};
  ParameterSpec late = standard_parameters("ate_contrast", 1, 0, compliers);
  auto gen = oracle::rng(73);
  for (int trial = 0; trial < 20; ++trial) {
    ObservedDistribution p = oracle::observed_from_latent(m, oracle::random_latent(m, gen));
    StratumMassInterval pi = stratum_mass_interval(m, compliers, p);
    if (pi.hi < 1e-3) continue;
    BoundResult ident = bounds_identified_mass(m, late, p, 0.5 * (pi.lo + pi.hi));
    BoundResult partial = bounds_partial_mass(m, late, p);
    REQUIRE(ident.status == BoundStatus::nonempty);
    REQUIRE(partial.status == BoundStatus::nonempty);
    CHECK(std::abs(ident.lower - partial.lower) <= 1e-6);
    CHECK(std::abs(ident.upper - partial.upper) <= 1e-6);
    BoundResult dispatched = compute_bounds(m, late, p);
    CHECK(std::abs(dispatched.lower - ident.lower) <= 1e-6);
  }
}

TEST_CASE("tighter restriction sets give nested bounds") {
  Support s = cs::cs_support();
  StrataModel narrow = catalog("cheng_small_mono12", s);
  StrataModel wide = catalog("cheng_small_mono1", s);
  ParameterSpec ate = standard_parameters("ate_contrast", 1, 0, always_takers_012());
  auto gen = oracle::rng(79);
  int tested = 0;
  for (int trial = 0; trial < 15; ++trial) {
    // data generated under the narrow model is consistent with both
    ObservedDistribution p =
        oracle::observed_from_latent(narrow, oracle::random_latent(narrow, gen));
    BoundResult rn = bounds_partial_mass(narrow, ate, p);
    BoundResult rw = bounds_partial_mass(wide, ate, p);
    if (rn.status != BoundStatus::nonempty || rw.status != BoundStatus::nonempty) continue;
    CHECK(rn.lower >= rw.lower - 2e-3);
    CHECK(rn.upper <= rw.upper + 2e-3);
    ++tested;
  }
  CHECK(tested >= 10);
}

TEST_CASE("statuses distinguish infeasible models from empty strata") {
  Support s = cs::cs_support();
  Vector cells = Vector::Zero(s.n_cells());
  cells[s.cell_index(0, 1, 0)] = 1.0;
  cells[s.cell_index(0, 0, 1)] = 1.0;
  cells[s.cell_index(0, 0, 2)] = 1.0;
  ObservedDistribution bad =
      ObservedDistribution::from_cells(s, cells, Vector::Constant(3, 1.0 / 3.0));
  StrataModel m = cs::cs_model_mono1();
  ParameterSpec ate = standard_parameters("ate_contrast", 1, 0, always_takers_012());
  CHECK(bounds_partial_mass(m, ate, bad).status == BoundStatus::empty_model);

  // consistent data whose always-taker mass is forced to zero: nobody takes
  // treatment 1 under assignment 1 nor treatment 2 under assignment 2
  Vector zero_cells = Vector::Zero(s.n_cells());
  zero_cells[s.cell_index(0, 0, 0)] = 1.0;
  zero_cells[s.cell_index(0, 0, 1)] = 1.0;
  zero_cells[s.cell_index(0, 0, 2)] = 1.0;
  ObservedDistribution never =
      ObservedDistribution::from_cells(s, zero_cells, Vector::Constant(3, 1.0 / 3.0));
  BoundResult r = bounds_partial_mass(m, ate, never);
  CHECK(r.status == BoundStatus::empty_stratum);
  CHECK(bounds_identified_mass(m, ate, never, 0.0).status == BoundStatus::empty_stratum);
}

TEST_CASE("closed-form envelope matches the mass programs on random data") {
  StrataModel m = cs::cs_model_mono1();
  StratumSpec cond = always_takers_012();
  SystemMatrix sys = build_A(m, mass_param(cond), 0.0, true);
  MaterializedParameter mat = materialize(mass_param(cond), m);
  Vector c(sys.cols());
  for (Index j = 0; j < sys.cols(); ++j) c[j] = mat.g_values[j];
  auto gen = oracle::rng(83);
  for (int trial = 0; trial < 50; ++trial) {
    ObservedDistribution p = oracle::observed_from_latent(m, oracle::random_latent(m, gen));
    ClosedFormEnvelope env = closed_form_envelope(sys, c, p);
    StratumMassInterval pi = stratum_mass_interval(m, cond, p);
    CHECK(std::abs(env.lower_value() - pi.lo) <= 1e-9);
    CHECK(std::abs(env.upper_value() - pi.hi) <= 1e-9);
  }
}
