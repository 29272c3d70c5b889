#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "strata/support.hpp"

namespace strata {

/// Probability-budget relaxation of a hard exclusion: the total mass of
/// `type_indices` is constrained to be at most (or at least) `epsilon`
/// instead of exactly zero or one.
struct Relaxation {
  enum class Direction { at_most, at_least };
  std::vector<std::int64_t> type_indices; // canonical indices into N
  Direction direction = Direction::at_most;
  double epsilon = 0.0;
};

/// A response-type model: the support, the admissible set R (canonical
/// indices, sorted), and optional relaxations. Immutable after construction.
struct StrataModel {
  Support support;
  std::vector<std::int64_t> admissible; // sorted, unique
  std::vector<Relaxation> relaxations;

  bool admits(std::int64_t canonical_index) const;
  std::vector<ResponseType> admissible_types() const;

  static StrataModel from_types(Support support, const std::vector<ResponseType>& types,
                                std::vector<Relaxation> relaxations = {});
  static StrataModel from_indices(Support support, std::vector<std::int64_t> indices,
                                  std::vector<Relaxation> relaxations = {});
};

/// Builds the named restriction set from the catalog of worked examples.
///
///   one_sided            d(j) in {0, j}; multi-arm trial, control always available
///   cheng_small_mono1    one_sided specialized to |D|=|Z|=3
///   cheng_small_mono12   adds "compliance with 2 implies compliance with 1"
///   no_defier_generalized  d(j) != j implies d(k) != j for all k
///   kline_walters        close-substitute design, |D|=3, |Z|=2
///   klm_fields           field-of-study design, |D|=|Z|=3
///   warp_i / warp_ii / warp_iii   revealed-preference voucher designs
///   ordered_monotone     d(z) nondecreasing in z
///   mtr                  y(d) nondecreasing in d (outcome restriction)
///   harmless             y(d) >= y(0) for all d (outcome restriction)
StrataModel catalog(const std::string& name, const Support& support);

/// Parameter theta(Q) = E_Q[g(R) | R in R']. The conditioning stratum can be
/// a set of treatment maps, an explicit set of response types, or the whole
/// admissible set.
struct StratumSpec {
  bool all = false;
  std::vector<std::vector<int>> treatment_maps; // d-codes, one vector per map
  std::vector<ResponseType> explicit_types;

  /// Canonical indices of the stratum within the model's admissible set.
  std::vector<std::int64_t> resolve(const StrataModel& model) const;
};

struct ParameterSpec {
  enum class Kind {
    ate_contrast,    // y(d1) - y(d2)
    prob_benefit,    // 1{y(d1) > y(d2)}
    prob_no_harm,    // 1{y(d1) >= y(d2)}
    relative_effect, // 1{y(d1) > y(d2)} - 1{y(d2) > y(d1)}
    stratum_mass,    // g = 1{r in target}, conditioning = R
    custom           // tabulated g
  };
  Kind kind = Kind::ate_contrast;
  Index d1 = 0, d2 = 0;
  StratumSpec conditioning;                    // R' (ignored for stratum_mass target)
  std::map<std::int64_t, double> custom_g;     // canonical index -> g value
  std::string name;

  double g(const Support& s, const ResponseType& r) const;
};

ParameterSpec standard_parameters(const std::string& name, Index d1, Index d2,
                                  StratumSpec conditioning);

/// Concrete vectors of a parameter over a model's admissible columns.
struct MaterializedParameter {
  Vector g_values;               // size |R|
  std::vector<char> in_stratum;  // size |R|
  std::vector<std::int64_t> stratum_indices; // canonical, sorted

  Index stratum_size() const { return static_cast<Index>(stratum_indices.size()); }
};

MaterializedParameter materialize(const ParameterSpec& param, const StrataModel& model);

/// A latent distribution Q over response types, stored sparsely by canonical
/// index. `tolerance` bounds |sum - 1| (tables printed with rounding need a
/// looser one).
struct LatentDistribution {
  Support support;
  std::map<std::int64_t, double> mass;

  LatentDistribution(Support s, std::map<std::int64_t, double> m, double tolerance = 1e-10);

  double total() const;
};

} // namespace strata
