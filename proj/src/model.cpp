#include "strata/model.hpp"

#include <algorithm>
#include <set>

namespace strata {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

// all outcome maps D -> Y, in canonical (lexicographic) order
std::vector<std::vector<int>> all_outcome_maps(const Support& s) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(s.nd(), 0);
  while (true) {
    out.push_back(cur);
    Index i = s.nd() - 1;
    while (i >= 0 && cur[i] == s.ny() - 1) cur[i--] = 0;
    if (i < 0) break;
    ++cur[i];
  }
  return out;
}

std::vector<std::vector<int>> all_treatment_maps(const Support& s) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(s.nz(), 0);
  while (true) {
    out.push_back(cur);
    Index i = s.nz() - 1;
    while (i >= 0 && cur[i] == s.nd() - 1) cur[i--] = 0;
    if (i < 0) break;
    ++cur[i];
  }
  return out;
}

StrataModel cross_product(const Support& s, const std::vector<std::vector<int>>& treatment_maps) {
  std::vector<std::int64_t> idx;
  for (const auto& y : all_outcome_maps(s))
    for (const auto& d : treatment_maps)
      idx.push_back(response_type_index(s, ResponseType{y, d}));
  return StrataModel::from_indices(s, std::move(idx));
}

StrataModel outcome_restricted(const Support& s,
                               const std::function<bool(const std::vector<int>&)>& keep) {
  std::vector<std::int64_t> idx;
  for (const auto& y : all_outcome_maps(s)) {
    if (!keep(y)) continue;
    for (const auto& d : all_treatment_maps(s))
      idx.push_back(response_type_index(s, ResponseType{y, d}));
  }
  return StrataModel::from_indices(s, std::move(idx));
}

} // namespace

bool StrataModel::admits(std::int64_t canonical_index) const {
  return std::binary_search(admissible.begin(), admissible.end(), canonical_index);
}

std::vector<ResponseType> StrataModel::admissible_types() const {
  std::vector<ResponseType> out;
  out.reserve(admissible.size());
  for (auto i : admissible) out.push_back(response_type_at(support, i));
  return out;
}

StrataModel StrataModel::from_types(Support support, const std::vector<ResponseType>& types,
                                    std::vector<Relaxation> relaxations) {
  std::vector<std::int64_t> idx;
  idx.reserve(types.size());
  for (const auto& t : types) idx.push_back(response_type_index(support, t));
  return from_indices(std::move(support), std::move(idx), std::move(relaxations));
}

StrataModel StrataModel::from_indices(Support support, std::vector<std::int64_t> indices,
                                      std::vector<Relaxation> relaxations) {
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  require(!indices.empty(), "admissible set must be nonempty");
  std::int64_t total = support.n_response_types(std::numeric_limits<std::int64_t>::max());
  require(indices.front() >= 0 && indices.back() < total, "admissible index out of range");
  for (const auto& rel : relaxations) {
    require(rel.epsilon >= 0.0 && rel.epsilon <= 1.0, "relaxation epsilon must lie in [0,1]");
    for (auto i : rel.type_indices)
      require(i >= 0 && i < total, "relaxation type index out of range");
  }
  StrataModel m;
  m.support = std::move(support);
  m.admissible = std::move(indices);
  m.relaxations = std::move(relaxations);
  return m;
}

StrataModel catalog(const std::string& name, const Support& s) {
  auto int_dz = [&](const char* who) {
    require(s.nd() == s.nz(), std::string(who) + " requires |D| = |Z|");
  };

  if (name == "one_sided" || name == "cheng_small_mono1") {
    int_dz(name.c_str());
    if (name == "cheng_small_mono1") require(s.nd() == 3, "cheng_small_mono1 requires |D| = |Z| = 3");
    std::vector<std::vector<int>> maps;
    // d(j) in {0, j}: enumerate subsets of {1,...,k-1} that comply
    Index k = s.nd();
    for (std::int64_t bits = 0; bits < (std::int64_t{1} << (k - 1)); ++bits) {
      std::vector<int> d(k, 0);
      for (Index j = 1; j < k; ++j)
        if (bits & (std::int64_t{1} << (j - 1))) d[j] = static_cast<int>(j);
      maps.push_back(d);
    }
    return cross_product(s, maps);
  }
  if (name == "cheng_small_mono12") {
    require(s.nd() == 3 && s.nz() == 3, "cheng_small_mono12 requires |D| = |Z| = 3");
    return cross_product(s, {{0, 0, 0}, {0, 1, 0}, {0, 1, 2}});
  }
  if (name == "no_defier_generalized") {
    int_dz("no_defier_generalized");
    std::vector<std::vector<int>> maps;
    for (const auto& d : all_treatment_maps(s)) {
      bool ok = true;
      for (Index j = 0; j < s.nd() && ok; ++j) {
        if (d[j] == static_cast<int>(j)) continue;
        for (Index k = 0; k < s.nz(); ++k)
          if (d[k] == static_cast<int>(j)) { ok = false; break; }
      }
      if (ok) maps.push_back(d);
    }
    return cross_product(s, maps);
  }
  if (name == "kline_walters") {
    require(s.nd() == 3 && s.nz() == 2, "kline_walters requires |D| = 3, |Z| = 2");
    return cross_product(s, {{0, 0}, {0, 2}, {1, 1}, {1, 2}, {2, 2}});
  }
  if (name == "klm_fields") {
    require(s.nd() == 3 && s.nz() == 3, "klm_fields requires |D| = |Z| = 3");
    return cross_product(s, {{0, 0, 0}, {0, 0, 2}, {0, 1, 0}, {0, 1, 2},
                             {1, 1, 1}, {1, 1, 2}, {2, 1, 2}, {2, 2, 2}});
  }
  if (name == "warp_i") {
    require(s.nd() == 3 && s.nz() == 3, "warp_i requires |D| = |Z| = 3");
    return cross_product(s, {{0, 0, 0}, {0, 0, 1}, {0, 0, 2}, {1, 0, 1},
                             {1, 1, 1}, {2, 0, 2}, {2, 2, 2}});
  }
  if (name == "warp_ii") {
    require(s.nd() == 3 && s.nz() == 3, "warp_ii requires |D| = |Z| = 3");
    return cross_product(s, {{0, 0, 0}, {0, 0, 2}, {0, 1, 1}, {0, 1, 2},
                             {1, 1, 1}, {2, 2, 2}, {2, 1, 2}});
  }
  if (name == "warp_iii") {
    require(s.nd() == 3 && s.nz() == 3, "warp_iii requires |D| = |Z| = 3");
    return cross_product(s, {{0, 0, 0}, {0, 1, 1}, {1, 1, 1}, {2, 0, 2},
                             {2, 1, 1}, {2, 1, 2}, {2, 2, 2}});
  }
  if (name == "ordered_monotone") {
    std::vector<std::vector<int>> maps;
    for (const auto& d : all_treatment_maps(s)) {
      bool mono = true;
      for (Index z = 1; z < s.nz(); ++z)
        if (d[z] < d[z - 1]) { mono = false; break; }
      if (mono) maps.push_back(d);
    }
    return cross_product(s, maps);
  }
  if (name == "mtr") {
    return outcome_restricted(s, [&](const std::vector<int>& y) {
      for (Index d = 1; d < s.nd(); ++d)
        if (y[d] < y[d - 1]) return false;
      return true;
    });
  }
  if (name == "harmless") {
    return outcome_restricted(s, [&](const std::vector<int>& y) {
      for (Index d = 1; d < s.nd(); ++d)
        if (y[d] < y[0]) return false;
      return true;
    });
  }
  throw std::invalid_argument("unknown catalog restriction: " + name);
}

std::vector<std::int64_t> StratumSpec::resolve(const StrataModel& model) const {
  if (all) return model.admissible;
  std::set<std::int64_t> out;
  if (!treatment_maps.empty()) {
    for (auto idx : model.admissible) {
      ResponseType r = response_type_at(model.support, idx);
      for (const auto& d : treatment_maps)
        if (r.treatment == d) { out.insert(idx); break; }
    }
  }
  for (const auto& t : explicit_types) {
    std::int64_t idx = response_type_index(model.support, t);
    if (model.admits(idx)) out.insert(idx);
  }
  return {out.begin(), out.end()};
}

double ParameterSpec::g(const Support& s, const ResponseType& r) const {
  auto yv = [&](Index d) {
    if (d < 0 || d >= s.nd()) throw std::out_of_range("treatment label outside support");
    return s.y_numeric[r.outcome[d]];
  };
  switch (kind) {
    case Kind::ate_contrast: return yv(d1) - yv(d2);
    case Kind::prob_benefit: return yv(d1) > yv(d2) ? 1.0 : 0.0;
    case Kind::prob_no_harm: return yv(d1) >= yv(d2) ? 1.0 : 0.0;
    case Kind::relative_effect:
      return (yv(d1) > yv(d2) ? 1.0 : 0.0) - (yv(d2) > yv(d1) ? 1.0 : 0.0);
    case Kind::stratum_mass: {
      // handled against the target stratum in materialize(); standalone
      // evaluation uses the explicit description only
      for (const auto& d : conditioning.treatment_maps)
        if (r.treatment == d) return 1.0;
      for (const auto& t : conditioning.explicit_types)
        if (t == r) return 1.0;
      return conditioning.all ? 1.0 : 0.0;
    }
    case Kind::custom: {
      auto it = custom_g.find(response_type_index(s, r));
      return it == custom_g.end() ? 0.0 : it->second;
    }
  }
  throw std::logic_error("unreachable");
}

ParameterSpec standard_parameters(const std::string& name, Index d1, Index d2,
                                  StratumSpec conditioning) {
  ParameterSpec p;
  p.name = name;
  p.d1 = d1;
  p.d2 = d2;
  p.conditioning = std::move(conditioning);
  if (name == "ate_contrast") p.kind = ParameterSpec::Kind::ate_contrast;
  else if (name == "prob_benefit") p.kind = ParameterSpec::Kind::prob_benefit;
  else if (name == "prob_no_harm") p.kind = ParameterSpec::Kind::prob_no_harm;
  else if (name == "relative_effect") p.kind = ParameterSpec::Kind::relative_effect;
  else if (name == "stratum_mass") p.kind = ParameterSpec::Kind::stratum_mass;
  else throw std::invalid_argument("unknown standard parameter: " + name);
  return p;
}

MaterializedParameter materialize(const ParameterSpec& param, const StrataModel& model) {
  MaterializedParameter m;
  const auto& s = model.support;
  Index n = static_cast<Index>(model.admissible.size());
  m.g_values.resize(n);
  m.in_stratum.assign(n, 0);

  if (param.kind == ParameterSpec::Kind::stratum_mass) {
    // theta = E_Q[1{R in target}] with R' = R: mass of the target stratum
    auto target = param.conditioning.resolve(model);
    std::set<std::int64_t> tset(target.begin(), target.end());
    for (Index i = 0; i < n; ++i) {
      m.g_values[i] = tset.count(model.admissible[i]) ? 1.0 : 0.0;
      m.in_stratum[i] = 1;
    }
    m.stratum_indices = model.admissible;
    return m;
  }

  auto stratum = param.conditioning.resolve(model);
  if (stratum.empty())
    throw std::invalid_argument("conditioning stratum is empty within the admissible set");
  std::set<std::int64_t> sset(stratum.begin(), stratum.end());
  for (Index i = 0; i < n; ++i) {
    ResponseType r = response_type_at(s, model.admissible[i]);
    m.g_values[i] = param.g(s, r);
    m.in_stratum[i] = sset.count(model.admissible[i]) ? 1 : 0;
  }
  m.stratum_indices = std::move(stratum);
  return m;
}

LatentDistribution::LatentDistribution(Support s, std::map<std::int64_t, double> m,
                                       double tolerance)
    : support(std::move(s)), mass(std::move(m)) {
  double sum = 0.0;
  for (const auto& [idx, q] : mass) {
    if (q < -1e-12) throw std::invalid_argument("latent mass must be nonnegative");
    (void)idx;
    sum += q;
  }
  if (std::abs(sum - 1.0) > tolerance)
    throw std::invalid_argument("latent masses sum to " + std::to_string(sum) + ", not 1");
}

double LatentDistribution::total() const {
  double sum = 0.0;
  for (const auto& [idx, q] : mass) { (void)idx; sum += q; }
  return sum;
}

} // namespace strata
