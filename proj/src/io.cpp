#include "strata/io.hpp"

#include <fstream>
#include <sstream>

namespace strata::io {

namespace {

std::string label_of(const json& j) {
  if (j.is_string()) return j.get<std::string>();
  return j.dump();
}

Index code_of(const std::vector<std::string>& labels, const std::string& label,
              const char* what) {
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label) return static_cast<Index>(i);
  throw std::invalid_argument(std::string(what) + " label '" + label + "' is not in the support");
}

std::vector<std::string> labels_from(const json& j) {
  std::vector<std::string> out;
  for (const auto& v : j) out.push_back(label_of(v));
  return out;
}

ResponseType type_from_json(const Support& s, const json& j) {
  ResponseType r;
  for (const auto& v : j.at("y")) r.outcome.push_back(static_cast<int>(code_of(s.y_labels, label_of(v), "outcome")));
  for (const auto& v : j.at("d")) r.treatment.push_back(static_cast<int>(code_of(s.d_labels, label_of(v), "treatment")));
  if (static_cast<Index>(r.outcome.size()) != s.nd() ||
      static_cast<Index>(r.treatment.size()) != s.nz())
    throw std::invalid_argument("response type dimensions do not match the support");
  return r;
}

StratumSpec stratum_from_json(const Support& s, const json& j) {
  StratumSpec spec;
  if (j.is_string() && j.get<std::string>() == "all") {
    spec.all = true;
    return spec;
  }
  if (j.contains("all") && j["all"].get<bool>()) {
    spec.all = true;
    return spec;
  }
  if (j.contains("treatment_types")) {
    for (const auto& map : j["treatment_types"]) {
      std::vector<int> d;
      for (const auto& v : map) d.push_back(static_cast<int>(code_of(s.d_labels, label_of(v), "treatment")));
      if (static_cast<Index>(d.size()) != s.nz())
        throw std::invalid_argument("treatment map length does not match |Z|");
      spec.treatment_maps.push_back(std::move(d));
    }
  }
  if (j.contains("types"))
    for (const auto& t : j["types"]) spec.explicit_types.push_back(type_from_json(s, t));
  if (!spec.all && spec.treatment_maps.empty() && spec.explicit_types.empty())
    throw std::invalid_argument("conditioning stratum is empty");
  return spec;
}

} // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot open file for writing: " + path);
  out << content;
}

ObservedDistribution parse_csv(const std::string& text, const Support& support,
                               const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& msg) {
    throw std::invalid_argument(origin + ":" + std::to_string(line_no) + ": " + msg);
  };
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
      if (c == ',') { out.push_back(cur); cur.clear(); }
      else if (c != '\r') cur += c;
    }
    out.push_back(cur);
    for (auto& f : out) {
      std::size_t a = f.find_first_not_of(" \t");
      std::size_t b = f.find_last_not_of(" \t");
      f = a == std::string::npos ? "" : f.substr(a, b - a + 1);
    }
    return out;
  };

  if (!std::getline(in, line)) fail("empty file");
  ++line_no;
  auto header = split(line);
  bool aggregated;
  if (header.size() == 3 && header[0] == "y" && header[1] == "d" && header[2] == "z")
    aggregated = false;
  else if (header.size() == 4 && header[0] == "y" && header[1] == "d" && header[2] == "z" &&
           header[3] == "count")
    aggregated = true;
  else
    fail("header must be 'y,d,z' or 'y,d,z,count'");

  std::vector<std::int64_t> counts(support.n_cells(), 0);
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto f = split(line);
    if (f.size() != header.size()) fail("expected " + std::to_string(header.size()) + " fields");
    Index y = code_of(support.y_labels, f[0], "outcome");
    Index d = code_of(support.d_labels, f[1], "treatment");
    Index z = code_of(support.z_labels, f[2], "instrument");
    std::int64_t c = 1;
    if (aggregated) {
      try {
        std::size_t pos = 0;
        c = std::stoll(f[3], &pos);
        if (pos != f[3].size()) fail("bad count '" + f[3] + "'");
      } catch (const std::invalid_argument&) {
        fail("bad count '" + f[3] + "'");
      }
      if (c < 0) fail("negative count");
    }
    counts[support.cell_index(y, d, z)] += c;
  }
  for (Index z = 0; z < support.nz(); ++z) {
    std::int64_t nz = 0;
    for (Index i = 0; i < support.ny() * support.nd(); ++i)
      nz += counts[z * support.ny() * support.nd() + i];
    if (nz == 0)
      throw std::invalid_argument(origin + ": no observations with instrument value '" +
                                  support.z_labels[z] + "'");
  }
  return ObservedDistribution::from_counts(support, std::move(counts));
}

ObservedDistribution load_csv(const std::string& path, const Support& support) {
  return parse_csv(read_file(path), support, path);
}

ModelFile parse_model(const json& j) {
  const json& sup = j.at("support");
  Support support = Support::from_labels(labels_from(sup.at("y")), labels_from(sup.at("d")),
                                         labels_from(sup.at("z")));

  std::vector<Relaxation> relaxations;
  if (j.contains("relaxations")) {
    for (const auto& rj : j["relaxations"]) {
      Relaxation rel;
      for (const auto& t : rj.at("types"))
        rel.type_indices.push_back(response_type_index(support, type_from_json(support, t)));
      std::string dir = rj.value("direction", "at_most");
      if (dir == "at_most") rel.direction = Relaxation::Direction::at_most;
      else if (dir == "at_least") rel.direction = Relaxation::Direction::at_least;
      else throw std::invalid_argument("relaxation direction must be at_most or at_least");
      rel.epsilon = rj.at("epsilon").get<double>();
      relaxations.push_back(std::move(rel));
    }
  }

  const json& restriction = j.at("restriction");
  StrataModel model;
  if (restriction.contains("catalog")) {
    model = catalog(restriction["catalog"].get<std::string>(), support);
    model.relaxations = std::move(relaxations);
  } else if (restriction.contains("explicit")) {
    std::vector<ResponseType> types;
    for (const auto& t : restriction["explicit"]) types.push_back(type_from_json(support, t));
    model = StrataModel::from_types(support, types, std::move(relaxations));
  } else {
    throw std::invalid_argument("restriction must name a catalog entry or list explicit types");
  }

  ModelFile out;
  out.model = std::move(model);

  if (j.contains("parameter")) {
    const json& pj = j["parameter"];
    ParameterSpec param;
    const Support& s = out.model.support;
    if (pj.contains("custom_g")) {
      param.kind = ParameterSpec::Kind::custom;
      param.name = pj.value("name", "custom");
      for (const auto& entry : pj["custom_g"]) {
        std::int64_t idx = response_type_index(s, type_from_json(s, entry.at("type")));
        param.custom_g[idx] = entry.at("value").get<double>();
      }
      param.conditioning = stratum_from_json(s, pj.at("conditioning"));
    } else {
      std::string name = pj.at("name").get<std::string>();
      Index d1 = 0, d2 = 0;
      if (pj.contains("d1")) d1 = code_of(s.d_labels, label_of(pj["d1"]), "treatment");
      if (pj.contains("d2")) d2 = code_of(s.d_labels, label_of(pj["d2"]), "treatment");
      StratumSpec cond;
      if (pj.contains("conditioning")) cond = stratum_from_json(s, pj["conditioning"]);
      else cond.all = true;
      param = standard_parameters(name, d1, d2, std::move(cond));
    }
    out.parameter = std::move(param);
  }
  return out;
}

ModelFile load_model(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
  return parse_model(j);
}

std::string digest(const std::string& content) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : content) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string digest_file(const std::string& path) { return digest(read_file(path)); }

json manifest(const json& resolved_config,
              const std::vector<std::pair<std::string, std::string>>& input_digests,
              std::uint64_t seed, double wall_ms) {
  json m;
  m["tool"] = "strata-bounds";
  m["version"] = "0.1.0";
  m["config"] = resolved_config;
  json inputs = json::object();
  for (const auto& [path, dg] : input_digests) inputs[path] = dg;
  m["inputs"] = inputs;
  m["seed"] = seed;
  m["wall_clock_ms"] = wall_ms;
  return m;
}

namespace {

json witness_to_json(const SystemMatrix& sys, const Vector& q, double pi) {
  json w;
  w["pi"] = pi;
  json masses = json::object();
  for (Index j = 0; j < q.size() && j < sys.cols(); ++j)
    if (q[j] > 1e-12) masses[sys.col_name(j)] = q[j];
  w["q"] = masses;
  return w;
}

const char* status_name(BoundStatus s) {
  switch (s) {
    case BoundStatus::nonempty: return "nonempty";
    case BoundStatus::empty_model: return "empty_model";
    case BoundStatus::empty_stratum: return "empty_stratum";
  }
  return "unknown";
}

} // namespace

json bound_result_to_json(const BoundResult& r, const SystemMatrix& sys) {
  json out;
  out["status"] = status_name(r.status);
  if (r.status == BoundStatus::nonempty) {
    out["lower"] = r.lower;
    out["upper"] = r.upper;
    out["lower_attained"] = r.lower_attained;
    out["upper_attained"] = r.upper_attained;
    out["pi"] = {r.pi_lower, r.pi_upper};
    out["diagnostics"] = {{"grid_size", r.diagnostics.grid_size},
                          {"lp_count", r.diagnostics.lp_count},
                          {"skipped_grid_points", r.diagnostics.skipped_grid_points}};
    if (r.witness_lower.size() > 0)
      out["witness_lower"] = witness_to_json(sys, r.witness_lower, r.witness_lower_pi);
    if (r.witness_upper.size() > 0)
      out["witness_upper"] = witness_to_json(sys, r.witness_upper, r.witness_upper_pi);
  }
  return out;
}

json test_outcome_to_json(const TestOutcome& t) {
  json out;
  out["statistic"] = t.statistic;
  out["critical_value"] = t.critical_value;
  out["reject"] = t.reject;
  out["equality_part"] = t.equality_part;
  out["inequality_part"] = t.inequality_part;
  out["lambda"] = t.lambda_used;
  out["theta0"] = t.theta0;
  out["n"] = t.n;
  out["restricted_estimator_feasible"] = t.restricted_estimator_feasible;
  if (!t.bootstrap_draws.empty()) out["bootstrap_draws"] = t.bootstrap_draws;
  return out;
}

json confidence_region_to_json(const ConfidenceRegion& r) {
  json out;
  out["alpha"] = r.alpha;
  out["empty"] = r.empty();
  json intervals = json::array();
  for (const auto& [lo, hi] : r.intervals) intervals.push_back({lo, hi});
  out["intervals"] = intervals;
  json grid = json::array();
  for (std::size_t i = 0; i < r.grid.size(); ++i)
    grid.push_back({{"theta0", r.grid[i]}, {"accepted", static_cast<bool>(r.accepted[i])}});
  out["grid"] = grid;
  return out;
}

} // namespace strata::io
