#include "strata/support.hpp"

#include <charconv>
#include <set>

namespace strata {

namespace {

bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

void validate(const Support& s) {
  auto check = [](const std::vector<std::string>& labels, const char* what) {
    if (labels.size() < 2)
      throw std::invalid_argument(std::string(what) + " support needs at least 2 values");
    std::set<std::string> uniq(labels.begin(), labels.end());
    if (uniq.size() != labels.size())
      throw std::invalid_argument(std::string(what) + " support has duplicate labels");
  };
  check(s.y_labels, "outcome");
  check(s.d_labels, "treatment");
  check(s.z_labels, "instrument");
}

} // namespace

std::int64_t Support::n_response_types(std::int64_t cap) const {
  long double total = 1.0L;
  for (Index i = 0; i < nd(); ++i) total *= static_cast<long double>(ny());
  for (Index i = 0; i < nz(); ++i) total *= static_cast<long double>(nd());
  if (total > static_cast<long double>(cap))
    throw std::overflow_error("response type space exceeds cap of " + std::to_string(cap));
  return static_cast<std::int64_t>(total);
}

std::string Support::cell_name(Index cell) const {
  Index y = cell % ny();
  Index d = (cell / ny()) % nd();
  Index z = cell / (ny() * nd());
  return "p[" + y_labels[y] + "," + d_labels[d] + "|" + z_labels[z] + "]";
}

Support Support::integers(Index ny, Index nd, Index nz) {
  auto make = [](Index n) {
    std::vector<std::string> v;
    for (Index i = 0; i < n; ++i) v.push_back(std::to_string(i));
    return v;
  };
  return from_labels(make(ny), make(nd), make(nz));
}

Support Support::from_labels(std::vector<std::string> y, std::vector<std::string> d,
                             std::vector<std::string> z) {
  Support s;
  s.y_labels = std::move(y);
  s.d_labels = std::move(d);
  s.z_labels = std::move(z);
  validate(s);
  s.y_numeric.resize(s.y_labels.size());
  bool all_numeric = true;
  for (std::size_t i = 0; i < s.y_labels.size(); ++i) {
    double v;
    if (parse_number(s.y_labels[i], v)) {
      s.y_numeric[i] = v;
    } else {
      all_numeric = false;
      break;
    }
  }
  if (!all_numeric)
    for (std::size_t i = 0; i < s.y_labels.size(); ++i)
      s.y_numeric[i] = static_cast<double>(i);
  return s;
}

std::int64_t response_type_index(const Support& s, const ResponseType& r) {
  if (static_cast<Index>(r.outcome.size()) != s.nd() ||
      static_cast<Index>(r.treatment.size()) != s.nz())
    throw std::invalid_argument("response type does not match support dimensions");
  std::int64_t idx = 0;
  for (int y : r.outcome) {
    if (y < 0 || y >= s.ny()) throw std::out_of_range("outcome code out of range");
    idx = idx * s.ny() + y;
  }
  for (int d : r.treatment) {
    if (d < 0 || d >= s.nd()) throw std::out_of_range("treatment code out of range");
    idx = idx * s.nd() + d;
  }
  return idx;
}

ResponseType response_type_at(const Support& s, std::int64_t index) {
  ResponseType r;
  r.outcome.resize(s.nd());
  r.treatment.resize(s.nz());
  for (Index i = s.nz() - 1; i >= 0; --i) {
    r.treatment[i] = static_cast<int>(index % s.nd());
    index /= s.nd();
  }
  for (Index i = s.nd() - 1; i >= 0; --i) {
    r.outcome[i] = static_cast<int>(index % s.ny());
    index /= s.ny();
  }
  if (index != 0) throw std::out_of_range("response type index out of range");
  return r;
}

std::vector<ResponseType> enumerate_response_types(const Support& s, std::int64_t cap) {
  std::int64_t total = s.n_response_types(cap);
  std::vector<ResponseType> out;
  out.reserve(static_cast<std::size_t>(total));
  for (std::int64_t i = 0; i < total; ++i) out.push_back(response_type_at(s, i));
  return out;
}

std::string response_type_name(const Support& s, const ResponseType& r) {
  std::string name = "y(";
  for (std::size_t i = 0; i < r.outcome.size(); ++i) {
    if (i) name += ",";
    name += s.y_labels[r.outcome[i]];
  }
  name += "),d(";
  for (std::size_t i = 0; i < r.treatment.size(); ++i) {
    if (i) name += ",";
    name += s.d_labels[r.treatment[i]];
  }
  name += ")";
  return name;
}

} // namespace strata
