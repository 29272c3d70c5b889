#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "strata/types.hpp"

namespace strata {

/// Finite supports for the outcome, treatment and instrument. Labels are
/// arbitrary strings; internally every label is addressed by its position
/// (code) in the declared order. When all outcome labels parse as numbers,
/// those numeric values are used to evaluate outcome contrasts; otherwise
/// the code index stands in.
struct Support {
  std::vector<std::string> y_labels;
  std::vector<std::string> d_labels;
  std::vector<std::string> z_labels;
  std::vector<double> y_numeric; // one value per outcome label

  Index ny() const { return static_cast<Index>(y_labels.size()); }
  Index nd() const { return static_cast<Index>(d_labels.size()); }
  Index nz() const { return static_cast<Index>(z_labels.size()); }
  Index n_cells() const { return ny() * nd() * nz(); }

  // row layout of observable cells: z outermost, then d, then y
  Index cell_index(Index y, Index d, Index z) const {
    return (z * nd() + d) * ny() + y;
  }

  /// |Y|^|D| * |D|^|Z|, guarded against overflow (throws above `cap`).
  std::int64_t n_response_types(std::int64_t cap = 10000000) const;

  std::string cell_name(Index cell) const;

  static Support integers(Index ny, Index nd, Index nz);
  static Support from_labels(std::vector<std::string> y,
                             std::vector<std::string> d,
                             std::vector<std::string> z);
};

/// One response type: the full map d -> Y(d) and z -> D(z), stored as codes.
struct ResponseType {
  std::vector<int> outcome;   // size |D|, values in [0, |Y|)
  std::vector<int> treatment; // size |Z|, values in [0, |D|)

  bool operator==(const ResponseType&) const = default;
};

/// Canonical index of a response type: lexicographic over the concatenated
/// tuple (outcome map in D-order, treatment map in Z-order).
std::int64_t response_type_index(const Support& s, const ResponseType& r);
ResponseType response_type_at(const Support& s, std::int64_t index);

/// All response types in canonical order. Throws when |N| exceeds `cap`.
std::vector<ResponseType> enumerate_response_types(const Support& s,
                                                   std::int64_t cap = 10000000);

std::string response_type_name(const Support& s, const ResponseType& r);

} // namespace strata
