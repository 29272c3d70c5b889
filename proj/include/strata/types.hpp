#pragma once

#include <Eigen/Dense>
#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/eigen.hpp>

namespace strata {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Exact arithmetic scalar used by the vertex-enumeration engine.
using Rational = boost::multiprecision::mpq_rational;
using RationalMatrix = Eigen::Matrix<Rational, Eigen::Dynamic, Eigen::Dynamic>;
using RationalVector = Eigen::Matrix<Rational, Eigen::Dynamic, 1>;

inline Rational to_rational(double x) {
  // doubles are dyadic rationals, so this conversion is exact
  return Rational(x);
}

} // namespace strata
