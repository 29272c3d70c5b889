#include "strata/polyhedra.hpp"

#include <map>
#include <sstream>
#include <stdexcept>

namespace strata {

namespace {

Vector to_double_vec(const RationalVector& v) {
  Vector out(v.size());
  for (Index i = 0; i < v.size(); ++i) out[i] = static_cast<double>(v[i]);
  return out;
}

void normalize_inf(Vector& v) {
  double m = v.cwiseAbs().maxCoeff();
  if (m > 0) v /= m;
}

// cone {(t, x) : t >= 0, W x <= c t} -> (vertices, rays, lineality as +/- rays)
RationalPolyhedronV dehomogenize(const ConeGenerators<Rational>& cone, Index dim) {
  RationalPolyhedronV out;
  auto split = [&](const RationalVector& g, bool also_negated) {
    Rational t = g[0];
    RationalVector x = g.tail(dim);
    if (t > 0) {
      out.vertices.push_back(x / t);
    } else if (t == 0) {
      bool nonzero = false;
      for (Index i = 0; i < dim; ++i)
        if (x[i] != 0) { nonzero = true; break; }
      if (nonzero) out.rays.push_back(x);
    } else {
      throw std::logic_error("homogenization produced a generator with t < 0");
    }
    if (also_negated && t == 0) out.rays.push_back(RationalVector(-x));
  };
  for (const auto& g : cone.rays) split(g, false);
  for (const auto& g : cone.lineality) split(g, true); // lineality has t == 0
  return out;
}

} // namespace

PolyhedronV RationalPolyhedronV::to_double() const {
  PolyhedronV out;
  for (const auto& v : vertices) out.vertices.push_back(to_double_vec(v));
  for (const auto& r : rays) {
    Vector d = to_double_vec(r);
    normalize_inf(d);
    out.rays.push_back(d);
  }
  return out;
}

RationalPolyhedronV enumerate_polyhedron(const RationalMatrix& W, const RationalVector& c,
                                         Index row_cap) {
  if (W.rows() > row_cap)
    throw std::invalid_argument("vertex enumeration size guard: " + std::to_string(W.rows()) +
                                " rows exceed cap " + std::to_string(row_cap));
  const Index d = W.cols();
  // homogenize: rows of B are [c_i, -W_i] (so B (t,x)' >= 0 <=> W x <= c t),
  // plus t >= 0
  RationalMatrix B(W.rows() + 1, d + 1);
  for (Index i = 0; i < W.rows(); ++i) {
    B(i, 0) = c[i];
    for (Index j = 0; j < d; ++j) B(i, j + 1) = -W(i, j);
  }
  B.row(W.rows()).setZero();
  B(W.rows(), 0) = 1;
  return dehomogenize(double_description<Rational>(B), d);
}

RationalPolyhedronV enumerate_dual(const Matrix& A0, const Vector& c, Index row_cap) {
  RationalMatrix W(A0.cols(), A0.rows());
  for (Index i = 0; i < A0.rows(); ++i)
    for (Index j = 0; j < A0.cols(); ++j) W(j, i) = to_rational(A0(i, j));
  RationalVector cr(c.size());
  for (Index i = 0; i < c.size(); ++i) cr[i] = to_rational(c[i]);
  return enumerate_polyhedron(W, cr, row_cap);
}

PolyhedronV vrep_of_simplex(Index n_admissible) {
  if (n_admissible <= 0) throw std::invalid_argument("admissible set must be nonempty");
  PolyhedronV out;
  for (Index i = 0; i < n_admissible; ++i) {
    Vector e = Vector::Zero(n_admissible);
    e[i] = 1.0;
    out.vertices.push_back(e);
  }
  return out;
}

PolyhedronH image_polytope_hrep(const Matrix& A1, Index hull_dim_cap) {
  const Index m = A1.rows();
  if (m > hull_dim_cap)
    throw std::invalid_argument("hull dimension guard: " + std::to_string(m) +
                                " exceeds cap " + std::to_string(hull_dim_cap));
  if (A1.cols() == 0) throw std::invalid_argument("image polytope of an empty set");

  // deduplicate image points exactly
  std::vector<RationalVector> points;
  {
    std::map<std::vector<Rational>, bool> seen;
    for (Index j = 0; j < A1.cols(); ++j) {
      std::vector<Rational> key(m);
      for (Index i = 0; i < m; ++i) key[i] = to_rational(A1(i, j));
      if (seen.emplace(key, true).second) {
        RationalVector v(m);
        for (Index i = 0; i < m; ++i) v[i] = key[i];
        points.push_back(std::move(v));
      }
    }
  }

  // the polar-side cone {(a0, a) : a0 + a'v_i >= 0 for all i}; its extreme
  // rays are the facets of the hull, its lineality the affine-hull equalities
  RationalMatrix B(points.size(), m + 1);
  for (std::size_t i = 0; i < points.size(); ++i) {
    B(static_cast<Index>(i), 0) = 1;
    for (Index j = 0; j < m; ++j) B(static_cast<Index>(i), j + 1) = points[i][j];
  }
  ConeGenerators<Rational> cone = double_description<Rational>(B);

  std::vector<RationalVector> rows;
  std::vector<Rational> offs;
  auto add_row = [&](const RationalVector& a, const Rational& a0) {
    // a0 + a'x >= 0  ->  (-a)'x <= a0
    bool nonzero = false;
    for (Index j = 0; j < m; ++j)
      if (a[j] != 0) { nonzero = true; break; }
    if (!nonzero) return;
    RationalVector g(m);
    for (Index j = 0; j < m; ++j) g[j] = -a[j];
    rows.push_back(std::move(g));
    offs.push_back(a0);
  };
  for (const auto& r : cone.rays) add_row(r.tail(m), r[0]);
  for (const auto& l : cone.lineality) {
    add_row(l.tail(m), l[0]);
    add_row(RationalVector(-l.tail(m)), Rational(-l[0]));
  }

  // canonical scale, duplicate removal
  std::map<std::vector<Rational>, bool> uniq;
  PolyhedronH out;
  std::vector<RationalVector> final_rows;
  std::vector<Rational> final_offs;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    RationalVector full(m + 1);
    full.head(m) = rows[i];
    full[m] = offs[i];
    Rational scale(0);
    for (Index j = 0; j <= m; ++j) {
      Rational a = full[j] < 0 ? Rational(-full[j]) : full[j];
      if (a > scale) scale = a;
    }
    if (scale != 0) full /= scale;
    std::vector<Rational> key(full.data(), full.data() + m + 1);
    if (!uniq.emplace(key, true).second) continue;
    final_rows.push_back(full.head(m));
    final_offs.push_back(full[m]);
  }

  out.G.resize(static_cast<Index>(final_rows.size()), m);
  out.h.resize(static_cast<Index>(final_rows.size()));
  for (std::size_t i = 0; i < final_rows.size(); ++i) {
    for (Index j = 0; j < m; ++j) out.G(static_cast<Index>(i), j) =
        static_cast<double>(final_rows[i][j]);
    out.h[static_cast<Index>(i)] = static_cast<double>(final_offs[i]);
  }
  out.rational_G = std::move(final_rows);
  out.rational_h = std::move(final_offs);
  return out;
}

PolyhedronV vertices_from_hrep(const PolyhedronH& poly) {
  RationalMatrix W(poly.G.rows(), poly.G.cols());
  RationalVector c(poly.h.size());
  for (Index i = 0; i < poly.G.rows(); ++i) {
    c[i] = to_rational(poly.h[i]);
    for (Index j = 0; j < poly.G.cols(); ++j) W(i, j) = to_rational(poly.G(i, j));
  }
  return enumerate_polyhedron(W, c).to_double();
}

std::string hrep_to_text(const PolyhedronH& poly, const std::vector<std::string>& col_names) {
  if (poly.rational_G.empty())
    throw std::invalid_argument("text export needs the exact representation");
  std::ostringstream out;
  for (std::size_t i = 0; i < poly.rational_G.size(); ++i) {
    const auto& row = poly.rational_G[i];
    bool first = true;
    for (Index j = 0; j < row.size(); ++j) {
      if (row[j] == 0) continue;
      Rational a = row[j];
      if (first) {
        if (a < 0) { out << "-"; a = -a; }
      } else {
        out << (a < 0 ? " - " : " + ");
        if (a < 0) a = -a;
      }
      if (a != 1) out << a << "*";
      out << col_names[j];
      first = false;
    }
    if (first) out << "0";
    out << " <= " << poly.rational_h[i] << "\n";
  }
  return out.str();
}

} // namespace strata
