#pragma once

// Shared problem fixtures.
//
// squared_gap_pair: n = 2, d = 2, both components of P equal (x1 - x2)^2,
// K the nonnegative orthant.  The recession problem keeps the diagonal ray,
// so the pair is not R0 and the solution map of VI(K, P + p) switches
// between a singleton, two parallel lines with their endpoints, and a full
// ray as p moves.
//
// cube_root_pair: n = 2, d = 3, P = (x1^3, x2^3), K the half plane
// x1 >= 0.  Strictly monotone and R0; the solution map is a componentwise
// cube root, single valued everywhere and 1/3-Hoelder around the origin.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "pvi/polyhedra.hpp"
#include "pvi/polymap.hpp"

namespace pvi::testing {

struct PairFixture {
  PolyhedralSet K = PolyhedralSet::orthant(1);
  PolynomialMap P = PolynomialMap::zero(1, 0);
};

inline PairFixture squared_gap_pair() {
  MonomialBasis basis(2, 2);
  // Columns in graded order: 1, x1, x2, x1^2, x1 x2, x2^2.
  MatrixXd A(2, basis.size());
  A.row(0) << 0, 0, 0, 1, -2, 1;
  A.row(1) << 0, 0, 0, 1, -2, 1;
  return {PolyhedralSet::orthant(2), PolynomialMap(basis, A)};
}

inline PairFixture cube_root_pair() {
  MonomialBasis basis(2, 3);
  MatrixXd A = MatrixXd::Zero(2, basis.size());
  Eigen::VectorXi e1(2), e2(2);
  e1 << 3, 0;
  e2 << 0, 3;
  A(0, basis.index_of(e1)) = 1.0;
  A(1, basis.index_of(e2)) = 1.0;
  MatrixXd C(1, 2);
  C << -1, 0;
  VectorXd b(1);
  b << 0;
  return {PolyhedralSet(C, b), PolynomialMap(basis, A)};
}

// Closed-form solution of the cube-root problem: x1 = cbrt(max(0, -p1)),
// x2 = cbrt(-p2).
inline VectorXd cube_root_solution(const VectorXd& p) {
  VectorXd x(2);
  x(0) = std::cbrt(std::max(0.0, -p(0)));
  x(1) = std::cbrt(-p(1));
  return x;
}

// Closed-form solution set of the squared-gap problem, derived from the
// complementarity conditions.  With g = (x1 - x2)^2:
//   p1 = p2 = 0:   the whole diagonal ray x1 = x2 >= 0;
//   p1 = p2 < 0:   the two lines x1 - x2 = c and x1 - x2 = -c inside the
//                  orthant, c = sqrt(-p1), including their endpoints (c, 0)
//                  and (0, c);
//   p2 < 0, p1 > p2:  the single point (0, sqrt(-p2));
//   p1 < 0, p1 < p2:  the single point (sqrt(-p1), 0);
//   otherwise:     the origin alone.
struct SquaredGapSolution {
  std::vector<VectorXd> points;  // solutions an enumeration lists individually
  std::vector<double> line_offsets;  // x1 - x2 = c clipped to the orthant
};

inline SquaredGapSolution squared_gap_solution(const VectorXd& p) {
  SquaredGapSolution sol;
  auto pt = [](double a, double b) {
    VectorXd v(2);
    v << a, b;
    return v;
  };
  const double p1 = p(0), p2 = p(1);
  if (p1 == 0.0 && p2 == 0.0) {
    sol.line_offsets.push_back(0.0);
  } else if (p1 == p2 && p1 < 0.0) {
    const double c = std::sqrt(-p1);
    sol.line_offsets.push_back(c);
    sol.line_offsets.push_back(-c);
    sol.points.push_back(pt(c, 0.0));
    sol.points.push_back(pt(0.0, c));
  } else if (p2 < 0.0 && p1 > p2) {
    sol.points.push_back(pt(0.0, std::sqrt(-p2)));
  } else if (p1 < 0.0 && p1 < p2) {
    sol.points.push_back(pt(std::sqrt(-p1), 0.0));
  } else {
    sol.points.push_back(pt(0.0, 0.0));
  }
  return sol;
}

// Distance from x to the closed-form solution set above.
inline double squared_gap_distance(const VectorXd& p, const VectorXd& x) {
  const SquaredGapSolution sol = squared_gap_solution(p);
  double best = std::numeric_limits<double>::infinity();
  for (const VectorXd& q : sol.points) best = std::min(best, (x - q).norm());
  for (const double c : sol.line_offsets) {
    // Points on the clipped line are base + t (1,1)/sqrt(2) with t >= 0,
    // base = (c, 0) for c >= 0 and (0, -c) otherwise.
    VectorXd base(2), u(2);
    base << std::max(c, 0.0), std::max(-c, 0.0);
    u << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    const double t = std::max(0.0, u.dot(x - base));
    best = std::min(best, (x - base - t * u).norm());
  }
  return best;
}

}  // namespace pvi::testing
