#pragma once

/*
 * Shared multistart machinery for minimizing a smooth function over the
 * intersection of a polyhedral face with the unit sphere.  Used by the cone
 * complementarity search and by the copositivity checker.
 *
 * A face {x : C_alpha x = b_alpha, E x = d, C x <= b} meets the unit sphere
 * in the slice {x0 + V u : ||u|| = rho}, where x0 is the minimum-norm point
 * of the face's affine hull, V an orthonormal basis of its direction space,
 * and rho^2 = 1 - ||x0||^2.  Minimization runs in u-coordinates: seeds are
 * screened in a batch (so the caller can route evaluation through the
 * vectorized kernels), the best survivors get projected-gradient descent
 * with Armijo backtracking and retraction onto the sphere, and every
 * evaluated feasible point contributes to the observed minimum.
 */

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "pvi/polyhedra.hpp"
#include "pvi/rng.hpp"

namespace pvi::detail {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct SphereSlice {
  VectorXd x0;  // minimum-norm point of the affine hull
  MatrixXd V;   // orthonormal direction basis, n x k
  double rho = 0.0;

  int dim() const { return static_cast<int>(V.cols()); }
  VectorXd lift(const VectorXd& u) const { return x0 + V * u; }
};

// Intersection of the face's affine hull with the unit sphere; nullopt when
// the affine hull misses the sphere.  rank_tol feeds the null-space cut.
std::optional<SphereSlice> face_sphere_slice(const PolyhedralSet& K,
                                             const std::vector<int>& alpha,
                                             double rank_tol = 1e-10);

struct SphereSearchProblem {
  std::function<double(const VectorXd&)> value;
  std::function<VectorXd(const VectorXd&)> gradient;  // ambient-space gradient
  // Batch screening: values[k] = f(points.col(k)).  Optional; falls back to
  // per-point value() calls.
  std::function<void(const MatrixXd&, VectorXd&)> batch_value;
  // Feasibility filter on ambient points (e.g. the polyhedron's inactive
  // rows).  Optional; everything is kept when absent.
  std::function<bool(const VectorXd&)> keep;
};

struct SphereMin {
  VectorXd x;  // ambient point, kept feasible
  VectorXd u;
  double value = 0.0;
};

struct SphereSearchResult {
  std::vector<SphereMin> minima;  // one per converged start, best first
  double observed_min = std::numeric_limits<double>::infinity();
  int evaluated = 0;  // feasible points that contributed to observed_min
};

struct SphereSearchBudget {
  int pool = 256;
  int starts = 64;
  int iters = 300;
  std::uint64_t seed = 0;
};

SphereSearchResult sphere_multistart(const SphereSlice& slice,
                                     const SphereSearchProblem& prob,
                                     const SphereSearchBudget& budget);

}  // namespace pvi::detail
