#include "sphere_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pvi::detail {

std::optional<SphereSlice> face_sphere_slice(const PolyhedralSet& K,
                                             const std::vector<int>& alpha,
                                             double rank_tol) {
  const int n = K.dim();
  const int na = static_cast<int>(alpha.size());
  const int t = K.num_eq();
  MatrixXd A(na + t, n);
  VectorXd rhs(na + t);
  for (int i = 0; i < na; ++i) {
    A.row(i) = K.C().row(alpha[i]);
    rhs(i) = K.b()(alpha[i]);
  }
  A.bottomRows(t) = K.E();
  rhs.tail(t) = K.dvec();

  SphereSlice slice;
  if (A.rows() == 0) {
    slice.x0 = VectorXd::Zero(n);
    slice.V = MatrixXd::Identity(n, n);
    slice.rho = 1.0;
    return slice;
  }

  Eigen::JacobiSVD<MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeFullV);
  const double smax = svd.singularValues().size() > 0
                          ? svd.singularValues()(0)
                          : 0.0;
  const double cut = std::max(smax, 1.0) * rank_tol;
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i) {
    if (svd.singularValues()(i) > cut) ++rank;
  }
  // Minimum-norm solution through the truncated SVD.
  VectorXd y = svd.matrixU().transpose() * rhs;
  VectorXd w = VectorXd::Zero(svd.matrixV().cols());
  for (int i = 0; i < rank; ++i) w(i) = y(i) / svd.singularValues()(i);
  slice.x0 = svd.matrixV() * w;
  slice.V = svd.matrixV().rightCols(n - rank);

  const double rho2 = 1.0 - slice.x0.squaredNorm();
  if (rho2 < -1e-12) return std::nullopt;
  slice.rho = rho2 > 0.0 ? std::sqrt(rho2) : 0.0;
  return slice;
}

namespace {

// Retraction back onto the radius-rho sphere in u-coordinates.
VectorXd retract(const VectorXd& u, double rho) {
  const double nu = u.norm();
  if (nu <= 0.0) return u;
  return u * (rho / nu);
}

}  // namespace

SphereSearchResult sphere_multistart(const SphereSlice& slice,
                                     const SphereSearchProblem& prob,
                                     const SphereSearchBudget& budget) {
  SphereSearchResult res;
  const int k = slice.dim();
  const bool keep_all = !prob.keep;
  auto keep = [&](const VectorXd& x) { return keep_all || prob.keep(x); };

  auto record = [&](double v) {
    res.observed_min = std::min(res.observed_min, v);
    ++res.evaluated;
  };

  if (k == 0 || slice.rho <= 0.0) {
    // Single point (or the affine hull is tangent to the sphere).
    if (std::abs(slice.x0.norm() - 1.0) <= 1e-9 && keep(slice.x0)) {
      const double v = prob.value(slice.x0);
      record(v);
      res.minima.push_back({slice.x0, VectorXd::Zero(k), v});
    }
    return res;
  }

  Rng rng(budget.seed);
  const int pool = std::max(budget.pool, budget.starts);

  // Seed pool on the slice; k == 1 has only two points, so enumerate them.
  std::vector<VectorXd> seeds;
  if (k == 1) {
    seeds.push_back(VectorXd::Constant(1, slice.rho));
    seeds.push_back(VectorXd::Constant(1, -slice.rho));
  } else {
    seeds.reserve(pool);
    for (int i = 0; i < pool; ++i) seeds.push_back(slice.rho * rng.unit_vec(k));
  }

  // Screen the pool in one batch so the caller can use vectorized kernels.
  MatrixXd pts(slice.x0.size(), static_cast<int>(seeds.size()));
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    pts.col(static_cast<int>(i)) = slice.lift(seeds[i]);
  }
  VectorXd vals(pts.cols());
  if (prob.batch_value) {
    prob.batch_value(pts, vals);
  } else {
    for (int i = 0; i < pts.cols(); ++i) vals(i) = prob.value(pts.col(i));
  }

  std::vector<int> order;
  for (int i = 0; i < pts.cols(); ++i) {
    if (keep(pts.col(i))) {
      record(vals(i));
      order.push_back(i);
    }
  }
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return vals(a) < vals(b); });
  if (static_cast<int>(order.size()) > budget.starts) {
    order.resize(budget.starts);
  }

  for (int idx : order) {
    VectorXd u = seeds[idx];
    VectorXd x = slice.lift(u);
    double f = vals(idx);
    double step = 1.0;
    for (int it = 0; it < budget.iters; ++it) {
      VectorXd g = slice.V.transpose() * prob.gradient(x);
      // Project out the radial direction; the iterate stays on the sphere.
      const VectorXd uh = u / slice.rho;
      VectorXd gt = g - g.dot(uh) * uh;
      const double gn2 = gt.squaredNorm();
      if (gn2 <= 1e-28) break;
      step = std::min(step * 2.0, 1.0);
      bool moved = false;
      while (step > 1e-14) {
        VectorXd ut = retract(u - step * gt, slice.rho);
        VectorXd xt = slice.lift(ut);
        const double ft = prob.value(xt);
        if (ft <= f - 1e-4 * step * gn2) {
          u = ut;
          x = xt;
          f = ft;
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;
    }
    if (keep(x)) {
      record(f);
      res.minima.push_back({x, u, f});
    }
  }

  std::sort(res.minima.begin(), res.minima.end(),
            [](const SphereMin& a, const SphereMin& b) {
              return a.value < b.value;
            });
  return res;
}

}  // namespace pvi::detail
