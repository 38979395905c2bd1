#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <vector>

#include "pvi/kernels.hpp"
#include "pvi/polymap.hpp"
#include "pvi/rng.hpp"
#include "support/fixtures.hpp"

using namespace pvi;

namespace {

PolynomialMap random_map(int n, int d, std::uint64_t seed) {
  MonomialBasis basis(n, d);
  Rng rng(seed);
  MatrixXd A(n, basis.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < basis.size(); ++j) A(i, j) = rng.normal();
  return PolynomialMap(basis, A);
}

std::vector<double> random_points(int n, std::size_t npts, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> xs(static_cast<std::size_t>(n) * npts);
  for (double& v : xs) v = rng.uniform(-2.0, 2.0);
  return xs;
}

}  // namespace

// Runs first in this binary, before anything touches the cached dispatch
// decision, so the environment override is actually observed.
TEST_CASE("environment override pins the dispatch") {
  setenv("PVI_KERNEL", "scalar", 1);
  CHECK(kernels::active_isa() == kernels::Isa::scalar);
  // The decision is cached; later tests exercise other paths explicitly
  // through eval_many_with.
}

TEST_CASE("isa names and support") {
  using kernels::Isa;
  CHECK(std::string(kernels::isa_name(Isa::scalar)) == "scalar");
  CHECK(std::string(kernels::isa_name(Isa::avx2)) == "avx2");
  CHECK(std::string(kernels::isa_name(Isa::neon)) == "neon");
  CHECK(kernels::isa_supported(Isa::scalar));
#if defined(__x86_64__)
  CHECK_FALSE(kernels::isa_supported(Isa::neon));
#endif
#if defined(__aarch64__)
  CHECK(kernels::isa_supported(Isa::neon));
  CHECK_FALSE(kernels::isa_supported(Isa::avx2));
#endif
}

TEST_CASE("scalar kernel matches per-point evaluation") {
  for (int n : {1, 2, 3}) {
    for (int d : {1, 2, 4}) {
      const PolynomialMap P = random_map(n, d, 1000 + n * 10 + d);
      const std::size_t npts = 17;
      const std::vector<double> xs = random_points(n, npts, 42);
      std::vector<double> ys(xs.size());
      kernels::eval_many_with(kernels::Isa::scalar, P, xs.data(), npts,
                              ys.data());
      for (std::size_t k = 0; k < npts; ++k) {
        VectorXd x(n), y(n);
        for (int i = 0; i < n; ++i) x(i) = xs[i * npts + k];
        for (int i = 0; i < n; ++i) y(i) = ys[i * npts + k];
        CHECK((y - P.eval(x)).cwiseAbs().maxCoeff() < 1e-12);
      }
    }
  }
}

TEST_CASE("vector kernels are bit-identical to scalar, tails included") {
  std::vector<kernels::Isa> paths;
  if (kernels::isa_supported(kernels::Isa::avx2))
    paths.push_back(kernels::Isa::avx2);
  if (kernels::isa_supported(kernels::Isa::neon))
    paths.push_back(kernels::Isa::neon);
  if (paths.empty()) return;  // scalar-only host, nothing to compare

  for (const kernels::Isa isa : paths) {
    for (int n : {1, 2, 3, 5}) {
      for (int d : {1, 2, 3}) {
        const PolynomialMap P = random_map(n, d, 77 + n + 10 * d);
        // Sizes straddling the lane width exercise every tail length.
        for (std::size_t npts : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 64u, 101u}) {
          const std::vector<double> xs = random_points(n, npts, npts * 7 + n);
          std::vector<double> ys_scalar(xs.size()), ys_vec(xs.size());
          kernels::eval_many_with(kernels::Isa::scalar, P, xs.data(), npts,
                                  ys_scalar.data());
          kernels::eval_many_with(isa, P, xs.data(), npts, ys_vec.data());
          for (std::size_t i = 0; i < ys_scalar.size(); ++i) {
            CHECK(ys_scalar[i] == ys_vec[i]);  // exact, not approximate
          }
        }
      }
    }
  }
}

TEST_CASE("unsupported path throws") {
#if defined(__x86_64__)
  const PolynomialMap P = random_map(2, 2, 5);
  std::vector<double> xs(4, 0.5), ys(4);
  CHECK_THROWS_AS(
      kernels::eval_many_with(kernels::Isa::neon, P, xs.data(), 2, ys.data()),
      Error);
#endif
}

TEST_CASE("eval_points wraps the batch layout") {
  const auto [K, P] = testing::squared_gap_pair();
  (void)K;
  Rng rng(9);
  MatrixXd pts(2, 13);
  for (int c = 0; c < pts.cols(); ++c) pts.col(c) = rng.normal_vec(2);
  const MatrixXd out = kernels::eval_points(P, pts);
  REQUIRE(out.rows() == 2);
  REQUIRE(out.cols() == 13);
  for (int c = 0; c < pts.cols(); ++c) {
    CHECK((out.col(c) - P.eval(pts.col(c))).norm() < 1e-12);
  }
  CHECK_THROWS_AS(kernels::eval_points(P, MatrixXd::Zero(3, 4)),
                  DimensionError);
  CHECK(kernels::eval_points(P, MatrixXd(2, 0)).cols() == 0);
}

TEST_CASE("empty batch is a no-op") {
  const PolynomialMap P = random_map(2, 2, 6);
  kernels::eval_many(P, nullptr, 0, nullptr);
}
