#include "pvi/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#if defined(__x86_64__)
#include <immintrin.h>
#endif
#if defined(__aarch64__)
#include <arm_neon.h>
#endif

namespace pvi::kernels {

namespace {

void eval_scalar(const PolynomialMap& P, const double* xs, std::size_t npts,
                 double* ys) {
  const MonomialBasis& basis = P.basis();
  const int n = basis.n();
  const int m = basis.size();
  const std::vector<int>& parent = basis.parent();
  const std::vector<int>& var = basis.var();
  const MatrixXd& A = P.coeffs();
  std::vector<double> X(m);
  for (std::size_t k = 0; k < npts; ++k) {
    X[0] = 1.0;
    for (int c = 1; c < m; ++c) X[c] = X[parent[c]] * xs[var[c] * npts + k];
    for (int l = 0; l < n; ++l) {
      double acc = 0.0;
      for (int c = 0; c < m; ++c) acc += A(l, c) * X[c];
      ys[l * npts + k] = acc;
    }
  }
}

#if defined(__x86_64__)

__attribute__((target("avx2"))) void eval_avx2(const PolynomialMap& P,
                                               const double* xs,
                                               std::size_t npts, double* ys) {
  const MonomialBasis& basis = P.basis();
  const int n = basis.n();
  const int m = basis.size();
  const std::vector<int>& parent = basis.parent();
  const std::vector<int>& var = basis.var();
  const MatrixXd& A = P.coeffs();
  // Column cache lives in a plain double buffer (4 lanes per column) so no
  // vector-register type leaks into a container template argument.
  std::vector<double> X(4 * static_cast<std::size_t>(m));
  std::size_t k = 0;
  for (; k + 4 <= npts; k += 4) {
    _mm256_storeu_pd(X.data(), _mm256_set1_pd(1.0));
    for (int c = 1; c < m; ++c) {
      const __m256d xv = _mm256_loadu_pd(xs + var[c] * npts + k);
      const __m256d pv = _mm256_loadu_pd(X.data() + 4 * parent[c]);
      _mm256_storeu_pd(X.data() + 4 * c, _mm256_mul_pd(pv, xv));
    }
    for (int l = 0; l < n; ++l) {
      __m256d acc = _mm256_setzero_pd();
      for (int c = 0; c < m; ++c) {
        const __m256d xc = _mm256_loadu_pd(X.data() + 4 * c);
        // mul then add, kept separate to match the scalar rounding exactly
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(A(l, c)), xc));
      }
      _mm256_storeu_pd(ys + l * npts + k, acc);
    }
  }
  if (k < npts) {
    // Tail points: reuse the scalar kernel on a repacked remainder.
    const std::size_t rem = npts - k;
    std::vector<double> xt(static_cast<std::size_t>(n) * rem);
    std::vector<double> yt(static_cast<std::size_t>(n) * rem);
    for (int i = 0; i < n; ++i)
      std::memcpy(xt.data() + i * rem, xs + i * npts + k, rem * sizeof(double));
    eval_scalar(P, xt.data(), rem, yt.data());
    for (int l = 0; l < n; ++l)
      std::memcpy(ys + l * npts + k, yt.data() + l * rem, rem * sizeof(double));
  }
}

#endif  // __x86_64__

#if defined(__aarch64__)

void eval_neon(const PolynomialMap& P, const double* xs, std::size_t npts,
               double* ys) {
  const MonomialBasis& basis = P.basis();
  const int n = basis.n();
  const int m = basis.size();
  const std::vector<int>& parent = basis.parent();
  const std::vector<int>& var = basis.var();
  const MatrixXd& A = P.coeffs();
  std::vector<double> X(2 * static_cast<std::size_t>(m));
  std::size_t k = 0;
  for (; k + 2 <= npts; k += 2) {
    vst1q_f64(X.data(), vdupq_n_f64(1.0));
    for (int c = 1; c < m; ++c) {
      const float64x2_t pv = vld1q_f64(X.data() + 2 * parent[c]);
      vst1q_f64(X.data() + 2 * c,
                vmulq_f64(pv, vld1q_f64(xs + var[c] * npts + k)));
    }
    for (int l = 0; l < n; ++l) {
      float64x2_t acc = vdupq_n_f64(0.0);
      for (int c = 0; c < m; ++c) {
        acc = vaddq_f64(acc,
                        vmulq_f64(vdupq_n_f64(A(l, c)), vld1q_f64(X.data() + 2 * c)));
      }
      vst1q_f64(ys + l * npts + k, acc);
    }
  }
  if (k < npts) {
    const std::size_t rem = npts - k;
    std::vector<double> xt(static_cast<std::size_t>(n) * rem);
    std::vector<double> yt(static_cast<std::size_t>(n) * rem);
    for (int i = 0; i < n; ++i)
      std::memcpy(xt.data() + i * rem, xs + i * npts + k, rem * sizeof(double));
    eval_scalar(P, xt.data(), rem, yt.data());
    for (int l = 0; l < n; ++l)
      std::memcpy(ys + l * npts + k, yt.data() + l * rem, rem * sizeof(double));
  }
}

#endif  // __aarch64__

Isa detect() {
  if (const char* env = std::getenv("PVI_KERNEL")) {
    const std::string v(env);
    if (v == "scalar") return Isa::scalar;
    if (v == "avx2" && isa_supported(Isa::avx2)) return Isa::avx2;
    if (v == "neon" && isa_supported(Isa::neon)) return Isa::neon;
    // "auto" and anything unusable fall through to detection
  }
#if defined(__x86_64__)
  if (__builtin_cpu_supports("avx2")) return Isa::avx2;
#endif
#if defined(__aarch64__)
  return Isa::neon;
#endif
  return Isa::scalar;
}

}  // namespace

const char* isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
    case Isa::neon:
      return "neon";
  }
  return "unknown";
}

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(__x86_64__)
      return __builtin_cpu_supports("avx2") != 0;
#else
      return false;
#endif
    case Isa::neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa active_isa() {
  static const Isa isa = detect();
  return isa;
}

void eval_many_with(Isa isa, const PolynomialMap& P, const double* xs,
                    std::size_t npts, double* ys) {
  if (npts == 0) return;
  switch (isa) {
    case Isa::scalar:
      eval_scalar(P, xs, npts, ys);
      return;
    case Isa::avx2:
#if defined(__x86_64__)
      if (isa_supported(Isa::avx2)) {
        eval_avx2(P, xs, npts, ys);
        return;
      }
#endif
      break;
    case Isa::neon:
#if defined(__aarch64__)
      eval_neon(P, xs, npts, ys);
      return;
#else
      break;
#endif
  }
  throw Error(std::string("kernel path not supported on this cpu: ") +
              isa_name(isa));
}

void eval_many(const PolynomialMap& P, const double* xs, std::size_t npts,
               double* ys) {
  eval_many_with(active_isa(), P, xs, npts, ys);
}

Eigen::MatrixXd eval_points(const PolynomialMap& P, const Eigen::MatrixXd& pts) {
  const int n = P.n();
  if (pts.rows() != n) {
    throw DimensionError("eval_points: point rows do not match the map");
  }
  const std::size_t npts = static_cast<std::size_t>(pts.cols());
  Eigen::MatrixXd out(n, pts.cols());
  if (npts == 0) return out;
  // Repack into the structure-of-arrays layout the kernels expect.
  std::vector<double> xs(static_cast<std::size_t>(n) * npts);
  std::vector<double> ys(static_cast<std::size_t>(n) * npts);
  for (int i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < npts; ++k) {
      xs[static_cast<std::size_t>(i) * npts + k] = pts(i, static_cast<int>(k));
    }
  }
  eval_many(P, xs.data(), npts, ys.data());
  for (int i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < npts; ++k) {
      out(i, static_cast<int>(k)) = ys[static_cast<std::size_t>(i) * npts + k];
    }
  }
  return out;
}

}  // namespace pvi::kernels
