#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>

namespace pvi {

// All randomized searches in this library draw from this wrapper instead of
// <random> distributions. std::mt19937_64 is fully specified by the standard,
// but the distribution classes are not; the transforms below are fixed
// formulas, so identical seeds give identical streams on every platform.
// That is what makes "same seed => bit-identical output" testable.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Stable sub-seed derivation, e.g. derive_seed(cfg.seed, face_index, start).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                                 std::uint64_t b = 0) {
  return splitmix64(splitmix64(seed ^ 0x7c5851ab5387fa2dULL) ^
                    splitmix64(a + 0x165667b19e3779f9ULL) ^
                    splitmix64(b + 0x27d4eb2f165667c5ULL));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Uniform in [0, 1), 53 mantissa bits.
  double uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // Box-Muller with the usual spare-value cache.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0x1.0p-60) u1 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * M_PI * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

  Eigen::VectorXd uniform_vec(int n, double a, double b) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = uniform(a, b);
    return v;
  }

  Eigen::VectorXd normal_vec(int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

  // Uniform direction on the unit sphere (normalized gaussian).
  Eigen::VectorXd unit_vec(int n) {
    Eigen::VectorXd v = normal_vec(n);
    double nv = v.norm();
    while (nv < 1e-12) {
      v = normal_vec(n);
      nv = v.norm();
    }
    return v / nv;
  }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace pvi
