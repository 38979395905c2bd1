#pragma once

/*
 * Batch evaluation of a PolynomialMap over many points at once.
 *
 * This is the only data-parallel inner loop in the library (grid scans,
 * multistart seed screening), so it is the one place with SIMD variants.
 * Layout is structure-of-arrays: xs holds n blocks of npts doubles
 * (coordinate i of point k at xs[i*npts + k]); ys holds n output blocks the
 * same way.
 *
 * The vector kernels put one point per lane and run the same per-point
 * operation sequence as the scalar kernel, with no FMA contraction, so every
 * path produces bit-identical results.  The active path is chosen at runtime
 * from CPU features; PVI_KERNEL=scalar|avx2|neon|auto overrides it.
 */

#include <Eigen/Dense>
#include <cstddef>

#include "pvi/polymap.hpp"

namespace pvi::kernels {

enum class Isa { scalar, avx2, neon };

const char* isa_name(Isa isa);
bool isa_supported(Isa isa);
// Detected (or overridden) path used by eval_many.
Isa active_isa();

void eval_many(const PolynomialMap& P, const double* xs, std::size_t npts,
               double* ys);
// Explicit-path variant for equivalence tests.
void eval_many_with(Isa isa, const PolynomialMap& P, const double* xs,
                    std::size_t npts, double* ys);

// Convenience wrapper: points as columns in, values as columns out.
Eigen::MatrixXd eval_points(const PolynomialMap& P, const Eigen::MatrixXd& pts);

}  // namespace pvi::kernels
