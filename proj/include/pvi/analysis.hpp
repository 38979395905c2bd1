#pragma once

/*
 * Structural analysis of a polynomial pair (K, P): recession behaviour,
 * copositivity, monotonicity, and the copositivity-based existence
 * certificate for VI(K, P + p).
 *
 * Every verdict produced here is numeric evidence from bounded searches, not
 * a symbolic proof.  Reports therefore carry explicit statuses, observed
 * extrema, witnesses, and caveats, and the certificate refuses to fire when
 * any premise is undetermined.
 */

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "pvi/kkt.hpp"
#include "pvi/polyhedra.hpp"
#include "pvi/polymap.hpp"

namespace pvi {

// R0 property of the pair: the recession complementarity problem
// CP(K_inf, P_inf) admits only the zero solution.  Witnesses are unit-norm
// nonzero recession solutions, re-verified against the cone's generators
// before being reported.
struct R0Report {
  bool r0 = false;  // true exactly when status == trivial
  ConeCpStatus status = ConeCpStatus::inconclusive;
  double best_merit = 0.0;
  std::vector<VectorXd> witnesses;
  std::vector<std::string> notes;
};
R0Report is_r0_pair(const PolyhedralSet& K, const PolynomialMap& P,
                    const ConeSearchBudget& budget = {});

// Observed minimum of <P(x), x> over K intersected with the unit sphere,
// searched face by face.  The copositive verdict needs the observed minimum
// to clear -certify_tol; a violation below -violation_tol is reported with
// its witness; the band between is inconclusive.
struct CopositivityReport {
  enum class Verdict { copositive, not_copositive, inconclusive };
  Verdict verdict = Verdict::inconclusive;
  double min_value = 0.0;
  VectorXd argmin;
  std::vector<std::string> notes;

  static constexpr double violation_tol = 1e-10;
  static constexpr double certify_tol = 1e-12;
};
CopositivityReport copositivity_check(const PolyhedralSet& K,
                                      const PolynomialMap& P,
                                      const ConeSearchBudget& budget = {});

// Sampled monotonicity evidence: pair products <P(x)-P(y), x-y> normalized
// by |x-y|^2, plus eigenvalues of the symmetrized Jacobian at sampled
// points.  A definitely negative pair or eigenvalue disproves monotonicity
// on the convex set K; the positive verdicts are evidence only.
struct MonotonicityReport {
  enum class Verdict { not_monotone, monotone, strictly_monotone,
                       inconclusive };
  Verdict verdict = Verdict::inconclusive;
  double min_pair = 0.0;  // min normalized pair product
  double min_eig = 0.0;   // min symmetrized-Jacobian eigenvalue
  VectorXd witness_x;     // pair or point violating monotonicity, if any
  VectorXd witness_y;
  std::vector<std::string> notes;
};
MonotonicityReport monotonicity_check(const PolyhedralSet& K,
                                      const PolynomialMap& P, int trials = 256,
                                      std::uint64_t seed = 0);

// Existence certificate for VI(K, P + p): when 0 is in K, the leading term
// is copositive on the recession cone, and p has strictly positive inner
// product with every nonzero recession solution, the solution set is
// nonempty and bounded.  The dual-interior premise is exact when the
// recession search certifies R0 (the recession solution cone is {0});
// otherwise it is tested against the sampled recession solutions only and a
// caveat says so.
struct ExistenceReport {
  struct Premise {
    std::string name;
    bool holds = false;
    std::string detail;
  };
  bool certified = false;
  // True when a premise could not be decided either way (an inconclusive
  // search), as opposed to a premise that definitely fails.
  bool undetermined = false;
  std::vector<Premise> premises;
  std::vector<std::string> caveats;
};
ExistenceReport existence_certificate(const VIProblem& prob,
                                      const ConeSearchBudget& budget = {});

// Uniqueness probe: solves VI(K, P + p) for randomly drawn p and reports
// every p whose solution set is not a single point.  Evidence for global
// uniqueness, never a proof.
struct GusReport {
  bool evidence = false;
  int trials = 0;
  std::vector<VectorXd> failures;
  std::vector<std::string> notes;
};
GusReport gus_probe(const PolyhedralSet& K, const PolynomialMap& P,
                    int trials = 16, const SolveConfig& cfg = {});

}  // namespace pvi
