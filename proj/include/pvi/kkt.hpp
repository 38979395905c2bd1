#pragma once

/*
 * Pseudo-face KKT solver for variational inequalities VI(K, P + p) over
 * polyhedral K, and the unit-sphere complementarity search over cones that
 * the recession analysis builds on.
 *
 * On the pseudo-face with active set alpha the first-order system in
 * z = (x, lambda, mu) is
 *
 *     P(x) + p + C_alpha^T lambda + E^T mu = 0
 *     C_alpha x - b_alpha                  = 0
 *     E x - d                              = 0
 *
 * solved by damped Newton from deterministic multistart seeds, filtered by
 * lambda >= -tol and the face's strict inequalities, then verified against
 * the defining inequality via the exact generator LP.  Suspected
 * positive-dimensional solution components are detected by Jacobian rank
 * deficiency (and by cluster blowup), and reported with dense samples
 * obtained by marching along the estimated tangent.
 */

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "pvi/polyhedra.hpp"
#include "pvi/polymap.hpp"

namespace pvi {

struct VIProblem {
  PolyhedralSet K;
  PolynomialMap P;
  VectorXd p;

  VIProblem(PolyhedralSet K_in, PolynomialMap P_in, VectorXd p_in);
};

struct SolveConfig {
  double newton_tol = 1e-10;
  int max_iters = 50;
  int multistart = 64;        // Newton starts per pseudo-face
  double seed_box = 10.0;     // seeds drawn uniformly from [-r, r]^n
  double cluster_radius = 1e-6;
  double verify_tol = 1e-8;
  std::uint64_t seed = 0;
  int threads = 1;
  int face_cap = 20;
  int max_points = 512;           // listed points before status turns capped
  double component_step = 0.01;   // tangent-march step for component samples
  int component_max_samples = 4096;

  void validate() const;
};

class KKTSystem {
 public:
  KKTSystem(PolynomialMap F, MatrixXd C_face, VectorXd b_face, MatrixXd E,
            VectorXd d, std::vector<int> alpha);

  int n() const { return n_; }
  int num_active() const { return na_; }
  int num_eq() const { return t_; }
  int dim() const { return n_ + na_ + t_; }
  const std::vector<int>& alpha() const { return alpha_; }
  const PolynomialMap& F() const { return F_; }

  // z = [x; lambda; mu]
  VectorXd residual(const VectorXd& z) const;
  MatrixXd jacobian(const VectorXd& z) const;

  VectorXd x_of(const VectorXd& z) const { return z.head(n_); }
  VectorXd lambda_of(const VectorXd& z) const { return z.segment(n_, na_); }
  VectorXd mu_of(const VectorXd& z) const { return z.tail(t_); }

 private:
  PolynomialMap F_;
  MatrixXd Ca_;
  VectorXd ba_;
  MatrixXd E_;
  VectorXd d_;
  std::vector<int> alpha_;
  int n_, na_, t_;
};

struct KktCandidate {
  VectorXd x;
  VectorXd lambda;
  VectorXd mu;
  double residual = 0.0;
};

struct SolutionPoint {
  VectorXd x;
  std::vector<int> alpha;
  double residual = 0.0;
  VectorXd lambda;
  VectorXd mu;
};

struct SolutionComponent {
  std::vector<int> alpha;
  std::vector<VectorXd> samples;  // ordered along the tangent, dense
  VectorXd tangent;
};

enum class SolveStatus { complete, capped, inconclusive };
const char* to_string(SolveStatus s);

struct SolutionSet {
  SolveStatus status = SolveStatus::complete;
  std::vector<SolutionPoint> points;          // verified, deduplicated
  std::vector<SolutionComponent> components;  // suspected nonisolated sets
  std::vector<std::string> notes;

  bool nonisolated() const { return !components.empty(); }
};

// Builds the face system; throws LicqError when the stacked active gradients
// [C_alpha; E] are rank deficient.
KKTSystem assemble_kkt(const VIProblem& prob, const PseudoFace& face);

// Damped-Newton multistart on one face.  Returns converged candidates that
// pass the multiplier sign filter; strict-inequality screening and LP
// verification happen in solve().
std::vector<KktCandidate> solve_face(const KKTSystem& sys,
                                     const SolveConfig& cfg,
                                     std::uint64_t face_seed);

// Defining-inequality check: x in K (within tol) and min_y <F(x), y> over K
// bounded with optimum >= <F(x), x> - tol.
bool verify_solution(const VIProblem& prob, const VectorXd& x, double tol);

struct NonisolatedFlag {
  bool flagged = false;
  double sigma_ratio = 1.0;  // smallest/largest singular value of the KKT Jacobian
  VectorXd tangent;          // x-space null direction estimate when flagged
};
NonisolatedFlag detect_nonisolated(const KKTSystem& sys,
                                   const KktCandidate& cand,
                                   int clusters_on_face,
                                   const SolveConfig& cfg);

// Full solve: LICQ gate, pseudo-face enumeration, per-face multistart,
// LP verification, global dedup, component detection and sampling.
// Deterministic for a fixed seed, independent of cfg.threads.
SolutionSet solve(const VIProblem& prob, const SolveConfig& cfg = {});

// ---- cone complementarity on the unit sphere ----

struct ConeSearchBudget {
  int pool = 256;   // screened seed pool per face (batch kernel evaluation)
  int starts = 64;  // projected-gradient starts kept per face
  int iters = 300;  // projected-gradient iteration cap
  int polish_iters = 60;
  std::uint64_t seed = 0;
  double nontrivial_merit = 1e-12;
  double trivial_merit = 1e-6;
  int face_cap = 20;
};

enum class ConeCpStatus { trivial, nontrivial, inconclusive };
const char* to_string(ConeCpStatus s);

struct ConeCpResult {
  ConeCpStatus status = ConeCpStatus::inconclusive;
  std::vector<VectorXd> witnesses;  // unit-norm nonzero solutions found
  double best_merit = 0.0;
  std::vector<std::string> notes;
};

// Searches for unit-norm solutions of the complementarity problem
// x in C, H(x) in C*, <H(x), x> = 0 for homogeneous H, by per-face
// multistart minimization of
//   merit(x) = <H(x),x>^2 + sum_g max(0, -<H(x),g>)^2
// over C intersected with the unit sphere (g ranges over the generators of
// C).  The zero solution always exists and is implicit.  Verdicts are
// numeric: merit below nontrivial_merit yields nontrivial, all face minima
// above trivial_merit yield trivial, anything between is inconclusive.
ConeCpResult solve_cone_cp(const PolyhedralCone& C, const PolynomialMap& H,
                           const ConeSearchBudget& budget = {});

}  // namespace pvi
