#pragma once

/*
 * Polyhedral convex sets K = {x : C x <= b, E x = d}, their recession and
 * dual cones, pseudo-face enumeration, and a small exact LP oracle over
 * generator representations.
 *
 * Everything here is desk scale by design: generator enumeration brute-forces
 * active-set subsets (double description style), pseudo-face enumeration walks
 * all 2^s sign patterns, and both refuse loudly past hard caps instead of
 * degrading.  The LP oracle answers min <c, x> over K exactly in terms of a
 * generator representation: unbounded iff some ray or lineality direction
 * descends, otherwise the minimum over the vertex list.
 */

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "pvi/errors.hpp"
#include "pvi/rng.hpp"

namespace pvi {

using Eigen::MatrixXd;
using Eigen::VectorXd;

class PolyhedralSet {
 public:
  // C: s x n, b: s, E: t x n, d: t.  s or t may be zero (0 x n matrices).
  // Dimensions are validated here; nonemptiness is checked by the JSON
  // loader via is_nonempty, not by this constructor, so internal code can
  // build scratch sets freely.
  PolyhedralSet(MatrixXd C, VectorXd b, MatrixXd E, VectorXd d);
  // Inequalities only.
  PolyhedralSet(MatrixXd C, VectorXd b);

  static PolyhedralSet orthant(int n);       // {x : x >= 0}
  static PolyhedralSet whole_space(int n);   // no constraints
  static PolyhedralSet box(const VectorXd& lo, const VectorXd& hi);

  int dim() const { return n_; }
  int num_ineq() const { return static_cast<int>(C_.rows()); }
  int num_eq() const { return static_cast<int>(E_.rows()); }
  const MatrixXd& C() const { return C_; }
  const VectorXd& b() const { return b_; }
  const MatrixXd& E() const { return E_; }
  const VectorXd& dvec() const { return d_; }

 private:
  int n_;
  MatrixXd C_;
  VectorXd b_;
  MatrixXd E_;
  VectorXd d_;
};

// Cone {v : C v <= 0, E v = 0}.
struct PolyhedralCone {
  MatrixXd C;
  MatrixXd E;

  int dim() const { return static_cast<int>(C.cols() > 0 ? C.cols() : E.cols()); }
  PolyhedralSet as_set() const;
};

// conv(vertices) + cone(rays) + span(lineality).  Rays and lineality vectors
// are unit norm; all three lists are sorted lexicographically.
struct GeneratorRep {
  std::vector<VectorXd> vertices;
  std::vector<VectorXd> rays;
  std::vector<VectorXd> lineality;
};

// Active inequality set alpha, a strictly-satisfied sample point, and the
// margin by which the sample clears every inactive inequality.
struct PseudoFace {
  std::vector<int> alpha;
  VectorXd sample;
  double margin = 0.0;
};

struct EnumCaps {
  int max_rows = 32;       // inequality rows fed to subset enumeration
  int max_dim = 12;        // ambient dimension
  double rank_tol = 1e-10; // relative, for null spaces and basis ranks
  double feas_tol = 1e-9;  // absolute feasibility slack at candidate points
  double dedup_tol = 1e-8;
};

// Core double-description-at-desk-scale enumeration.
GeneratorRep enumerate_generators(const MatrixXd& C, const VectorXd& b,
                                  const MatrixXd& E, const VectorXd& d,
                                  const EnumCaps& caps = {});
GeneratorRep generators(const PolyhedralSet& K, const EnumCaps& caps = {});
GeneratorRep generators(const PolyhedralCone& K, const EnumCaps& caps = {});

bool is_nonempty(const PolyhedralSet& K);

// {v : C v <= 0, E v = 0}; coincides with K for cones.
PolyhedralCone recession_cone(const PolyhedralSet& K);

// Dual of a polyhedral cone: cone{-C_i^T} + span{E_j^T}, vertex list {0}.
GeneratorRep dual_cone(const PolyhedralCone& K);

// Max-margin feasibility LP for one active pattern: maximizes the smallest
// slack delta of the inactive inequalities subject to C_alpha x = b_alpha,
// E x = d, delta <= 1.  feasible==false when even the weak system is empty.
struct FaceLp {
  bool feasible = false;
  double margin = 0.0;
  VectorXd point;
};
FaceLp face_interior_lp(const PolyhedralSet& K, const std::vector<int>& alpha,
                        const EnumCaps& caps = {});

// All nonempty pseudo-faces, ordered by (|alpha|, alpha lex).  Throws
// CapError when the inequality count exceeds face_cap.
std::vector<PseudoFace> pseudo_faces(const PolyhedralSet& K, int face_cap = 20,
                                     double strict_tol = 1e-9);

struct LicqVerdict {
  bool holds = true;
  std::vector<int> failing_alpha;  // first failing face when !holds
  VectorXd witness;                // a point of that face
};
// Checks rank [C_alpha; E] == |alpha| + #eq on every nonempty pseudo-face.
LicqVerdict licq_check(const PolyhedralSet& K, int face_cap = 20,
                       double rank_tol = 1e-9);

struct LpResult {
  bool bounded = false;
  double value = 0.0;
  VectorXd argmin;
  VectorXd unbounded_ray;  // a descent ray when !bounded
};
// dir_tol guards the ray/lineality descent tests: a direction counts as
// descending only below -dir_tol, so callers can pass their verification
// tolerance to keep near-critical directions from flipping the answer.
LpResult lp_minimize(const VectorXd& c, const GeneratorRep& gens,
                     double dir_tol = 1e-11);
LpResult lp_minimize(const VectorXd& c, const PolyhedralSet& K,
                     double dir_tol = 1e-11);

bool contains(const PolyhedralSet& K, const VectorXd& x, double tol);

// Strict dual-interior test for the cone generated by cone_gens: true iff
// <r, q> > tol for every ray.  A cone with nontrivial lineality has empty
// dual interior unless the cone is {0}, whose dual interior is all of R^n.
bool int_dual_membership(const GeneratorRep& cone_gens, const VectorXd& q,
                         double tol = 1e-9);

// Random point of the represented set: convex combination of vertices plus
// exponentially scaled ray and gaussian lineality contributions.
VectorXd sample_point(const GeneratorRep& gens, Rng& rng,
                      double ray_scale = 5.0);

}  // namespace pvi
