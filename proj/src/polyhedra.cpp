#include "pvi/polyhedra.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace pvi {

namespace {

bool lex_less(const VectorXd& a, const VectorXd& b) {
  for (int i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return false;
}

void sort_lex(std::vector<VectorXd>& v) {
  std::sort(v.begin(), v.end(), lex_less);
}

void dedup(std::vector<VectorXd>& v, double tol) {
  std::vector<VectorXd> kept;
  for (const VectorXd& x : v) {
    bool seen = false;
    for (const VectorXd& y : kept) {
      if ((x - y).lpNorm<Eigen::Infinity>() <= tol) {
        seen = true;
        break;
      }
    }
    if (!seen) kept.push_back(x);
  }
  v = std::move(kept);
}

// Sign-canonicalized orthonormal directions: first coordinate of visible
// magnitude is made positive so enumeration order never depends on SVD signs.
void canonicalize_dirs(std::vector<VectorXd>& dirs, double tol) {
  for (VectorXd& v : dirs) {
    v /= v.norm();
    for (int i = 0; i < v.size(); ++i) {
      if (std::abs(v[i]) > tol) {
        if (v[i] < 0) v = -v;
        break;
      }
    }
  }
}

// Orthonormal null-space basis of A (n columns), empty when A has full
// column rank.  SVD keeps this deterministic and well-scaled.
std::vector<VectorXd> null_space(const MatrixXd& A, double rank_tol) {
  const int n = static_cast<int>(A.cols());
  if (A.rows() == 0) {
    std::vector<VectorXd> basis;
    for (int i = 0; i < n; ++i) {
      VectorXd e = VectorXd::Zero(n);
      e[i] = 1.0;
      basis.push_back(e);
    }
    return basis;
  }
  Eigen::JacobiSVD<MatrixXd> svd(A, Eigen::ComputeFullV);
  const double smax = svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
  const double thresh = std::max(smax, 1.0) * rank_tol;
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > thresh) ++rank;
  std::vector<VectorXd> basis;
  for (int i = rank; i < n; ++i) basis.push_back(svd.matrixV().col(i));
  return basis;
}

int matrix_rank(const MatrixXd& A, double rank_tol) {
  if (A.rows() == 0 || A.cols() == 0) return 0;
  Eigen::JacobiSVD<MatrixXd> svd(A);
  const double smax = svd.singularValues()[0];
  const double thresh = std::max(smax, 1.0) * rank_tol;
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > thresh) ++rank;
  return rank;
}

MatrixXd vstack(const MatrixXd& a, const MatrixXd& b) {
  MatrixXd out(a.rows() + b.rows(), a.cols());
  out.topRows(a.rows()) = a;
  out.bottomRows(b.rows()) = b;
  return out;
}

// All k-subsets of {0..s-1} in lexicographic order, visited via callback.
template <class F>
void for_each_subset(int s, int k, F&& fn) {
  if (k < 0 || k > s) return;
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    fn(idx);
    int i = k - 1;
    while (i >= 0 && idx[i] == s - k + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

double binomial(int s, int k) {
  if (k < 0 || k > s) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (s - k + i) / i;
  return r;
}

bool feasible_point(const MatrixXd& C, const VectorXd& b, const MatrixXd& E,
                    const VectorXd& d, const VectorXd& x, double tol) {
  const double scale = 1.0 + x.lpNorm<Eigen::Infinity>();
  if (C.rows() > 0 && ((C * x - b).maxCoeff() > tol * scale)) return false;
  if (E.rows() > 0 &&
      ((E * x - d).lpNorm<Eigen::Infinity>() > tol * scale))
    return false;
  return true;
}

}  // namespace

PolyhedralSet::PolyhedralSet(MatrixXd C, VectorXd b, MatrixXd E, VectorXd d)
    : C_(std::move(C)), b_(std::move(b)), E_(std::move(E)), d_(std::move(d)) {
  if (C_.rows() != b_.size())
    throw DimensionError("polyhedral set: C rows and b length differ");
  if (E_.rows() != d_.size())
    throw DimensionError("polyhedral set: E rows and d length differ");
  if (C_.rows() == 0 && E_.rows() == 0)
    throw DimensionError(
        "polyhedral set: ambient dimension unknown; pass 0 x n matrices");
  n_ = static_cast<int>(C_.rows() > 0 ? C_.cols() : E_.cols());
  if (C_.rows() > 0 && C_.cols() != n_)
    throw DimensionError("polyhedral set: C column count mismatch");
  if (E_.rows() > 0 && E_.cols() != n_)
    throw DimensionError("polyhedral set: E column count mismatch");
}

PolyhedralSet::PolyhedralSet(MatrixXd C, VectorXd b)
    : PolyhedralSet(std::move(C), std::move(b), MatrixXd(0, 0), VectorXd(0)) {
  // The delegated constructor reads the dimension off C, so the placeholder
  // 0 x 0 equality block is resized here for consistency.
  E_.resize(0, n_);
}

PolyhedralSet PolyhedralSet::orthant(int n) {
  return PolyhedralSet(-MatrixXd::Identity(n, n), VectorXd::Zero(n),
                       MatrixXd(0, n), VectorXd(0));
}

PolyhedralSet PolyhedralSet::whole_space(int n) {
  // Encoded with a single vacuous inequality 0 <= 1 to keep the ambient
  // dimension recorded.
  return PolyhedralSet(MatrixXd::Zero(1, n), VectorXd::Ones(1), MatrixXd(0, n),
                       VectorXd(0));
}

PolyhedralSet PolyhedralSet::box(const VectorXd& lo, const VectorXd& hi) {
  const int n = static_cast<int>(lo.size());
  MatrixXd C(2 * n, n);
  VectorXd b(2 * n);
  C.topRows(n) = MatrixXd::Identity(n, n);
  b.head(n) = hi;
  C.bottomRows(n) = -MatrixXd::Identity(n, n);
  b.tail(n) = -lo;
  return PolyhedralSet(std::move(C), std::move(b), MatrixXd(0, n), VectorXd(0));
}

PolyhedralSet PolyhedralCone::as_set() const {
  return PolyhedralSet(C, VectorXd::Zero(C.rows()), E, VectorXd::Zero(E.rows()));
}

GeneratorRep enumerate_generators(const MatrixXd& C, const VectorXd& b,
                                  const MatrixXd& E, const VectorXd& d,
                                  const EnumCaps& caps) {
  const int n = static_cast<int>(C.cols() > 0 ? C.cols() : E.cols());
  const int s = static_cast<int>(C.rows());
  if (s > caps.max_rows || static_cast<int>(E.rows()) > caps.max_rows)
    throw CapError("generator enumeration: row cap exceeded (" +
                   std::to_string(s) + " > " + std::to_string(caps.max_rows) +
                   ")");
  if (n > caps.max_dim)
    throw CapError("generator enumeration: dimension cap exceeded");

  GeneratorRep rep;

  // Lineality space, removed up front so the remaining polyhedron is pointed.
  rep.lineality = null_space(vstack(C, E), caps.rank_tol);
  canonicalize_dirs(rep.lineality, caps.dedup_tol);

  MatrixXd L(static_cast<int>(rep.lineality.size()), n);
  for (std::size_t i = 0; i < rep.lineality.size(); ++i)
    L.row(static_cast<int>(i)) = rep.lineality[i].transpose();
  const MatrixXd E2 = vstack(E, L);
  VectorXd d2(E2.rows());
  d2.head(d.size()) = d;
  d2.tail(L.rows()).setZero();

  const int rankE2 = matrix_rank(E2, caps.rank_tol);
  const int k = n - rankE2;  // inequality rows needed to pin a vertex

  if (binomial(s, k) > 2e6 || binomial(s, k - 1) > 2e6)
    throw CapError("generator enumeration: subset count cap exceeded");

  // Vertices of the pointed part: each is the solution of a rank-n active
  // system made of E2 plus k inequality rows.
  for_each_subset(s, k, [&](const std::vector<int>& idx) {
    MatrixXd A(E2.rows() + k, n);
    VectorXd rhs(E2.rows() + k);
    A.topRows(E2.rows()) = E2;
    rhs.head(E2.rows()) = d2;
    for (int i = 0; i < k; ++i) {
      A.row(E2.rows() + i) = C.row(idx[i]);
      rhs[E2.rows() + i] = b[idx[i]];
    }
    Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(A);
    cod.setThreshold(caps.rank_tol);
    if (cod.rank() < n) return;
    const VectorXd x = cod.solve(rhs);
    const double scale = 1.0 + rhs.lpNorm<Eigen::Infinity>() +
                         x.lpNorm<Eigen::Infinity>();
    if ((A * x - rhs).lpNorm<Eigen::Infinity>() > caps.feas_tol * scale)
      return;  // active system inconsistent
    if (feasible_point(C, b, E2, d2, x, caps.feas_tol))
      rep.vertices.push_back(x);
  });
  sort_lex(rep.vertices);
  dedup(rep.vertices, caps.dedup_tol);

  // Extreme rays of the pointed recession cone {v : C v <= 0, E2 v = 0}:
  // rank n-1 active systems with a one-dimensional null direction.
  if (k >= 1 && !rep.vertices.empty()) {
    for_each_subset(s, k - 1, [&](const std::vector<int>& idx) {
      MatrixXd A(E2.rows() + k - 1, n);
      A.topRows(E2.rows()) = E2;
      for (int i = 0; i < k - 1; ++i) A.row(E2.rows() + i) = C.row(idx[i]);
      const std::vector<VectorXd> ns = null_space(A, caps.rank_tol);
      if (ns.size() != 1) return;
      for (const double sign : {1.0, -1.0}) {
        const VectorXd v = sign * ns[0];
        if (C.rows() > 0 && (C * v).maxCoeff() > caps.feas_tol) continue;
        rep.rays.push_back(v);
      }
    });
    sort_lex(rep.rays);
    dedup(rep.rays, caps.dedup_tol);
  }

  return rep;
}

GeneratorRep generators(const PolyhedralSet& K, const EnumCaps& caps) {
  return enumerate_generators(K.C(), K.b(), K.E(), K.dvec(), caps);
}

GeneratorRep generators(const PolyhedralCone& K, const EnumCaps& caps) {
  return generators(K.as_set(), caps);
}

bool is_nonempty(const PolyhedralSet& K) {
  // A pointed polyhedron is nonempty iff it has a vertex, and the lineality
  // part never affects emptiness.
  return !generators(K).vertices.empty();
}

PolyhedralCone recession_cone(const PolyhedralSet& K) {
  return PolyhedralCone{K.C(), K.E()};
}

GeneratorRep dual_cone(const PolyhedralCone& K) {
  const int n = K.dim();
  GeneratorRep rep;
  rep.vertices.push_back(VectorXd::Zero(n));
  for (int i = 0; i < K.C.rows(); ++i) {
    const VectorXd r = -K.C.row(i).transpose();
    const double nr = r.norm();
    if (nr > 1e-14) rep.rays.push_back(r / nr);
  }
  sort_lex(rep.rays);
  dedup(rep.rays, 1e-8);
  if (K.E.rows() > 0) {
    // Row space of E = orthogonal complement of its null space.
    Eigen::JacobiSVD<MatrixXd> svd(K.E, Eigen::ComputeFullV);
    const double smax = svd.singularValues()[0];
    for (int i = 0; i < svd.singularValues().size(); ++i)
      if (svd.singularValues()[i] > 1e-10 * std::max(smax, 1.0))
        rep.lineality.push_back(svd.matrixV().col(i));
    canonicalize_dirs(rep.lineality, 1e-8);
    sort_lex(rep.lineality);
  }
  return rep;
}

FaceLp face_interior_lp(const PolyhedralSet& K, const std::vector<int>& alpha,
                        const EnumCaps& caps) {
  const int n = K.dim();
  const int s = K.num_ineq();
  std::vector<bool> active(s, false);
  for (int i : alpha) {
    if (i < 0 || i >= s) throw InputError("face: inequality index out of range");
    active[i] = true;
  }
  // Lifted variables (x, delta).
  std::vector<int> inactive;
  for (int i = 0; i < s; ++i)
    if (!active[i]) inactive.push_back(i);
  const int si = static_cast<int>(inactive.size());
  MatrixXd Cl(si + 2, n + 1);
  VectorXd bl(si + 2);
  for (int r = 0; r < si; ++r) {
    Cl.row(r).head(n) = K.C().row(inactive[r]);
    Cl(r, n) = 1.0;
    bl[r] = K.b()[inactive[r]];
  }
  Cl.row(si).setZero();
  Cl(si, n) = -1.0;
  bl[si] = 0.0;  // delta >= 0
  Cl.row(si + 1).setZero();
  Cl(si + 1, n) = 1.0;
  bl[si + 1] = 1.0;  // delta <= 1
  const int na = static_cast<int>(alpha.size());
  MatrixXd El(na + K.num_eq(), n + 1);
  VectorXd dl(na + K.num_eq());
  for (int r = 0; r < na; ++r) {
    El.row(r).head(n) = K.C().row(alpha[r]);
    El(r, n) = 0.0;
    dl[r] = K.b()[alpha[r]];
  }
  if (K.num_eq() > 0) {
    El.bottomRows(K.num_eq()).leftCols(n) = K.E();
    El.bottomRows(K.num_eq()).col(n).setZero();
    dl.tail(K.num_eq()) = K.dvec();
  }

  EnumCaps lifted = caps;
  lifted.max_rows = std::max(caps.max_rows, si + 2 + na + K.num_eq());
  lifted.max_dim = std::max(caps.max_dim, n + 1);
  const GeneratorRep gens = enumerate_generators(Cl, bl, El, dl, lifted);

  FaceLp out;
  if (gens.vertices.empty()) return out;
  out.feasible = true;
  out.margin = -1.0;
  for (const VectorXd& v : gens.vertices) {
    if (v[n] > out.margin) {
      out.margin = v[n];
      out.point = v.head(n);
    }
  }
  return out;
}

std::vector<PseudoFace> pseudo_faces(const PolyhedralSet& K, int face_cap,
                                     double strict_tol) {
  const int s = K.num_ineq();
  if (s > face_cap)
    throw CapError("pseudo-face enumeration refused: " + std::to_string(s) +
                   " inequalities exceed the cap of " +
                   std::to_string(face_cap) +
                   "; raise the cap explicitly if this is intended");
  std::vector<std::vector<int>> patterns;
  for (std::uint64_t mask = 0; mask < (1ULL << s); ++mask) {
    std::vector<int> alpha;
    for (int i = 0; i < s; ++i)
      if (mask & (1ULL << i)) alpha.push_back(i);
    patterns.push_back(std::move(alpha));
  }
  std::sort(patterns.begin(), patterns.end(),
            [](const std::vector<int>& a, const std::vector<int>& b) {
              if (a.size() != b.size()) return a.size() < b.size();
              return a < b;
            });
  std::vector<PseudoFace> faces;
  for (const std::vector<int>& alpha : patterns) {
    const FaceLp lp = face_interior_lp(K, alpha);
    if (lp.feasible && lp.margin > strict_tol)
      faces.push_back(PseudoFace{alpha, lp.point, lp.margin});
  }
  return faces;
}

LicqVerdict licq_check(const PolyhedralSet& K, int face_cap, double rank_tol) {
  LicqVerdict verdict;
  for (const PseudoFace& face : pseudo_faces(K, face_cap)) {
    const int rows = static_cast<int>(face.alpha.size()) + K.num_eq();
    if (rows == 0) continue;
    MatrixXd A(rows, K.dim());
    for (std::size_t i = 0; i < face.alpha.size(); ++i)
      A.row(static_cast<int>(i)) = K.C().row(face.alpha[i]);
    if (K.num_eq() > 0) A.bottomRows(K.num_eq()) = K.E();
    if (matrix_rank(A, rank_tol) < rows) {
      verdict.holds = false;
      verdict.failing_alpha = face.alpha;
      verdict.witness = face.sample;
      return verdict;
    }
  }
  return verdict;
}

LpResult lp_minimize(const VectorXd& c, const GeneratorRep& gens,
                     double dir_tol) {
  LpResult res;
  if (gens.vertices.empty())
    throw InputError("lp_minimize: empty generator representation");
  for (const VectorXd& l : gens.lineality) {
    const double t = c.dot(l);
    if (std::abs(t) > dir_tol) {
      res.bounded = false;
      res.unbounded_ray = l;
      if (t > 0) res.unbounded_ray = -res.unbounded_ray;
      return res;
    }
  }
  for (const VectorXd& r : gens.rays) {
    if (c.dot(r) < -dir_tol) {
      res.bounded = false;
      res.unbounded_ray = r;
      return res;
    }
  }
  res.bounded = true;
  res.value = std::numeric_limits<double>::infinity();
  for (const VectorXd& v : gens.vertices) {
    const double t = c.dot(v);
    if (t < res.value - 1e-15 ||
        (std::abs(t - res.value) <= 1e-15 &&
         (res.argmin.size() == 0 || lex_less(v, res.argmin)))) {
      res.value = t;
      res.argmin = v;
    }
  }
  return res;
}

LpResult lp_minimize(const VectorXd& c, const PolyhedralSet& K,
                     double dir_tol) {
  return lp_minimize(c, generators(K), dir_tol);
}

bool contains(const PolyhedralSet& K, const VectorXd& x, double tol) {
  if (x.size() != K.dim()) return false;
  return feasible_point(K.C(), K.b(), K.E(), K.dvec(), x, tol);
}

bool int_dual_membership(const GeneratorRep& cone_gens, const VectorXd& q,
                         double tol) {
  if (cone_gens.rays.empty() && cone_gens.lineality.empty())
    return true;  // dual of {0} is the whole space
  if (!cone_gens.lineality.empty()) return false;
  for (const VectorXd& r : cone_gens.rays)
    if (r.dot(q) <= tol * std::max(1.0, q.norm())) return false;
  return true;
}

VectorXd sample_point(const GeneratorRep& gens, Rng& rng, double ray_scale) {
  if (gens.vertices.empty())
    throw InputError("sample_point: empty generator representation");
  const int n = static_cast<int>(gens.vertices[0].size());
  VectorXd x = VectorXd::Zero(n);
  VectorXd w(gens.vertices.size());
  for (int i = 0; i < w.size(); ++i) w[i] = rng.uniform();
  w /= w.sum();
  for (std::size_t i = 0; i < gens.vertices.size(); ++i)
    x += w[static_cast<int>(i)] * gens.vertices[i];
  for (const VectorXd& r : gens.rays) x += rng.uniform(0.0, ray_scale) * r;
  for (const VectorXd& l : gens.lineality)
    x += rng.normal() * (ray_scale / 2.0) * l;
  return x;
}

}  // namespace pvi
