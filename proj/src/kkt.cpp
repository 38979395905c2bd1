#include "pvi/kkt.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <utility>

#include "pvi/errors.hpp"
#include "pvi/kernels.hpp"
#include "pvi/rng.hpp"
#include "sphere_search.hpp"

namespace pvi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Newton keeps polishing past the residual tolerance while the steps keep
// making progress.  At a degenerate root the residual reaches the tolerance
// long before the iterate reaches the solution (for a triple root the
// residual is the cube of the distance), and each further step only
// contracts the distance by a constant factor, so the polish phase gets its
// own budget and stops on the step floor or a rejected step rather than on
// residual progress.  Simple roots exit after one or two polish steps.
constexpr int kPolishIters = 80;

bool lex_less_vec(const VectorXd& a, const VectorXd& b) {
  for (int i = 0; i < a.size() && i < b.size(); ++i) {
    if (a(i) < b(i)) return true;
    if (b(i) < a(i)) return false;
  }
  return a.size() < b.size();
}

bool alpha_less(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

std::string face_str(const std::vector<int>& alpha) {
  std::ostringstream os;
  os << '{';
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (i) os << ',';
    os << alpha[i];
  }
  os << '}';
  return os.str();
}

void canonicalize_sign(VectorXd& v) {
  for (int i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-8) {
      if (v(i) < 0) v = -v;
      return;
    }
  }
}

struct NewtonOutcome {
  VectorXd z;
  double resid = kInf;
  bool converged = false;
};

// Column-equilibrated least-squares step.  Near a degenerate root a
// curvature column of the Jacobian shrinks below the decomposition's rank
// threshold and the plain minimum-norm step silently drops that direction,
// freezing the iterate.  Rescaling every column to unit norm keeps a tiny
// but informative column in play.  A column that is tiny because it is
// genuinely null produces a wild step here; the caller's line search is the
// arbiter, so that case simply terminates as before.
VectorXd equilibrated_step(const MatrixXd& J, const VectorXd& r) {
  VectorXd scale(J.cols());
  for (int j = 0; j < J.cols(); ++j) {
    const double cn = J.col(j).norm();
    scale(j) = cn > 0.0 ? 1.0 / cn : 0.0;
  }
  const MatrixXd Js = J * scale.asDiagonal();
  const VectorXd y = Js.completeOrthogonalDecomposition().solve(-r);
  return scale.asDiagonal() * y;
}

NewtonOutcome newton_run(const KKTSystem& sys, VectorXd z, double tol,
                         int max_iters) {
  VectorXd r = sys.residual(z);
  if (!r.allFinite()) return {std::move(z), kInf, false};
  double rn = r.lpNorm<Eigen::Infinity>();
  int polish_left = kPolishIters;
  for (int it = 0; rn > 0.0; ++it) {
    const bool polishing = rn <= tol;
    if (polishing ? polish_left-- <= 0 : it >= max_iters) break;
    MatrixXd J = sys.jacobian(z);
    // Minimum-norm least-squares step; the KKT Jacobian is singular on
    // nonisolated solution sets and COD handles that gracefully.
    VectorXd s = J.completeOrthogonalDecomposition().solve(-r);
    if (!s.allFinite()) break;
    double sn = s.norm();
    const double step_floor = 1e-14 * (1.0 + z.norm());
    if (sn <= step_floor) {
      if (!polishing) break;
      s = equilibrated_step(J, r);
      sn = s.norm();
      if (!s.allFinite() || sn <= step_floor || sn > 1e6) break;
    }
    const double r2 = r.norm();
    double t = 1.0;
    bool moved = false;
    while (t > 1e-12) {
      VectorXd zt = z + t * s;
      VectorXd rt = sys.residual(zt);
      // Past the tolerance a strict decrease test would reject steps whose
      // improvement is invisible at machine precision, so the polish phase
      // only refuses clear increases.
      const double bound =
          polishing ? r2 * (1.0 + 1e-9) : (1.0 - 1e-4 * t) * r2;
      if (rt.allFinite() && rt.norm() <= bound) {
        z = std::move(zt);
        r = std::move(rt);
        rn = r.lpNorm<Eigen::Infinity>();
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) break;
  }
  return {std::move(z), rn, rn <= tol};
}

}  // namespace

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::complete:
      return "complete";
    case SolveStatus::capped:
      return "capped";
    case SolveStatus::inconclusive:
      return "inconclusive";
  }
  return "unknown";
}

const char* to_string(ConeCpStatus s) {
  switch (s) {
    case ConeCpStatus::trivial:
      return "trivial";
    case ConeCpStatus::nontrivial:
      return "nontrivial";
    case ConeCpStatus::inconclusive:
      return "inconclusive";
  }
  return "unknown";
}

VIProblem::VIProblem(PolyhedralSet K_in, PolynomialMap P_in, VectorXd p_in)
    : K(std::move(K_in)), P(std::move(P_in)), p(std::move(p_in)) {
  if (P.n() != K.dim() || P.coeffs().rows() != K.dim() ||
      p.size() != K.dim()) {
    throw DimensionError(
        "problem dimensions disagree: K has dimension " +
        std::to_string(K.dim()) + ", P maps " + std::to_string(P.n()) +
        " -> " + std::to_string(P.coeffs().rows()) + ", p has " +
        std::to_string(p.size()) + " entries");
  }
}

void SolveConfig::validate() const {
  if (!(newton_tol > 0.0) || !(verify_tol > 0.0) || !(cluster_radius > 0.0)) {
    throw InputError("solver tolerances must be positive");
  }
  if (max_iters < 1 || multistart < 1) {
    throw InputError("iteration and multistart counts must be at least 1");
  }
  if (!(seed_box > 0.0)) throw InputError("seed_box must be positive");
  if (threads < 1) throw InputError("threads must be at least 1");
  if (face_cap < 1) throw InputError("face_cap must be at least 1");
  if (max_points < 1) throw InputError("max_points must be at least 1");
  if (!(component_step > 0.0) || component_max_samples < 1) {
    throw InputError("component sampling parameters must be positive");
  }
}

KKTSystem::KKTSystem(PolynomialMap F, MatrixXd C_face, VectorXd b_face,
                     MatrixXd E, VectorXd d, std::vector<int> alpha)
    : F_(std::move(F)),
      Ca_(std::move(C_face)),
      ba_(std::move(b_face)),
      E_(std::move(E)),
      d_(std::move(d)),
      alpha_(std::move(alpha)) {
  n_ = F_.n();
  na_ = static_cast<int>(Ca_.rows());
  t_ = static_cast<int>(E_.rows());
  if (F_.coeffs().rows() != n_ || Ca_.cols() != n_ || E_.cols() != n_ ||
      ba_.size() != na_ || d_.size() != t_ ||
      static_cast<int>(alpha_.size()) != na_) {
    throw DimensionError("KKT system blocks have inconsistent shapes");
  }
}

VectorXd KKTSystem::residual(const VectorXd& z) const {
  VectorXd x = z.head(n_);
  VectorXd r(dim());
  r.head(n_) = F_.eval(x);
  if (na_ > 0) {
    r.head(n_) += Ca_.transpose() * z.segment(n_, na_);
    r.segment(n_, na_) = Ca_ * x - ba_;
  }
  if (t_ > 0) {
    r.head(n_) += E_.transpose() * z.tail(t_);
    r.tail(t_) = E_ * x - d_;
  }
  return r;
}

MatrixXd KKTSystem::jacobian(const VectorXd& z) const {
  MatrixXd J = MatrixXd::Zero(dim(), dim());
  J.topLeftCorner(n_, n_) = F_.jacobian(z.head(n_));
  if (na_ > 0) {
    J.block(0, n_, n_, na_) = Ca_.transpose();
    J.block(n_, 0, na_, n_) = Ca_;
  }
  if (t_ > 0) {
    J.block(0, n_ + na_, n_, t_) = E_.transpose();
    J.block(n_ + na_, 0, t_, n_) = E_;
  }
  return J;
}

KKTSystem assemble_kkt(const VIProblem& prob, const PseudoFace& face) {
  const PolyhedralSet& K = prob.K;
  const int n = K.dim();
  const int na = static_cast<int>(face.alpha.size());
  MatrixXd Ca(na, n);
  VectorXd ba(na);
  for (int i = 0; i < na; ++i) {
    const int row = face.alpha[i];
    if (row < 0 || row >= K.num_ineq()) {
      throw InputError("face references inequality row " + std::to_string(row));
    }
    Ca.row(i) = K.C().row(row);
    ba(i) = K.b()(row);
  }
  MatrixXd A(na + K.num_eq(), n);
  if (na > 0) A.topRows(na) = Ca;
  if (K.num_eq() > 0) A.bottomRows(K.num_eq()) = K.E();
  if (A.rows() > 0) {
    Eigen::JacobiSVD<MatrixXd> svd(A);
    const double smax = svd.singularValues()(0);
    int rank = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i) {
      if (svd.singularValues()(i) > std::max(smax, 1.0) * 1e-9) ++rank;
    }
    if (rank < A.rows()) {
      throw LicqError("active constraint gradients are dependent on face " +
                      face_str(face.alpha) +
                      "; the KKT system there is ill posed");
    }
  }
  return KKTSystem(prob.P.shifted(prob.p), std::move(Ca), std::move(ba),
                   K.E(), K.dvec(), face.alpha);
}

std::vector<KktCandidate> solve_face(const KKTSystem& sys,
                                     const SolveConfig& cfg,
                                     std::uint64_t face_seed) {
  std::vector<KktCandidate> out;
  const int n = sys.n();
  for (int start = 0; start < cfg.multistart; ++start) {
    Rng rng(derive_seed(face_seed, static_cast<std::uint64_t>(start)));
    VectorXd z = VectorXd::Zero(sys.dim());
    z.head(n) = rng.uniform_vec(n, -cfg.seed_box, cfg.seed_box);
    // Multipliers start at a fixed interior guess; randomizing them adds
    // nothing because the system is linear in (lambda, mu).
    z.segment(n, sys.num_active()).setOnes();
    NewtonOutcome res = newton_run(sys, std::move(z), cfg.newton_tol,
                                   cfg.max_iters);
    if (!res.converged || !res.z.allFinite()) continue;
    KktCandidate c;
    c.x = sys.x_of(res.z);
    c.lambda = sys.lambda_of(res.z);
    c.mu = sys.mu_of(res.z);
    c.residual = res.resid;
    if (c.lambda.size() > 0 && (c.lambda.array() < -cfg.verify_tol).any()) {
      continue;
    }
    out.push_back(std::move(c));
  }
  return out;
}

namespace {

bool verify_with(const VIProblem& prob, const GeneratorRep& gens,
                 const VectorXd& x, double tol) {
  if (!contains(prob.K, x, tol)) return false;
  const VectorXd c = prob.P.eval(x) + prob.p;
  const LpResult lp = lp_minimize(c, gens, tol);
  if (!lp.bounded) return false;
  return lp.value >= c.dot(x) - tol;
}

}  // namespace

bool verify_solution(const VIProblem& prob, const VectorXd& x, double tol) {
  if (x.size() != prob.K.dim()) return false;
  return verify_with(prob, generators(prob.K), x, tol);
}

NonisolatedFlag detect_nonisolated(const KKTSystem& sys,
                                   const KktCandidate& cand,
                                   int clusters_on_face,
                                   const SolveConfig& cfg) {
  NonisolatedFlag flag;
  VectorXd z(sys.dim());
  z.head(sys.n()) = cand.x;
  z.segment(sys.n(), sys.num_active()) = cand.lambda;
  z.tail(sys.num_eq()) = cand.mu;
  Eigen::JacobiSVD<MatrixXd> svd(sys.jacobian(z), Eigen::ComputeFullV);
  const VectorXd& sig = svd.singularValues();
  const double smax = sig(0);
  const double smin = sig(sig.size() - 1);
  flag.sigma_ratio = smax > 0.0 ? smin / smax : 0.0;
  const bool rank_deficient = flag.sigma_ratio < 1e-7;
  const bool swarm = clusters_on_face > std::max(2, cfg.multistart / 4);
  flag.flagged = rank_deficient || swarm;
  if (flag.flagged) {
    VectorXd tx = svd.matrixV().col(sig.size() - 1).head(sys.n());
    if (tx.norm() > 1e-6) {
      tx.normalize();
      canonicalize_sign(tx);
      flag.tangent = std::move(tx);
    }
  }
  return flag;
}

namespace {

void parallel_for(int count, int threads,
                  const std::function<void(int)>& body) {
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex err_mutex;
  std::exception_ptr err;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      while (true) {
        const int i = next.fetch_add(1);
        if (i >= count) break;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!err) err = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace

SolutionSet solve(const VIProblem& prob, const SolveConfig& cfg) {
  cfg.validate();
  SolutionSet out;
  const int n = prob.K.dim();

  const LicqVerdict licq = licq_check(prob.K, cfg.face_cap);
  if (!licq.holds) {
    throw LicqError("active constraint gradients are dependent on face " +
                    face_str(licq.failing_alpha) +
                    "; refusing to enumerate KKT systems");
  }

  if (!prob.P.is_zero() && prob.P.degree() < prob.P.container_degree()) {
    out.notes.push_back(
        "effective degree " + std::to_string(prob.P.degree()) +
        " is below the container degree " +
        std::to_string(prob.P.container_degree()) +
        "; grading-sensitive conclusions refer to the container degree");
  }

  const std::vector<PseudoFace> faces = pseudo_faces(prob.K, cfg.face_cap);
  const GeneratorRep gens = generators(prob.K);
  const int nfaces = static_cast<int>(faces.size());

  std::vector<std::unique_ptr<KKTSystem>> face_sys(faces.size());
  std::vector<std::vector<KktCandidate>> face_reps(faces.size());
  std::vector<std::vector<NonisolatedFlag>> face_flags(faces.size());

  auto strict_rows_ok = [&](const std::vector<int>& alpha, const VectorXd& x) {
    for (int i = 0; i < prob.K.num_ineq(); ++i) {
      if (std::find(alpha.begin(), alpha.end(), i) != alpha.end()) continue;
      if (prob.K.C().row(i).dot(x) - prob.K.b()(i) > cfg.verify_tol) {
        return false;
      }
    }
    return true;
  };

  parallel_for(nfaces, cfg.threads, [&](int fi) {
    const PseudoFace& face = faces[fi];
    face_sys[fi] = std::make_unique<KKTSystem>(assemble_kkt(prob, face));
    const KKTSystem& sys = *face_sys[fi];
    std::vector<KktCandidate> cands = solve_face(
        sys, cfg, derive_seed(cfg.seed, static_cast<std::uint64_t>(fi)));

    std::vector<KktCandidate> reps;
    for (KktCandidate& c : cands) {
      if (!strict_rows_ok(face.alpha, c.x)) continue;
      if (!verify_with(prob, gens, c.x, cfg.verify_tol)) continue;
      bool merged = false;
      for (KktCandidate& r : reps) {
        if ((r.x - c.x).norm() <= cfg.cluster_radius) {
          if (c.residual < r.residual ||
              (c.residual == r.residual && lex_less_vec(c.x, r.x))) {
            r = c;
          }
          merged = true;
          break;
        }
      }
      if (!merged) reps.push_back(std::move(c));
    }

    const int clusters = static_cast<int>(reps.size());
    std::vector<NonisolatedFlag> flags;
    flags.reserve(reps.size());
    for (const KktCandidate& r : reps) {
      flags.push_back(detect_nonisolated(sys, r, clusters, cfg));
    }
    face_reps[fi] = std::move(reps);
    face_flags[fi] = std::move(flags);
  });

  // Merge phase, sequential in face order so the output is deterministic.
  std::vector<SolutionPoint> points;
  auto add_point = [&](SolutionPoint np) {
    for (SolutionPoint& ex : points) {
      if ((ex.x - np.x).norm() <= cfg.cluster_radius) {
        // Duplicates across faces: prefer the tighter face label, then the
        // smaller residual.
        const bool take =
            np.alpha.size() > ex.alpha.size() ||
            (np.alpha.size() == ex.alpha.size() && np.residual < ex.residual);
        if (take) ex = std::move(np);
        return;
      }
    }
    points.push_back(std::move(np));
  };

  auto note_once = [&](std::string s) {
    if (std::find(out.notes.begin(), out.notes.end(), s) == out.notes.end()) {
      out.notes.push_back(std::move(s));
    }
  };

  for (int fi = 0; fi < nfaces; ++fi) {
    const PseudoFace& face = faces[fi];
    const KKTSystem& sys = *face_sys[fi];
    const std::vector<KktCandidate>& reps = face_reps[fi];
    const std::vector<NonisolatedFlag>& flags = face_flags[fi];

    struct Group {
      VectorXd tangent;
      VectorXd offset;
      std::vector<int> members;
    };
    std::vector<Group> groups;
    std::vector<int> plain;

    for (int i = 0; i < static_cast<int>(reps.size()); ++i) {
      if (!flags[i].flagged) {
        plain.push_back(i);
        continue;
      }
      if (flags[i].tangent.size() == 0) {
        // Rank deficiency without a primal null direction: the degeneracy
        // lives in the multipliers, so the point itself stays listed.
        plain.push_back(i);
        note_once("kkt jacobian is rank deficient at a candidate on face " +
                  face_str(face.alpha) +
                  " without a primal null direction; kept as a point");
        continue;
      }
      const VectorXd& t = flags[i].tangent;
      const VectorXd& x = reps[i].x;
      const VectorXd off = x - t.dot(x) * t;
      bool placed = false;
      for (Group& g : groups) {
        if (std::abs(t.dot(g.tangent)) > 1.0 - 1e-6 &&
            (off - g.offset).norm() <= 1e-4 * (1.0 + x.norm())) {
          g.members.push_back(i);
          placed = true;
          break;
        }
      }
      if (!placed) groups.push_back(Group{t, off, {i}});
    }

    for (const Group& g : groups) {
      int seed_idx = g.members.front();
      for (int m : g.members) {
        if (lex_less_vec(reps[m].x, reps[seed_idx].x)) seed_idx = m;
      }
      std::vector<VectorXd> samples;
      for (int m : g.members) samples.push_back(reps[m].x);
      const std::size_t base_count = samples.size();

      bool cap_reached = false;
      for (const double dir : {1.0, -1.0}) {
        VectorXd t = g.tangent * dir;
        VectorXd x_prev = reps[seed_idx].x;
        VectorXd lam = reps[seed_idx].lambda;
        VectorXd mu = reps[seed_idx].mu;
        while (true) {
          if (static_cast<int>(samples.size()) >= cfg.component_max_samples) {
            cap_reached = true;
            break;
          }
          VectorXd z = VectorXd::Zero(sys.dim());
          z.head(n) = x_prev + cfg.component_step * t;
          z.segment(n, sys.num_active()) = lam;
          z.tail(sys.num_eq()) = mu;
          if (z.head(n).lpNorm<Eigen::Infinity>() > cfg.seed_box) break;
          NewtonOutcome res = newton_run(sys, std::move(z), cfg.newton_tol, 30);
          if (!res.converged || !res.z.allFinite()) break;
          const VectorXd xn = sys.x_of(res.z);
          const double moved = (xn - x_prev).norm();
          // Collapsing back onto the previous sample or jumping far off the
          // step length both mean the march left the component.
          if (moved < 0.25 * cfg.component_step) break;
          if (moved > 4.0 * cfg.component_step) break;
          const VectorXd lam_n = sys.lambda_of(res.z);
          if (lam_n.size() > 0 &&
              (lam_n.array() < -cfg.verify_tol).any()) {
            break;
          }
          if (!strict_rows_ok(face.alpha, xn)) break;
          if (!verify_with(prob, gens, xn, cfg.verify_tol)) break;
          samples.push_back(xn);
          // Refresh the tangent so the march can follow curvature.
          Eigen::JacobiSVD<MatrixXd> svd(sys.jacobian(res.z),
                                         Eigen::ComputeFullV);
          VectorXd tn = svd.matrixV()
                            .col(svd.singularValues().size() - 1)
                            .head(n);
          if (tn.norm() > 1e-6) {
            tn.normalize();
            if (tn.dot(t) < 0.0) tn = -tn;
            t = tn;
          }
          lam = lam_n;
          mu = sys.mu_of(res.z);
          x_prev = xn;
        }
      }

      if (samples.size() == base_count) {
        // Nothing extended in either direction: treat the flagged candidates
        // as ordinary points rather than inventing a curve.
        for (int m : g.members) {
          add_point(SolutionPoint{reps[m].x, face.alpha, reps[m].residual,
                                  reps[m].lambda, reps[m].mu});
        }
        note_once("flagged candidates on face " + face_str(face.alpha) +
                  " did not extend to a curve; reporting them as points");
        continue;
      }

      SolutionComponent comp;
      comp.alpha = face.alpha;
      comp.tangent = g.tangent;
      canonicalize_sign(comp.tangent);
      std::sort(samples.begin(), samples.end(),
                [&](const VectorXd& a, const VectorXd& b) {
                  const double pa = comp.tangent.dot(a);
                  const double pb = comp.tangent.dot(b);
                  if (pa != pb) return pa < pb;
                  return lex_less_vec(a, b);
                });
      for (const VectorXd& s : samples) {
        if (!comp.samples.empty() &&
            (comp.samples.back() - s).norm() < 0.25 * cfg.component_step) {
          continue;
        }
        comp.samples.push_back(s);
      }
      if (cap_reached) {
        note_once("component sample cap reached on face " +
                  face_str(face.alpha));
      }
      out.components.push_back(std::move(comp));
    }

    for (int i : plain) {
      add_point(SolutionPoint{reps[i].x, face.alpha, reps[i].residual,
                              reps[i].lambda, reps[i].mu});
    }
  }

  std::sort(points.begin(), points.end(),
            [](const SolutionPoint& a, const SolutionPoint& b) {
              if (a.alpha != b.alpha) return alpha_less(a.alpha, b.alpha);
              return lex_less_vec(a.x, b.x);
            });
  bool capped = false;
  if (static_cast<int>(points.size()) > cfg.max_points) {
    points.resize(static_cast<std::size_t>(cfg.max_points));
    capped = true;
    out.notes.push_back("point list truncated at max_points");
  }
  out.points = std::move(points);

  std::sort(out.components.begin(), out.components.end(),
            [](const SolutionComponent& a, const SolutionComponent& b) {
              if (a.alpha != b.alpha) return alpha_less(a.alpha, b.alpha);
              return lex_less_vec(a.samples.front(), b.samples.front());
            });

  if (!out.components.empty()) {
    out.status = SolveStatus::inconclusive;
  } else if (capped) {
    out.status = SolveStatus::capped;
  } else {
    out.status = SolveStatus::complete;
  }
  return out;
}

namespace {

VectorXd rescale_to(const VectorXd& u, double rho) {
  const double nu = u.norm();
  if (nu <= 0.0) return u;
  return u * (rho / nu);
}

// Gauss-Newton polish of the complementarity residual over one sphere slice,
// stepping in the tangent space and retracting.  Returns the final merit.
double gn_polish(const detail::SphereSlice& slice, const PolynomialMap& H,
                 const std::vector<VectorXd>& pen,
                 const std::function<double(const VectorXd&)>& merit,
                 VectorXd& u, int iters) {
  const int k = slice.dim();
  double m = merit(slice.lift(u));
  if (k < 2) return m;
  const int G = static_cast<int>(pen.size());
  for (int it = 0; it < iters; ++it) {
    const VectorXd x = slice.lift(u);
    const VectorXd hx = H.eval(x);
    const MatrixXd Jt = H.jacobian(x).transpose();
    VectorXd r(1 + G);
    MatrixXd Jr = MatrixXd::Zero(1 + G, k);
    r(0) = hx.dot(x);
    Jr.row(0) = (Jt * x + hx).transpose() * slice.V;
    for (int g = 0; g < G; ++g) {
      const double a = -hx.dot(pen[g]);
      if (a > 0.0) {
        r(1 + g) = a;
        Jr.row(1 + g) = (-(Jt * pen[g])).transpose() * slice.V;
      } else {
        r(1 + g) = 0.0;
      }
    }
    if (r.squaredNorm() < 1e-32) break;
    MatrixXd uh(k, 1);
    uh.col(0) = u / slice.rho;
    const MatrixXd Q =
        Eigen::HouseholderQR<MatrixXd>(uh).householderQ() * MatrixXd::Identity(k, k);
    const MatrixXd T = Q.rightCols(k - 1);
    const VectorXd w =
        (Jr * T).completeOrthogonalDecomposition().solve(-r);
    if (!w.allFinite() || w.norm() < 1e-16) break;
    double t = 1.0;
    bool moved = false;
    while (t > 1e-14) {
      const VectorXd ut = rescale_to(u + t * (T * w), slice.rho);
      const double mt = merit(slice.lift(ut));
      if (mt < m) {
        u = ut;
        m = mt;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) break;
  }
  return m;
}

}  // namespace

ConeCpResult solve_cone_cp(const PolyhedralCone& C, const PolynomialMap& H,
                           const ConeSearchBudget& budget) {
  ConeCpResult res;
  const PolyhedralSet S = C.as_set();
  const int n = S.dim();
  if (H.n() != n || H.coeffs().rows() != n) {
    throw DimensionError("cone and map dimensions disagree");
  }
  if (!H.is_homogeneous(H.degree())) {
    throw InputError("cone complementarity search expects a homogeneous map");
  }

  const GeneratorRep gens = generators(S);
  std::vector<VectorXd> pen;
  for (const VectorXd& r : gens.rays) pen.push_back(r);
  for (const VectorXd& l : gens.lineality) {
    pen.push_back(l);
    pen.push_back(-l);
  }
  if (pen.empty()) {
    res.status = ConeCpStatus::trivial;
    res.best_merit = kInf;
    res.notes.push_back("cone is the origin; only the zero solution exists");
    return res;
  }

  auto merit_from = [&](const VectorXd& x, const VectorXd& hx) {
    double m = hx.dot(x) * hx.dot(x);
    for (const VectorXd& g : pen) {
      const double a = std::max(0.0, -hx.dot(g));
      m += a * a;
    }
    return m;
  };
  auto merit = [&](const VectorXd& x) { return merit_from(x, H.eval(x)); };
  auto gradient = [&](const VectorXd& x) {
    const VectorXd hx = H.eval(x);
    const MatrixXd Jt = H.jacobian(x).transpose();
    VectorXd g = 2.0 * hx.dot(x) * (Jt * x + hx);
    for (const VectorXd& d : pen) {
      const double a = -hx.dot(d);
      if (a > 0.0) g -= 2.0 * a * (Jt * d);
    }
    return g;
  };
  auto batch = [&](const MatrixXd& pts, VectorXd& vals) {
    const MatrixXd hv = kernels::eval_points(H, pts);
    for (int i = 0; i < pts.cols(); ++i) {
      vals(i) = merit_from(pts.col(i), hv.col(i));
    }
  };
  auto keep = [&](const VectorXd& x) { return contains(S, x, 1e-9); };

  const std::vector<PseudoFace> faces = pseudo_faces(S, budget.face_cap);
  double best = kInf;
  bool all_cleared = true;
  std::vector<VectorXd> witnesses;

  for (int fi = 0; fi < static_cast<int>(faces.size()); ++fi) {
    const PseudoFace& face = faces[fi];
    const auto slice = detail::face_sphere_slice(S, face.alpha);
    if (!slice || slice->dim() == 0) continue;

    detail::SphereSearchProblem sp;
    sp.value = merit;
    sp.gradient = gradient;
    sp.batch_value = batch;
    sp.keep = keep;
    detail::SphereSearchBudget sb;
    sb.pool = budget.pool;
    sb.starts = budget.starts;
    sb.iters = budget.iters;
    sb.seed = derive_seed(budget.seed, static_cast<std::uint64_t>(fi));
    detail::SphereSearchResult sr = detail::sphere_multistart(*slice, sp, sb);

    double face_min = sr.observed_min;
    for (detail::SphereMin& cand : sr.minima) {
      double v = cand.value;
      VectorXd u = cand.u;
      if (slice->dim() >= 2) {
        const double pv = gn_polish(*slice, H, pen, merit, u,
                                    budget.polish_iters);
        const VectorXd px = slice->lift(u);
        if (keep(px)) {
          v = pv;
          cand.x = px;
        }
      }
      face_min = std::min(face_min, v);
      if (v < budget.nontrivial_merit) witnesses.push_back(cand.x);
    }

    if (!std::isfinite(face_min)) {
      // Nothing feasible was evaluated on this slice; probe the face's
      // interior sample so the trivial verdict never rests on silence.
      VectorXd probe = face.sample;
      if (probe.norm() <= 1e-12) probe = slice->lift(
          rescale_to(VectorXd::Unit(slice->dim(), 0), slice->rho));
      if (probe.norm() > 1e-12 && keep(probe / probe.norm())) {
        face_min = merit(probe / probe.norm());
      }
    }
    if (!std::isfinite(face_min)) {
      all_cleared = false;
      res.notes.push_back("no feasible point observed on the sphere slice of face " +
                          face_str(face.alpha));
      continue;
    }
    best = std::min(best, face_min);
    if (face_min <= budget.trivial_merit) all_cleared = false;
  }

  res.best_merit = best;
  if (best < budget.nontrivial_merit) {
    res.status = ConeCpStatus::nontrivial;
    std::sort(witnesses.begin(), witnesses.end(), lex_less_vec);
    for (const VectorXd& w : witnesses) {
      bool dup = false;
      for (const VectorXd& kept : res.witnesses) {
        if ((kept - w).norm() <= 1e-6) {
          dup = true;
          break;
        }
      }
      if (!dup) res.witnesses.push_back(w);
    }
  } else if (all_cleared && std::isfinite(best)) {
    res.status = ConeCpStatus::trivial;
  } else {
    res.status = ConeCpStatus::inconclusive;
    if (!std::isfinite(best)) {
      res.notes.push_back("no sphere slice produced a usable observation");
    }
  }
  return res;
}

}  // namespace pvi
