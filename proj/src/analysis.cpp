#include "pvi/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pvi/errors.hpp"
#include "pvi/kernels.hpp"
#include "pvi/rng.hpp"
#include "sphere_search.hpp"

namespace pvi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Leading term that tolerates the zero map (whose formal leading term is the
// zero map again).
PolynomialMap leading_or_zero(const PolynomialMap& P) {
  if (P.is_zero()) return PolynomialMap::zero(P.n(), 0);
  return P.leading_term();
}

bool in_dual_of(const GeneratorRep& cone_gens, const VectorXd& q, double tol) {
  for (const VectorXd& r : cone_gens.rays) {
    if (q.dot(r) < -tol) return false;
  }
  for (const VectorXd& l : cone_gens.lineality) {
    if (std::abs(q.dot(l)) > tol) return false;
  }
  return true;
}

}  // namespace

R0Report is_r0_pair(const PolyhedralSet& K, const PolynomialMap& P,
                    const ConeSearchBudget& budget) {
  if (P.n() != K.dim()) {
    throw DimensionError("map and set dimensions disagree");
  }
  R0Report rep;
  if (!P.is_zero() && P.degree() < P.container_degree()) {
    rep.notes.push_back(
        "effective degree is below the container degree; the recession "
        "analysis uses the effective leading term");
  }
  const PolyhedralCone cone = recession_cone(K);
  const PolynomialMap H = leading_or_zero(P);
  ConeCpResult cp = solve_cone_cp(cone, H, budget);
  rep.status = cp.status;
  rep.best_merit = cp.best_merit;
  for (std::string& s : cp.notes) rep.notes.push_back(std::move(s));

  // Re-verify claimed witnesses directly against the cone before reporting.
  const PolyhedralSet cone_set = cone.as_set();
  const GeneratorRep cone_gens = generators(cone_set);
  const double wtol = 1e-8;
  for (const VectorXd& w : cp.witnesses) {
    if (std::abs(w.norm() - 1.0) > 1e-6) continue;
    if (!contains(cone_set, w, wtol)) continue;
    const VectorXd hw = H.eval(w);
    if (!in_dual_of(cone_gens, hw, wtol)) continue;
    if (std::abs(hw.dot(w)) > wtol) continue;
    rep.witnesses.push_back(w);
  }
  if (cp.status == ConeCpStatus::nontrivial && rep.witnesses.empty()) {
    rep.status = ConeCpStatus::inconclusive;
    rep.notes.push_back(
        "recession search reported nonzero solutions but none passed "
        "re-verification");
  }
  rep.r0 = rep.status == ConeCpStatus::trivial;
  return rep;
}

CopositivityReport copositivity_check(const PolyhedralSet& K,
                                      const PolynomialMap& P,
                                      const ConeSearchBudget& budget) {
  if (P.n() != K.dim()) {
    throw DimensionError("map and set dimensions disagree");
  }
  CopositivityReport rep;
  auto value = [&](const VectorXd& x) { return P.eval(x).dot(x); };
  auto gradient = [&](const VectorXd& x) {
    return VectorXd(P.eval(x) + P.jacobian(x).transpose() * x);
  };
  auto batch = [&](const MatrixXd& pts, VectorXd& vals) {
    const MatrixXd pv = kernels::eval_points(P, pts);
    for (int i = 0; i < pts.cols(); ++i) {
      vals(i) = pv.col(i).dot(pts.col(i));
    }
  };
  auto keep = [&](const VectorXd& x) { return contains(K, x, 1e-9); };

  const std::vector<PseudoFace> faces = pseudo_faces(K, budget.face_cap);
  double best = kInf;
  VectorXd best_x;
  for (int fi = 0; fi < static_cast<int>(faces.size()); ++fi) {
    const auto slice = detail::face_sphere_slice(K, faces[fi].alpha);
    if (!slice) continue;
    detail::SphereSearchProblem sp;
    sp.value = value;
    sp.gradient = gradient;
    sp.batch_value = batch;
    sp.keep = keep;
    detail::SphereSearchBudget sb;
    sb.pool = budget.pool;
    sb.starts = budget.starts;
    sb.iters = budget.iters;
    sb.seed = derive_seed(budget.seed, static_cast<std::uint64_t>(fi));
    detail::SphereSearchResult sr = detail::sphere_multistart(*slice, sp, sb);
    // observed_min also covers feasible pool seeds whose descent drifted
    // infeasible, so it can undercut the recorded minimizers; argmin is the
    // best converged minimizer seen so far.
    if (!sr.minima.empty() &&
        (best_x.size() == 0 || sr.minima.front().value <= best)) {
      best_x = sr.minima.front().x;
    }
    best = std::min(best, sr.observed_min);
  }

  if (!std::isfinite(best)) {
    rep.verdict = CopositivityReport::Verdict::copositive;
    rep.min_value = 0.0;
    rep.notes.push_back(
        "the set does not meet the unit sphere; copositivity holds vacuously");
    return rep;
  }
  rep.min_value = best;
  rep.argmin = best_x;
  if (best < -CopositivityReport::violation_tol) {
    rep.verdict = CopositivityReport::Verdict::not_copositive;
  } else if (best >= -CopositivityReport::certify_tol) {
    rep.verdict = CopositivityReport::Verdict::copositive;
  } else {
    rep.verdict = CopositivityReport::Verdict::inconclusive;
    rep.notes.push_back(
        "observed minimum sits between the violation and certification "
        "tolerances");
  }
  return rep;
}

MonotonicityReport monotonicity_check(const PolyhedralSet& K,
                                      const PolynomialMap& P, int trials,
                                      std::uint64_t seed) {
  if (P.n() != K.dim()) {
    throw DimensionError("map and set dimensions disagree");
  }
  MonotonicityReport rep;
  if (trials < 1) throw InputError("monotonicity_check needs trials >= 1");
  if (!is_nonempty(K)) {
    rep.verdict = MonotonicityReport::Verdict::inconclusive;
    rep.notes.push_back("the set is empty; monotonicity is vacuous");
    return rep;
  }
  const GeneratorRep gens = generators(K);
  Rng rng(derive_seed(seed, 0xa11a));

  double min_pair = kInf;
  double min_eig = kInf;
  VectorXd wx, wy;
  VectorXd eig_point;
  for (int t = 0; t < trials; ++t) {
    const VectorXd x = sample_point(gens, rng);
    const VectorXd y = sample_point(gens, rng);
    const double d2 = (x - y).squaredNorm();
    if (d2 > 1e-16) {
      const double v = (P.eval(x) - P.eval(y)).dot(x - y) / d2;
      if (v < min_pair) {
        min_pair = v;
        wx = x;
        wy = y;
      }
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(
        0.5 * (P.jacobian(x) + P.jacobian(x).transpose()));
    const double e = es.eigenvalues().minCoeff();
    if (e < min_eig) {
      min_eig = e;
      eig_point = x;
    }
  }
  rep.min_pair = min_pair;
  rep.min_eig = min_eig;

  if (min_pair < -1e-10 || min_eig < -1e-8) {
    rep.verdict = MonotonicityReport::Verdict::not_monotone;
    if (min_pair < -1e-10) {
      rep.witness_x = wx;
      rep.witness_y = wy;
    } else {
      rep.witness_x = eig_point;
      rep.notes.push_back(
          "violation detected through the symmetrized jacobian spectrum");
    }
  } else if (min_pair > 1e-12 && min_eig > 1e-8) {
    // Strictness needs the sampled jacobians to agree: a singular symmetric
    // part anywhere sampled demotes the verdict to plain monotone.
    rep.verdict = MonotonicityReport::Verdict::strictly_monotone;
    rep.notes.push_back("sampled evidence only; no global proof is attempted");
  } else {
    rep.verdict = MonotonicityReport::Verdict::monotone;
    if (min_pair > 1e-12) {
      rep.notes.push_back(
          "pair products were all positive but a sampled symmetrized "
          "jacobian is near singular; reporting plain monotonicity");
    }
    rep.notes.push_back("sampled evidence only; no global proof is attempted");
  }
  return rep;
}

ExistenceReport existence_certificate(const VIProblem& prob,
                                      const ConeSearchBudget& budget) {
  ExistenceReport rep;
  const int n = prob.K.dim();

  ExistenceReport::Premise zero_in;
  zero_in.name = "zero_in_set";
  zero_in.holds = contains(prob.K, VectorXd::Zero(n), 1e-12);
  zero_in.detail = zero_in.holds ? "0 satisfies every constraint"
                                 : "0 violates a constraint of K";
  rep.premises.push_back(zero_in);

  const PolyhedralCone cone = recession_cone(prob.K);
  const PolynomialMap H = leading_or_zero(prob.P);

  CopositivityReport cop = copositivity_check(cone.as_set(), H, budget);
  ExistenceReport::Premise copos;
  copos.name = "leading_term_copositive_on_recession_cone";
  copos.holds = cop.verdict == CopositivityReport::Verdict::copositive;
  {
    std::ostringstream os;
    os << "observed minimum of <H(x), x> on the recession sphere: "
       << cop.min_value;
    copos.detail = os.str();
  }
  rep.premises.push_back(copos);
  if (copos.holds) {
    rep.caveats.push_back(
        "copositivity premise rests on a bounded numeric search");
  }
  if (cop.verdict == CopositivityReport::Verdict::inconclusive) {
    rep.undetermined = true;
  }

  R0Report r0 = is_r0_pair(prob.K, prob.P, budget);
  ExistenceReport::Premise dual_int;
  dual_int.name = "p_strictly_positive_on_recession_solutions";
  if (r0.r0) {
    dual_int.holds = true;
    dual_int.detail =
        "recession problem admits only the zero solution, so the premise is "
        "vacuous";
  } else if (r0.status == ConeCpStatus::nontrivial) {
    bool all_pos = true;
    double worst = kInf;
    for (const VectorXd& w : r0.witnesses) {
      const double v = prob.p.dot(w);
      worst = std::min(worst, v);
      if (v <= 1e-9) all_pos = false;
    }
    dual_int.holds = all_pos && !r0.witnesses.empty();
    std::ostringstream os;
    os << "tested against " << r0.witnesses.size()
       << " sampled recession solutions; smallest inner product " << worst;
    dual_int.detail = os.str();
    rep.caveats.push_back(
        "dual-interior premise was tested against sampled recession "
        "solutions only, not the full recession solution cone");
  } else {
    dual_int.holds = false;
    dual_int.detail = "recession search was inconclusive";
    rep.undetermined = true;
  }
  rep.premises.push_back(dual_int);

  rep.certified = true;
  for (const auto& p : rep.premises) rep.certified = rep.certified && p.holds;
  if (rep.certified) rep.undetermined = false;
  if (rep.certified) {
    rep.caveats.push_back(
        "certificate asserts a nonempty bounded solution set for this p");
  }
  return rep;
}

GusReport gus_probe(const PolyhedralSet& K, const PolynomialMap& P, int trials,
                    const SolveConfig& cfg) {
  if (trials < 1) throw InputError("gus_probe needs trials >= 1");
  GusReport rep;
  rep.trials = trials;
  Rng rng(derive_seed(cfg.seed, 0x6505));
  const double scale = std::max(1.0, P.frobenius_norm());
  for (int t = 0; t < trials; ++t) {
    const VectorXd p = scale * rng.normal_vec(K.dim());
    SolutionSet sol = solve(VIProblem(K, P, p), cfg);
    const bool unique = sol.status == SolveStatus::complete &&
                        sol.points.size() == 1 && sol.components.empty();
    if (!unique) {
      rep.failures.push_back(p);
      if (sol.status != SolveStatus::complete) {
        rep.notes.push_back("probe " + std::to_string(t) +
                            " ended with status " +
                            std::string(to_string(sol.status)));
      }
    }
  }
  rep.evidence = rep.failures.empty();
  if (rep.evidence) {
    rep.notes.push_back(
        "every sampled p produced exactly one solution; evidence only");
  }
  return rep;
}

}  // namespace pvi
