#include "pvi/stability.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "pvi/errors.hpp"
#include "pvi/rng.hpp"

namespace pvi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Shortest round-trip decimal form, for stable CSV output.
std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Direction family for perturbation probes. In the plane a golden-angle fan
// is used: deterministic, seed independent, and free of clustering, so the
// same directions recur at every radius. Higher dimensions fall back to
// seeded uniform directions.
std::vector<VectorXd> probe_directions(int n, int count, std::uint64_t seed) {
  std::vector<VectorXd> dirs;
  dirs.reserve(static_cast<std::size_t>(count));
  if (n == 2) {
    const double ga = M_PI * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < count; ++k) {
      const double th = ga * static_cast<double>(k);
      VectorXd u(2);
      u << std::cos(th), std::sin(th);
      dirs.push_back(std::move(u));
    }
  } else {
    Rng rng(seed);
    for (int k = 0; k < count; ++k) dirs.push_back(rng.unit_vec(n));
  }
  return dirs;
}

// A solution set that touches the multistart seed box cannot act as a
// bounded reference set.
bool escapes_seed_box(const SolutionSet& sol, const SolveConfig& cfg) {
  if (sol.status == SolveStatus::capped) return true;
  const double edge = cfg.seed_box - 2.0 * cfg.component_step;
  for (const SolutionComponent& comp : sol.components) {
    for (const VectorXd& s : comp.samples) {
      if (s.lpNorm<Eigen::Infinity>() >= edge) return true;
    }
  }
  return false;
}

double max_solution_norm(const SolutionSet& sol) {
  double m = 0.0;
  for (const SolutionPoint& pt : sol.points) m = std::max(m, pt.x.norm());
  for (const SolutionComponent& comp : sol.components) {
    for (const VectorXd& s : comp.samples) m = std::max(m, s.norm());
  }
  return m;
}

std::string classify_error(const Error& e) {
  if (dynamic_cast<const LicqError*>(&e)) return "licq";
  if (dynamic_cast<const CapError*>(&e)) return "cap";
  if (dynamic_cast<const InputError*>(&e)) return "input";
  return "error";
}

}  // namespace

void GridSpec::validate(int n) const {
  if (lo.size() != n || hi.size() != n ||
      static_cast<int>(counts.size()) != n) {
    throw DimensionError("grid axes do not match the parameter dimension");
  }
  long long total_cells = 1;
  for (int i = 0; i < n; ++i) {
    if (counts[i] < 1) throw InputError("grid counts must be at least 1");
    if (hi(i) < lo(i)) throw InputError("grid axis has hi < lo");
    total_cells *= counts[i];
    if (total_cells > 200000) {
      throw CapError("grid exceeds 200000 cells; refusing to sweep");
    }
  }
}

int GridSpec::total() const {
  long long t = 1;
  for (int c : counts) t *= c;
  return static_cast<int>(t);
}

SweepResult solution_map_sweep(const PolyhedralSet& K, const PolynomialMap& P,
                               const GridSpec& grid, const SolveConfig& cfg) {
  const int n = K.dim();
  grid.validate(n);
  SweepResult out;
  out.shape = grid.counts;
  out.cells.reserve(static_cast<std::size_t>(grid.total()));

  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  const int total = grid.total();
  for (int cell = 0; cell < total; ++cell) {
    SweepCell c;
    VectorXd p(n);
    for (int i = 0; i < n; ++i) {
      p(i) = grid.counts[i] == 1
                 ? grid.lo(i)
                 : grid.lo(i) + (grid.hi(i) - grid.lo(i)) *
                                    static_cast<double>(idx[i]) /
                                    static_cast<double>(grid.counts[i] - 1);
    }
    c.p = p;
    try {
      const SolutionSet sol = solve(VIProblem(K, P, p), cfg);
      c.status = sol.status;
      c.num_points = static_cast<int>(sol.points.size());
      c.num_components = static_cast<int>(sol.components.size());
      c.max_norm = max_solution_norm(sol);
      if (!sol.components.empty()) {
        c.label = "nonisolated";
      } else if (c.num_points == 0) {
        c.label = "empty";
      } else if (c.num_points == 1) {
        c.label = "singleton";
      } else {
        c.label = "finite";
      }
    } catch (const Error& e) {
      c.error = true;
      c.error_kind = classify_error(e);
      c.label = "error";
    }
    out.cells.push_back(std::move(c));
    // Advance the multi-index, last axis fastest.
    for (int i = n - 1; i >= 0; --i) {
      if (++idx[i] < grid.counts[i]) break;
      idx[i] = 0;
    }
  }
  return out;
}

std::string sweep_csv(const SweepResult& sweep) {
  std::ostringstream os;
  const int n = sweep.cells.empty()
                    ? static_cast<int>(sweep.shape.size())
                    : static_cast<int>(sweep.cells.front().p.size());
  for (int i = 0; i < n; ++i) os << "p" << i << ",";
  os << "status,label,points,components,max_norm,error_kind\n";
  for (const SweepCell& c : sweep.cells) {
    for (int i = 0; i < n; ++i) os << fmt_double(c.p(i)) << ",";
    os << (c.error ? "error" : to_string(c.status)) << "," << c.label << ","
       << c.num_points << "," << c.num_components << ","
       << fmt_double(c.max_norm) << "," << c.error_kind << "\n";
  }
  return os.str();
}

double hausdorff_excess(const std::vector<VectorXd>& A,
                        const std::vector<VectorXd>& B) {
  if (A.empty()) return 0.0;
  if (B.empty()) return kInf;
  double worst = 0.0;
  for (const VectorXd& a : A) {
    double best = kInf;
    for (const VectorXd& b : B) best = std::min(best, (a - b).norm());
    worst = std::max(worst, best);
  }
  return worst;
}

double hausdorff_excess(const SolutionSet& A, const SolutionSet& B) {
  if (!A.components.empty() || !B.components.empty()) {
    throw InputError(
        "hausdorff_excess compares point lists; sample the components "
        "explicitly instead");
  }
  std::vector<VectorXd> av, bv;
  for (const SolutionPoint& p : A.points) av.push_back(p.x);
  for (const SolutionPoint& p : B.points) bv.push_back(p.x);
  return hausdorff_excess(av, bv);
}

std::vector<VectorXd> solution_samples(const SolutionSet& sol) {
  std::vector<VectorXd> out;
  for (const SolutionPoint& p : sol.points) out.push_back(p.x);
  for (const SolutionComponent& comp : sol.components) {
    for (const VectorXd& s : comp.samples) out.push_back(s);
  }
  return out;
}

UscReport usc_probe(const PolyhedralSet& K, const PolynomialMap& P,
                    const VectorXd& anchor, const UscParams& params,
                    const SolveConfig& cfg) {
  if (params.epsilon <= 0.0 || params.dirs < 1 || params.radii.empty()) {
    throw InputError("usc probe needs positive epsilon, radii and directions");
  }
  UscReport rep;
  const SolutionSet base = solve(VIProblem(K, P, anchor), cfg);
  if (escapes_seed_box(base, cfg)) {
    rep.kind = UscReport::Kind::anchor_unbounded;
    rep.notes.push_back(
        "anchor solution set reaches the solver's seed box; semicontinuity "
        "against a truncated set would be meaningless");
    return rep;
  }
  const std::vector<VectorXd> ref = solution_samples(base);
  const std::vector<VectorXd> dirs =
      probe_directions(K.dim(), params.dirs, derive_seed(params.seed, 0x05c0));

  for (const double r : params.radii) {
    if (r <= 0.0) throw InputError("usc radii must be positive");
    for (const VectorXd& u : dirs) {
      SolutionSet pert;
      try {
        pert = solve(VIProblem(K, P, anchor + r * u), cfg);
      } catch (const Error& e) {
        rep.notes.push_back("perturbed solve failed (" +
                            std::string(classify_error(e)) + ") at radius " +
                            fmt_double(r));
        continue;
      }
      double worst = 0.0;
      VectorXd worst_point;
      for (const VectorXd& y : solution_samples(pert)) {
        double d = kInf;
        for (const VectorXd& a : ref) d = std::min(d, (y - a).norm());
        if (d > worst) {
          worst = d;
          worst_point = y;
        }
      }
      rep.worst_excess = std::max(rep.worst_excess, worst);
      if (worst > params.epsilon) {
        rep.violations.push_back(UscObservation{r, u, worst_point, worst});
      }
    }
  }
  rep.kind = rep.violations.empty() ? UscReport::Kind::no_violation
                                    : UscReport::Kind::violation;
  return rep;
}

BoundednessReport local_boundedness_probe(
    const PolyhedralSet& K, const PolynomialMap& P, const VectorXd& anchor,
    const std::vector<double>& eps_list, const MatrixXd& bias_dirs,
    const SolveConfig& cfg, const ConeSearchBudget& budget) {
  if (eps_list.empty()) throw InputError("boundedness probe needs eps values");
  BoundednessReport rep;
  rep.r0_evidence = is_r0_pair(K, P, budget).r0;

  std::vector<VectorXd> dirs;
  if (bias_dirs.cols() > 0) {
    if (bias_dirs.rows() != K.dim()) {
      throw DimensionError("bias direction rows do not match the dimension");
    }
    for (int j = 0; j < bias_dirs.cols(); ++j) {
      VectorXd u = bias_dirs.col(j);
      if (u.norm() <= 0.0) throw InputError("bias direction is zero");
      dirs.push_back(u / u.norm());
    }
  } else {
    dirs = probe_directions(K.dim(), 8, derive_seed(cfg.seed, 0xb0b0));
  }

  bool box_hit = false;
  for (const double eps : eps_list) {
    if (eps <= 0.0) throw InputError("eps values must be positive");
    double worst = 0.0;
    for (const VectorXd& u : dirs) {
      try {
        const SolutionSet sol = solve(VIProblem(K, P, anchor + eps * u), cfg);
        worst = std::max(worst, max_solution_norm(sol));
        if (escapes_seed_box(sol, cfg)) box_hit = true;
      } catch (const Error& e) {
        rep.notes.push_back("solve failed (" +
                            std::string(classify_error(e)) + ") at eps " +
                            fmt_double(eps));
      }
    }
    rep.eps.push_back(eps);
    rep.max_norms.push_back(worst);
  }

  // Norm growth as the perturbation shrinks is the telltale of a solution
  // branch escaping to infinity at the anchor.
  double norm_at_max_eps = 0.0, norm_at_min_eps = 0.0;
  double max_eps = -kInf, min_eps = kInf;
  for (std::size_t i = 0; i < rep.eps.size(); ++i) {
    if (rep.eps[i] > max_eps) {
      max_eps = rep.eps[i];
      norm_at_max_eps = rep.max_norms[i];
    }
    if (rep.eps[i] < min_eps) {
      min_eps = rep.eps[i];
      norm_at_min_eps = rep.max_norms[i];
    }
  }
  const bool growth = rep.eps.size() >= 2 && norm_at_max_eps > 0.0 &&
                      norm_at_min_eps >= 10.0 * norm_at_max_eps;
  rep.unbounded_trend = box_hit || growth;
  if (rep.unbounded_trend && rep.r0_evidence) {
    rep.notes.push_back(
        "norm growth contradicts the recession evidence; one of the two "
        "searches is at its budget limit");
  }
  return rep;
}

PowerLawFit fit_power_law(const std::vector<double>& radii,
                          const std::vector<double>& excesses) {
  if (radii.size() != excesses.size()) {
    throw DimensionError("power-law fit needs matching radius/excess lists");
  }
  PowerLawFit fit;
  fit.radii = radii;
  fit.excesses = excesses;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (radii[i] > 0.0 && excesses[i] > 0.0 && std::isfinite(excesses[i])) {
      xs.push_back(std::log(radii[i]));
      ys.push_back(std::log(excesses[i]));
    } else {
      ++fit.dropped_zero;
    }
  }
  if (xs.size() < 2) {
    fit.degenerate = true;
    return fit;
  }
  const double nn = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double denom = nn * sxx - sx * sx;
  if (std::abs(denom) < 1e-12) {
    fit.degenerate = true;
    return fit;
  }
  fit.exponent = (nn * sxy - sx * sy) / denom;
  fit.prefactor = std::exp((sy - fit.exponent * sx) / nn);
  return fit;
}

PowerLawFit hoelder_fit(const PolyhedralSet& K, const PolynomialMap& P,
                        const VectorXd& anchor, const HoelderParams& params,
                        const SolveConfig& cfg) {
  if (params.radii.empty() || params.dirs < 1) {
    throw InputError("hoelder fit needs radii and directions");
  }
  const SolutionSet base = solve(VIProblem(K, P, anchor), cfg);
  const std::vector<VectorXd> ref = solution_samples(base);
  const std::vector<VectorXd> dirs =
      probe_directions(K.dim(), params.dirs, derive_seed(params.seed, 0x401d));

  std::vector<double> excesses;
  for (const double r : params.radii) {
    if (r <= 0.0) throw InputError("hoelder radii must be positive");
    double worst = 0.0;
    for (const VectorXd& u : dirs) {
      SolutionSet pert;
      try {
        pert = solve(VIProblem(K, P, anchor + r * u), cfg);
      } catch (const Error&) {
        continue;
      }
      worst = std::max(worst, hausdorff_excess(solution_samples(pert), ref));
    }
    excesses.push_back(worst);
  }
  return fit_power_law(params.radii, excesses);
}

HoelderCheck perturbed_hoelder_check(const PolyhedralSet& K,
                                     const PolynomialMap& P,
                                     const VectorXd& anchor,
                                     const HoelderParams& params,
                                     const SolveConfig& cfg,
                                     const ConeSearchBudget& budget) {
  HoelderCheck check;
  const R0Report r0 = is_r0_pair(K, P, budget);
  check.premises_hold = r0.r0;
  if (!check.premises_hold) {
    check.notes.push_back(
        "recession evidence does not establish the R0 premise; the fit is "
        "reported for information only");
  }
  check.fit = hoelder_fit(K, P, anchor, params, cfg);
  if (check.fit.degenerate) {
    bool all_tiny = true;
    for (const double e : check.fit.excesses) {
      if (!(e <= 1e-8)) all_tiny = false;
    }
    check.consistent = all_tiny;
    check.notes.push_back(
        all_tiny ? "solution set is insensitive to the perturbation at this "
                   "anchor; degenerate fit accepted"
                 : "fit is degenerate but excesses are not negligible");
    return check;
  }
  bool ok = true;
  for (std::size_t i = 0; i < check.fit.radii.size(); ++i) {
    const double bound =
        2.0 * check.fit.prefactor *
            std::pow(check.fit.radii[i], check.fit.exponent) +
        1e-12;
    if (check.fit.excesses[i] > bound) ok = false;
  }
  check.consistent = ok;
  if (!ok) {
    check.notes.push_back(
        "at least one observation exceeds twice the fitted power law");
  }
  return check;
}

GenericityResult genericity_experiment(const PolyhedralSet& K,
                                       const GenericityParams& params,
                                       const SolveConfig& cfg,
                                       const ConeSearchBudget& budget) {
  if (params.trials < 1 || params.n < 1 || params.d < 1 ||
      params.coeff_scale <= 0.0) {
    throw InputError("genericity experiment parameters must be positive");
  }
  if (K.dim() != params.n) {
    throw DimensionError("set dimension does not match the requested n");
  }
  GenericityResult res;
  res.mode = params.mode;
  res.trials = params.trials;
  const MonomialBasis basis(params.n, params.d);

  auto finite_pass = [&](const PolynomialMap& P, const SolveConfig& scfg,
                         std::uint64_t seed) {
    SolveConfig local = scfg;
    local.seed = seed;
    Rng rng(derive_seed(seed, 0x9e99));
    const VectorXd p = rng.normal_vec(params.n);
    try {
      return solve(VIProblem(K, P, p), local).status == SolveStatus::complete;
    } catch (const Error&) {
      return false;
    }
  };
  auto r0_pass = [&](const PolynomialMap& P, const ConeSearchBudget& cbud,
                     std::uint64_t seed) {
    ConeSearchBudget local = cbud;
    local.seed = seed;
    try {
      return is_r0_pair(K, P, local).r0;
    } catch (const Error&) {
      return false;
    }
  };

  for (int t = 0; t < params.trials; ++t) {
    const std::uint64_t sub = derive_seed(params.seed, static_cast<std::uint64_t>(t));
    Rng rng(sub);
    MatrixXd A(params.n, basis.size());
    for (int i = 0; i < A.rows(); ++i) {
      for (int j = 0; j < A.cols(); ++j) {
        A(i, j) = params.coeff_scale * rng.normal();
      }
    }
    const PolynomialMap P(basis, A);

    bool pass = false;
    bool retried = false;
    if (params.mode == GenericityParams::Mode::finite_valued) {
      pass = finite_pass(P, cfg, derive_seed(sub, 1));
      if (!pass) {
        retried = true;
        SolveConfig big = cfg;
        big.multistart *= 2;
        big.max_iters *= 2;
        big.component_max_samples *= 2;
        pass = finite_pass(P, big, derive_seed(sub, 2));
      }
    } else {
      pass = r0_pass(P, budget, derive_seed(sub, 1));
      if (!pass) {
        retried = true;
        ConeSearchBudget big = budget;
        big.pool *= 2;
        big.starts *= 2;
        big.iters *= 2;
        big.polish_iters *= 2;
        pass = r0_pass(P, big, derive_seed(sub, 2));
      }
    }
    if (retried) ++res.retried;
    if (pass) ++res.passed;
    if (!pass) res.exceptional.push_back(sub);
    res.log.push_back(GenericityTrial{sub, pass, retried});
  }
  return res;
}

std::string genericity_csv(const GenericityResult& result) {
  std::ostringstream os;
  os << "trial,sub_seed,pass,retried\n";
  for (std::size_t i = 0; i < result.log.size(); ++i) {
    os << i << "," << result.log[i].sub_seed << ","
       << (result.log[i].pass ? 1 : 0) << ","
       << (result.log[i].retried ? 1 : 0) << "\n";
  }
  return os.str();
}

}  // namespace pvi
