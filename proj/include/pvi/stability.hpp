#pragma once

/*
 * Solution-map stability probes: parameter sweeps over a grid of p values,
 * one-sided Hausdorff excesses between solution sets, semicontinuity and
 * local-boundedness probes around an anchor parameter, empirical power-law
 * fits of the perturbation response, and genericity experiments over random
 * coefficient draws.
 *
 * Everything is sampled evidence built on the pseudo-face solver; reports
 * say what was observed and under which budget, and never upgrade an
 * observation into a proof.
 */

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "pvi/analysis.hpp"
#include "pvi/kkt.hpp"

namespace pvi {

// Axis-aligned parameter grid: axis i runs count[i] equally spaced values
// from lo(i) to hi(i) (a single value sits at lo). Cells are visited in
// row-major order with the last axis fastest.
struct GridSpec {
  VectorXd lo;
  VectorXd hi;
  std::vector<int> counts;

  void validate(int n) const;
  int total() const;
};

struct SweepCell {
  VectorXd p;
  SolveStatus status = SolveStatus::complete;
  bool error = false;
  std::string error_kind;  // "licq", "cap", "input", or "error"
  int num_points = 0;
  int num_components = 0;
  double max_norm = 0.0;  // largest 2-norm over points and samples
  std::string label;      // empty | singleton | finite | nonisolated | error
};

struct SweepResult {
  std::vector<int> shape;
  std::vector<SweepCell> cells;
};

// Solves VI(K, P + p) on every grid cell. Failures are recorded per cell,
// never propagated, so one degenerate cell cannot kill a sweep.
SweepResult solution_map_sweep(const PolyhedralSet& K, const PolynomialMap& P,
                               const GridSpec& grid,
                               const SolveConfig& cfg = {});

std::string sweep_csv(const SweepResult& sweep);

// One-sided Hausdorff excess sup_{a in A} dist(a, B); 0 for empty A,
// +infinity for nonempty A against empty B.
double hausdorff_excess(const std::vector<VectorXd>& A,
                        const std::vector<VectorXd>& B);
// Point-list variant; throws InputError when either set carries suspected
// nonisolated components, because a bare point list would misrepresent it.
double hausdorff_excess(const SolutionSet& A, const SolutionSet& B);

// Probe points of a solution set: listed points plus component samples.
std::vector<VectorXd> solution_samples(const SolutionSet& sol);

// ---- semicontinuity probe ----

struct UscParams {
  double epsilon = 0.1;  // allowed excess before a violation is declared
  std::vector<double> radii = {1e-1, 1e-2, 1e-3};
  int dirs = 8;
  std::uint64_t seed = 0;
};

struct UscObservation {
  double radius = 0.0;
  VectorXd direction;
  VectorXd point;      // perturbed solution far from the anchor set
  double excess = 0.0;
};

struct UscReport {
  enum class Kind { no_violation, violation, anchor_unbounded };
  Kind kind = Kind::no_violation;
  double worst_excess = 0.0;
  std::vector<UscObservation> violations;
  std::vector<std::string> notes;
};

// Checks whether solutions of VI(K, P + anchor + r u) stay within epsilon of
// the anchor solution set for the sampled radii and directions. An anchor
// whose solution set already escapes the solver's seed box cannot anchor the
// comparison and is reported as such.
UscReport usc_probe(const PolyhedralSet& K, const PolynomialMap& P,
                    const VectorXd& anchor, const UscParams& params = {},
                    const SolveConfig& cfg = {});

// ---- local boundedness probe ----

struct BoundednessReport {
  bool r0_evidence = false;
  bool unbounded_trend = false;
  std::vector<double> eps;
  std::vector<double> max_norms;  // per eps, max over directions
  std::vector<std::string> notes;
};

// Solves at anchor + eps * u for each eps and direction and watches the
// solution norms. bias_dirs columns override the sampled directions when
// present (useful to aim at a suspected unbounded regime).
BoundednessReport local_boundedness_probe(
    const PolyhedralSet& K, const PolynomialMap& P, const VectorXd& anchor,
    const std::vector<double>& eps_list, const MatrixXd& bias_dirs,
    const SolveConfig& cfg = {}, const ConeSearchBudget& budget = {});

// ---- perturbation power law ----

struct PowerLawFit {
  double exponent = 0.0;
  double prefactor = 0.0;  // excess ~ prefactor * r^exponent
  bool degenerate = false;
  int dropped_zero = 0;  // radii whose excess was 0 and left out of the fit
  std::vector<double> radii;
  std::vector<double> excesses;
};

// Least squares on (log r, log e) pairs; zero excesses are dropped and
// counted. Fewer than two usable pairs makes the fit degenerate.
PowerLawFit fit_power_law(const std::vector<double>& radii,
                          const std::vector<double>& excesses);

struct HoelderParams {
  std::vector<double> radii = {1e-1, 1e-2, 1e-3, 1e-4};
  int dirs = 16;
  std::uint64_t seed = 0;
};

// Empirical perturbation response at an anchor: for each radius, the worst
// one-sided excess of the perturbed solution set against the anchor set over
// a fixed direction family (the same directions at every radius, so a clean
// power law keeps its prefactor), then a log-log fit.
PowerLawFit hoelder_fit(const PolyhedralSet& K, const PolynomialMap& P,
                        const VectorXd& anchor, const HoelderParams& params = {},
                        const SolveConfig& cfg = {});

struct HoelderCheck {
  bool premises_hold = false;  // recession evidence that the map is R0
  bool consistent = false;     // observations track the fitted power law
  PowerLawFit fit;
  std::vector<std::string> notes;
};

// Fits the power law and checks every observation against twice the fitted
// curve. A degenerate fit (solution set insensitive to the perturbation)
// passes only when every excess is below 1e-8.
HoelderCheck perturbed_hoelder_check(const PolyhedralSet& K,
                                     const PolynomialMap& P,
                                     const VectorXd& anchor,
                                     const HoelderParams& params = {},
                                     const SolveConfig& cfg = {},
                                     const ConeSearchBudget& budget = {});

// ---- genericity experiments ----

struct GenericityParams {
  enum class Mode { finite_valued, r0 };
  Mode mode = Mode::finite_valued;
  int n = 2;
  int d = 2;
  int trials = 64;
  double coeff_scale = 1.0;
  std::uint64_t seed = 0;
};

struct GenericityTrial {
  std::uint64_t sub_seed = 0;
  bool pass = false;
  bool retried = false;
};

struct GenericityResult {
  GenericityParams::Mode mode = GenericityParams::Mode::finite_valued;
  int trials = 0;
  int passed = 0;
  int retried = 0;
  std::vector<GenericityTrial> log;
  std::vector<std::uint64_t> exceptional;  // sub-seeds failing even the retry
  std::vector<std::string> notes;
};

// Draws random dense coefficient matrices (gaussian entries, fixed seeds per
// trial) and tests the property of the mode: a finite solution set for a
// random p, or the R0 property of the pair. A failed trial is retried once
// with doubled search budgets before being recorded as exceptional.
GenericityResult genericity_experiment(const PolyhedralSet& K,
                                       const GenericityParams& params = {},
                                       const SolveConfig& cfg = {},
                                       const ConeSearchBudget& budget = {});

std::string genericity_csv(const GenericityResult& result);

}  // namespace pvi
