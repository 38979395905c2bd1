// Command-line front end: solve and analysis subcommands over JSON problem
// files, CSV emitters for sweeps and genericity experiments.
//
// Exit codes: 0 on success, 1 on input/structure errors (bad JSON, empty
// sets, dependent active gradients, blown enumeration caps), 2 when an
// analysis finishes but cannot reach a conclusive verdict (suspected
// nonisolated solution sets, merit values inside the undecided band,
// undetermined certificate premises).

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pvi/analysis.hpp"
#include "pvi/errors.hpp"
#include "pvi/json_io.hpp"
#include "pvi/kkt.hpp"
#include "pvi/stability.hpp"

namespace {

pvi::ProblemFile read_problem(const std::string& path) {
  if (path == "-") return pvi::load_problem(std::cin);
  std::ifstream f(path);
  if (!f) throw pvi::InputError("cannot open input file: " + path);
  return pvi::load_problem(f);
}

void write_output(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw pvi::InputError("cannot open output file: " + path);
  f << text;
}

void warn_degree_drop(const pvi::VIProblem& prob) {
  if (!prob.P.is_zero() &&
      prob.P.degree() < prob.P.container_degree()) {
    std::cerr << "warning: effective degree " << prob.P.degree()
              << " is below the container degree "
              << prob.P.container_degree()
              << "; grading-sensitive analyses use the container degree\n";
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (const char c : s) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  return parts;
}

double parse_num(const std::string& s, const std::string& ctx) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw pvi::InputError("cannot parse number '" + s + "' in " + ctx);
  }
}

int parse_int(const std::string& s, const std::string& ctx) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw pvi::InputError("cannot parse integer '" + s + "' in " + ctx);
  }
}

// Grid syntax: "lo:hi:count" applied to every axis, or one such spec per
// axis separated by commas.
pvi::GridSpec parse_grid(const std::string& spec, int n) {
  std::vector<std::string> axes = split(spec, ',');
  if (axes.size() != 1 && static_cast<int>(axes.size()) != n) {
    throw pvi::InputError("--grid needs one axis spec or exactly " +
                          std::to_string(n));
  }
  pvi::GridSpec grid;
  grid.lo.resize(n);
  grid.hi.resize(n);
  grid.counts.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const std::string& axis = axes.size() == 1 ? axes[0]
                                               : axes[static_cast<std::size_t>(i)];
    const std::vector<std::string> f = split(axis, ':');
    if (f.size() != 3) {
      throw pvi::InputError("grid axis '" + axis + "' must be lo:hi:count");
    }
    grid.lo(i) = parse_num(f[0], "--grid");
    grid.hi(i) = parse_num(f[1], "--grid");
    grid.counts[static_cast<std::size_t>(i)] = parse_int(f[2], "--grid");
  }
  return grid;
}

std::vector<double> parse_num_list(const std::string& spec,
                                   const std::string& ctx) {
  std::vector<double> out;
  for (const std::string& s : split(spec, ',')) {
    out.push_back(parse_num(s, ctx));
  }
  return out;
}

pvi::PolyhedralSet make_named_set(const std::string& spec, int n) {
  if (spec == "orthant") return pvi::PolyhedralSet::orthant(n);
  if (spec == "whole") return pvi::PolyhedralSet::whole_space(n);
  if (spec.rfind("box:", 0) == 0) {
    const std::vector<std::string> f = split(spec, ':');
    if (f.size() != 3) {
      throw pvi::InputError("box set spec must be box:lo:hi");
    }
    const double lo = parse_num(f[1], "--K");
    const double hi = parse_num(f[2], "--K");
    return pvi::PolyhedralSet::box(Eigen::VectorXd::Constant(n, lo),
                                   Eigen::VectorXd::Constant(n, hi));
  }
  throw pvi::InputError("unknown set spec '" + spec +
                        "' (use orthant, whole, or box:lo:hi)");
}

struct SolveOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<double> tol;  // verification tolerance
  std::optional<double> newton_tol;
  std::optional<int> multistart;
  std::optional<int> max_iters;
  std::optional<double> seed_box;
  std::optional<int> face_cap;
  std::optional<int> max_points;
  std::optional<double> component_step;
  std::optional<int> component_max_samples;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--seed", seed, "random seed");
    cmd->add_option("--threads", threads, "worker threads across faces");
    cmd->add_option("--tol", tol, "verification tolerance");
    cmd->add_option("--newton-tol", newton_tol, "newton residual tolerance");
    cmd->add_option("--multistart", multistart, "newton starts per face");
    cmd->add_option("--max-iters", max_iters, "newton iteration cap");
    cmd->add_option("--seed-box", seed_box, "half width of the seed box");
    cmd->add_option("--face-cap", face_cap, "max inequality rows to enumerate");
    cmd->add_option("--max-points", max_points, "listed point cap");
    cmd->add_option("--component-step", component_step,
                    "tangent march step for components");
    cmd->add_option("--component-max-samples", component_max_samples,
                    "sample cap per component");
  }

  void apply(pvi::SolveConfig& cfg) const {
    if (seed) cfg.seed = *seed;
    if (threads) cfg.threads = *threads;
    if (tol) cfg.verify_tol = *tol;
    if (newton_tol) cfg.newton_tol = *newton_tol;
    if (multistart) cfg.multistart = *multistart;
    if (max_iters) cfg.max_iters = *max_iters;
    if (seed_box) cfg.seed_box = *seed_box;
    if (face_cap) cfg.face_cap = *face_cap;
    if (max_points) cfg.max_points = *max_points;
    if (component_step) cfg.component_step = *component_step;
    if (component_max_samples) {
      cfg.component_max_samples = *component_max_samples;
    }
  }
};

struct BudgetOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> pool;
  std::optional<int> starts;
  std::optional<int> iters;
  std::optional<int> polish_iters;
  std::optional<int> face_cap;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--seed", seed, "random seed");
    cmd->add_option("--pool", pool, "screened seed pool per face");
    cmd->add_option("--starts", starts, "descent starts per face");
    cmd->add_option("--iters", iters, "descent iteration cap");
    cmd->add_option("--polish-iters", polish_iters, "polish iteration cap");
    cmd->add_option("--face-cap", face_cap, "max inequality rows to enumerate");
  }

  void apply(pvi::ConeSearchBudget& b) const {
    if (seed) b.seed = *seed;
    if (pool) b.pool = *pool;
    if (starts) b.starts = *starts;
    if (iters) b.iters = *iters;
    if (polish_iters) b.polish_iters = *polish_iters;
    if (face_cap) b.face_cap = *face_cap;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"solver and analysis toolkit for polynomial variational "
               "inequalities over polyhedral convex sets"};
  app.require_subcommand(1);

  std::string in_path = "-";
  std::string out_path;
  app.add_option("--in", in_path, "problem file (JSON), - for stdin")
      ->capture_default_str();
  app.add_option("--out", out_path, "output file, - or empty for stdout");

  auto* cmd_solve = app.add_subcommand(
      "solve", "enumerate and verify the solution set of VI(K, P + p)");
  SolveOverrides solve_opts;
  solve_opts.add_to(cmd_solve);

  auto* cmd_r0 = app.add_subcommand(
      "r0", "search the recession problem for nonzero solutions");
  BudgetOverrides r0_opts;
  r0_opts.add_to(cmd_r0);

  auto* cmd_cop = app.add_subcommand(
      "copositive", "minimize <P(x), x> over K on the unit sphere");
  BudgetOverrides cop_opts;
  cop_opts.add_to(cmd_cop);

  auto* cmd_cert = app.add_subcommand(
      "certify", "existence certificate for VI(K, P + p)");
  BudgetOverrides cert_opts;
  cert_opts.add_to(cmd_cert);

  auto* cmd_sweep = app.add_subcommand(
      "sweep", "solve over a grid of p values and emit CSV");
  SolveOverrides sweep_opts;
  sweep_opts.add_to(cmd_sweep);
  std::string grid_spec;
  cmd_sweep->add_option("--grid", grid_spec,
                        "lo:hi:count per axis (comma separated) or one spec "
                        "for all axes")
      ->required();

  auto* cmd_hoelder = app.add_subcommand(
      "hoelder", "fit a power law to the perturbation response at p");
  SolveOverrides hoelder_opts;
  hoelder_opts.add_to(cmd_hoelder);
  std::string radii_spec;
  int hoelder_dirs = 16;
  cmd_hoelder->add_option("--radii", radii_spec,
                          "comma separated perturbation radii");
  cmd_hoelder->add_option("--dirs", hoelder_dirs,
                          "perturbation directions per radius")
      ->capture_default_str();

  auto* cmd_generic = app.add_subcommand(
      "generic", "random-coefficient experiment over a named set");
  int gen_n = 2, gen_d = 2, gen_trials = 64;
  double gen_scale = 1.0;
  std::string gen_mode = "finite";
  std::string gen_set = "orthant";
  std::string gen_csv;
  std::optional<std::uint64_t> gen_seed;
  cmd_generic->add_option("--n", gen_n, "ambient dimension")
      ->capture_default_str();
  cmd_generic->add_option("--d", gen_d, "polynomial degree")
      ->capture_default_str();
  cmd_generic->add_option("--trials", gen_trials, "number of random draws")
      ->capture_default_str();
  cmd_generic->add_option("--mode", gen_mode, "finite or r0")
      ->capture_default_str();
  cmd_generic->add_option("--K", gen_set,
                          "orthant, whole, or box:lo:hi")
      ->capture_default_str();
  cmd_generic->add_option("--coeff-scale", gen_scale,
                          "gaussian coefficient scale")
      ->capture_default_str();
  cmd_generic->add_option("--seed", gen_seed, "random seed");
  cmd_generic->add_option("--csv", gen_csv, "write the per-trial CSV here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_solve->parsed()) {
      pvi::ProblemFile pf = read_problem(in_path);
      warn_degree_drop(pf.problem);
      solve_opts.apply(pf.config);
      const pvi::SolutionSet sol = pvi::solve(pf.problem, pf.config);
      write_output(pvi::solution_to_json(sol, pf.config), out_path);
      return sol.status == pvi::SolveStatus::inconclusive ? 2 : 0;
    }

    if (cmd_r0->parsed()) {
      pvi::ProblemFile pf = read_problem(in_path);
      warn_degree_drop(pf.problem);
      pvi::ConeSearchBudget budget;
      r0_opts.apply(budget);
      const pvi::R0Report rep =
          pvi::is_r0_pair(pf.problem.K, pf.problem.P, budget);
      write_output(pvi::r0_to_json(rep), out_path);
      return rep.status == pvi::ConeCpStatus::inconclusive ? 2 : 0;
    }

    if (cmd_cop->parsed()) {
      pvi::ProblemFile pf = read_problem(in_path);
      warn_degree_drop(pf.problem);
      pvi::ConeSearchBudget budget;
      cop_opts.apply(budget);
      const pvi::CopositivityReport rep =
          pvi::copositivity_check(pf.problem.K, pf.problem.P, budget);
      write_output(pvi::copositivity_to_json(rep), out_path);
      return rep.verdict == pvi::CopositivityReport::Verdict::inconclusive
                 ? 2
                 : 0;
    }

    if (cmd_cert->parsed()) {
      pvi::ProblemFile pf = read_problem(in_path);
      warn_degree_drop(pf.problem);
      pvi::ConeSearchBudget budget;
      cert_opts.apply(budget);
      const pvi::ExistenceReport rep =
          pvi::existence_certificate(pf.problem, budget);
      write_output(pvi::certificate_to_json(rep), out_path);
      return rep.undetermined ? 2 : 0;
    }

    if (cmd_sweep->parsed()) {
      pvi::ProblemFile pf = read_problem(in_path);
      warn_degree_drop(pf.problem);
      sweep_opts.apply(pf.config);
      const pvi::GridSpec grid = parse_grid(grid_spec, pf.problem.K.dim());
      const pvi::SweepResult sweep = pvi::solution_map_sweep(
          pf.problem.K, pf.problem.P, grid, pf.config);
      write_output(pvi::sweep_csv(sweep), out_path);
      return 0;
    }

    if (cmd_hoelder->parsed()) {
      pvi::ProblemFile pf = read_problem(in_path);
      warn_degree_drop(pf.problem);
      hoelder_opts.apply(pf.config);
      pvi::HoelderParams params;
      params.seed = pf.config.seed;
      params.dirs = hoelder_dirs;
      if (!radii_spec.empty()) {
        params.radii = parse_num_list(radii_spec, "--radii");
      }
      const pvi::HoelderCheck check = pvi::perturbed_hoelder_check(
          pf.problem.K, pf.problem.P, pf.problem.p, params, pf.config);
      write_output(pvi::hoelder_check_to_json(check), out_path);
      return 0;
    }

    if (cmd_generic->parsed()) {
      pvi::GenericityParams params;
      params.n = gen_n;
      params.d = gen_d;
      params.trials = gen_trials;
      params.coeff_scale = gen_scale;
      if (gen_seed) params.seed = *gen_seed;
      if (gen_mode == "finite" || gen_mode == "finite_valued") {
        params.mode = pvi::GenericityParams::Mode::finite_valued;
      } else if (gen_mode == "r0") {
        params.mode = pvi::GenericityParams::Mode::r0;
      } else {
        throw pvi::InputError("--mode must be finite or r0");
      }
      const pvi::PolyhedralSet K = make_named_set(gen_set, gen_n);
      const pvi::GenericityResult res = pvi::genericity_experiment(K, params);
      if (!gen_csv.empty()) {
        write_output(pvi::genericity_csv(res), gen_csv);
      }
      write_output(pvi::genericity_to_json(res), out_path);
      return 0;
    }
  } catch (const pvi::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
