#include "pvi/json_io.hpp"

#include <cmath>
#include <initializer_list>
#include <iomanip>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "pvi/errors.hpp"

namespace pvi {

namespace {

// ordered_json keeps insertion order, which keeps the emitted documents (and
// the config hash) stable.
using njson = nlohmann::ordered_json;

void check_keys(const njson& j, const std::string& ctx,
                std::initializer_list<const char*> required,
                std::initializer_list<const char*> optional) {
  if (!j.is_object()) throw InputError(ctx + " must be a JSON object");
  for (const char* k : required) {
    if (!j.contains(k)) {
      throw InputError(ctx + " is missing key '" + std::string(k) + "'");
    }
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : required) known = known || it.key() == k;
    for (const char* k : optional) known = known || it.key() == k;
    if (!known) {
      throw InputError(ctx + " has unknown key '" + it.key() + "'");
    }
  }
}

double as_number(const njson& j, const std::string& ctx) {
  if (!j.is_number()) throw InputError(ctx + " must be a number");
  return j.get<double>();
}

int as_int(const njson& j, const std::string& ctx) {
  if (!j.is_number_integer()) throw InputError(ctx + " must be an integer");
  return j.get<int>();
}

std::uint64_t as_seed(const njson& j, const std::string& ctx) {
  if (!j.is_number_integer() || j.is_number_float()) {
    throw InputError(ctx + " must be an integer");
  }
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  const long long v = j.get<long long>();
  if (v < 0) throw InputError(ctx + " must be nonnegative");
  return static_cast<std::uint64_t>(v);
}

VectorXd as_vector(const njson& j, const std::string& ctx) {
  if (!j.is_array()) throw InputError(ctx + " must be an array of numbers");
  VectorXd v(static_cast<int>(j.size()));
  for (int i = 0; i < v.size(); ++i) {
    v(i) = as_number(j[static_cast<std::size_t>(i)],
                     ctx + "[" + std::to_string(i) + "]");
  }
  return v;
}

MatrixXd as_matrix(const njson& j, int cols, const std::string& ctx) {
  if (!j.is_array()) throw InputError(ctx + " must be an array of rows");
  MatrixXd m(static_cast<int>(j.size()), cols);
  for (int i = 0; i < m.rows(); ++i) {
    const VectorXd row =
        as_vector(j[static_cast<std::size_t>(i)],
                  ctx + "[" + std::to_string(i) + "]");
    if (row.size() != cols) {
      throw InputError(ctx + "[" + std::to_string(i) + "] must have " +
                       std::to_string(cols) + " entries");
    }
    m.row(i) = row;
  }
  return m;
}

njson vec_json(const VectorXd& v) {
  njson a = njson::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

njson mat_json(const MatrixXd& m) {
  njson a = njson::array();
  for (int i = 0; i < m.rows(); ++i) a.push_back(vec_json(m.row(i)));
  return a;
}

njson finite_or_null(double v) {
  if (std::isfinite(v)) return njson(v);
  return njson();
}

PolynomialMap parse_polymap(const njson& j) {
  check_keys(j, "P", {"n", "d", "coeffs"}, {});
  const int n = as_int(j["n"], "P.n");
  const int d = as_int(j["d"], "P.d");
  if (n < 1) throw InputError("P.n must be at least 1");
  if (d < 0) throw InputError("P.d must be nonnegative");
  MonomialBasis basis(n, d);
  const MatrixXd coeffs = as_matrix(j["coeffs"], basis.size(), "P.coeffs");
  if (coeffs.rows() != n) {
    throw InputError("P.coeffs must have exactly n = " + std::to_string(n) +
                     " rows");
  }
  return PolynomialMap(std::move(basis), coeffs);
}

PolyhedralSet parse_set(const njson& j, int n) {
  check_keys(j, "K", {"C", "b", "E", "d"}, {});
  const MatrixXd C = as_matrix(j["C"], n, "K.C");
  const VectorXd b = as_vector(j["b"], "K.b");
  const MatrixXd E = as_matrix(j["E"], n, "K.E");
  const VectorXd d = as_vector(j["d"], "K.d");
  if (C.rows() != b.size()) {
    throw InputError("K.C and K.b have different row counts");
  }
  if (E.rows() != d.size()) {
    throw InputError("K.E and K.d have different row counts");
  }
  if (C.rows() == 0 && E.rows() == 0) return PolyhedralSet::whole_space(n);
  return PolyhedralSet(C, b, E, d);
}

SolveConfig parse_config(const njson& j) {
  SolveConfig cfg;
  check_keys(j, "config", {},
             {"newton_tol", "max_iters", "multistart", "seed_box",
              "cluster_radius", "verify_tol", "seed", "threads", "face_cap",
              "max_points", "component_step", "component_max_samples"});
  if (j.contains("newton_tol")) {
    cfg.newton_tol = as_number(j["newton_tol"], "config.newton_tol");
  }
  if (j.contains("max_iters")) {
    cfg.max_iters = as_int(j["max_iters"], "config.max_iters");
  }
  if (j.contains("multistart")) {
    cfg.multistart = as_int(j["multistart"], "config.multistart");
  }
  if (j.contains("seed_box")) {
    cfg.seed_box = as_number(j["seed_box"], "config.seed_box");
  }
  if (j.contains("cluster_radius")) {
    cfg.cluster_radius = as_number(j["cluster_radius"],
                                   "config.cluster_radius");
  }
  if (j.contains("verify_tol")) {
    cfg.verify_tol = as_number(j["verify_tol"], "config.verify_tol");
  }
  if (j.contains("seed")) cfg.seed = as_seed(j["seed"], "config.seed");
  if (j.contains("threads")) {
    cfg.threads = as_int(j["threads"], "config.threads");
  }
  if (j.contains("face_cap")) {
    cfg.face_cap = as_int(j["face_cap"], "config.face_cap");
  }
  if (j.contains("max_points")) {
    cfg.max_points = as_int(j["max_points"], "config.max_points");
  }
  if (j.contains("component_step")) {
    cfg.component_step = as_number(j["component_step"],
                                   "config.component_step");
  }
  if (j.contains("component_max_samples")) {
    cfg.component_max_samples =
        as_int(j["component_max_samples"], "config.component_max_samples");
  }
  cfg.validate();
  return cfg;
}

njson config_json(const SolveConfig& cfg) {
  njson j;
  j["newton_tol"] = cfg.newton_tol;
  j["max_iters"] = cfg.max_iters;
  j["multistart"] = cfg.multistart;
  j["seed_box"] = cfg.seed_box;
  j["cluster_radius"] = cfg.cluster_radius;
  j["verify_tol"] = cfg.verify_tol;
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  j["face_cap"] = cfg.face_cap;
  j["max_points"] = cfg.max_points;
  j["component_step"] = cfg.component_step;
  j["component_max_samples"] = cfg.component_max_samples;
  return j;
}

njson parse_document(const std::string& text) {
  try {
    return njson::parse(text);
  } catch (const njson::parse_error& e) {
    throw InputError(std::string("invalid json: ") + e.what());
  }
}

ProblemFile build_problem(const njson& j) {
  check_keys(j, "problem file", {"P", "p", "K"}, {"config"});
  PolynomialMap P = parse_polymap(j["P"]);
  const int n = P.n();
  const VectorXd p = as_vector(j["p"], "p");
  if (p.size() != n) throw InputError("p must have n entries");
  PolyhedralSet K = parse_set(j["K"], n);
  if (!is_nonempty(K)) throw InputError("the set K is empty");
  SolveConfig cfg;
  bool has_cfg = false;
  if (j.contains("config")) {
    cfg = parse_config(j["config"]);
    has_cfg = true;
  }
  return ProblemFile{VIProblem(std::move(K), std::move(P), p), cfg, has_cfg};
}

}  // namespace

ProblemFile load_problem_string(const std::string& text) {
  return build_problem(parse_document(text));
}

ProblemFile load_problem(std::istream& in) {
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_problem_string(buf.str());
}

std::string problem_to_json(const VIProblem& prob, const SolveConfig* cfg) {
  njson j;
  njson pj;
  pj["n"] = prob.P.n();
  pj["d"] = prob.P.container_degree();
  pj["coeffs"] = mat_json(prob.P.coeffs());
  j["P"] = std::move(pj);
  j["p"] = vec_json(prob.p);
  njson kj;
  kj["C"] = mat_json(prob.K.C());
  kj["b"] = vec_json(prob.K.b());
  kj["E"] = mat_json(prob.K.E());
  kj["d"] = vec_json(prob.K.dvec());
  j["K"] = std::move(kj);
  if (cfg != nullptr) j["config"] = config_json(*cfg);
  return j.dump(2) + "\n";
}

std::uint64_t config_hash(const SolveConfig& cfg) {
  const std::string s = config_json(cfg).dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string solution_to_json(const SolutionSet& sol, const SolveConfig& cfg) {
  njson j;
  j["status"] = to_string(sol.status);
  njson pts = njson::array();
  njson details = njson::array();
  for (const SolutionPoint& p : sol.points) {
    pts.push_back(vec_json(p.x));
    njson d;
    d["x"] = vec_json(p.x);
    d["alpha"] = p.alpha;
    d["residual"] = p.residual;
    d["lambda"] = vec_json(p.lambda);
    d["mu"] = vec_json(p.mu);
    details.push_back(std::move(d));
  }
  j["points"] = std::move(pts);
  j["point_details"] = std::move(details);
  njson comps = njson::array();
  for (const SolutionComponent& c : sol.components) {
    njson cj;
    cj["alpha"] = c.alpha;
    cj["tangent"] = vec_json(c.tangent);
    njson samples = njson::array();
    for (const VectorXd& s : c.samples) samples.push_back(vec_json(s));
    cj["samples"] = std::move(samples);
    comps.push_back(std::move(cj));
  }
  j["components"] = std::move(comps);
  j["notes"] = sol.notes;
  j["config"] = config_json(cfg);
  j["seed"] = cfg.seed;
  {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << config_hash(cfg);
    j["config_hash"] = os.str();
  }
  return j.dump(2) + "\n";
}

std::string r0_to_json(const R0Report& rep) {
  njson j;
  j["r0"] = rep.r0;
  j["status"] = to_string(rep.status);
  j["best_merit"] = finite_or_null(rep.best_merit);
  njson w = njson::array();
  for (const VectorXd& v : rep.witnesses) w.push_back(vec_json(v));
  j["witnesses"] = std::move(w);
  j["notes"] = rep.notes;
  return j.dump(2) + "\n";
}

std::string copositivity_to_json(const CopositivityReport& rep) {
  njson j;
  switch (rep.verdict) {
    case CopositivityReport::Verdict::copositive:
      j["verdict"] = "copositive";
      break;
    case CopositivityReport::Verdict::not_copositive:
      j["verdict"] = "not_copositive";
      break;
    case CopositivityReport::Verdict::inconclusive:
      j["verdict"] = "inconclusive";
      break;
  }
  j["min_value"] = finite_or_null(rep.min_value);
  j["argmin"] = vec_json(rep.argmin);
  j["notes"] = rep.notes;
  return j.dump(2) + "\n";
}

std::string certificate_to_json(const ExistenceReport& rep) {
  njson j;
  j["certified"] = rep.certified;
  j["undetermined"] = rep.undetermined;
  njson prem = njson::array();
  for (const ExistenceReport::Premise& p : rep.premises) {
    njson pj;
    pj["name"] = p.name;
    pj["holds"] = p.holds;
    pj["detail"] = p.detail;
    prem.push_back(std::move(pj));
  }
  j["premises"] = std::move(prem);
  j["caveats"] = rep.caveats;
  return j.dump(2) + "\n";
}

std::string hoelder_check_to_json(const HoelderCheck& check) {
  njson j;
  j["premises_hold"] = check.premises_hold;
  j["consistent"] = check.consistent;
  njson f;
  f["exponent"] = check.fit.exponent;
  f["prefactor"] = check.fit.prefactor;
  f["degenerate"] = check.fit.degenerate;
  f["dropped_zero"] = check.fit.dropped_zero;
  f["radii"] = check.fit.radii;
  njson ex = njson::array();
  for (const double e : check.fit.excesses) ex.push_back(finite_or_null(e));
  f["excesses"] = std::move(ex);
  j["fit"] = std::move(f);
  j["notes"] = check.notes;
  return j.dump(2) + "\n";
}

std::string genericity_to_json(const GenericityResult& res) {
  njson j;
  j["mode"] = res.mode == GenericityParams::Mode::finite_valued
                  ? "finite_valued"
                  : "r0";
  j["trials"] = res.trials;
  j["passed"] = res.passed;
  j["retried"] = res.retried;
  j["exceptional"] = res.exceptional;
  j["notes"] = res.notes;
  return j.dump(2) + "\n";
}

}  // namespace pvi
