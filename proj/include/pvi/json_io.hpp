#pragma once

/*
 * JSON input and output for problems and reports.
 *
 * Parsing is strict: every object is checked against its key set and an
 * unknown key anywhere is an InputError, so typos fail loudly instead of
 * silently running with defaults.  Numbers are written in shortest
 * round-trip form, so saving and reloading reproduces doubles bit for bit.
 *
 * Problem files look like
 *
 *   {
 *     "P": {"n": 2, "d": 2, "coeffs": [[...], [...]]},
 *     "p": [0.0, 0.0],
 *     "K": {"C": [[...]], "b": [...], "E": [], "d": []},
 *     "config": { ... optional solver overrides ... }
 *   }
 *
 * coeffs rows follow the graded monomial order documented with
 * PolynomialMap.  An empty "C"/"E" pair means the whole space.
 */

#include <cstdint>
#include <iosfwd>
#include <string>

#include "pvi/analysis.hpp"
#include "pvi/kkt.hpp"
#include "pvi/stability.hpp"

namespace pvi {

struct ProblemFile {
  VIProblem problem;
  SolveConfig config;       // defaults, overridden by the optional "config"
  bool has_config = false;
};

ProblemFile load_problem(std::istream& in);
ProblemFile load_problem_string(const std::string& text);

// Inverse of load_problem; pass cfg to embed a "config" object.
std::string problem_to_json(const VIProblem& prob,
                            const SolveConfig* cfg = nullptr);

// FNV-1a over the canonical serialized config; stamped into solve output so
// runs can be matched to their exact configuration.
std::uint64_t config_hash(const SolveConfig& cfg);

std::string solution_to_json(const SolutionSet& sol, const SolveConfig& cfg);
std::string r0_to_json(const R0Report& rep);
std::string copositivity_to_json(const CopositivityReport& rep);
std::string certificate_to_json(const ExistenceReport& rep);
std::string hoelder_check_to_json(const HoelderCheck& check);
std::string genericity_to_json(const GenericityResult& res);

}  // namespace pvi
