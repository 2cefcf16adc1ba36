#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cpext/aucrit.hpp"
#include "matrix_json.hpp"

namespace cpext::cli {

using io::json;

inline constexpr int kSchemaVersion = 1;

enum class Mode {
  CpCheck,
  CpExtend,
  Approx,
  Channel,
  Probabilistic,
  Hilbert,
  Au,
  Fidelity,
  Classical,
  WitnessVerify,
  CounterexampleSearch,
};

const char* to_string(Mode m);
const std::vector<std::string>& mode_names();

struct Problem {
  Mode mode = Mode::CpCheck;
  std::string label;
  std::vector<Mat> inputs, outputs;
  std::vector<Mat> dual_inputs, dual_outputs;
  Pairing pairing = Pairing::SumTrace;
  double w = 1.0;
  std::vector<double> epsilons;
  std::string objective = "maximin";
  std::vector<double> priors;
  std::optional<double> floor;
  bool equal_probabilities = false;
  bool trace_preserving = false;
  std::string classical_kind = "domain";
  std::optional<AuWitnessPackage> witness;
  int d = 3;
  int trials = 100;
  std::uint64_t seed = 1;
  Tolerances tol;
};

// Validates structure and types; every error names the JSON pointer of the
// offending value.
Problem parse_problem(const json& doc);

json tolerances_to_json(const Tolerances& t);

// Applies "key=value" to a tolerance set; throws io::ParseError on bad input.
void apply_tolerance_override(Tolerances& t, const std::string& assignment, const std::string& path);

// Reference problem files.
std::vector<std::string> fixture_names();
json fixture_problem(const std::string& name);

}  // namespace cpext::cli
