#pragma once

#include <optional>
#include <string>
#include <vector>

#include "problem.hpp"

namespace cpext::cli {

enum ExitCode { kAffirmative = 0, kNegative = 1, kMarginal = 2, kInputError = 3, kNumericFailure = 4 };

struct Flags {
  std::vector<std::string> tol;  // key=value overrides
  std::optional<double> w;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
};

struct Report {
  int exit_code = kInputError;
  json body;
};

// Runs a parsed problem; library errors are mapped to exit codes 3 and 4.
Report run(const Problem& problem, const Flags& flags = {});

// Parses, validates and runs a document; parse errors become exit 3 reports.
Report run_document(const json& doc, const Flags& flags = {});
Report run_file(const std::string& path, const Flags& flags = {});

std::string summary(const Report& r);

}  // namespace cpext::cli
