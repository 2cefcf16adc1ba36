#include <iostream>

#include <CLI11.hpp>

#include "run.hpp"

int main(int argc, char** argv) {
  using namespace cpext::cli;
  CLI::App app{"cpext: completely positive extension checks"};
  app.require_subcommand(1);

  Flags flags;
  std::string file, format = "json";
  std::uint64_t seed = 0;
  int trials = 0;
  double w = 0;
  auto* run_cmd = app.add_subcommand("run", "Run a problem file and print a report");
  run_cmd->add_option("problem", file, "Problem JSON file")->required();
  run_cmd->add_option("--tol", flags.tol, "Tolerance override key=value (repeatable)");
  auto* w_opt = run_cmd->add_option("--w", w, "Weight of the trace-preservation defect");
  auto* seed_opt = run_cmd->add_option("--seed", seed, "Seed for the random search");
  auto* trials_opt = run_cmd->add_option("--trials", trials, "Number of search trials");
  run_cmd->add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "summary"}));

  auto* fix_cmd = app.add_subcommand("fixtures", "List or emit reference problem files");
  fix_cmd->require_subcommand(1);
  fix_cmd->add_subcommand("list", "Print fixture names");
  std::string name;
  auto* emit = fix_cmd->add_subcommand("emit", "Print a fixture as a problem file");
  emit->add_option("name", name)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kInputError;
  }

  if (*fix_cmd) {
    if (fix_cmd->got_subcommand("list")) {
      for (const auto& n : fixture_names()) std::cout << n << "\n";
      return 0;
    }
    try {
      std::cout << fixture_problem(name).dump(2) << "\n";
      return 0;
    } catch (const std::exception& e) {
      std::cerr << e.what() << "\n";
      return kInputError;
    }
  }

  if (*w_opt) flags.w = w;
  if (*seed_opt) flags.seed = seed;
  if (*trials_opt) flags.trials = trials;
  Report r;
  try {
    r = run_file(file, flags);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kInputError;
  }
  if (format == "summary") std::cout << summary(r);
  else std::cout << r.body.dump(2) << "\n";
  return r.exit_code;
}
