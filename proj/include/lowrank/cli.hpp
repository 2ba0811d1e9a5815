#pragma once

#include "lowrank/problems.hpp"
#include "lowrank/solver.hpp"

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace lowrank::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 1,
  kMaxIters = 2,
  kLineSearchFailure = 3,
  kPropertyFailure = 4,
};

enum class Algorithm { P2gdr, P2gd, Both };

/// Fully resolved experiment: problem loaded, x0 materialized.
struct RunConfig {
  std::shared_ptr<CostFunction> problem;
  Matrix x0;
  SolverParams params;
  Algorithm algorithm = Algorithm::P2gdr;
  std::filesystem::path output_dir = "out";
};

struct Overrides {
  std::optional<int> max_iters;
  std::optional<double> delta;
  std::optional<double> stop_tol;
  std::optional<std::string> out;
};

/// Parses a config document. Relative paths inside it resolve against the
/// config file's directory.
/// Throws ArgumentError (or a JSON exception) on any malformed input.
RunConfig load_config(const std::string &config_path,
                      const Overrides &overrides = {});

int exit_code_for(Termination t);

int cmd_run(const RunConfig &config, std::ostream &out);
int cmd_compare(const RunConfig &config, bool assert_identical,
                std::ostream &out, std::ostream &err);
int cmd_check(std::ostream &out);

/// Entry point shared by the executable and the tests. args[0] is the
/// program name.
int run_cli(const std::vector<std::string> &args, std::ostream &out,
            std::ostream &err);

} // namespace lowrank::cli
