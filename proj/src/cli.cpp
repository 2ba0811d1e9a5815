#include "lowrank/cli.hpp"

#include "lowrank/errors.hpp"
#include "lowrank/io.hpp"
#include "lowrank/properties.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <random>

namespace lowrank::cli {

namespace fs = std::filesystem;
using io::Json;

namespace {

std::uint64_t seed_override(std::uint64_t fallback) {
  if (const char *env = std::getenv("LOWRANK_SEED"); env && *env) {
    char *end = nullptr;
    const auto value = std::strtoull(env, &end, 10);
    if (*end != '\0')
      throw ArgumentError("LOWRANK_SEED must be a nonnegative integer");
    return value;
  }
  return fallback;
}

Matrix random_start(Index rows, Index cols, Index rank_bound,
                    std::uint64_t seed) {
  return truncate_to_rank(random_gaussian(rows, cols, seed), rank_bound)
      .matrix;
}

Matrix load_matrix(const fs::path &path) {
  if (path.extension() == ".csv")
    return io::matrix_from_csv(io::read_text_file(path.string()));
  return io::matrix_from_json(io::read_json_file(path.string()));
}

template <typename T>
void read_opt(const Json &j, const char *key, T &dst) {
  if (j.contains(key))
    dst = j.at(key).get<T>();
}

} // namespace

RunConfig load_config(const std::string &config_path,
                      const Overrides &overrides) {
  const Json doc = io::read_json_file(config_path);
  if (!doc.is_object())
    throw ArgumentError("config must be a JSON object");
  const fs::path base = fs::path(config_path).parent_path();
  auto resolve = [&](const std::string &p) {
    const fs::path path(p);
    return path.is_absolute() ? path : base / path;
  };

  RunConfig cfg;
  if (!doc.contains("problem"))
    throw ArgumentError("config needs 'problem'");
  const auto &problem = doc.at("problem");
  cfg.problem = io::problem_from_json(
      problem.is_string()
          ? io::read_json_file(resolve(problem.get<std::string>()).string())
          : problem);

  if (!doc.contains("rank_bound"))
    throw ArgumentError("config needs 'rank_bound'");
  auto &p = cfg.params;
  p.rank_bound = doc.at("rank_bound").get<Index>();
  const Index m = cfg.problem->rows(), n = cfg.problem->cols();
  if (p.rank_bound < 0 || p.rank_bound >= std::min(m, n))
    throw ArgumentError("rank_bound must lie in [0, min(m, n))");

  if (doc.contains("params")) {
    const auto &j = doc.at("params");
    read_opt(j, "alpha_lo", p.line_search.alpha_lo);
    read_opt(j, "alpha_hi", p.line_search.alpha_hi);
    read_opt(j, "beta", p.line_search.beta);
    read_opt(j, "c", p.line_search.c);
    read_opt(j, "max_backtracks", p.line_search.max_backtracks);
    if (j.contains("initial_alpha"))
      p.line_search.initial_alpha = j.at("initial_alpha").get<double>();
    read_opt(j, "delta", p.delta);
    if (j.contains("stop_tol"))
      p.stop_tol = j.at("stop_tol").get<double>();
    read_opt(j, "max_iters", p.max_iters);
    read_opt(j, "rank_rel_tol", p.rank_rel_tol);
    if (j.contains("projection")) {
      const auto method = j.at("projection").get<std::string>();
      if (method == "ambient")
        p.projection = ProjectionMethod::Ambient;
      else if (method == "factored")
        p.projection = ProjectionMethod::Factored;
      else
        throw ArgumentError("projection must be 'ambient' or 'factored'");
    }
  }
  if (overrides.max_iters)
    p.max_iters = *overrides.max_iters;
  if (overrides.delta)
    p.delta = *overrides.delta;
  if (overrides.stop_tol)
    p.stop_tol = *overrides.stop_tol;
  p.validate();

  const auto algo = doc.value("algorithm", std::string("p2gdr"));
  if (algo == "p2gdr")
    cfg.algorithm = Algorithm::P2gdr;
  else if (algo == "p2gd")
    cfg.algorithm = Algorithm::P2gd;
  else if (algo == "both")
    cfg.algorithm = Algorithm::Both;
  else
    throw ArgumentError("algorithm must be p2gdr, p2gd or both");

  const auto seed = seed_override(doc.value("seed", std::uint64_t{0}));
  const auto x0 = doc.value("x0", std::string("zero"));
  if (x0 == "zero") {
    cfg.x0 = Matrix::Zero(m, n);
  } else if (x0 == "random") {
    cfg.x0 = random_start(m, n, p.rank_bound, seed);
  } else if (x0.rfind("random:", 0) == 0) {
    const auto tail = x0.substr(7);
    char *end = nullptr;
    const auto explicit_seed = std::strtoull(tail.c_str(), &end, 10);
    if (tail.empty() || *end != '\0')
      throw ArgumentError("x0 'random:<seed>' needs an integer seed");
    cfg.x0 = random_start(m, n, p.rank_bound, seed_override(explicit_seed));
  } else {
    cfg.x0 = load_matrix(resolve(x0));
  }
  if (cfg.x0.rows() != m || cfg.x0.cols() != n)
    throw ArgumentError("x0 shape does not match the problem");
  if (numerical_rank(cfg.x0, p.rank_rel_tol) > p.rank_bound)
    throw InfeasiblePointError("x0 has rank above rank_bound");

  cfg.output_dir = overrides.out
                       ? fs::path(*overrides.out)
                       : resolve(doc.value("output_dir", std::string("out")));
  return cfg;
}

int exit_code_for(Termination t) {
  switch (t) {
  case Termination::Stationary:
    return kOk;
  case Termination::MaxIters:
    return kMaxIters;
  case Termination::LineSearchFailure:
    return kLineSearchFailure;
  }
  return kConfigError;
}

namespace {

Trace solve(const RunConfig &config, Algorithm algo) {
  return algo == Algorithm::P2gd
             ? p2gd_plain(*config.problem, config.x0, config.params)
             : p2gdr(*config.problem, config.x0, config.params);
}

const char *algo_name(Algorithm a) {
  return a == Algorithm::P2gd ? "p2gd" : "p2gdr";
}

void write_outputs(const RunConfig &config, Algorithm algo,
                   const Trace &trace) {
  fs::create_directories(config.output_dir);
  const std::string name = algo_name(algo);
  io::write_text_file((config.output_dir / ("trace_" + name + ".csv")).string(),
                      io::trace_to_csv(trace));
  io::write_text_file(
      (config.output_dir / ("summary_" + name + ".json")).string(),
      io::trace_summary(trace).dump(2) + "\n");
}

void report(std::ostream &out, Algorithm algo, const Trace &trace) {
  out << algo_name(algo) << ": " << to_string(trace.termination) << " after "
      << trace.records.size() << " iterations, f = "
      << io::format_double(trace.final_f)
      << ", s = " << io::format_double(trace.final_s)
      << ", rank = " << trace.final_point.rank() << "\n";
}

Json verdict_entry(const Trace &trace) {
  return {{"final_s", trace.final_s},
          {"final_f", trace.final_f},
          {"final_rank", trace.final_point.rank()},
          {"termination", to_string(trace.termination)},
          {"iters", trace.records.size()}};
}

} // namespace

int cmd_run(const RunConfig &config, std::ostream &out) {
  std::vector<Algorithm> algos;
  if (config.algorithm == Algorithm::Both)
    algos = {Algorithm::P2gd, Algorithm::P2gdr};
  else
    algos = {config.algorithm};
  int code = kOk;
  for (auto algo : algos) {
    const auto trace = solve(config, algo);
    write_outputs(config, algo, trace);
    report(out, algo, trace);
    code = std::max(code, exit_code_for(trace.termination));
  }
  return code;
}

int cmd_compare(const RunConfig &config, bool assert_identical,
                std::ostream &out, std::ostream &err) {
  const auto plain = solve(config, Algorithm::P2gd);
  const auto reduced = solve(config, Algorithm::P2gdr);
  write_outputs(config, Algorithm::P2gd, plain);
  write_outputs(config, Algorithm::P2gdr, reduced);
  report(out, Algorithm::P2gd, plain);
  report(out, Algorithm::P2gdr, reduced);

  const double tol = reduced.stop_tol;
  const bool apocalypse =
      plain.final_s > 10.0 * tol && reduced.final_s <= tol;
  const bool identical = io::trace_to_csv(plain) == io::trace_to_csv(reduced);
  const Json verdict{{"p2gd", verdict_entry(plain)},
                     {"p2gdr", verdict_entry(reduced)},
                     {"stop_tol", tol},
                     {"apocalypse_flag", apocalypse},
                     {"identical_traces", identical}};
  io::write_text_file((config.output_dir / "verdict.json").string(),
                      verdict.dump(2) + "\n");
  out << "apocalypse_flag = " << (apocalypse ? "true" : "false")
      << ", identical_traces = " << (identical ? "true" : "false") << "\n";

  if (assert_identical && !identical) {
    err << "error: p2gd and p2gdr traces differ\n";
    return kPropertyFailure;
  }
  return exit_code_for(reduced.termination);
}

int cmd_check(std::ostream &out) {
  const auto results = run_property_suite();
  std::size_t width = 0;
  for (const auto &r : results)
    width = std::max(width, r.name.size());
  bool all = true;
  for (const auto &r : results) {
    out << (r.passed ? "PASS  " : "FAIL  ") << std::left
        << std::setw(static_cast<int>(width)) << r.name << "  " << r.detail
        << "\n";
    all = all && r.passed;
  }
  out << (all ? "all properties hold" : "property failures") << "\n";
  return all ? kOk : kPropertyFailure;
}

namespace {

Json gen_problem(const std::string &type, Index rows, Index cols, Index rank,
                 double observed, std::uint64_t seed) {
  if (rows <= 0 || cols <= 0)
    throw ArgumentError("rows and cols must be positive");
  Matrix target = random_gaussian(rows, cols, seed);
  if (rank > 0)
    target = truncate_to_rank(target, std::min(rank, std::min(rows, cols)))
                 .matrix;
  if (type == "lowrank_approx")
    return io::problem_to_json(LowRankApproxProblem(target));
  if (type == "completion") {
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
    std::bernoulli_distribution keep(observed);
    Matrix mask(rows, cols);
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j)
        mask(i, j) = keep(rng) ? 1.0 : 0.0;
    return io::problem_to_json(MatrixCompletionProblem(target, mask));
  }
  if (type == "polynomial") {
    // f(X) = sum_ij X_ij^2 / 2 - X_00 X_11, a placeholder to edit.
    std::vector<PolynomialTerm> terms;
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j)
        terms.push_back({{{i, j, 2}}, 0.5});
    if (rows > 1 && cols > 1)
      terms.push_back({{{0, 0, 1}, {1, 1, 1}}, -1.0});
    return io::problem_to_json(PolynomialProblem(rows, cols, terms));
  }
  throw ArgumentError("unknown problem type '" + type + "'");
}

} // namespace

int run_cli(const std::vector<std::string> &args, std::ostream &out,
            std::ostream &err) {
  CLI::App app{"First-order optimization on bounded-rank matrices"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides overrides;
  bool assert_identical = false;

  auto add_common = [&](CLI::App *sub) {
    sub->add_option("-c,--config", config_path, "experiment config (JSON)")
        ->required();
    sub->add_option("--max-iters", overrides.max_iters);
    sub->add_option("--delta", overrides.delta);
    sub->add_option("--stop-tol", overrides.stop_tol);
    sub->add_option("--out", overrides.out, "output directory");
  };

  auto *run = app.add_subcommand("run", "solve one configured problem");
  add_common(run);
  auto *compare = app.add_subcommand("compare", "run P2GD and P2GDR");
  add_common(compare);
  compare->add_flag("--assert-identical", assert_identical,
                    "fail unless both traces are byte-identical");
  auto *check = app.add_subcommand("check", "run the property suite");

  std::string gen_type = "lowrank_approx";
  Index gen_rows = 10, gen_cols = 8, gen_rank = 0;
  double gen_observed = 0.6;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  auto *gen = app.add_subcommand("gen-problem", "emit a problem JSON");
  gen->add_option("--type", gen_type)
      ->check(CLI::IsMember({"lowrank_approx", "completion", "polynomial"}));
  gen->add_option("--rows", gen_rows);
  gen->add_option("--cols", gen_cols);
  gen->add_option("--rank", gen_rank, "truncate the target to this rank");
  gen->add_option("--observed", gen_observed, "mask density (completion)")
      ->check(CLI::Range(0.0, 1.0));
  gen->add_option("--seed", gen_seed);
  gen->add_option("-o,--out", gen_out, "write to file instead of stdout");

  std::vector<const char *> argv;
  for (const auto &a : args)
    argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError &e) {
    return app.exit(e, out, err) == 0 ? kOk : kConfigError;
  }

  try {
    if (*check)
      return cmd_check(out);
    if (*gen) {
      const auto doc = gen_problem(gen_type, gen_rows, gen_cols, gen_rank,
                                   gen_observed, gen_seed);
      if (gen_out.empty())
        out << doc.dump(2) << "\n";
      else
        io::write_text_file(gen_out, doc.dump(2) + "\n");
      return kOk;
    }
    const auto config = load_config(config_path, overrides);
    if (*compare)
      return cmd_compare(config, assert_identical, out, err);
    return cmd_run(config, out);
  } catch (const LineSearchFailure &e) {
    err << "error: " << e.what() << "\n";
    return kLineSearchFailure;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }
}

} // namespace lowrank::cli
