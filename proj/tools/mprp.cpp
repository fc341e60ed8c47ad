// Command-line surface for the routing toolkit: instance generation,
// solving, validation, and oracle-checked benchmarking over the text
// formats in mprp/io.hpp.
//
// Exit codes: 0 success, 1 validation failure, 2 usage or parse error.

#include <atomic>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "mprp/mprp.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty())
    std::fputs(text.c_str(), stdout);
  else
    mprp::write_file(path, text);
}

struct SolveOutcome {
  mprp::Solution solution;
  std::string solver;
  mprp::MprpMLog log;
  bool has_log = false;
  int derived_sites = -1;
  double alpha = 0.0;
  int intervals = 0;
};

SolveOutcome run_solver(const mprp::Instance& inst, const std::string& solver_choice,
                        const mprp::SolverConfig& config, double epsilon) {
  SolveOutcome out;
  switch (inst.mode) {
    case mprp::Mode::Mprp:
      if (solver_choice == "exact") {
        auto exact = mprp::solve_exact_mprp(inst, config);
        if (!exact)
          throw std::invalid_argument("exact solver refuses n > " +
                                      std::to_string(config.exact_threshold) +
                                      "; use --solver heuristic or auto");
        out.solution = *exact;
        out.solver = "exact";
      } else if (solver_choice == "heuristic") {
        out.solution = mprp::solve_heuristic_mprp(inst, config);
        out.solver = "heuristic";
      } else {
        out.solution = mprp::solve_baseline(inst, config);
        out.solver = inst.num_sites() <= config.exact_threshold ? "exact" : "heuristic";
      }
      break;
    case mprp::Mode::MprpM:
      out.solution = mprp::solve_mprp_m(inst, config, &out.log);
      out.solver = "mprp-m";
      out.has_log = true;
      break;
    case mprp::Mode::MprpMvs: {
      const mprp::DerivedInstance derived = mprp::derive_instance(inst, epsilon);
      const mprp::Solution derived_sol = mprp::solve_mprp_m(derived.base, config, &out.log);
      out.solution = mprp::map_back(inst, derived_sol, derived);
      if (out.solution.profit < 0.0) {
        out.solution = mprp::empty_solution(inst);
        out.solution.set_profit(mprp::evaluate_profit(inst, out.solution));
      }
      out.solver = "mprp-mvs";
      out.has_log = true;
      out.derived_sites = derived.base.num_sites();
      out.alpha = derived.alpha;
      out.intervals = derived.intervals;
      break;
    }
  }
  return out;
}

int cmd_generate(uint64_t seed, int n, int m, const std::string& mode, double horizon,
                 double capacity, double side, double qmin, double qmax, const std::string& out_path) {
  mprp::GenerateParams params;
  params.seed = seed;
  params.n = n;
  params.m = m;
  params.mode = mprp::parse_mode(mode);
  params.horizon = horizon;
  params.capacity = capacity;
  params.side = side;
  params.q_min = qmin;
  params.q_max = qmax;
  const mprp::Instance inst = mprp::generate_instance(params);
  std::string text = mprp::write_instance(inst);
  if (params.mode == mprp::Mode::MprpMvs)
    text += "# alpha-bound " + mprp::fmt(qmax / qmin) + "\n";
  emit(text, out_path);
  return 0;
}

int cmd_solve(const std::string& instance_path, const std::string& mode_flag,
              const std::string& solver_choice, mprp::SolverConfig config, double epsilon,
              bool epsilon_set, bool with_oracle, const mprp::OracleLimits& limits,
              bool diagnostics, int diag_trials, bool timings, const std::string& out_path,
              const std::string& solution_path) {
  const mprp::Instance inst = mprp::parse_instance(mprp::read_file(instance_path));
  if (!mode_flag.empty() && mprp::parse_mode(mode_flag) != inst.mode)
    throw std::invalid_argument("--mode " + mode_flag + " does not match the instance mode " +
                                mprp::mode_name(inst.mode));
  if (inst.mode == mprp::Mode::MprpMvs && !epsilon_set)
    throw std::invalid_argument("mode mprp-mvs needs --epsilon");

  const auto start = Clock::now();
  const SolveOutcome outcome = run_solver(inst, solver_choice, config, epsilon);
  const double elapsed = seconds_since(start);

  const mprp::ValidationReport report = mprp::validate(inst, outcome.solution);

  mprp::RunReport run;
  run.command = "solve";
  run.instance = &inst;
  run.solver = outcome.solver;
  run.config = config;
  if (inst.mode == mprp::Mode::MprpMvs) run.epsilon = epsilon;
  run.solution = &outcome.solution;
  run.validation = &report;
  if (outcome.has_log) {
    run.reassignments = static_cast<int>(outcome.log.applications.size());
    run.overload_flags = outcome.log.overload_rejections;
  }
  run.derived_sites = outcome.derived_sites;
  run.alpha = outcome.alpha;
  run.intervals = outcome.intervals;

  if (with_oracle) {
    if (auto oracle = mprp::brute_force_optimum(inst, limits)) {
      run.oracle_profit = oracle->profit;
      run.oracle_lower_bound = oracle->grid_lower_bound;
      if (oracle->profit > mprp::kQtyTol)
        run.ratio = mprp::measure_ratio(oracle->profit, std::max(0.0, outcome.solution.profit));
    }
  }
  if (diagnostics) {
    if (inst.mode == mprp::Mode::MprpM)
      run.ordering = mprp::ordering_gain_ratio(inst, config, diag_trials, config.rng_seed);
    else if (inst.mode == mprp::Mode::MprpMvs)
      run.ordering =
          mprp::ordering_gain_ratio(mprp::derive_instance(inst, epsilon).base, config, diag_trials,
                                    config.rng_seed);
    run.fleet = mprp::fleet_ratio_diagnostic(inst, config, epsilon);
  }
  if (timings) run.seconds = elapsed;

  emit(mprp::write_report(run), out_path);
  if (!solution_path.empty()) mprp::write_file(solution_path, mprp::write_solution(outcome.solution));
  return report.ok() ? 0 : 1;
}

int cmd_validate(const std::string& instance_path, const std::string& solution_path,
                 const std::string& out_path) {
  const mprp::Instance inst = mprp::parse_instance(mprp::read_file(instance_path));
  const mprp::Solution sol = mprp::parse_solution(mprp::read_file(solution_path));
  const mprp::ValidationReport report = mprp::validate(inst, sol);
  mprp::RunReport run;
  run.command = "validate";
  run.instance = &inst;
  run.validation = &report;
  emit(mprp::write_report(run), out_path);
  return report.ok() ? 0 : 1;
}

int cmd_bench(uint64_t seed, int count, int n_max, int m_max, const std::string& mode,
              mprp::SolverConfig config, double epsilon, bool with_oracle,
              const mprp::OracleLimits& limits, int workers, bool timings,
              const std::string& out_path) {
  const mprp::Mode bench_mode = mprp::parse_mode(mode);
  if (bench_mode == mprp::Mode::MprpMvs && !(epsilon > 0.0))
    throw std::invalid_argument("mode mprp-mvs needs --epsilon");

  struct Row {
    std::string text;
    double profit = 0.0;
    double ratio = 0.0;
    bool ratio_set = false;
    bool ratio_infinite = false;
    bool valid = true;
  };
  std::vector<Row> rows(static_cast<size_t>(count));

  auto run_one = [&](int index) {
    std::mt19937_64 mix(seed + static_cast<uint64_t>(index));
    mprp::GenerateParams params;
    params.seed = mix();
    params.n = n_max > 0 ? static_cast<int>(mix() % static_cast<uint64_t>(n_max + 1)) : 0;
    params.m = 1 + (m_max > 1 ? static_cast<int>(mix() % static_cast<uint64_t>(m_max)) : 0);
    params.mode = bench_mode;
    const mprp::Instance inst = mprp::generate_instance(params);

    const auto start = Clock::now();
    const SolveOutcome outcome = run_solver(inst, "auto", config, epsilon);
    const double elapsed = seconds_since(start);
    const mprp::ValidationReport report = mprp::validate(inst, outcome.solution);

    Row row;
    row.profit = outcome.solution.profit;
    row.valid = report.ok();
    row.text = "instance " + std::to_string(index) + " digest " + mprp::instance_digest(inst) +
               " n " + std::to_string(inst.num_sites()) + " m " + std::to_string(inst.fleet_size) +
               " profit " + mprp::fmt(report.audited_profit.profit) + " violations " +
               std::to_string(report.violations.size());
    if (with_oracle) {
      if (auto oracle = mprp::brute_force_optimum(inst, limits)) {
        row.text += " oracle " + mprp::fmt(oracle->profit);
        if (oracle->profit > mprp::kQtyTol) {
          const double ratio =
              mprp::measure_ratio(oracle->profit, std::max(0.0, outcome.solution.profit));
          row.ratio = ratio;
          row.ratio_set = true;
          row.ratio_infinite = std::isinf(ratio);
          row.text += " ratio " + mprp::fmt(ratio);
        }
      } else {
        row.text += " oracle refused";
      }
    }
    if (timings) row.text += " seconds " + mprp::fmt(elapsed);
    rows[static_cast<size_t>(index)] = std::move(row);
  };

  if (workers <= 1) {
    for (int i = 0; i < count; ++i) run_one(i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    const int spawn = std::min(workers, std::max(1, count));
    pool.reserve(static_cast<size_t>(spawn));
    for (int w = 0; w < spawn; ++w)
      pool.emplace_back([&]() {
        for (;;) {
          const int i = next.fetch_add(1);
          if (i >= count) return;
          run_one(i);
        }
      });
    for (auto& t : pool) t.join();
  }

  std::string out;
  out += "mprp-bench v1\n";
  out += "seed " + std::to_string(seed) + " count " + std::to_string(count) + " mode " + mode +
         " n-max " + std::to_string(n_max) + " m-max " + std::to_string(m_max) + "\n";
  std::vector<double> ratios;
  int invalid = 0;
  double profit_sum = 0.0;
  for (const Row& row : rows) {
    out += row.text + "\n";
    profit_sum += row.profit;
    if (!row.valid) ++invalid;
    if (row.ratio_set) ratios.push_back(row.ratio);
  }
  out += "aggregate instances " + std::to_string(count) + " invalid " + std::to_string(invalid) +
         " profit-sum " + mprp::fmt(profit_sum);
  if (with_oracle) {
    const mprp::RatioStats stats = mprp::aggregate_ratios(ratios);
    out += " ratio-count " + std::to_string(stats.count) + " ratio-max " + mprp::fmt(stats.max_ratio) +
           " ratio-mean " + mprp::fmt(stats.mean_ratio) + " ratio-inf " + std::to_string(stats.infinite);
  }
  out += "\n";
  emit(out, out_path);
  return invalid == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"max-profit pickup routing toolkit"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "write a seeded random instance");
  uint64_t g_seed = 0;
  int g_n = 10, g_m = 2;
  std::string g_mode = "mprp";
  double g_horizon = 480.0, g_capacity = 100.0, g_side = 100.0, g_qmin = 10.0, g_qmax = 60.0;
  std::string g_out;
  gen->add_option("--seed", g_seed, "rng seed");
  gen->add_option("--n", g_n, "number of sites");
  gen->add_option("--m", g_m, "fleet size");
  gen->add_option("--mode", g_mode, "mprp | mprp-m | mprp-mvs");
  gen->add_option("--horizon", g_horizon, "time horizon T");
  gen->add_option("--capacity", g_capacity, "vehicle capacity Q");
  gen->add_option("--side", g_side, "square side for site coordinates");
  gen->add_option("--qmin", g_qmin, "minimum supply");
  gen->add_option("--qmax", g_qmax, "maximum supply");
  gen->add_option("-o,--output", g_out, "output file (default stdout)");

  // shared solver/oracle options
  mprp::SolverConfig config;
  double epsilon = 0.0;
  mprp::OracleLimits limits;
  bool with_oracle = false, diagnostics = false, timings = false;
  int diag_trials = 20;

  auto add_solver_options = [&](CLI::App* cmd) {
    cmd->add_option("--seed", config.rng_seed, "solver rng seed");
    cmd->add_option("--exact-threshold", config.exact_threshold, "max n for the exact baseline");
    cmd->add_option("--insertion-rounds", config.insertion_rounds, "heuristic iteration cap");
    cmd->add_flag("--oracle", with_oracle, "also run the brute-force referee");
    cmd->add_option("--oracle-sites", limits.max_sites, "oracle site limit");
    cmd->add_option("--oracle-vehicles", limits.max_vehicles, "oracle vehicle limit");
    cmd->add_option("--oracle-grid", limits.mvs_time_grid, "oracle pickup instants per window");
    cmd->add_flag("--timings", timings, "include wall-clock timings in the output");
  };

  // solve
  auto* solve = app.add_subcommand("solve", "solve an instance file and report");
  std::string s_instance, s_mode, s_solver = "auto", s_out, s_solution;
  auto* eps_opt = solve->add_option("--epsilon", epsilon, "discretization epsilon (mvs)");
  solve->add_option("instance", s_instance, "instance file")->required();
  solve->add_option("--mode", s_mode, "expected mode (checked against the file)");
  solve->add_option("--solver", s_solver, "auto | exact | heuristic (mprp only)");
  add_solver_options(solve);
  solve->add_flag("--diagnostics", diagnostics, "ordering and fleet diagnostics");
  solve->add_option("--diag-trials", diag_trials, "orderings for the gain diagnostic");
  solve->add_option("-o,--output", s_out, "report file (default stdout)");
  solve->add_option("--solution", s_solution, "also write the solution file");

  // validate
  auto* val = app.add_subcommand("validate", "check a solution file against an instance");
  std::string v_instance, v_solution, v_out;
  val->add_option("instance", v_instance, "instance file")->required();
  val->add_option("solution", v_solution, "solution file")->required();
  val->add_option("-o,--output", v_out, "report file (default stdout)");

  // bench
  auto* bench = app.add_subcommand("bench", "seeded batch of instances with aggregate table");
  uint64_t b_seed = 0;
  int b_count = 10, b_n = 10, b_m = 2, b_workers = 1;
  std::string b_mode = "mprp", b_out;
  bench->add_option("--seed", b_seed, "batch seed");
  bench->add_option("--count", b_count, "number of instances");
  bench->add_option("--n", b_n, "max sites per instance");
  bench->add_option("--m", b_m, "max fleet size");
  bench->add_option("--mode", b_mode, "mprp | mprp-m | mprp-mvs");
  auto* beps_opt = bench->add_option("--epsilon", epsilon, "discretization epsilon (mvs)");
  add_solver_options(bench);
  bench->add_option("--workers", b_workers, "worker threads");
  bench->add_option("-o,--output", b_out, "table file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed())
      return cmd_generate(g_seed, g_n, g_m, g_mode, g_horizon, g_capacity, g_side, g_qmin, g_qmax,
                          g_out);
    if (solve->parsed())
      return cmd_solve(s_instance, s_mode, s_solver, config, epsilon, !eps_opt->empty(), with_oracle,
                       limits, diagnostics, diag_trials, timings, s_out, s_solution);
    if (val->parsed()) return cmd_validate(v_instance, v_solution, v_out);
    if (bench->parsed()) {
      if (mprp::parse_mode(b_mode) == mprp::Mode::MprpMvs && beps_opt->empty())
        throw std::invalid_argument("mode mprp-mvs needs --epsilon");
      return cmd_bench(b_seed, b_count, b_n, b_m, b_mode, config, epsilon, with_oracle, limits,
                       b_workers, timings, b_out);
    }
  } catch (const mprp::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
