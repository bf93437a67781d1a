#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <fmt/format.h>
#include <iostream>
#include <sstream>

#include "swsched/bench.hpp"
#include "swsched/case_log.hpp"
#include "swsched/cbr.hpp"
#include "swsched/instance_io.hpp"
#include "swsched/oracle.hpp"
#include "swsched/pipeline.hpp"
#include "swsched/schedule.hpp"
#include "swsched/sweep.hpp"

namespace fs = std::filesystem;
using namespace swsched;

namespace {

constexpr int kExitFeasible = 0;
constexpr int kExitInputError = 1;
constexpr int kExitInfeasible = 2;

struct SolverFlags {
  std::size_t layers = 0;
  std::string entanglement = "linear";
  std::string optimizer;
  std::size_t restarts = 10;
  std::uint64_t seed = 0;
  std::size_t shots = 0;
  std::optional<double> penalty;
  std::string encoding = "full";
  std::size_t max_iterations = 500;
  bool no_oracle = false;

  void attach(CLI::App* app) {
    app->add_option("--layers", layers, "Ansatz layers (default by qubit count)");
    app->add_option("--entanglement", entanglement, "linear or full")->check(CLI::IsMember({"linear", "full"}));
    app->add_option("--optimizer", optimizer, "cobyla, spsa or gd")->check(CLI::IsMember({"cobyla", "spsa", "gd"}));
    app->add_option("--restarts", restarts, "Random restarts")->check(CLI::PositiveNumber);
    app->add_option("--seed", seed, "Random seed");
    app->add_option("--shots", shots, "Sample the expectation with this many shots");
    app->add_option("--penalty", penalty, "Constraint penalty A (default 10 * max w)");
    app->add_option("--encoding", encoding, "full (every arc) or patients (patient arcs only)")
        ->check(CLI::IsMember({"full", "patients"}));
    app->add_option("--max-iterations", max_iterations, "Optimizer iteration cap")->check(CLI::PositiveNumber);
    app->add_flag("--no-oracle", no_oracle, "Skip the brute-force cross-check");
  }

  SolveOptions options() const {
    SolveOptions o;
    auto& s = o.settings;
    s.layers = layers;
    s.entanglement = entanglement_from_string(entanglement);
    s.encoding = encoding_from_string(encoding);
    s.penalty = penalty;
    s.vqe.restarts = restarts;
    s.vqe.seed = seed;
    s.vqe.max_iterations = max_iterations;
    if (shots > 0) s.vqe.shots = shots;
    if (!optimizer.empty()) s.vqe.optimizer = optimizer_from_string(optimizer);
    o.use_oracle = !no_oracle;
    return o;
  }
};

fs::path output_dir(const std::string& out, const fs::path& input) {
  fs::path dir = out.empty() ? input.parent_path() : fs::path(out);
  if (dir.empty()) dir = ".";
  fs::create_directories(dir);
  return dir;
}

void write_schedule_files(const fs::path& dir, const std::string& stem, const Schedule& schedule, bool gantt) {
  write_text_file(dir / (stem + ".schedule.json"), schedule_to_json(schedule).dump(2) + "\n");
  write_text_file(dir / (stem + ".timetable.txt"), render_timetable(schedule));
  if (gantt) write_text_file(dir / (stem + ".gantt.svg"), render_gantt_svg({schedule}));
}

std::string time_warnings(const Schedule& schedule) {
  std::string out;
  for (const auto& c : time_conflicts(schedule))
    out += fmt::format("warning: worker {} has overlapping visits for patients {} and {}\n", c.worker + 1,
                       c.first_patient, c.second_patient);
  return out;
}

int cmd_solve(const std::string& input, const SolverFlags& flags, const std::string& out, bool gantt) {
  const fs::path path(input);
  const auto instance = load_instance(path);
  const auto outcome = solve_instance(instance, flags.options());
  const auto dir = output_dir(out, path);
  const auto stem = path.stem().string();

  nlohmann::json result{{"instance", path.filename().string()},
                        {"encoding", to_string(outcome.compiled.map.encoding())},
                        {"qubits", outcome.ansatz.n_qubits},
                        {"layers", outcome.ansatz.layers},
                        {"entanglement", to_string(outcome.ansatz.entanglement)},
                        {"penalty_A", outcome.compiled.model.penalty_A},
                        {"vqe_energy", outcome.vqe.best_energy},
                        {"most_probable", outcome.vqe.best_bitstring.to_string()},
                        {"most_probable_feasibility", outcome.report.summary()},
                        {"evaluations", outcome.vqe.evaluations},
                        {"feasible", outcome.assignment.has_value()}};
  if (outcome.assignment) {
    result["assignment"] = outcome.assignment->to_string();
    result["energy"] = *outcome.energy;
    result["total_weight"] = outcome.schedule->total_weight;
  }
  if (outcome.oracle) {
    result["oracle_energy"] = outcome.oracle->energy;
    result["oracle_assignment"] = outcome.oracle->assignment.to_string();
  }
  write_text_file(dir / (stem + ".result.json"), result.dump(2) + "\n");
  write_text_file(dir / (stem + ".trace.csv"), trace_to_csv(outcome.vqe.trace));

  std::cout << fmt::format("qubits: {}  layers: {}  evaluations: {}\n", outcome.ansatz.n_qubits,
                           outcome.ansatz.layers, outcome.vqe.evaluations);
  std::cout << fmt::format("vqe energy: {:.6f}\n", outcome.vqe.best_energy);
  if (outcome.oracle) std::cout << fmt::format("oracle feasible minimum: {:.6f}\n", outcome.oracle->energy);
  if (!outcome.schedule) {
    std::cout << "no feasible schedule: " << outcome.report.summary() << "\n";
    return kExitInfeasible;
  }
  std::cout << fmt::format("energy: {:.6f}\nsolution: {}\n", *outcome.energy, outcome.assignment->to_string());
  std::cout << fmt::format("total weight: {:.3f}\n", outcome.schedule->total_weight);
  std::cout << render_timetable(*outcome.schedule) << time_warnings(*outcome.schedule);
  write_schedule_files(dir, stem, *outcome.schedule, gantt);
  return kExitFeasible;
}

int cmd_replan(const std::string& input, const SolverFlags& flags, std::string case_log,
               std::optional<Timestamp> now, const std::string& out, bool gantt) {
  const fs::path path(input);
  const auto instance = load_instance(path);
  if (case_log.empty())
    if (const char* env = std::getenv("SCHED_CASE_LOG")) case_log = env;
  std::unique_ptr<CaseBase> base = case_log.empty() ? std::make_unique<CaseBase>() : std::make_unique<CaseBase>(case_log);
  const Timestamp at =
      now ? *now
          : std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count();
  ReplanOptions options;
  options.solve = flags.options();
  const auto outcome = replan(*base, instance, options, at);

  std::cout << fmt::format("branch: {}\n", to_string(outcome.final_branch));
  std::cout << fmt::format("retrieved: {}\n", to_string(outcome.decision.branch));
  std::cout << fmt::format("similarity: {:.6f}\n", outcome.decision.similarity);
  if (outcome.decision.matched_case) std::cout << fmt::format("matched case: {}\n", *outcome.decision.matched_case);
  std::cout << fmt::format("evaluations: {}\n", outcome.evaluations);
  for (const auto& note : outcome.notes) std::cout << note << "\n";
  if (!outcome.schedule) return kExitInfeasible;
  if (outcome.quality) std::cout << fmt::format("quality ratio: {:.6f}\n", *outcome.quality);
  if (outcome.retained_id) std::cout << fmt::format("retained as case {}\n", *outcome.retained_id);
  std::cout << render_timetable(*outcome.schedule) << time_warnings(*outcome.schedule);
  write_schedule_files(output_dir(out, path), path.stem().string(), *outcome.schedule, gantt);
  return kExitFeasible;
}

int cmd_oracle(const std::string& input, const SolverFlags& flags, const std::string& bits) {
  const auto instance = load_instance(input);
  require_valid(instance);
  const auto options = flags.options();
  const auto weights = build_weight_matrix(instance);
  const auto compiled =
      compile_qubo(weights, instance.n_workers, options.settings.penalty, options.settings.encoding);
  std::cout << fmt::format("variables: {}  penalty A: {}\n", compiled.map.size(), compiled.model.penalty_A);
  if (!bits.empty()) {
    const auto x = Bitstring::parse(bits);
    const auto report = check_feasibility(x, compiled.map, instance);
    std::cout << fmt::format("energy: {:.6f}\n{}\n", energy(compiled.model, x), report.summary());
    return report.feasible ? kExitFeasible : kExitInfeasible;
  }
  if (compiled.map.size() <= kDefaultEnumerationCap) {
    const auto all = enumerate(compiled.model);
    std::cout << fmt::format("penalized minimum: {:.6f}\n", all.min_energy);
    for (const auto& x : all.argmin)
      std::cout << fmt::format("  {}  {}\n", x.to_string(), check_feasibility(x, compiled.map, instance).summary());
  }
  const auto best = feasible_minimum(compiled.model, compiled.map, instance);
  if (!best) {
    std::cout << "no feasible assignment\n";
    return kExitInfeasible;
  }
  const auto schedule = decode(best->assignment, compiled.map, instance, weights);
  std::cout << fmt::format("feasible minimum: {:.6f}\nsolution: {}\n", best->energy, best->assignment.to_string());
  std::cout << render_timetable(schedule);
  return kExitFeasible;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (item.find_first_not_of(" \t", used) != std::string::npos)
      throw std::invalid_argument(fmt::format("bad grid value '{}'", item));
    grid.push_back(v);
  }
  if (grid.empty()) throw std::invalid_argument("epsilon grid is empty");
  return grid;
}

int cmd_sweep(const std::string& input, const SolverFlags& flags, const std::string& grid, bool refine, bool vqe) {
  const auto instance = load_instance(input);
  SweepOptions options;
  options.solve = flags.options();
  options.refine = refine;
  options.use_vqe = vqe;
  const auto report = epsilon_sweep(instance, parse_grid(grid), options);
  std::cout << render_sweep(report);
  return report.best ? kExitFeasible : kExitInfeasible;
}

int cmd_bench(const std::string& input, std::uint64_t seed, std::size_t threads, std::size_t cases,
              std::size_t warmup, std::size_t restarts, std::size_t max_iterations) {
  auto scenarios = load_scenarios(input);
  for (auto& s : scenarios) {
    if (cases) s.cases = cases;
    if (restarts) s.restarts = restarts;
    if (max_iterations) s.max_iterations = max_iterations;
  }
  BenchOptions options;
  options.seed = seed;
  options.threads = threads;
  options.warmup = warmup;
  const auto rows = run_bench(scenarios, options);
  std::cout << render_bench_table(rows);
  for (const auto& r : rows)
    std::cout << fmt::format("{}: recovered after warm-up {:.2f}%\n", r.scenario.name, r.recovered_after_warmup_pct);
  return kExitFeasible;
}

int cmd_render(const std::vector<std::string>& inputs, const std::string& out, bool timetables) {
  std::vector<Schedule> week;
  for (const auto& input : inputs) {
    const auto doc = read_json_file(input);
    if (doc.contains("routes")) {
      week.push_back(schedule_from_json(doc));
      continue;
    }
    const auto days = doc.contains("visits") ? week_from_json(doc) : std::vector<ProblemInstance>{instance_from_json(doc)};
    for (const auto& day : days) {
      const auto weights = build_weight_matrix(day);
      const auto compiled = compile_qubo(weights, day.n_workers, std::nullopt, Encoding::FullArc);
      const auto best = feasible_minimum(compiled.model, compiled.map, day);
      if (!best) throw std::invalid_argument(fmt::format("day '{}' has no feasible schedule", day.day));
      week.push_back(decode(best->assignment, compiled.map, day, weights));
    }
  }
  if (timetables)
    for (const auto& s : week) std::cout << fmt::format("Result of {}'s path\n", s.day) << render_timetable(s);
  const auto svg = render_gantt_svg(week);
  if (out.empty())
    std::cout << svg;
  else
    write_text_file(out, svg);
  return kExitFeasible;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Social-worker routing and scheduling with a simulated VQE and case memory"};
  app.require_subcommand(1);

  SolverFlags solve_flags, replan_flags, oracle_flags, sweep_flags;
  std::string instance_path, out_dir, case_log, bits, grid = "0.4,0.7,1.1", render_out, bench_path;
  bool gantt = false, refine = false, use_vqe = false, timetables = false;
  std::optional<Timestamp> now;
  std::uint64_t bench_seed = 1;
  std::size_t threads = 1, cases = 0, warmup = 30, bench_restarts = 0, bench_iterations = 0;
  std::vector<std::string> render_inputs;

  auto* solve = app.add_subcommand("solve", "Solve one day with the VQE");
  solve->add_option("instance", instance_path, "Instance file")->required();
  solve_flags.attach(solve);
  solve->add_option("--out", out_dir, "Output directory (default: beside the input)");
  solve->add_flag("--gantt", gantt, "Also write a Gantt SVG");

  auto* replan_cmd = app.add_subcommand("replan", "Solve through the case memory");
  replan_cmd->add_option("instance", instance_path, "Instance file")->required();
  replan_flags.attach(replan_cmd);
  replan_cmd->add_option("--case-log", case_log, "Case log path (default $SCHED_CASE_LOG)");
  replan_cmd->add_option("--now", now, "Clock in epoch seconds");
  replan_cmd->add_option("--out", out_dir, "Output directory (default: beside the input)");
  replan_cmd->add_flag("--gantt", gantt, "Also write a Gantt SVG");

  auto* oracle_cmd = app.add_subcommand("oracle", "Brute-force minimum and feasibility check");
  oracle_cmd->alias("check");
  oracle_cmd->add_option("instance", instance_path, "Instance file")->required();
  oracle_flags.attach(oracle_cmd);
  oracle_cmd->add_option("--bitstring", bits, "Check this assignment instead");

  auto* bench = app.add_subcommand("bench", "Run seeded case-memory scenarios");
  bench->add_option("scenarios", bench_path, "Scenario file")->required();
  bench->add_option("--seed", bench_seed, "Random seed");
  bench->add_option("--threads", threads, "Scenarios run in parallel")->check(CLI::PositiveNumber);
  bench->add_option("--cases", cases, "Override the case count of every scenario");
  bench->add_option("--warmup", warmup, "Cases excluded from the recovered share");
  bench->add_option("--restarts", bench_restarts, "Override VQE restarts");
  bench->add_option("--max-iterations", bench_iterations, "Override the optimizer iteration cap");

  auto* sweep = app.add_subcommand("sweep", "Solve over a grid of epsilon values");
  sweep->add_option("instance", instance_path, "Instance file")->required();
  sweep_flags.attach(sweep);
  sweep->add_option("--grid", grid, "Comma-separated epsilon values");
  sweep->add_flag("--refine", refine, "Bisect around the best grid point");
  sweep->add_flag("--vqe", use_vqe, "Solve each point with the VQE instead of the oracle");

  auto* render = app.add_subcommand("render", "Gantt SVG from schedules, instances or a week file");
  render->add_option("inputs", render_inputs, "Schedule, instance or week files")->required();
  render->add_option("--out", render_out, "SVG path (default: stdout)");
  render->add_flag("--timetable", timetables, "Print the timetables");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return cmd_solve(instance_path, solve_flags, out_dir, gantt);
    if (replan_cmd->parsed()) return cmd_replan(instance_path, replan_flags, case_log, now, out_dir, gantt);
    if (oracle_cmd->parsed()) return cmd_oracle(instance_path, oracle_flags, bits);
    if (bench->parsed())
      return cmd_bench(bench_path, bench_seed, threads, cases, warmup, bench_restarts, bench_iterations);
    if (sweep->parsed()) return cmd_sweep(instance_path, sweep_flags, grid, refine, use_vqe);
    if (render->parsed()) return cmd_render(render_inputs, render_out, timetables);
  } catch (const PenaltyError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const CaseLogError& e) {
    std::cerr << "error: refusing corrupt case log: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}
