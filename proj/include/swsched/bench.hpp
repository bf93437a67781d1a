#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <random>
#include <string>
#include <vector>

#include "swsched/cbr.hpp"
#include "swsched/pipeline.hpp"
#include "swsched/problem_model.hpp"

namespace swsched {

struct Scenario {
  std::string name;
  int patients = 3;
  int workers = 2;
  std::size_t layers = 0;  // 0 selects default_layers
  Entanglement entanglement = Entanglement::Linear;
  std::size_t cases = 243;
  int capacity = 0;  // 0 means "patients"
  double epsilon = 0.7;
  std::size_t restarts = 10;
  std::size_t max_iterations = 500;
};

std::vector<Scenario> scenarios_from_json(const nlohmann::json& doc);
std::vector<Scenario> load_scenarios(const std::filesystem::path& path);

enum class Perturbation { Fresh, Repeat, SlotShift, PatientSwap };

std::string to_string(Perturbation p);

/// Seeded stream of statements over a growing patient population. Each new
/// statement either repeats a recent one, shifts one slot by 15 minutes,
/// swaps one patient for a newcomer, or starts over with new patients.
class PerturbationGenerator {
 public:
  PerturbationGenerator(const Scenario& scenario, std::uint64_t seed);

  struct Draw {
    Perturbation kind = Perturbation::Fresh;
    ProblemInstance statement;
  };

  Draw next();
  /// Statement built around a fixed perturbation of a prior statement.
  ProblemInstance perturb(const ProblemInstance& prior, Perturbation kind);
  ProblemInstance fresh();

 private:
  struct Patient {
    double x = 0.0, y = 0.0;
  };
  int add_patient();
  Minutes random_slot();
  ProblemInstance build(const std::vector<std::pair<int, Minutes>>& visits) const;

  Scenario scenario_;
  std::mt19937_64 rng_;
  std::vector<Patient> population_;  // index = id - 1
  std::vector<ProblemInstance> history_;
};

struct BenchCaseRecord {
  std::size_t index = 0;
  Perturbation kind = Perturbation::Fresh;
  BranchDecision decision;
  Branch final_branch = Branch::TopDown;
  std::size_t evaluations = 0;
  bool solved = false;
  double quality = 0.0;
};

struct BenchRow {
  Scenario scenario;
  std::size_t qubits = 0;
  std::size_t layers = 0;
  std::vector<BenchCaseRecord> cases;
  double reuse_pct = 0.0;
  double reoptimize_pct = 0.0;
  double top_down_pct = 0.0;
  /// REUSE + REOPTIMIZE share over cases past the warm-up.
  double recovered_after_warmup_pct = 0.0;
};

struct BenchOptions {
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  std::size_t warmup = 30;
  ReplanPolicy policy;
};

/// Case index -> simulated wall clock, one day apart.
Timestamp bench_clock(std::size_t case_index);

BenchRow run_scenario(const Scenario& scenario, const BenchOptions& options);
/// Scenarios run on a worker pool; rows come back in input order.
std::vector<BenchRow> run_bench(const std::vector<Scenario>& scenarios, const BenchOptions& options);
std::string render_bench_table(const std::vector<BenchRow>& rows);

struct WarmStartTrial {
  std::size_t cold_evaluations = 0;
  /// Everything replan spent, fallbacks included.
  std::size_t warm_evaluations = 0;
  std::size_t reoptimize_evaluations = 0;
  Branch warm_branch = Branch::TopDown;
  double similarity = 0.0;
};

/// Paired runs: a base statement is solved and retained, then a perturbed
/// statement is solved both cold (full restarts) and through replan.
std::vector<WarmStartTrial> warm_start_trials(const Scenario& scenario, std::size_t trials, std::uint64_t seed,
                                              const ReplanPolicy& policy = {});

}  // namespace swsched
