#include "swsched/bench.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <fmt/format.h>
#include <thread>

#include "swsched/instance_io.hpp"

namespace swsched {

namespace {

constexpr double kAreaMinutes = 40.0;
constexpr Minutes kDayStart = 8 * 60;
constexpr Minutes kLastStart = 17 * 60;
constexpr Minutes kVisitLength = 60;
constexpr Minutes kShift = 15;
constexpr std::size_t kRecentWindow = 30;
constexpr Timestamp kBenchEpoch = 1'700'000'000;

double uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t pick(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

}  // namespace

std::vector<Scenario> scenarios_from_json(const nlohmann::json& doc) {
  const auto& list = doc.is_array() ? doc : doc.at("scenarios");
  std::vector<Scenario> out;
  for (const auto& s : list) {
    Scenario sc;
    sc.patients = s.at("patients").get<int>();
    sc.workers = s.at("workers").get<int>();
    sc.layers = s.value("layers", std::size_t{0});
    sc.entanglement = entanglement_from_string(s.value("entanglement", std::string{"linear"}));
    sc.cases = s.value("cases", std::size_t{243});
    sc.capacity = s.value("capacity", 0);
    sc.epsilon = s.value("epsilon", 0.7);
    sc.restarts = s.value("restarts", std::size_t{10});
    sc.max_iterations = s.value("max_iterations", std::size_t{500});
    sc.name = s.value("name", fmt::format("{}p{}w-{}", sc.patients, sc.workers, to_string(sc.entanglement)));
    if (sc.patients < 1 || sc.workers < 1 || sc.workers > sc.patients)
      throw std::invalid_argument(fmt::format("scenario {}: need 1 <= workers <= patients", sc.name));
    if (sc.cases < 1) throw std::invalid_argument(fmt::format("scenario {}: cases must be positive", sc.name));
    out.push_back(std::move(sc));
  }
  return out;
}

std::vector<Scenario> load_scenarios(const std::filesystem::path& path) {
  return scenarios_from_json(read_json_file(path));
}

std::string to_string(Perturbation p) {
  switch (p) {
    case Perturbation::Fresh: return "fresh";
    case Perturbation::Repeat: return "repeat";
    case Perturbation::SlotShift: return "slot-shift";
    case Perturbation::PatientSwap: return "patient-swap";
  }
  return "fresh";
}

PerturbationGenerator::PerturbationGenerator(const Scenario& scenario, std::uint64_t seed)
    : scenario_(scenario), rng_(seed) {}

int PerturbationGenerator::add_patient() {
  population_.push_back({uniform(rng_) * kAreaMinutes, uniform(rng_) * kAreaMinutes});
  return static_cast<int>(population_.size());
}

Minutes PerturbationGenerator::random_slot() {
  const auto steps = static_cast<std::size_t>((kLastStart - kDayStart) / kShift) + 1;
  return kDayStart + static_cast<Minutes>(pick(rng_, steps)) * kShift;
}

ProblemInstance PerturbationGenerator::build(const std::vector<std::pair<int, Minutes>>& visits) const {
  ProblemInstance inst;
  inst.n_workers = scenario_.workers;
  inst.capacity = scenario_.capacity > 0 ? scenario_.capacity : scenario_.patients;
  inst.epsilon = scenario_.epsilon;
  std::vector<std::pair<double, double>> points{{kAreaMinutes / 2.0, kAreaMinutes / 2.0}};
  for (const auto& [id, start] : visits) {
    inst.patients.push_back({id, start, start + kVisitLength, ""});
    const auto& p = population_.at(static_cast<std::size_t>(id - 1));
    points.emplace_back(p.x, p.y);
  }
  inst.distances = euclidean_distances(points);
  // Round to 0.1 minute so statements compare exactly across rebuilds.
  for (std::size_t i = 0; i < inst.distances.size(); ++i)
    for (std::size_t j = 0; j < inst.distances.size(); ++j)
      inst.distances(i, j) = std::round(inst.distances(i, j) * 10.0) / 10.0;
  return canonicalize(inst);
}

ProblemInstance PerturbationGenerator::fresh() {
  std::vector<std::pair<int, Minutes>> visits;
  for (int k = 0; k < scenario_.patients; ++k) visits.emplace_back(add_patient(), random_slot());
  auto inst = build(visits);
  history_.push_back(inst);
  return inst;
}

ProblemInstance PerturbationGenerator::perturb(const ProblemInstance& prior, Perturbation kind) {
  std::vector<std::pair<int, Minutes>> visits;
  for (const auto& p : prior.patients) visits.emplace_back(p.patient_id, p.slot_start);
  const auto victim = pick(rng_, visits.size());
  switch (kind) {
    case Perturbation::Repeat:
    case Perturbation::Fresh:
      break;
    case Perturbation::SlotShift: {
      auto& start = visits[victim].second;
      start = (start + kShift <= kLastStart && (rng_() & 1U)) || start - kShift < kDayStart ? start + kShift
                                                                                            : start - kShift;
      break;
    }
    case Perturbation::PatientSwap:
      visits[victim] = {add_patient(), random_slot()};
      break;
  }
  auto inst = build(visits);
  history_.push_back(inst);
  return inst;
}

PerturbationGenerator::Draw PerturbationGenerator::next() {
  if (history_.empty()) return {Perturbation::Fresh, fresh()};
  const double u = uniform(rng_);
  Perturbation kind = Perturbation::Fresh;
  if (u < 0.45)
    kind = Perturbation::Repeat;
  else if (u < 0.65)
    kind = Perturbation::SlotShift;
  else if (u < 0.85)
    kind = Perturbation::PatientSwap;
  if (kind == Perturbation::Fresh) return {kind, fresh()};
  const auto window = std::min(history_.size(), kRecentWindow);
  const auto prior = history_[history_.size() - window + pick(rng_, window)];
  return {kind, perturb(prior, kind)};
}

Timestamp bench_clock(std::size_t case_index) {
  return kBenchEpoch + static_cast<Timestamp>(case_index) * kSecondsPerDay;
}

namespace {

ReplanOptions replan_options_for(const Scenario& scenario, const ReplanPolicy& policy, std::uint64_t seed) {
  ReplanOptions o;
  o.policy = policy;
  auto& s = o.solve.settings;
  s.encoding = Encoding::PatientsOnly;
  s.layers = scenario.layers;
  s.entanglement = scenario.entanglement;
  s.vqe.restarts = scenario.restarts;
  s.vqe.max_iterations = scenario.max_iterations;
  s.vqe.seed = seed;
  const auto qubits = static_cast<std::size_t>(scenario.patients * (scenario.patients - 1));
  o.solve.use_oracle = qubits <= kDefaultEnumerationCap;
  return o;
}

}  // namespace

BenchRow run_scenario(const Scenario& scenario, const BenchOptions& options) {
  BenchRow row;
  row.scenario = scenario;
  row.qubits = static_cast<std::size_t>(scenario.patients * (scenario.patients - 1));
  row.layers = scenario.layers ? scenario.layers : default_layers(row.qubits);

  PerturbationGenerator gen(scenario, options.seed);
  CaseBase base;
  std::array<std::size_t, 3> counts{}, late{};
  std::size_t late_total = 0;
  for (std::size_t i = 0; i < scenario.cases; ++i) {
    const auto draw = gen.next();
    const auto replan_opts = replan_options_for(scenario, options.policy, options.seed + i);
    const auto outcome = replan(base, draw.statement, replan_opts, bench_clock(i));
    BenchCaseRecord rec;
    rec.index = i;
    rec.kind = draw.kind;
    rec.decision = outcome.decision;
    rec.final_branch = outcome.final_branch;
    rec.evaluations = outcome.evaluations;
    rec.solved = outcome.schedule.has_value();
    rec.quality = outcome.quality.value_or(0.0);
    const auto b = static_cast<std::size_t>(rec.final_branch);
    ++counts[b];
    if (i >= options.warmup) {
      ++late[b];
      ++late_total;
    }
    row.cases.push_back(rec);
  }
  const auto total = static_cast<double>(scenario.cases);
  row.reuse_pct = 100.0 * static_cast<double>(counts[0]) / total;
  row.reoptimize_pct = 100.0 * static_cast<double>(counts[1]) / total;
  row.top_down_pct = 100.0 * static_cast<double>(counts[2]) / total;
  row.recovered_after_warmup_pct =
      late_total ? 100.0 * static_cast<double>(late[0] + late[1]) / static_cast<double>(late_total) : 0.0;
  return row;
}

std::vector<BenchRow> run_bench(const std::vector<Scenario>& scenarios, const BenchOptions& options) {
  std::vector<BenchRow> rows(scenarios.size());
  std::vector<std::exception_ptr> errors(scenarios.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < scenarios.size(); i = next++) {
      try {
        rows[i] = run_scenario(scenarios[i], options);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto threads = std::max<std::size_t>(1, std::min(options.threads, scenarios.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rows;
}

std::string render_bench_table(const std::vector<BenchRow>& rows) {
  std::string out = fmt::format("{:<10} {:<15} {:<8} {:<8} {:<13} {:<12} {:>10} {:>12} {:>10}\n", "# Patients",
                                "# Social Workers", "# Qubits", "# Layers", "Entanglement", "# Total cases", "Reuse",
                                "Reoptimize", "Top-Down");
  for (const auto& r : rows)
    out += fmt::format("{:<10} {:<15} {:<8} {:<8} {:<13} {:<12} {:>9.2f}% {:>11.2f}% {:>9.2f}%\n", r.scenario.patients,
                       r.scenario.workers, r.qubits, r.layers, to_string(r.scenario.entanglement), r.cases.size(),
                       r.reuse_pct, r.reoptimize_pct, r.top_down_pct);
  return out;
}

std::vector<WarmStartTrial> warm_start_trials(const Scenario& scenario, std::size_t trials, std::uint64_t seed,
                                              const ReplanPolicy& policy) {
  std::vector<WarmStartTrial> out;
  PerturbationGenerator gen(scenario, seed);
  for (std::size_t t = 0; t < trials; ++t) {
    const auto opts = replan_options_for(scenario, policy, seed + t);
    const auto original = gen.fresh();
    CaseBase base;
    replan(base, original, opts, bench_clock(0));
    const auto changed = gen.perturb(original, Perturbation::PatientSwap);

    WarmStartTrial trial;
    trial.cold_evaluations = solve_instance(changed, opts.solve).vqe.evaluations;
    const auto warm = replan(base, changed, opts, bench_clock(1));
    trial.warm_evaluations = warm.evaluations;
    trial.reoptimize_evaluations = warm.reoptimize_evaluations;
    trial.warm_branch = warm.final_branch;
    trial.similarity = warm.decision.similarity;
    out.push_back(trial);
  }
  return out;
}

}  // namespace swsched
