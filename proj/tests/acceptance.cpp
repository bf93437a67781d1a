// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failed criteria.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"
#include "swsched/bench.hpp"
#include "swsched/case_log.hpp"
#include "swsched/oracle.hpp"
#include "swsched/pipeline.hpp"
#include "swsched/sweep.hpp"

using namespace swsched;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Criterion 1 ---------------------------------------------------------------

struct OracleRun {
  bool ok = false;
  double vqe = 0.0, oracle = 0.0, rel = 0.0, secs = 0.0;
};

OracleRun vqe_vs_oracle(const ProblemInstance& inst, std::size_t layers) {
  SolveOptions o;
  o.settings.encoding = Encoding::PatientsOnly;
  o.settings.entanglement = Entanglement::Full;
  o.settings.layers = layers;
  o.settings.vqe.restarts = 10;
  o.settings.vqe.max_iterations = 60000;
  const auto t0 = Clock::now();
  const auto r = solve_instance(inst, o);
  OracleRun out;
  out.secs = seconds_since(t0);
  if (!r.oracle) return out;
  out.vqe = r.vqe.best_energy;
  out.oracle = r.oracle->energy;
  out.rel = std::abs(out.vqe - out.oracle) / std::abs(out.oracle);
  out.ok = out.rel <= 1e-6;
  return out;
}

Verdict criterion1() {
  const auto a = vqe_vs_oracle(fixtures::demo3(), 2);
  const auto b = vqe_vs_oracle(fixtures::demo4(), 3);
  Verdict v;
  v.pass = a.ok && a.secs < 60.0 && b.ok && b.secs < 600.0;
  v.detail = fmt::format("6q: vqe {:.9f} oracle {:.9f} rel {:.2e} in {:.1f}s; 12q: vqe {:.9f} oracle {:.9f} rel {:.2e} in {:.1f}s",
                         a.vqe, a.oracle, a.rel, a.secs, b.vqe, b.oracle, b.rel, b.secs);
  return v;
}

// Criterion 2 ---------------------------------------------------------------

Verdict criterion2() {
  std::mt19937_64 rng(2002);
  std::uniform_int_distribution<std::size_t> spins(1, 10), layers(1, 4);
  std::size_t evaluations = 0, violations = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (int m = 0; m < 20; ++m) {
    const auto h = fixtures::random_ising(rng, spins(rng));
    const double lmin = enumerate(h).min_energy;
    for (int k = 0; k < 50; ++k) {
      Ansatz a{h.variable_count(), layers(rng), k % 2 ? Entanglement::Full : Entanglement::Linear, {}};
      const double f = circuit_function(a, h, fixtures::random_angles(rng, a.parameter_count()));
      ++evaluations;
      worst = std::min(worst, f - lmin);
      if (f < lmin - 1e-9) ++violations;
    }
  }
  return {evaluations == 1000 && violations == 0,
          fmt::format("{} evaluations on 20 models, {} violations, min f - lambda_min = {:.3e}", evaluations, violations,
                      worst)};
}

// Criterion 3 ---------------------------------------------------------------

Verdict criterion3() {
  std::mt19937_64 rng(3003);
  std::uniform_int_distribution<std::size_t> vars(1, 12);
  double worst = 0.0;
  std::size_t strings = 0;
  for (int t = 0; t < 200; ++t) {
    const auto m = fixtures::random_qubo(rng, vars(rng));
    const auto is = qubo_to_ising(m);
    const auto v = m.variable_count();
    for (std::uint64_t i = 0; i < (std::uint64_t{1} << v); ++i, ++strings) {
      const auto x = Bitstring::from_index(i, v);
      worst = std::max(worst, std::abs(energy(m, x) - energy(is, x)));
    }
  }
  return {worst <= 1e-9, fmt::format("200 models, {} bitstrings, max |E_qubo - E_ising| = {:.3e}", strings, worst)};
}

// Criterion 4 ---------------------------------------------------------------

Verdict criterion4() {
  std::mt19937_64 rng(4004);
  std::uniform_int_distribution<int> patients(1, 4);
  std::size_t argmins = 0, degree_failures = 0, subtours = 0, schedules = 0, instances_with_subtour = 0;
  bool oracle_ok = true;
  for (int t = 0; t < 100; ++t) {
    const int n = patients(rng);
    std::uniform_int_distribution<int> workers(1, n);
    auto inst = canonicalize(fixtures::random_instance(rng, n, workers(rng)));
    const auto w = build_weight_matrix(inst);
    const auto c = compile_qubo(w, inst.n_workers, std::nullopt, Encoding::FullArc);
    const auto e = enumerate(c.model);
    bool saw_subtour = false;
    for (const auto& x : e.argmin) {
      ++argmins;
      const auto r = check_feasibility(x, c.map, inst);
      if (r.has(Constraint::OutDegree) || r.has(Constraint::InDegree) || r.has(Constraint::DepotOut) ||
          r.has(Constraint::DepotIn))
        ++degree_failures;
      if (r.has(Constraint::Subtour)) {
        ++subtours;
        saw_subtour = true;
        fmt::print("  note: instance {} argmin {} has {}\n", t, x.to_string(), r.summary());
      }
    }
    if (saw_subtour) ++instances_with_subtour;
    const auto best = feasible_minimum(c.model, c.map, inst);
    if (!best) {
      oracle_ok = false;
      continue;
    }
    try {
      const auto s = decode(best->assignment, c.map, inst, w);
      if (check_feasibility(schedule_arcs(s, inst), inst).feasible) ++schedules;
    } catch (const DecodeError&) {
      oracle_ok = false;
    }
  }
  return {degree_failures == 0 && oracle_ok && schedules == 100,
          fmt::format("{} argmins over 100 instances, {} degree violations, {} subtour argmins on {} instances, "
                      "{} valid oracle schedules",
                      argmins, degree_failures, subtours, instances_with_subtour, schedules)};
}

// Criterion 5 ---------------------------------------------------------------

Verdict criterion5() {
  std::mt19937_64 rng(5005);
  std::uniform_int_distribution<std::size_t> qubits(1, 6), layers(1, 3);
  double worst = 0.0;
  std::size_t checked = 0;
  for (int t = 0; t < 100; ++t) {
    Ansatz a{qubits(rng), layers(rng), t % 2 ? Entanglement::Full : Entanglement::Linear, {}};
    const auto h = fixtures::random_ising(rng, a.n_qubits);
    const CircuitEvaluator f(a, h);
    const auto p = fixtures::random_angles(rng, a.parameter_count());
    const auto g = parameter_shift_gradient(f, p);
    for (std::size_t i = 0; i < p.size(); ++i, ++checked) {
      auto up = p, down = p;
      up[i] += 1e-5;
      down[i] -= 1e-5;
      worst = std::max(worst, std::abs(g[i] - (f(up) - f(down)) / 2e-5));
    }
  }
  return {worst <= 1e-6, fmt::format("100 triples, {} partials, max |shift - FD| = {:.3e}", checked, worst)};
}

// Criterion 6 ---------------------------------------------------------------

Verdict criterion6() {
  ProblemInstance inst;
  inst.patients = {{1, 540, 600, ""}, {2, 705, 765, ""}, {3, 900, 960, ""}};
  inst.distances = SquareMatrix(4);
  const double d[4][4] = {{0, 5, 7, 9}, {5, 0, 4, 6}, {7, 4, 0, 10}, {9, 6, 10, 0}};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) inst.distances(i, j) = d[i][j];
  inst.epsilon = 0.7;
  const double w12 = build_weight_matrix(inst).w(1, 2);

  bool zero_ok = true;
  std::mt19937_64 rng(6006);
  for (int t = 0; t < 50; ++t) {
    const auto r = fixtures::random_instance(rng, 2 + t % 6, 1, 0.0);
    zero_ok = zero_ok && build_weight_matrix(r).w == r.distances;
  }
  auto z = inst;
  z.epsilon = 0.0;
  zero_ok = zero_ok && build_weight_matrix(z).w == z.distances;
  return {zero_ok && w12 == 3180.25, fmt::format("eps=0 gives w == d: {}; w12 = {}", zero_ok ? "yes" : "no", w12)};
}

// Criterion 7 ---------------------------------------------------------------

Verdict criterion7() {
  std::vector<Scenario> rows;
  for (const char* file : {"scenarios_table3.json", "scenarios_table4.json"})
    for (const auto& s : load_scenarios(fixtures::data_path(file)))
      if (s.patients * (s.patients - 1) <= 12) rows.push_back(s);
  BenchOptions o;
  o.seed = 7;
  o.threads = 2;
  o.warmup = 30;
  const auto t0 = Clock::now();
  const auto result = run_bench(rows, o);
  bool pass = !result.empty();
  std::string detail;
  for (const auto& r : result) {
    const double sum = r.reuse_pct + r.reoptimize_pct + r.top_down_pct;
    const bool ok = r.cases.size() == 243 && std::abs(sum - 100.0) <= 0.1 && r.recovered_after_warmup_pct >= 70.0;
    pass = pass && ok;
    detail += fmt::format("{} {}q: {} cases, R {:.2f}% O {:.2f}% T {:.2f}% (sum {:.2f}), recovered {:.2f}%; ",
                          r.scenario.name, r.qubits, r.cases.size(), r.reuse_pct, r.reoptimize_pct, r.top_down_pct, sum,
                          r.recovered_after_warmup_pct);
  }
  detail += fmt::format("{:.0f}s", seconds_since(t0));
  fmt::print("{}", render_bench_table(result));
  return {pass, detail};
}

// Criterion 8 ---------------------------------------------------------------

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Verdict criterion8() {
  Scenario s;
  s.name = "paired";
  s.patients = 3;
  s.workers = 2;
  s.entanglement = Entanglement::Full;
  const auto trials = warm_start_trials(s, 20, 8008);
  std::vector<double> cold, warm, total;
  std::size_t dispatched = 0;
  for (const auto& t : trials) {
    cold.push_back(static_cast<double>(t.cold_evaluations));
    total.push_back(static_cast<double>(t.warm_evaluations));
    if (t.reoptimize_evaluations > 0) {
      ++dispatched;
      warm.push_back(static_cast<double>(t.reoptimize_evaluations));
    }
  }
  if (warm.empty()) return {false, "no trial reached REOPTIMIZE"};
  const double ratio = median(warm) / median(cold);
  const double all_in = median(total) / median(cold);
  return {trials.size() == 20 && dispatched == 20 && ratio <= 0.60,
          fmt::format("{} paired trials, {} dispatched to REOPTIMIZE, median evaluations {:.0f} vs cold {:.0f}, "
                      "ratio {:.3f} (target 0.50, pass 0.60); with fallbacks {:.3f}",
                      trials.size(), dispatched, median(warm), median(cold), ratio, all_in)};
}

// Criterion 9 ---------------------------------------------------------------

struct Run {
  int code = -1;
  std::string out;
};

Run run_cli(const std::string& args) {
  Run r;
  FILE* pipe = popen((std::string(SWSCHED_CLI) + " " + args + " 2>&1").c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  while (auto n = fread(buf, 1, sizeof buf, pipe)) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict criterion9() {
  // decode . encode on every feasible assignment of the demo.
  const auto inst = canonicalize(fixtures::demo3());
  const auto w = build_weight_matrix(inst);
  std::size_t assignments = 0, mismatches = 0;
  for (auto enc : {Encoding::FullArc, Encoding::PatientsOnly}) {
    const auto c = compile_qubo(w, inst.n_workers, std::nullopt, enc);
    for (const auto& x : feasible_assignments(c.map, inst)) {
      ++assignments;
      if (encode(decode(x, c.map, inst, w), c.map, inst) != x) ++mismatches;
    }
  }

  // retain -> reload -> retrieve.
  const auto dir = fs::temp_directory_path() / "swsched_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto log = dir / "cases.log";
  std::mt19937_64 rng(9009);
  std::vector<ProblemInstance> probes;
  std::vector<BranchDecision> before;
  const Timestamp now = bench_clock(200);
  {
    CaseBase base(log);
    PerturbationGenerator gen(Scenario{}, 9);
    ReplanOptions o;
    o.solve.settings.encoding = Encoding::PatientsOnly;
    o.solve.settings.vqe.restarts = 3;
    for (std::size_t i = 0; i < 40; ++i) {
      const auto draw = gen.next();
      replan(base, draw.statement, o, bench_clock(i));
      probes.push_back(draw.statement);
    }
    for (int i = 0; i < 10; ++i) probes.push_back(gen.next().statement);
    for (const auto& p : probes) before.push_back(retrieve(base, p, {}, now));
  }
  std::size_t decision_mismatches = 0;
  std::size_t reloaded_size = 0;
  {
    CaseBase base(log);
    reloaded_size = base.size();
    for (std::size_t i = 0; i < probes.size(); ++i)
      if (!(retrieve(base, probes[i], {}, now) == before[i])) ++decision_mismatches;
  }

  // Same-seed solve twice.
  const auto demo = fixtures::data_path("demo_3p2w.json").string();
  const auto a = dir / "a", b = dir / "b";
  const auto flags = " --seed 7 --encoding patients --entanglement full --gantt --out ";
  const auto ra = run_cli("solve " + demo + flags + a.string());
  const auto rb = run_cli("solve " + demo + flags + b.string());
  bool identical = ra.code == 0 && rb.code == 0 && ra.out == rb.out;
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    ++files;
    identical = identical && slurp(entry.path()) == slurp(b / entry.path().filename());
  }
  fs::remove_all(dir);

  return {mismatches == 0 && assignments > 0 && decision_mismatches == 0 && reloaded_size == 40 && identical &&
              files == 5,
          fmt::format("decode.encode {}/{} identical; reload of {} cases, {} of {} decisions differ; solve twice: {} "
                      "files {}",
                      assignments - mismatches, assignments, reloaded_size, decision_mismatches, probes.size(), files,
                      identical ? "byte-identical" : "differ")};
}

// Criterion 10 --------------------------------------------------------------

Verdict criterion10() {
  const auto report = epsilon_sweep(fixtures::demo3(), {0.4, 0.7, 1.1}, SweepOptions{});
  const auto text = render_sweep(report);
  fmt::print("{}", text);
  bool ok = report.rows.size() == 3 && report.best.has_value();
  // Unique argmin under the tie rule: the chosen row has the lowest score and
  // no smaller epsilon ties it.
  if (ok) {
    const auto b = *report.best;
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
      const double si = report.rows[i].quality.score(), sb = report.rows[b].quality.score();
      if (si < sb || (si == sb && i < b)) ok = false;
      if (i > 0 && !(report.rows[i - 1].epsilon < report.rows[i].epsilon)) ok = false;
    }
  }
  // Monotone formatting: header, one equal-width line per row in ascending
  // epsilon, then the argmin line.
  std::vector<std::string> lines;
  std::stringstream ss(text);
  for (std::string line; std::getline(ss, line);) lines.push_back(line);
  ok = ok && lines.size() == 5 && lines.back().rfind("best epsilon: ", 0) == 0;
  for (std::size_t i = 2; ok && i + 1 < lines.size(); ++i) ok = lines[i].size() == lines[1].size();
  return {ok, fmt::format("{} rows, argmin epsilon {}", report.rows.size(),
                          report.best ? fmt::format("{}", report.rows[*report.best].epsilon) : "none")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"oracle equivalence", criterion1}, {"variational bound", criterion2},   {"QUBO/Ising", criterion3},
      {"penalty soundness", criterion4},  {"gradient check", criterion5},      {"weight function", criterion6},
      {"CBR dispatch", criterion7},       {"warm-start economy", criterion8},  {"round-trips", criterion9},
      {"epsilon sweep", criterion10}};
  std::vector<std::size_t> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::stoul(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!only.empty() && std::find(only.begin(), only.end(), i + 1) == only.end()) continue;
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, fmt::format("threw: {}", e.what())};
    }
    if (!v.pass) ++failed;
    fmt::print("{} criterion {} ({}): {}\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, v.detail);
    std::fflush(stdout);
  }
  return failed;
}
