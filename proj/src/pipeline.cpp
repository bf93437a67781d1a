#include "swsched/pipeline.hpp"

#include <algorithm>
#include <fmt/format.h>

namespace swsched {

namespace {

struct Prepared {
  WeightMatrix weights;
  CompiledModel compiled;
  IsingModel ising;
  Ansatz ansatz;
};

Prepared prepare(const ProblemInstance& instance, const SolveOptions& options) {
  require_valid(instance);
  Prepared p{build_weight_matrix(instance), {}, {}, {}};
  p.compiled = compile_qubo(p.weights, instance.n_workers, options.settings.penalty, options.settings.encoding);
  const auto vars = p.compiled.map.size();
  if (options.use_oracle && vars > kDefaultEnumerationCap)
    throw OracleLimitError(fmt::format("{} variables exceed the oracle limit of {}; pass --no-oracle to skip it", vars,
                                       kDefaultEnumerationCap));
  if (vars > kMaxQubits)
    throw std::invalid_argument(fmt::format("{} variables exceed the simulator limit of {} qubits", vars, kMaxQubits));
  p.ising = qubo_to_ising(p.compiled.model);
  p.ansatz = make_ansatz(vars, options.settings);
  return p;
}

struct Pick {
  Bitstring assignment;
  double energy = 0.0;
  std::vector<double> params;
};

// Lowest-energy feasible bitstring among the restarts, winning restart first.
std::optional<Pick> best_feasible(const VqeResult& vqe, const Prepared& p, const ProblemInstance& instance) {
  std::vector<std::size_t> order{vqe.best_restart};
  for (std::size_t r = 0; r < vqe.restarts.size(); ++r)
    if (r != vqe.best_restart) order.push_back(r);
  std::optional<Pick> best;
  for (auto r : order) {
    const auto& outcome = vqe.restarts[r];
    if (!check_feasibility(outcome.bitstring, p.compiled.map, instance).feasible) continue;
    const double e = energy(p.compiled.model, outcome.bitstring);
    if (!best || e < best->energy) best = Pick{outcome.bitstring, e, outcome.params};
  }
  return best;
}

}  // namespace

Ansatz make_ansatz(std::size_t n_qubits, const SolverSettings& settings) {
  Ansatz a;
  a.n_qubits = n_qubits;
  a.layers = settings.layers ? settings.layers : default_layers(n_qubits);
  a.entanglement = settings.entanglement;
  return a;
}

SolveOutcome solve_instance(const ProblemInstance& instance, const SolveOptions& options) {
  auto p = prepare(instance, options);
  SolveOutcome out;
  out.vqe = minimize(p.ansatz, p.ising, options.settings.vqe);
  out.report = check_feasibility(out.vqe.best_bitstring, p.compiled.map, instance);
  if (auto pick = best_feasible(out.vqe, p, instance)) {
    out.assignment = pick->assignment;
    out.energy = pick->energy;
    out.params = pick->params;
    out.schedule = decode(pick->assignment, p.compiled.map, instance, p.weights);
  }
  if (options.use_oracle) out.oracle = feasible_minimum(p.compiled.model, p.compiled.map, instance);
  out.compiled = std::move(p.compiled);
  out.ising = std::move(p.ising);
  out.ansatz = std::move(p.ansatz);
  return out;
}

ReplanOutcome replan(CaseBase& base, const ProblemInstance& statement, const ReplanOptions& options, Timestamp now) {
  const auto canonical = canonicalize(statement);
  require_valid(canonical);
  const auto& settings = options.solve.settings;
  const auto& policy = options.policy;
  const auto retrieval = base.retrieve_detailed(canonical, policy, now);

  ReplanOutcome out;
  out.decision = retrieval.decision;
  auto p = prepare(canonical, options.solve);

  std::optional<double> oracle_best;
  bool oracle_done = false;
  auto best_known = [&](double candidate_weight) {
    if (options.solve.use_oracle && !oracle_done) {
      oracle_done = true;
      if (auto opt = feasible_minimum(p.compiled.model, p.compiled.map, canonical)) oracle_best = opt->energy;
    }
    if (oracle_best) return *oracle_best;
    double best = candidate_weight;
    for (const auto& c : base.snapshot())
      if (c.statement == canonical) best = std::min(best, c.solution.total_weight);
    return best;
  };

  std::vector<double> initial_point;
  auto finish = [&](Branch branch, Schedule schedule, double ratio) {
    schedule.day = statement.day;
    out.final_branch = branch;
    out.assignment = encode(schedule, p.compiled.map, canonical);
    out.quality = ratio;
    Case c;
    c.statement = canonical;
    c.solution = schedule;
    c.assignment = *out.assignment;
    c.initial_point = initial_point;
    c.config = settings;
    c.quality = ratio;
    c.solved_at = now;
    out.retained_id = base.retain(std::move(c)).id;
    out.schedule = std::move(schedule);
    return out;
  };

  Branch stage = retrieval.decision.branch;
  if (stage == Branch::Reuse) {
    const auto weight = route_weight(*retrieval.adapted, canonical, p.weights);
    const auto rev = revise(*retrieval.adapted, canonical, best_known(weight), policy);
    if (rev.accepted) {
      const auto& m = *retrieval.matched;
      const bool same_shape = m.initial_point.size() == p.ansatz.parameter_count() &&
                              m.config.encoding == settings.encoding;
      initial_point = same_shape ? m.initial_point
                                 : basis_state_parameters(p.ansatz, encode(rev.schedule, p.compiled.map, canonical));
      return finish(Branch::Reuse, rev.schedule, rev.ratio);
    }
    out.notes.push_back("REUSE rejected: " + rev.reason);
    stage = Branch::Reoptimize;
  }

  if (stage == Branch::Reoptimize) {
    const auto& m = *retrieval.matched;
    std::vector<int> now_ids, old_ids;
    for (const auto& v : canonical.patients) now_ids.push_back(v.patient_id);
    for (const auto& v : m.statement.patients) old_ids.push_back(v.patient_id);
    const bool compatible = m.config.encoding == settings.encoding &&
                            m.initial_point.size() == p.ansatz.parameter_count() &&
                            make_ansatz(p.ansatz.n_qubits, m.config).layers == p.ansatz.layers &&
                            m.config.entanglement == settings.entanglement;

    std::optional<std::vector<double>> warm;
    std::optional<Bitstring> adapted_bits;
    if (retrieval.adapted) {
      adapted_bits = encode(*retrieval.adapted, p.compiled.map, canonical);
      if (!check_feasibility(*adapted_bits, p.compiled.map, canonical).feasible) adapted_bits.reset();
    }
    if (compatible && now_ids == old_ids) {
      warm = m.initial_point;
    } else if (adapted_bits) {
      warm = softened_basis_parameters(p.ansatz, *adapted_bits, options.warm_softening);
    }

    if (!warm) {
      out.notes.push_back("REOPTIMIZE skipped: no usable warm start");
    } else {
      auto config = settings.vqe;
      config.restarts = std::max<std::size_t>(1, std::min(options.reoptimize_restarts, config.restarts));
      config.initial_point = *warm;
      const auto vqe = minimize(p.ansatz, p.ising, config);
      out.evaluations += vqe.evaluations;
      out.reoptimize_evaluations = vqe.evaluations;

      std::optional<Pick> pick;
      if (check_feasibility(vqe.best_bitstring, p.compiled.map, canonical).feasible)
        pick = Pick{vqe.best_bitstring, energy(p.compiled.model, vqe.best_bitstring), vqe.best_params};
      if (adapted_bits) {
        const double e = energy(p.compiled.model, *adapted_bits);
        if (!pick || e < pick->energy) pick = Pick{*adapted_bits, e, basis_state_parameters(p.ansatz, *adapted_bits)};
      }
      if (!pick) {
        out.notes.push_back("REOPTIMIZE found no feasible schedule");
      } else {
        const auto schedule = decode(pick->assignment, p.compiled.map, canonical, p.weights);
        const auto rev = revise(schedule, canonical, best_known(schedule.total_weight), policy);
        if (rev.accepted) {
          initial_point = pick->params;
          return finish(Branch::Reoptimize, rev.schedule, rev.ratio);
        }
        out.notes.push_back("REOPTIMIZE rejected: " + rev.reason);
      }
    }
  }

  const auto vqe = minimize(p.ansatz, p.ising, settings.vqe);
  out.evaluations += vqe.evaluations;
  out.final_branch = Branch::TopDown;
  const auto pick = best_feasible(vqe, p, canonical);
  if (!pick) {
    out.notes.push_back("TOP_DOWN found no feasible schedule");
    return out;
  }
  const auto schedule = decode(pick->assignment, p.compiled.map, canonical, p.weights);
  const double known = best_known(schedule.total_weight);
  const double ratio = known > 0.0 ? schedule.total_weight / known : 1.0;
  initial_point = pick->params;
  return finish(Branch::TopDown, schedule, ratio);
}

}  // namespace swsched
