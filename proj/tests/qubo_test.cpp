#include <gtest/gtest.h>

#include <random>

#include "support.hpp"
#include "swsched/oracle.hpp"
#include "swsched/qubo.hpp"

using namespace swsched;

namespace {

ProblemInstance one_patient() {
  ProblemInstance inst;
  inst.patients = {{1, 540, 600, ""}};
  inst.distances = SquareMatrix(2);
  inst.distances(0, 1) = inst.distances(1, 0) = 7.0;
  inst.n_workers = 1;
  inst.capacity = 1;
  return inst;
}

}  // namespace

TEST(VariableMap, FullArcCountsAndOrder) {
  const auto map = VariableMap::build(3, Encoding::FullArc);
  EXPECT_EQ(map.size(), 12u);
  EXPECT_EQ(map.arcs().front(), (Arc{0, 1}));
  EXPECT_EQ(map.arcs().back(), (Arc{3, 2}));
  for (std::size_t p = 0; p < map.size(); ++p) EXPECT_EQ(map.index_of(map.arcs()[p].from, map.arcs()[p].to), p);
  EXPECT_FALSE(map.index_of(2, 2));
}

TEST(VariableMap, PatientsOnlyCounts) {
  EXPECT_EQ(VariableMap::build(3, Encoding::PatientsOnly).size(), 6u);
  EXPECT_EQ(VariableMap::build(4, Encoding::PatientsOnly).size(), 12u);
  EXPECT_EQ(VariableMap::build(5, Encoding::PatientsOnly).size(), 20u);
}

TEST(VariableMap, PatientsOnlyInfersDepotArcs) {
  const auto map = VariableMap::build(3, Encoding::PatientsOnly);
  Bitstring x(map.size());
  x.set(*map.index_of(1, 2), true);
  const auto arcs = map.expand(x);
  EXPECT_TRUE(arcs[0][1]);
  EXPECT_TRUE(arcs[2][0]);
  EXPECT_TRUE(arcs[0][3]);
  EXPECT_TRUE(arcs[3][0]);
  EXPECT_FALSE(arcs[0][2]);
  EXPECT_EQ(map.encode(arcs), x);
}

TEST(Compile, ForcedSinglePatientTour) {
  const auto inst = one_patient();
  const auto c = compile_qubo(build_weight_matrix(inst), 1, std::nullopt);
  ASSERT_EQ(c.model.variable_count(), 2u);
  const auto e = enumerate(c.model);
  ASSERT_EQ(e.argmin.size(), 1u);
  EXPECT_EQ(e.argmin[0].to_string(), "11");
  EXPECT_DOUBLE_EQ(e.min_energy, 14.0);
}

TEST(Compile, AutoPenalty) {
  const auto inst = fixtures::demo3();
  const auto w = build_weight_matrix(inst);
  const auto c = compile_qubo(w, 2, std::nullopt);
  EXPECT_DOUBLE_EQ(c.model.penalty_A, kAutoPenaltyFactor * w.max_weight());
}

TEST(Compile, PenaltyBelowBoundRejected) {
  const auto w = build_weight_matrix(fixtures::demo3());
  try {
    compile_qubo(w, 2, w.max_weight());
    FAIL() << "expected PenaltyError";
  } catch (const PenaltyError& e) {
    EXPECT_NE(std::string(e.what()).find("violates A > max(w_ij)"), std::string::npos);
  }
  EXPECT_NO_THROW(compile_qubo(w, 2, w.max_weight() * 1.01));
}

TEST(Compile, ZeroWeightsPenaltyOnly) {
  auto inst = fixtures::demo3();
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) inst.distances(i, j) = 0.0;
  const auto c = compile_qubo(build_weight_matrix(inst), 2, 1.0);
  for (const auto& x : feasible_assignments(c.map, inst)) EXPECT_DOUBLE_EQ(energy(c.model, x), 0.0);
  // Drop one arc from a feasible assignment: a degree term breaks.
  auto x = feasible_assignments(c.map, inst).front();
  for (std::size_t p = 0; p < x.size(); ++p)
    if (x[p]) {
      x.set(p, false);
      break;
    }
  EXPECT_GE(energy(c.model, x), 1.0);
}

TEST(Compile, FeasibleEnergyEqualsRouteWeight) {
  std::mt19937_64 rng(3);
  for (auto enc : {Encoding::FullArc, Encoding::PatientsOnly}) {
    const auto inst = fixtures::random_instance(rng, 3, 2);
    const auto w = build_weight_matrix(inst);
    const auto c = compile_qubo(w, 2, std::nullopt, enc);
    for (const auto& x : feasible_assignments(c.map, inst)) {
      const auto arcs = c.map.expand(x);
      double cost = 0.0;
      for (std::size_t i = 0; i < arcs.size(); ++i)
        for (std::size_t j = 0; j < arcs.size(); ++j)
          if (arcs[i][j]) cost += w.w(i, j);
      EXPECT_NEAR(energy(c.model, x), cost, 1e-9 * cost);
    }
  }
}

TEST(Compile, ArgminSatisfiesDegreeConstraints) {
  const auto inst = fixtures::demo3();
  const auto c = compile_qubo(build_weight_matrix(inst), 2, std::nullopt);
  ASSERT_EQ(c.model.variable_count(), 12u);
  const auto e = enumerate(c.model);
  for (const auto& x : e.argmin) {
    const auto r = check_feasibility(x, c.map, inst);
    for (auto k : {Constraint::OutDegree, Constraint::InDegree, Constraint::DepotOut, Constraint::DepotIn})
      EXPECT_FALSE(r.has(k)) << r.summary();
  }
}

TEST(Compile, ShiftingWeightsKeepsFeasibleArgmin) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const auto inst = fixtures::random_instance(rng, 3, 1 + trial % 2);
    auto w = build_weight_matrix(inst);
    const auto c = compile_qubo(w, inst.n_workers, std::nullopt);
    const auto before = feasible_minimum(c.model, c.map, inst);
    for (std::size_t i = 0; i < w.w.size(); ++i)
      for (std::size_t j = 0; j < w.w.size(); ++j)
        if (i != j) w.w(i, j) += 5.0;
    const auto shifted = compile_qubo(w, inst.n_workers, std::nullopt);
    const auto after = feasible_minimum(shifted.model, shifted.map, inst);
    ASSERT_TRUE(before && after);
    // Every feasible assignment selects n + k arcs, so the shift is uniform.
    EXPECT_NEAR(after->energy - before->energy, 5.0 * (3 + inst.n_workers), 1e-9 * after->energy);
    EXPECT_EQ(after->assignment, before->assignment);
  }
}

TEST(Energy, HandExample) {
  QuadraticModel m(2);
  m.linear = {3.0, 3.0};
  m.quadratic[{0, 1}] = -8.0;
  EXPECT_EQ(energy(m, Bitstring::parse("11")), -2.0);
  EXPECT_EQ(energy(m, Bitstring::parse("00")), 0.0);
  EXPECT_EQ(energy(m, Bitstring::parse("10")), 3.0);
}

TEST(Energy, OffsetOnly) {
  QuadraticModel m(3);
  m.offset = 4.5;
  for (std::uint64_t i = 0; i < 8; ++i) EXPECT_EQ(energy(m, Bitstring::from_index(i, 3)), 4.5);
}

TEST(Energy, LengthMismatch) {
  QuadraticModel m(3);
  EXPECT_THROW(energy(m, Bitstring(2)), std::invalid_argument);
}

TEST(Ising, SingleVariable) {
  QuadraticModel m(1);
  m.linear[0] = 6.0;
  const auto is = qubo_to_ising(m);
  EXPECT_DOUBLE_EQ(is.h[0], -3.0);
  EXPECT_DOUBLE_EQ(is.offset, 3.0);
  EXPECT_DOUBLE_EQ(energy(is, Bitstring::parse("1")), 6.0);
  EXPECT_DOUBLE_EQ(energy(is, Bitstring::parse("0")), 0.0);
}

TEST(Ising, ZeroModel) {
  const auto is = qubo_to_ising(QuadraticModel(4));
  for (double h : is.h) EXPECT_EQ(h, 0.0);
  EXPECT_TRUE(is.J.empty());
  EXPECT_EQ(is.offset, 0.0);
}

TEST(Ising, ExhaustiveEquivalenceUpToSixteenVars) {
  std::mt19937_64 rng(17);
  for (std::size_t vars = 1; vars <= 16; ++vars) {
    const auto m = fixtures::random_qubo(rng, vars, vars > 10 ? 0.3 : 0.6);
    const auto is = qubo_to_ising(m);
    for (std::uint64_t i = 0; i < (std::uint64_t{1} << vars); ++i) {
      const auto x = Bitstring::from_index(i, vars);
      const double a = energy(m, x), b = energy(is, x);
      ASSERT_NEAR(a, b, 1e-9 * std::max(1.0, std::abs(a))) << "vars " << vars << " x " << x.to_string();
    }
  }
}

TEST(Ising, SpinConvention) {
  const auto x = Bitstring::parse("0110");
  EXPECT_EQ(x.spins(), (std::vector<int>{1, -1, -1, 1}));
  EXPECT_EQ(x.index(), 6u);
  EXPECT_EQ(Bitstring::from_index(6, 4), x);
}

TEST(Dump, RoundTrip) {
  std::mt19937_64 rng(23);
  auto m = fixtures::random_qubo(rng, 7);
  m.penalty_A = 12.5;
  const auto back = parse_model(dump_model(m));
  EXPECT_EQ(back.linear, m.linear);
  EXPECT_EQ(back.quadratic, m.quadratic);
  EXPECT_EQ(back.offset, m.offset);
  EXPECT_EQ(back.penalty_A, m.penalty_A);
}

TEST(Dump, RejectsGarbage) { EXPECT_THROW(parse_model("variables 2\nquadratic 1 0 3\n"), std::invalid_argument); }
