#include <gtest/gtest.h>

#include <random>

#include "support.hpp"
#include "swsched/instance_io.hpp"
#include "swsched/problem_model.hpp"

using namespace swsched;

namespace {

ProblemInstance three_patients() {
  ProblemInstance inst;
  inst.patients = {{1, 540, 600, ""}, {2, 705, 765, ""}, {3, 900, 960, ""}};
  inst.distances = SquareMatrix(4);
  const double d[4][4] = {{0, 5, 7, 9}, {5, 0, 4, 6}, {7, 4, 0, 10}, {9, 6, 10, 0}};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) inst.distances(i, j) = d[i][j];
  inst.n_workers = 2;
  inst.capacity = 3;
  inst.epsilon = 0.7;
  return inst;
}

}  // namespace

TEST(Weights, HandComputedPair) {
  const auto w = build_weight_matrix(three_patients());
  EXPECT_EQ(w.d_max, 10.0);
  EXPECT_EQ(w.d_min, 4.0);
  EXPECT_DOUBLE_EQ(w.w(1, 2), 3180.25);
  EXPECT_DOUBLE_EQ(w.w(2, 1), 3180.25);
}

TEST(Weights, ZeroEpsilonIsDistance) {
  auto inst = three_patients();
  inst.epsilon = 0.0;
  EXPECT_EQ(build_weight_matrix(inst).w, inst.distances);
}

TEST(Weights, EqualSlotsIsDistance) {
  auto inst = three_patients();
  for (auto& p : inst.patients) p.slot_start = 600, p.slot_end = 660;
  EXPECT_EQ(build_weight_matrix(inst).w, inst.distances);
}

TEST(Weights, DepotArcsCarryBareDistance) {
  const auto inst = three_patients();
  const auto w = build_weight_matrix(inst);
  for (std::size_t j = 1; j < 4; ++j) {
    EXPECT_EQ(w.w(0, j), inst.distances(0, j));
    EXPECT_EQ(w.w(j, 0), inst.distances(j, 0));
  }
}

TEST(Weights, FlatSpreadDropsTimeTerm) {
  ProblemInstance inst;
  inst.patients = {{1, 540, 600, ""}, {2, 900, 960, ""}};
  inst.distances = SquareMatrix(3);
  inst.distances(0, 1) = inst.distances(1, 0) = 3;
  inst.distances(0, 2) = inst.distances(2, 0) = 4;
  inst.distances(1, 2) = inst.distances(2, 1) = 5;
  inst.epsilon = 2.0;
  EXPECT_EQ(build_weight_matrix(inst).w, inst.distances);
}

TEST(Weights, RejectsNegativeEpsilon) {
  auto inst = three_patients();
  inst.epsilon = -0.1;
  EXPECT_THROW(build_weight_matrix(inst), InstanceError);
}

TEST(Weights, PropertiesOnRandomInstances) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    auto inst = fixtures::random_instance(rng, 2 + trial % 5, 1);
    const auto w = build_weight_matrix(inst);
    auto more = inst;
    more.epsilon += 0.3;
    const auto w_more = build_weight_matrix(more);
    const auto n = inst.node_count();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        EXPECT_GE(w.w(i, j), inst.distances(i, j));
        EXPECT_EQ(w.w(i, j) - inst.distances(i, j), w.w(j, i) - inst.distances(j, i));
        EXPECT_GE(w_more.w(i, j), w.w(i, j));
      }
    // Scaling distances by c leaves d scaled and g divided by c.
    auto scaled = inst;
    const double c = 2.5;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) scaled.distances(i, j) *= c;
    const auto ws = build_weight_matrix(scaled);
    for (std::size_t i = 1; i < n; ++i)
      for (std::size_t j = 1; j < n; ++j) {
        if (i == j) continue;
        const double g = w.w(i, j) - inst.distances(i, j);
        EXPECT_NEAR(ws.w(i, j), c * inst.distances(i, j) + g / c, 1e-9 * std::max(1.0, ws.w(i, j)));
      }
  }
}

TEST(Validate, WellFormed) { EXPECT_TRUE(validate_instance(three_patients()).empty()); }

TEST(Validate, SlotOrdering) {
  auto inst = three_patients();
  inst.patients[1].slot_end = inst.patients[1].slot_start;
  const auto v = validate_instance(inst);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].rule, "slot ordering");
}

TEST(Validate, Asymmetric) {
  auto inst = three_patients();
  inst.distances(1, 2) = 4.5;
  const auto v = validate_instance(inst);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].rule, "distance symmetry");
  EXPECT_EQ(v[0].field, "distances");
}

TEST(Validate, FleetFields) {
  auto inst = three_patients();
  inst.n_workers = 0;
  inst.capacity = 0;
  EXPECT_EQ(validate_instance(inst).size(), 2u);
  EXPECT_THROW(require_valid(inst), InstanceError);
}

TEST(Canonical, SortsAndReindexes) {
  auto inst = three_patients();
  std::swap(inst.patients[0], inst.patients[2]);
  SquareMatrix d(4);
  const std::size_t perm[4] = {0, 3, 2, 1};  // node k of the shuffled instance is node perm[k] of the original
  const auto base = three_patients();
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) d(i, j) = base.distances(perm[i], perm[j]);
  inst.distances = d;
  EXPECT_EQ(canonicalize(inst), canonicalize(base));
}

TEST(Time, Hhmm) {
  EXPECT_EQ(parse_hhmm("09:15"), 555);
  EXPECT_EQ(format_hhmm(555), "09:15");
  EXPECT_EQ(format_hhmm(parse_hhmm("16:45")), "16:45");
}

TEST(InstanceIo, RoundTrip) {
  const auto inst = fixtures::demo3();
  const auto path = std::filesystem::temp_directory_path() / "swsched_roundtrip.json";
  save_instance(inst, path);
  EXPECT_EQ(load_instance(path), inst);
  std::filesystem::remove(path);
}

TEST(InstanceIo, KeepsFifteenDigits) {
  auto inst = three_patients();
  inst.distances(1, 2) = inst.distances(2, 1) = 4.123456789012345;
  inst.epsilon = 0.1234567890123456;
  const auto back = instance_from_json(instance_to_json(inst));
  EXPECT_NEAR(back.distances(1, 2), 4.123456789012345, 1e-14);
  EXPECT_NEAR(back.epsilon, 0.1234567890123456, 1e-15);
}

TEST(InstanceIo, Coordinates) {
  const auto doc = nlohmann::json::parse(R"({"day":"Mon","n_workers":1,"capacity":2,"epsilon":0,
    "patients":[{"id":1,"start":"09:00","end":"10:00"},{"id":2,"start":600,"end":660}],
    "coordinates":[[0,0],[3,4],[0,4]]})");
  const auto inst = instance_from_json(doc);
  EXPECT_DOUBLE_EQ(inst.distances(0, 1), 5.0);
  EXPECT_DOUBLE_EQ(inst.distances(1, 2), 3.0);
  EXPECT_EQ(inst.patients[1].slot_start, 600);
}

TEST(InstanceIo, WeekSplitsByDay) {
  const auto week = load_week(fixtures::data_path("table1_week.json"));
  ASSERT_FALSE(week.empty());
  for (const auto& day : week) {
    EXPECT_TRUE(validate_instance(day).empty());
    for (const auto& p : day.patients) EXPECT_EQ(p.day, day.day);
  }
}
