#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "mprp/generate.hpp"
#include "mprp/model.hpp"

using namespace mprp;

namespace {

Instance tiny1() {
  Instance inst;
  inst.depot = {0, 0};
  inst.fleet_size = 2;
  inst.capacity = 50;
  inst.horizon = 100;
  inst.mode = Mode::Mprp;
  inst.sites.push_back(Site{1, {3, 4}, 0, 100, SupplyProfile::fixed(40)});
  inst.sites.push_back(Site{2, {6, 8}, 0, 100, SupplyProfile::fixed(50)});
  check_instance(inst);
  return inst;
}

double u01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

TEST_CASE("distance basics") {
  CHECK(distance({0, 0}, {3, 4}) == Catch::Approx(5.0));
  CHECK(distance({1, 1}, {1, 1}) == 0.0);
  // against the squared-distance form
  const double d = distance({3, 4}, {6, 8});
  CHECK(d * d == Catch::Approx(3.0 * 3.0 + 4.0 * 4.0));
  CHECK(d == Catch::Approx(5.0));
  CHECK(distance({3, 4}, {6, 8}) == distance({6, 8}, {3, 4}));
}

TEST_CASE("distance satisfies the triangle inequality on random triples") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10000; ++trial) {
    const Point a{u01(rng) * 200 - 100, u01(rng) * 200 - 100};
    const Point b{u01(rng) * 200 - 100, u01(rng) * 200 - 100};
    const Point c{u01(rng) * 200 - 100, u01(rng) * 200 - 100};
    REQUIRE(distance(a, c) <= distance(a, b) + distance(b, c) + 1e-12);
  }
}

TEST_CASE("supply_at evaluates ramps and windows") {
  const Site ramp{1, {0, 0}, 0, 10, SupplyProfile::ramp(20)};
  CHECK(supply_at(ramp, 5) == Catch::Approx(10.0));
  CHECK(supply_at(ramp, 0) == 0.0);
  CHECK(supply_at(ramp, 10) == Catch::Approx(20.0));
  CHECK(supply_at(ramp, 12) == 0.0);
  CHECK(supply_at(ramp, -1) == 0.0);
  const Site fixed{2, {0, 0}, 0, 10, SupplyProfile::fixed(7)};
  CHECK(supply_at(fixed, 3) == 7.0);
  CHECK(supply_at(fixed, 12) == 0.0);
}

TEST_CASE("schedule_tour computes arrivals with waiting") {
  Instance inst;
  inst.depot = {0, 0};
  inst.fleet_size = 1;
  inst.capacity = 10;
  inst.horizon = 100;
  inst.sites.push_back(Site{1, {3, 4}, 0, 100, SupplyProfile::fixed(1)});
  check_instance(inst);

  auto tour = schedule_tour(inst, 1, {1}, 0.0);
  REQUIRE(tour.has_value());
  CHECK(tour->visits[0].arrival == Catch::Approx(5.0));
  CHECK(tour->visits[0].pickup == 0.0);

  inst.sites[0].window_open = 10;
  auto waiting = schedule_tour(inst, 1, {1}, 0.0);
  REQUIRE(waiting.has_value());
  CHECK(waiting->visits[0].arrival == Catch::Approx(10.0));

  inst.sites[0].window_open = 0;
  inst.sites[0].window_close = 3;
  CHECK_FALSE(schedule_tour(inst, 1, {1}, 0.0).has_value());

  inst.sites[0].window_close = 100;
  CHECK_THROWS_AS(schedule_tour(inst, 1, {7}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(schedule_tour(inst, 1, {1, 1}, 0.0), std::invalid_argument);
}

TEST_CASE("schedule_tour arrivals are monotone, windowed, and reproducible") {
  for (uint64_t seed = 1; seed <= 40; ++seed) {
    GenerateParams params;
    params.seed = seed;
    params.n = 6;
    params.m = 1;
    const Instance inst = generate_instance(params);
    std::mt19937_64 rng(seed * 31);
    std::vector<int> order;
    for (const Site& s : inst.sites)
      if (rng() % 2 == 0) order.push_back(s.id);
    auto tour = schedule_tour(inst, 1, order, 0.0);
    if (!tour) continue;
    double previous = 0.0;
    for (size_t v = 0; v < tour->visits.size(); ++v) {
      const Site& s = inst.site(tour->visits[v].site_id);
      REQUIRE(tour->visits[v].arrival >= previous - 1e-12);
      REQUIRE(tour->visits[v].arrival >= s.window_open - 1e-12);
      REQUIRE(tour->visits[v].arrival <= s.window_close + kTimeTol);
      previous = tour->visits[v].arrival;
    }
    auto again = schedule_tour(inst, 1, order, 0.0);
    REQUIRE(again.has_value());
    for (size_t v = 0; v < tour->visits.size(); ++v)
      REQUIRE(tour->visits[v].arrival == again->visits[v].arrival);
  }
}

TEST_CASE("evaluate_profit sums pickups and leg costs") {
  const Instance inst = tiny1();
  Solution sol = empty_solution(inst);
  const ProfitBreakdown zero = evaluate_profit(inst, sol);
  CHECK(zero.reward == 0.0);
  CHECK(zero.cost == 0.0);
  CHECK(zero.profit == 0.0);

  sol.tours[0].visits.push_back(Visit{1, 5, 40});
  const ProfitBreakdown one = evaluate_profit(inst, sol);
  CHECK(one.reward == Catch::Approx(40.0));
  CHECK(one.cost == Catch::Approx(10.0));
  CHECK(one.profit == Catch::Approx(30.0));

  sol.tours[1].visits.push_back(Visit{2, 10, 50});
  const ProfitBreakdown both = evaluate_profit(inst, sol);
  CHECK(both.reward == Catch::Approx(90.0));
  CHECK(both.cost == Catch::Approx(30.0));
  CHECK(both.profit == Catch::Approx(60.0));
}

TEST_CASE("evaluate_profit ignores which vehicle holds which route") {
  const Instance inst = tiny1();
  Solution sol = empty_solution(inst);
  sol.tours[0].visits.push_back(Visit{1, 5, 40});
  sol.tours[1].visits.push_back(Visit{2, 10, 50});
  Solution swapped = empty_solution(inst);
  swapped.tours[0].visits.push_back(Visit{2, 10, 50});
  swapped.tours[1].visits.push_back(Visit{1, 5, 40});
  CHECK(evaluate_profit(inst, sol).profit == Catch::Approx(evaluate_profit(inst, swapped).profit));
}

TEST_CASE("check_instance rejects malformed instances") {
  Instance inst = tiny1();
  inst.sites[1].id = 5;
  CHECK_THROWS_AS(check_instance(inst), std::invalid_argument);

  inst = tiny1();
  inst.sites[0].window_close = 200;  // past the horizon
  CHECK_THROWS_AS(check_instance(inst), std::invalid_argument);

  inst = tiny1();
  inst.sites[0].supply = SupplyProfile::ramp(10);  // ramp in a fixed-mode instance
  CHECK_THROWS_AS(check_instance(inst), std::invalid_argument);

  inst = tiny1();
  inst.mode = Mode::MprpMvs;
  CHECK_THROWS_AS(check_instance(inst), std::invalid_argument);  // fixed supplies in mvs

  inst = tiny1();
  inst.mode = Mode::MprpMvs;
  for (Site& s : inst.sites) s.supply.kind = SupplyProfile::Kind::LinearRamp;
  CHECK_NOTHROW(check_instance(inst));
  inst.sites[0].window_close = inst.sites[0].window_open;  // degenerate ramp window
  CHECK_THROWS_AS(check_instance(inst), std::invalid_argument);
}
