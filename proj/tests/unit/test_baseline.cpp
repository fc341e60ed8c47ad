#include <catch2/catch_amalgamated.hpp>

#include "mprp/baseline.hpp"
#include "mprp/generate.hpp"
#include "mprp/io.hpp"
#include "mprp/validate.hpp"

using namespace mprp;

namespace {

Instance single_site(double q, double dx, double dy, double capacity = 50) {
  Instance inst;
  inst.depot = {0, 0};
  inst.fleet_size = 1;
  inst.capacity = capacity;
  inst.horizon = 1000;
  inst.sites.push_back(Site{1, {dx, dy}, 0, 1000, SupplyProfile::fixed(q)});
  check_instance(inst);
  return inst;
}

Instance tiny1() {
  Instance inst;
  inst.depot = {0, 0};
  inst.fleet_size = 2;
  inst.capacity = 50;
  inst.horizon = 100;
  inst.sites.push_back(Site{1, {3, 4}, 0, 100, SupplyProfile::fixed(40)});
  inst.sites.push_back(Site{2, {6, 8}, 0, 100, SupplyProfile::fixed(50)});
  check_instance(inst);
  return inst;
}

// profit after deleting one visit and re-saturating the remaining route
double profit_without(const Instance& inst, const Solution& sol, size_t tour_index,
                      size_t visit_index) {
  Solution reduced = sol;
  Tour& tour = reduced.tours[tour_index];
  std::vector<int> order;
  for (size_t v = 0; v < tour.visits.size(); ++v)
    if (v != visit_index) order.push_back(tour.visits[v].site_id);
  auto rebuilt = schedule_tour(inst, tour.vehicle_id, order, tour.start_time);
  REQUIRE(rebuilt.has_value());
  double room = inst.capacity;
  for (Visit& v : rebuilt->visits) {
    v.pickup = std::min(inst.site(v.site_id).supply.quantity, room);
    room -= v.pickup;
  }
  tour = *rebuilt;
  return evaluate_profit(inst, reduced).profit;
}

}  // namespace

TEST_CASE("exact solver handles the tiny fixtures") {
  Instance empty;
  empty.depot = {0, 0};
  empty.fleet_size = 1;
  empty.capacity = 10;
  empty.horizon = 10;
  check_instance(empty);
  auto none = solve_exact_mprp(empty, {});
  REQUIRE(none.has_value());
  CHECK(none->profit == 0.0);

  auto worth_it = solve_exact_mprp(single_site(40, 3, 4), {});
  REQUIRE(worth_it.has_value());
  CHECK(worth_it->profit == Catch::Approx(30.0));

  // 8 - 10 < 0: skipping the site is optimal
  auto not_worth_it = solve_exact_mprp(single_site(8, 3, 4), {});
  REQUIRE(not_worth_it.has_value());
  CHECK(not_worth_it->profit == 0.0);
  CHECK(not_worth_it->tours[0].empty());

  auto tiny = solve_exact_mprp(tiny1(), {});
  REQUIRE(tiny.has_value());
  CHECK(tiny->profit == Catch::Approx(60.0));
}

TEST_CASE("exact solver refuses above its threshold") {
  GenerateParams params;
  params.n = 9;
  const Instance inst = generate_instance(params);
  SolverConfig config;
  config.exact_threshold = 8;
  CHECK_FALSE(solve_exact_mprp(inst, config).has_value());
  config.exact_threshold = 9;
  CHECK(solve_exact_mprp(inst, config).has_value());
}

TEST_CASE("solvers demand single-visit instances") {
  Instance inst = tiny1();
  inst.mode = Mode::MprpM;
  CHECK_THROWS_AS(solve_exact_mprp(inst, {}), std::invalid_argument);
  CHECK_THROWS_AS(solve_heuristic_mprp(inst, {}), std::invalid_argument);
}

TEST_CASE("heuristic skips unprofitable sites and saturates capacity") {
  // every site has q < 2 * d(depot, site): no positive margin anywhere
  Instance hopeless;
  hopeless.depot = {0, 0};
  hopeless.fleet_size = 2;
  hopeless.capacity = 100;
  hopeless.horizon = 1000;
  hopeless.sites.push_back(Site{1, {10, 0}, 0, 1000, SupplyProfile::fixed(15)});
  hopeless.sites.push_back(Site{2, {0, 20}, 0, 1000, SupplyProfile::fixed(39)});
  check_instance(hopeless);
  const Solution nothing = solve_heuristic_mprp(hopeless, {});
  CHECK(nothing.profit == 0.0);
  for (const Tour& t : nothing.tours) CHECK(t.empty());

  CHECK(solve_heuristic_mprp(tiny1(), {}).profit == Catch::Approx(60.0));

  const Solution capped = solve_heuristic_mprp(single_site(80, 3, 4, 50), {});
  CHECK(capped.tours[0].visits[0].pickup == Catch::Approx(50.0));
}

TEST_CASE("solver outputs always validate and exact dominates the heuristic") {
  SolverConfig config;
  config.exact_threshold = 6;
  for (uint64_t seed = 1; seed <= 30; ++seed) {
    GenerateParams params;
    params.seed = seed;
    params.n = 6;
    params.m = 1 + static_cast<int>(seed % 3);
    const Instance inst = generate_instance(params);
    const auto exact = solve_exact_mprp(inst, config);
    REQUIRE(exact.has_value());
    const Solution heuristic = solve_heuristic_mprp(inst, config);
    CHECK(validate(inst, *exact).ok());
    CHECK(validate(inst, heuristic).ok());
    CHECK(exact->profit >= heuristic.profit - 1e-9);
  }
}

TEST_CASE("removing any visit from an exact solution never helps") {
  SolverConfig config;
  config.exact_threshold = 5;
  for (uint64_t seed = 1; seed <= 15; ++seed) {
    GenerateParams params;
    params.seed = seed * 11;
    params.n = 5;
    params.m = 2;
    const Instance inst = generate_instance(params);
    const auto exact = solve_exact_mprp(inst, config);
    REQUIRE(exact.has_value());
    for (size_t t = 0; t < exact->tours.size(); ++t)
      for (size_t v = 0; v < exact->tours[t].visits.size(); ++v)
        CHECK(profit_without(inst, *exact, t, v) <= exact->profit + 1e-9);
  }
}

TEST_CASE("heuristic is deterministic") {
  GenerateParams params;
  params.seed = 99;
  params.n = 15;
  params.m = 3;
  const Instance inst = generate_instance(params);
  const Solution a = solve_heuristic_mprp(inst, {});
  const Solution b = solve_heuristic_mprp(inst, {});
  CHECK(write_solution(a) == write_solution(b));
}

TEST_CASE("baseline dispatch follows the threshold") {
  SolverConfig config;
  config.exact_threshold = 4;
  GenerateParams params;
  params.seed = 4;
  params.n = 4;
  const Instance small = generate_instance(params);
  CHECK(solve_baseline(small, config).profit == solve_exact_mprp(small, config)->profit);
  params.n = 12;
  const Instance large = generate_instance(params);
  CHECK(solve_baseline(large, config).profit == solve_heuristic_mprp(large, config).profit);
}
