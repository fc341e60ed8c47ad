#include <catch2/catch_amalgamated.hpp>

#include "mprp/generate.hpp"
#include "mprp/model.hpp"
#include "mprp/validate.hpp"

using namespace mprp;

namespace {

Instance tiny1(Mode mode = Mode::Mprp) {
  Instance inst;
  inst.depot = {0, 0};
  inst.fleet_size = 2;
  inst.capacity = 50;
  inst.horizon = 100;
  inst.mode = mode;
  const bool mvs = mode == Mode::MprpMvs;
  inst.sites.push_back(Site{1, {3, 4}, 0, 100, mvs ? SupplyProfile::ramp(40) : SupplyProfile::fixed(40)});
  inst.sites.push_back(Site{2, {6, 8}, 0, 100, mvs ? SupplyProfile::ramp(50) : SupplyProfile::fixed(50)});
  check_instance(inst);
  return inst;
}

Solution tiny1_solution(const Instance& inst) {
  Solution sol = empty_solution(inst);
  sol.tours[0].visits.push_back(Visit{1, 5, 40});
  sol.tours[1].visits.push_back(Visit{2, 10, 50});
  sol.set_profit(evaluate_profit(inst, sol));
  return sol;
}

bool has(const ValidationReport& report, ViolationKind kind) {
  for (const Violation& v : report.violations)
    if (v.kind == kind) return true;
  return false;
}

double magnitude_of(const ValidationReport& report, ViolationKind kind) {
  for (const Violation& v : report.violations)
    if (v.kind == kind) return v.magnitude;
  return -1.0;
}

}  // namespace

TEST_CASE("clean solution validates with audited profit") {
  const Instance inst = tiny1();
  const Solution sol = tiny1_solution(inst);
  const ValidationReport report = validate(inst, sol);
  CHECK(report.ok());
  CHECK(report.audited_profit.reward == Catch::Approx(90.0));
  CHECK(report.audited_profit.cost == Catch::Approx(30.0));
  CHECK(report.audited_profit.profit == Catch::Approx(60.0));
}

TEST_CASE("audit_profit matches the model accounting") {
  const Instance inst = tiny1();
  const Solution sol = tiny1_solution(inst);
  const ProfitBreakdown audited = audit_profit(inst, sol);
  const ProfitBreakdown modeled = evaluate_profit(inst, sol);
  CHECK(audited.reward == Catch::Approx(modeled.reward));
  CHECK(audited.cost == Catch::Approx(modeled.cost));
  CHECK(audited.profit == Catch::Approx(modeled.profit));
  const Solution empty = empty_solution(inst);
  const ProfitBreakdown zero = audit_profit(inst, empty);
  CHECK(zero.reward == 0.0);
  CHECK(zero.cost == 0.0);
  CHECK(zero.profit == 0.0);
}

TEST_CASE("capacity violations carry the excess") {
  const Instance inst = tiny1();
  Solution sol = tiny1_solution(inst);
  sol.tours[1].visits[0].pickup = 60;  // Q = 50
  sol.set_profit(evaluate_profit(inst, sol));
  const ValidationReport report = validate(inst, sol);
  CHECK(has(report, ViolationKind::CapacityViolation));
  CHECK(magnitude_of(report, ViolationKind::CapacityViolation) == Catch::Approx(10.0));
  CHECK(has(report, ViolationKind::AvailabilityViolation));  // 60 > q2 = 50 too
}

TEST_CASE("window and schedule inconsistencies are flagged") {
  const Instance inst = tiny1();
  Solution sol = tiny1_solution(inst);
  sol.tours[0].visits[0].arrival = 4.0;  // cannot be there before t=5
  sol.set_profit(evaluate_profit(inst, sol));
  CHECK(has(validate(inst, sol), ViolationKind::ScheduleInconsistency));

  Instance windowed = tiny1();
  windowed.sites[0].window_close = 20;
  Solution late = tiny1_solution(windowed);
  late.tours[0].visits[0].arrival = 25.0;
  late.set_profit(evaluate_profit(windowed, late));
  CHECK(has(validate(windowed, late), ViolationKind::WindowViolation));
}

TEST_CASE("tampered profit fields become ProfitMismatch") {
  const Instance inst = tiny1();
  Solution sol = tiny1_solution(inst);
  sol.profit += 1.0;
  const ValidationReport report = validate(inst, sol);
  CHECK(has(report, ViolationKind::ProfitMismatch));
}

TEST_CASE("duplicate and cross-tour visits depend on the mode") {
  const Instance inst = tiny1();
  Solution sol = tiny1_solution(inst);
  sol.tours[0].visits.push_back(Visit{1, 15, 0});  // same vehicle twice
  sol.set_profit(evaluate_profit(inst, sol));
  CHECK(has(validate(inst, sol), ViolationKind::DuplicateVisit));

  // site 2 on both tours: illegal single-visit, legal multi-visit
  Solution shared = tiny1_solution(inst);
  shared.tours[0].visits.push_back(Visit{2, 15, 0});
  shared.set_profit(evaluate_profit(inst, shared));
  CHECK(has(validate(inst, shared), ViolationKind::SingleVisitViolation));

  Instance multi = tiny1(Mode::MprpM);
  Solution relaxed = shared;
  relaxed.tours[0].visits.back().pickup = 0;
  relaxed.set_profit(evaluate_profit(multi, relaxed));
  CHECK_FALSE(has(validate(multi, relaxed), ViolationKind::SingleVisitViolation));
}

TEST_CASE("any single-visit-clean solution stays clean under the multi-visit rules") {
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    GenerateParams params;
    params.seed = seed;
    params.n = 5;
    params.m = 2;
    const Instance inst = generate_instance(params);
    Solution sol = empty_solution(inst);
    // one site per vehicle when reachable
    int vehicle = 0;
    for (const Site& s : inst.sites) {
      if (vehicle >= inst.fleet_size) break;
      auto tour = schedule_tour(inst, vehicle + 1, {s.id}, 0.0);
      if (!tour) continue;
      tour->visits[0].pickup = std::min(s.supply.quantity, inst.capacity);
      sol.tours[static_cast<size_t>(vehicle)] = *tour;
      ++vehicle;
    }
    sol.set_profit(evaluate_profit(inst, sol));
    if (!validate(inst, sol).ok()) continue;
    Instance multi = inst;
    multi.mode = Mode::MprpM;
    CHECK(validate(multi, sol).ok());
  }
}

TEST_CASE("mvs availability is checked cumulatively at pickup instants") {
  const Instance inst = tiny1(Mode::MprpMvs);
  Solution sol = empty_solution(inst);
  // ramp at site 1 reaches 8 at t = 20
  sol.tours[0].visits.push_back(Visit{1, 20, 10});
  sol.set_profit(evaluate_profit(inst, sol));
  const ValidationReport report = validate(inst, sol);
  CHECK(has(report, ViolationKind::AvailabilityViolation));
  CHECK(magnitude_of(report, ViolationKind::AvailabilityViolation) == Catch::Approx(2.0));

  // two vehicles within the ramp: 8 at t=20 then 16 more by t=60
  Solution shared = empty_solution(inst);
  shared.tours[0].visits.push_back(Visit{1, 20, 8});
  shared.tours[1].visits.push_back(Visit{1, 60, 16});
  shared.set_profit(evaluate_profit(inst, shared));
  CHECK(validate(inst, shared).ok());

  // same total too early
  shared.tours[1].visits[0].arrival = 30;  // supply 12, cumulative 24
  shared.set_profit(evaluate_profit(inst, shared));
  CHECK(has(validate(inst, shared), ViolationKind::AvailabilityViolation));
}

TEST_CASE("validator accepting at pickup instants implies no violation anywhere") {
  // supply is nondecreasing and cumulative pickups are a step function,
  // so a violation at any t implies one at a pickup instant <= t; probe a
  // dense grid to back that up on random accepted solutions.
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    GenerateParams params;
    params.seed = seed;
    params.n = 4;
    params.m = 2;
    params.mode = Mode::MprpMvs;
    const Instance inst = generate_instance(params);
    Solution sol = empty_solution(inst);
    std::mt19937_64 rng(seed);
    for (int k = 0; k < inst.fleet_size; ++k) {
      const Site& s = inst.sites[static_cast<size_t>(rng() % inst.sites.size())];
      const double t = 0.5 * (s.window_open + s.window_close);
      auto tour = schedule_tour(inst, k + 1, {s.id}, 0.0);
      if (!tour || tour->visits[0].arrival > t) continue;
      tour->visits[0].arrival = t;
      tour->visits[0].pickup = supply_at(s, t) * 0.6;
      sol.tours[static_cast<size_t>(k)] = *tour;
    }
    sol.set_profit(evaluate_profit(inst, sol));
    if (!validate(inst, sol).ok()) continue;
    for (const Site& s : inst.sites) {
      for (int g = 0; g <= 50; ++g) {
        const double t = s.window_open + (s.window_close - s.window_open) * g / 50.0;
        double cumulative = 0.0;
        for (const Tour& tour : sol.tours)
          for (const Visit& v : tour.visits)
            if (v.site_id == s.id && v.arrival <= t) cumulative += v.pickup;
        REQUIRE(cumulative <= supply_at(s, t) + 1e-6);
      }
    }
  }
}

TEST_CASE("negative pickups are rejected") {
  const Instance inst = tiny1();
  Solution sol = tiny1_solution(inst);
  sol.tours[0].visits[0].pickup = -5;
  sol.set_profit(evaluate_profit(inst, sol));
  CHECK(has(validate(inst, sol), ViolationKind::AvailabilityViolation));
}

TEST_CASE("validate is idempotent") {
  const Instance inst = tiny1();
  Solution sol = tiny1_solution(inst);
  sol.tours[1].visits[0].pickup = 60;
  sol.set_profit(evaluate_profit(inst, sol));
  const ValidationReport first = validate(inst, sol);
  const ValidationReport second = validate(inst, sol);
  REQUIRE(first.violations.size() == second.violations.size());
  for (size_t i = 0; i < first.violations.size(); ++i) {
    CHECK(first.violations[i].kind == second.violations[i].kind);
    CHECK(first.violations[i].magnitude == second.violations[i].magnitude);
  }
}
