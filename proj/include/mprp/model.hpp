#pragma once

// Core value types for max-profit pickup routing: instances, tours,
// solutions, plus schedule construction and profit accounting.
// Everything here is immutable after construction and safe to use
// from multiple threads.

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mprp {

// Absolute tolerances for feasibility comparisons. Distances are
// irrational, so exact arithmetic is out of reach; tolerances absorb
// accumulated drift along long tours.
inline constexpr double kTimeTol = 1e-9;
inline constexpr double kQtyTol = 1e-9;
inline constexpr double kProfitTol = 1e-6;

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(const Point& a, const Point& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

// Supply at a site: either constant over the window, or a ramp that
// grows linearly from 0 at window open to q_end at window close.
struct SupplyProfile {
  enum class Kind { Fixed, LinearRamp };
  Kind kind = Kind::Fixed;
  double quantity = 0.0;  // Fixed: level; LinearRamp: value at window close.

  static SupplyProfile fixed(double q) { return {Kind::Fixed, q}; }
  static SupplyProfile ramp(double q_end) { return {Kind::LinearRamp, q_end}; }
};

struct Site {
  int id = 0;  // 1..n, contiguous
  Point position;
  double window_open = 0.0;
  double window_close = 0.0;
  SupplyProfile supply;
};

// Quantity available at a site at time t. Zero outside the window.
inline double supply_at(const Site& site, double t) {
  if (t < site.window_open || t > site.window_close) return 0.0;
  if (site.supply.kind == SupplyProfile::Kind::Fixed) return site.supply.quantity;
  const double span = site.window_close - site.window_open;
  return site.supply.quantity * (t - site.window_open) / span;
}

enum class Mode {
  Mprp,     // single visit per site across the whole fleet, fixed supply
  MprpM,    // multiple vehicles per site (each at most once), fixed supply
  MprpMvs,  // multiple vehicles per site, linearly ramping supply
};

inline const char* mode_name(Mode m) {
  switch (m) {
    case Mode::Mprp: return "mprp";
    case Mode::MprpM: return "mprp-m";
    case Mode::MprpMvs: return "mprp-mvs";
  }
  return "?";
}

struct Instance {
  std::vector<Site> sites;  // sorted by id, ids are 1..n
  Point depot;
  int fleet_size = 1;
  double capacity = 0.0;
  double horizon = 0.0;
  Mode mode = Mode::Mprp;

  int num_sites() const { return static_cast<int>(sites.size()); }
  const Site& site(int id) const {
    if (id < 1 || id > num_sites()) throw std::invalid_argument("unknown site id " + std::to_string(id));
    return sites[static_cast<size_t>(id - 1)];
  }
  Point position_of(int id) const { return id == 0 ? depot : site(id).position; }
};

// Checks the structural invariants and throws std::invalid_argument on the
// first breach. Call after building an Instance by hand or from a file.
inline void check_instance(const Instance& inst) {
  if (inst.fleet_size < 1) throw std::invalid_argument("fleet size must be >= 1");
  if (!(inst.capacity > 0.0)) throw std::invalid_argument("capacity must be > 0");
  if (!(inst.horizon > 0.0)) throw std::invalid_argument("horizon must be > 0");
  for (size_t i = 0; i < inst.sites.size(); ++i) {
    const Site& s = inst.sites[i];
    if (s.id != static_cast<int>(i) + 1)
      throw std::invalid_argument("site ids must be contiguous 1..n; got " + std::to_string(s.id) +
                                  " at position " + std::to_string(i));
    if (!std::isfinite(s.position.x) || !std::isfinite(s.position.y))
      throw std::invalid_argument("site " + std::to_string(s.id) + ": non-finite coordinates");
    if (s.window_open < 0.0 || s.window_open > s.window_close || s.window_close > inst.horizon)
      throw std::invalid_argument("site " + std::to_string(s.id) + ": window outside 0 <= s <= e <= T");
    if (s.supply.quantity < 0.0)
      throw std::invalid_argument("site " + std::to_string(s.id) + ": negative supply");
    const bool is_ramp = s.supply.kind == SupplyProfile::Kind::LinearRamp;
    if (inst.mode == Mode::MprpMvs && !is_ramp)
      throw std::invalid_argument("site " + std::to_string(s.id) + ": mvs instances need ramp supplies");
    if (inst.mode != Mode::MprpMvs && is_ramp)
      throw std::invalid_argument("site " + std::to_string(s.id) + ": fixed-supply instances need fixed supplies");
    if (is_ramp && !(s.window_close > s.window_open))
      throw std::invalid_argument("site " + std::to_string(s.id) + ": ramp supply needs a nonempty window");
  }
}

struct Visit {
  int site_id = 0;
  double arrival = 0.0;  // service instant, after any waiting
  double pickup = 0.0;
};

struct Tour {
  int vehicle_id = 0;  // 1..m
  double start_time = 0.0;
  std::vector<Visit> visits;  // depot endpoints implicit

  bool empty() const { return visits.empty(); }
  double load() const {
    double q = 0.0;
    for (const Visit& v : visits) q += v.pickup;
    return q;
  }
};

struct ProfitBreakdown {
  double reward = 0.0;
  double cost = 0.0;
  double profit = 0.0;
};

struct Solution {
  std::vector<Tour> tours;  // one per vehicle, vehicle_id == index + 1
  double reward = 0.0;
  double cost = 0.0;
  double profit = 0.0;

  void set_profit(const ProfitBreakdown& p) {
    reward = p.reward;
    cost = p.cost;
    profit = p.profit;
  }
};

// An all-empty solution: one empty tour per vehicle, profit 0.
inline Solution empty_solution(const Instance& inst) {
  Solution sol;
  sol.tours.resize(static_cast<size_t>(inst.fleet_size));
  for (int k = 0; k < inst.fleet_size; ++k) {
    sol.tours[static_cast<size_t>(k)].vehicle_id = k + 1;
    sol.tours[static_cast<size_t>(k)].start_time = 0.0;
  }
  return sol;
}

// Builds a tour over `order`, computing arrivals left to right with
// unit-speed travel and waiting: arrival = max(prev departure + travel,
// window open). Returns nullopt if some arrival lands past its window
// close. Pickups are initialized to zero.
inline std::optional<Tour> schedule_tour(const Instance& inst, int vehicle_id,
                                         const std::vector<int>& order, double start_time) {
  for (size_t a = 0; a < order.size(); ++a)
    for (size_t b = a + 1; b < order.size(); ++b)
      if (order[a] == order[b])
        throw std::invalid_argument("repeated site id " + std::to_string(order[a]) + " in tour order");
  Tour tour;
  tour.vehicle_id = vehicle_id;
  tour.start_time = start_time;
  tour.visits.reserve(order.size());
  double clock = start_time;
  Point at = inst.depot;
  for (int id : order) {
    const Site& s = inst.site(id);
    double arrival = clock + distance(at, s.position);
    if (arrival < s.window_open) arrival = s.window_open;
    if (arrival > s.window_close + kTimeTol) return std::nullopt;
    tour.visits.push_back(Visit{id, arrival, 0.0});
    clock = arrival;  // zero service time
    at = s.position;
  }
  return tour;
}

// Travelled length of one tour: depot -> visits -> depot. Empty tours
// cost nothing.
inline double tour_cost(const Instance& inst, const Tour& tour) {
  if (tour.visits.empty()) return 0.0;
  double cost = distance(inst.depot, inst.site(tour.visits.front().site_id).position);
  for (size_t v = 0; v + 1 < tour.visits.size(); ++v)
    cost += distance(inst.site(tour.visits[v].site_id).position,
                     inst.site(tour.visits[v + 1].site_id).position);
  cost += distance(inst.site(tour.visits.back().site_id).position, inst.depot);
  return cost;
}

inline ProfitBreakdown evaluate_profit(const Instance& inst, const Solution& sol) {
  ProfitBreakdown p;
  for (const Tour& tour : sol.tours) {
    for (const Visit& v : tour.visits) p.reward += v.pickup;
    p.cost += tour_cost(inst, tour);
  }
  p.profit = p.reward - p.cost;
  return p;
}

}  // namespace mprp
