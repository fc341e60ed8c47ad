#pragma once

// Single-visit solvers used as the first stage of the multi-visit
// pipeline: exhaustive search at small n, greedy profitable insertion
// otherwise, behind one dispatch function.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <unordered_map>
#include <vector>

#include "mprp/model.hpp"

namespace mprp {

struct SolverConfig {
  int exact_threshold = 8;      // max n handed to the exhaustive solver
  int insertion_rounds = 100000;  // iteration cap for the heuristic
  uint64_t rng_seed = 0;

  void check() const {
    if (exact_threshold < 1) throw std::invalid_argument("exact_threshold must be >= 1");
    if (insertion_rounds < 0) throw std::invalid_argument("insertion_rounds must be >= 0");
  }
};

namespace detail {

// Saturating pickups along a fixed route: min(q_i, remaining capacity),
// tried in visit order and in descending-q order, keeping the better
// total (they tie for a single capacity, but the contract says compare).
inline void assign_saturating_pickups(const Instance& inst, Tour& tour) {
  const size_t n = tour.visits.size();
  std::vector<double> in_order(n, 0.0), by_quantity(n, 0.0);
  double room = inst.capacity;
  for (size_t v = 0; v < n; ++v) {
    in_order[v] = std::min(inst.site(tour.visits[v].site_id).supply.quantity, room);
    room -= in_order[v];
  }
  std::vector<size_t> idx(n);
  for (size_t v = 0; v < n; ++v) idx[v] = v;
  std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
    const double qa = inst.site(tour.visits[a].site_id).supply.quantity;
    const double qb = inst.site(tour.visits[b].site_id).supply.quantity;
    if (qa != qb) return qa > qb;
    return a < b;
  });
  room = inst.capacity;
  for (size_t v : idx) {
    by_quantity[v] = std::min(inst.site(tour.visits[v].site_id).supply.quantity, room);
    room -= by_quantity[v];
  }
  double total_in_order = 0.0, total_by_quantity = 0.0;
  for (size_t v = 0; v < n; ++v) {
    total_in_order += in_order[v];
    total_by_quantity += by_quantity[v];
  }
  const std::vector<double>& chosen = total_by_quantity > total_in_order + kQtyTol ? by_quantity : in_order;
  for (size_t v = 0; v < n; ++v) tour.visits[v].pickup = chosen[v];
}

// Cheapest time-feasible visit order over a subset of sites, start at 0.
struct SubsetRoute {
  bool feasible = false;
  double cost = 0.0;
  std::vector<int> order;
};

class SubsetRouter {
 public:
  explicit SubsetRouter(const Instance& inst) : inst_(inst) {}

  const SubsetRoute& best_route(uint32_t mask) {
    auto it = memo_.find(mask);
    if (it != memo_.end()) return it->second;
    SubsetRoute route;
    if (mask == 0) {
      route.feasible = true;
    } else {
      best_cost_ = std::numeric_limits<double>::infinity();
      best_order_.clear();
      partial_.clear();
      extend(mask, 0.0, 0.0, inst_.depot);
      route.feasible = std::isfinite(best_cost_);
      route.cost = route.feasible ? best_cost_ : 0.0;
      route.order = best_order_;
    }
    return memo_.emplace(mask, std::move(route)).first->second;
  }

 private:
  void extend(uint32_t remaining, double clock, double cost, Point at) {
    if (remaining == 0) {
      const double total = cost + distance(at, inst_.depot);
      if (total < best_cost_) {
        best_cost_ = total;
        best_order_ = partial_;
      }
      return;
    }
    if (cost + distance(at, inst_.depot) >= best_cost_) return;
    for (int i = 0; i < inst_.num_sites(); ++i) {
      const uint32_t bit = 1u << i;
      if (!(remaining & bit)) continue;
      const Site& s = inst_.sites[static_cast<size_t>(i)];
      double arrival = clock + distance(at, s.position);
      if (arrival < s.window_open) arrival = s.window_open;
      if (arrival > s.window_close + kTimeTol) continue;
      partial_.push_back(s.id);
      extend(remaining & ~bit, arrival, cost + distance(at, s.position), s.position);
      partial_.pop_back();
    }
  }

  const Instance& inst_;
  std::unordered_map<uint32_t, SubsetRoute> memo_;
  double best_cost_ = 0.0;
  std::vector<int> best_order_;
  std::vector<int> partial_;
};

}  // namespace detail

// Exhaustive single-visit optimum. Enumerates every split of site
// subsets across vehicles (vehicle labels canonicalized, capacities are
// uniform) with the cheapest feasible order per subset; pickups saturate
// greedily. Returns nullopt when n exceeds config.exact_threshold so the
// caller can fall back to the heuristic.
inline std::optional<Solution> solve_exact_mprp(const Instance& inst, const SolverConfig& config) {
  config.check();
  if (inst.mode != Mode::Mprp) throw std::invalid_argument("solve_exact_mprp needs a single-visit instance");
  if (inst.num_sites() > config.exact_threshold) return std::nullopt;

  const int n = inst.num_sites();
  const int m = inst.fleet_size;
  detail::SubsetRouter router(inst);

  std::vector<int> assignment(static_cast<size_t>(n), 0);  // 0 = skip, 1..m = vehicle
  std::vector<uint32_t> best_masks(static_cast<size_t>(m), 0);
  double best_profit = 0.0;

  // DFS over site -> vehicle assignments; a new vehicle label may only be
  // opened in order (identical vehicles, so this loses nothing).
  auto evaluate = [&]() {
    std::vector<uint32_t> masks(static_cast<size_t>(m), 0);
    for (int i = 0; i < n; ++i)
      if (assignment[static_cast<size_t>(i)] > 0)
        masks[static_cast<size_t>(assignment[static_cast<size_t>(i)] - 1)] |= 1u << i;
    double profit = 0.0;
    for (int k = 0; k < m; ++k) {
      if (masks[static_cast<size_t>(k)] == 0) continue;
      const detail::SubsetRoute& route = router.best_route(masks[static_cast<size_t>(k)]);
      if (!route.feasible) return;
      double supply = 0.0;
      for (int i = 0; i < n; ++i)
        if (masks[static_cast<size_t>(k)] & (1u << i)) supply += inst.sites[static_cast<size_t>(i)].supply.quantity;
      profit += std::min(supply, inst.capacity) - route.cost;
    }
    if (profit > best_profit + kQtyTol) {
      best_profit = profit;
      best_masks = masks;
    }
  };

  auto dfs = [&](auto&& self, int site, int max_used) -> void {
    if (site == n) {
      evaluate();
      return;
    }
    for (int v = 0; v <= std::min(max_used + 1, m); ++v) {
      assignment[static_cast<size_t>(site)] = v;
      self(self, site + 1, std::max(max_used, v));
    }
    assignment[static_cast<size_t>(site)] = 0;
  };
  dfs(dfs, 0, 0);

  Solution sol = empty_solution(inst);
  for (int k = 0; k < m; ++k) {
    if (best_masks[static_cast<size_t>(k)] == 0) continue;
    const detail::SubsetRoute& route = router.best_route(best_masks[static_cast<size_t>(k)]);
    auto tour = schedule_tour(inst, k + 1, route.order, 0.0);
    if (!tour) throw std::logic_error("exact solver produced an unschedulable route");
    detail::assign_saturating_pickups(inst, *tour);
    sol.tours[static_cast<size_t>(k)] = *tour;
  }
  sol.set_profit(evaluate_profit(inst, sol));
  return sol;
}

namespace detail {

// Per-tour waiting times and forward slack, for O(1) insertion
// feasibility tests. F[v] is the largest arrival shift position v can
// absorb without any downstream window closing.
struct TourSlack {
  std::vector<double> wait;
  std::vector<double> slack;

  void compute(const Instance& inst, const Tour& tour) {
    const size_t n = tour.visits.size();
    wait.assign(n, 0.0);
    slack.assign(n, 0.0);
    double clock = tour.start_time;
    Point at = inst.depot;
    for (size_t v = 0; v < n; ++v) {
      const Site& s = inst.site(tour.visits[v].site_id);
      const double raw = clock + distance(at, s.position);
      wait[v] = std::max(0.0, tour.visits[v].arrival - raw);
      clock = tour.visits[v].arrival;
      at = s.position;
    }
    double carry = std::numeric_limits<double>::infinity();
    for (size_t v = n; v-- > 0;) {
      const Site& s = inst.site(tour.visits[v].site_id);
      slack[v] = std::min(s.window_close - tour.visits[v].arrival, carry);
      carry = slack[v] + wait[v];
    }
  }

  // Shift absorbed at position v (inserting just before it): feasible iff
  // the new arrival at v stays within slack[v] of the old one.
  bool insertion_fits(const Instance& inst, const Tour& tour, size_t position, int site_id,
                      double* arrival_out) const {
    const Site& s = inst.site(site_id);
    const Point prev = position == 0 ? inst.depot : inst.site(tour.visits[position - 1].site_id).position;
    const double prev_dep = position == 0 ? tour.start_time : tour.visits[position - 1].arrival;
    double arrival = prev_dep + distance(prev, s.position);
    if (arrival < s.window_open) arrival = s.window_open;
    if (arrival > s.window_close + kTimeTol) return false;
    if (arrival_out) *arrival_out = arrival;
    if (position == tour.visits.size()) return true;
    const Site& next = inst.site(tour.visits[position].site_id);
    const double new_raw = arrival + distance(s.position, next.position);
    const double shifted = std::max(new_raw, next.window_open);
    const double shift = shifted - tour.visits[position].arrival;
    return shift <= slack[position] + kTimeTol;
  }
};

inline double insertion_detour(const Instance& inst, const Tour& tour, size_t position, int site_id) {
  const Point s = inst.site(site_id).position;
  const Point prev = position == 0 ? inst.depot : inst.site(tour.visits[position - 1].site_id).position;
  const Point next =
      position == tour.visits.size() ? inst.depot : inst.site(tour.visits[position].site_id).position;
  return distance(prev, s) + distance(s, next) - distance(prev, next);
}

}  // namespace detail

// Greedy profitable insertion: repeatedly apply the (site, vehicle,
// position) insertion with the largest positive margin (pickup gain
// minus detour) among time- and capacity-feasible moves. Ties break by
// lowest site id, then vehicle id, then earliest position.
inline Solution solve_heuristic_mprp(const Instance& inst, const SolverConfig& config) {
  config.check();
  if (inst.mode != Mode::Mprp) throw std::invalid_argument("solve_heuristic_mprp needs a single-visit instance");

  const int m = inst.fleet_size;
  Solution sol = empty_solution(inst);
  std::vector<bool> used(static_cast<size_t>(inst.num_sites()) + 1, false);
  std::vector<double> load(static_cast<size_t>(m), 0.0);
  std::vector<detail::TourSlack> slack(static_cast<size_t>(m));
  for (int k = 0; k < m; ++k) slack[static_cast<size_t>(k)].compute(inst, sol.tours[static_cast<size_t>(k)]);

  for (int round = 0; round < config.insertion_rounds; ++round) {
    double best_margin = kQtyTol;
    int best_site = 0, best_vehicle = 0;
    size_t best_position = 0;
    double best_pickup = 0.0;

    for (const Site& s : inst.sites) {
      if (used[static_cast<size_t>(s.id)]) continue;
      for (int k = 0; k < m; ++k) {
        const double pickup = std::min(s.supply.quantity, inst.capacity - load[static_cast<size_t>(k)]);
        if (pickup <= kQtyTol) continue;
        const Tour& tour = sol.tours[static_cast<size_t>(k)];
        for (size_t p = 0; p <= tour.visits.size(); ++p) {
          const double margin = pickup - detail::insertion_detour(inst, tour, p, s.id);
          if (margin <= best_margin) continue;  // strict improvement keeps the tie order
          if (!slack[static_cast<size_t>(k)].insertion_fits(inst, tour, p, s.id, nullptr)) continue;
          best_margin = margin;
          best_site = s.id;
          best_vehicle = k + 1;
          best_position = p;
          best_pickup = pickup;
        }
      }
    }
    if (best_site == 0) break;

    Tour& tour = sol.tours[static_cast<size_t>(best_vehicle - 1)];
    std::vector<int> order;
    order.reserve(tour.visits.size() + 1);
    for (size_t v = 0; v < tour.visits.size(); ++v) {
      if (v == best_position) order.push_back(best_site);
      order.push_back(tour.visits[v].site_id);
    }
    if (best_position == tour.visits.size()) order.push_back(best_site);
    std::vector<double> pickups;
    pickups.reserve(order.size());
    for (size_t v = 0, old = 0; v < order.size(); ++v) {
      if (order[v] == best_site)
        pickups.push_back(best_pickup);
      else
        pickups.push_back(tour.visits[old++].pickup);
    }
    auto rescheduled = schedule_tour(inst, best_vehicle, order, tour.start_time);
    if (!rescheduled) throw std::logic_error("insertion passed the slack test but fails rescheduling");
    for (size_t v = 0; v < rescheduled->visits.size(); ++v) rescheduled->visits[v].pickup = pickups[v];
    tour = *rescheduled;
    used[static_cast<size_t>(best_site)] = true;
    load[static_cast<size_t>(best_vehicle - 1)] += best_pickup;
    slack[static_cast<size_t>(best_vehicle - 1)].compute(inst, tour);
  }

  sol.set_profit(evaluate_profit(inst, sol));
  return sol;
}

// Exact below the threshold, greedy insertion above it.
inline Solution solve_baseline(const Instance& inst, const SolverConfig& config) {
  if (auto exact = solve_exact_mprp(inst, config)) return *exact;
  return solve_heuristic_mprp(inst, config);
}

}  // namespace mprp
