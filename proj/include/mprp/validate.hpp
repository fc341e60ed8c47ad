#pragma once

// Mode-aware feasibility checking and profit auditing. This is the
// referee: it recomputes everything from the raw tours and never trusts
// solver-reported numbers.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "mprp/model.hpp"

namespace mprp {

enum class ViolationKind {
  WindowViolation,
  CapacityViolation,
  DuplicateVisit,       // same vehicle, same site
  SingleVisitViolation,  // single-visit mode: site on two tours
  AvailabilityViolation,
  ScheduleInconsistency,
  ProfitMismatch,
};

inline const char* violation_name(ViolationKind k) {
  switch (k) {
    case ViolationKind::WindowViolation: return "WindowViolation";
    case ViolationKind::CapacityViolation: return "CapacityViolation";
    case ViolationKind::DuplicateVisit: return "DuplicateVisit";
    case ViolationKind::SingleVisitViolation: return "SingleVisitViolation";
    case ViolationKind::AvailabilityViolation: return "AvailabilityViolation";
    case ViolationKind::ScheduleInconsistency: return "ScheduleInconsistency";
    case ViolationKind::ProfitMismatch: return "ProfitMismatch";
  }
  return "?";
}

struct Violation {
  ViolationKind kind;
  int vehicle = 0;   // 0 when not tied to one vehicle
  int site = 0;      // 0 when not tied to one site
  double time = 0.0;
  double magnitude = 0.0;  // amount by which the constraint is broken
};

struct ValidationReport {
  std::vector<Violation> violations;
  ProfitBreakdown audited_profit;

  bool ok() const { return violations.empty(); }
};

// Recomputes reward/cost/profit from the raw tours. Same contract as
// evaluate_profit, re-implemented here so the referee does not share a
// code path with the solvers it checks.
inline ProfitBreakdown audit_profit(const Instance& inst, const Solution& sol) {
  ProfitBreakdown p;
  for (const Tour& tour : sol.tours) {
    Point prev = inst.depot;
    for (const Visit& v : tour.visits) {
      const Point at = inst.site(v.site_id).position;
      p.reward += v.pickup;
      p.cost += std::hypot(at.x - prev.x, at.y - prev.y);
      prev = at;
    }
    if (!tour.visits.empty()) p.cost += std::hypot(inst.depot.x - prev.x, inst.depot.y - prev.y);
  }
  p.profit = p.reward - p.cost;
  return p;
}

inline ValidationReport validate(const Instance& inst, const Solution& sol) {
  ValidationReport report;
  auto flag = [&report](ViolationKind kind, int vehicle, int site, double time, double magnitude) {
    report.violations.push_back(Violation{kind, vehicle, site, time, magnitude});
  };

  // Vehicle structure: one tour per vehicle id 1..m, in order.
  if (static_cast<int>(sol.tours.size()) != inst.fleet_size)
    flag(ViolationKind::ScheduleInconsistency, 0, 0, 0.0,
         static_cast<double>(sol.tours.size()) - inst.fleet_size);
  for (size_t t = 0; t < sol.tours.size(); ++t)
    if (sol.tours[t].vehicle_id != static_cast<int>(t) + 1)
      flag(ViolationKind::ScheduleInconsistency, sol.tours[t].vehicle_id, 0, 0.0, 0.0);

  // Per-tour checks: travel consistency, windows, duplicates, capacity.
  for (const Tour& tour : sol.tours) {
    double clock = tour.start_time;
    Point at = inst.depot;
    double load = 0.0;
    std::vector<int> seen;
    for (const Visit& v : tour.visits) {
      const Site& s = inst.site(v.site_id);
      const double earliest = clock + distance(at, s.position);
      if (v.arrival < earliest - kTimeTol)
        flag(ViolationKind::ScheduleInconsistency, tour.vehicle_id, v.site_id, v.arrival,
             earliest - v.arrival);
      if (v.arrival < s.window_open - kTimeTol)
        flag(ViolationKind::WindowViolation, tour.vehicle_id, v.site_id, v.arrival,
             s.window_open - v.arrival);
      if (v.arrival > s.window_close + kTimeTol)
        flag(ViolationKind::WindowViolation, tour.vehicle_id, v.site_id, v.arrival,
             v.arrival - s.window_close);
      if (std::find(seen.begin(), seen.end(), v.site_id) != seen.end())
        flag(ViolationKind::DuplicateVisit, tour.vehicle_id, v.site_id, v.arrival, 1.0);
      seen.push_back(v.site_id);
      if (v.pickup < -kQtyTol)
        flag(ViolationKind::AvailabilityViolation, tour.vehicle_id, v.site_id, v.arrival, -v.pickup);
      load += v.pickup;
      clock = v.arrival;
      at = s.position;
    }
    if (load > inst.capacity + kQtyTol)
      flag(ViolationKind::CapacityViolation, tour.vehicle_id, 0, 0.0, load - inst.capacity);
  }

  // Cross-tour checks per site.
  struct SitePickup {
    double time;
    int vehicle;
    double quantity;
  };
  std::map<int, std::vector<SitePickup>> per_site;
  for (const Tour& tour : sol.tours)
    for (const Visit& v : tour.visits)
      per_site[v.site_id].push_back(SitePickup{v.arrival, tour.vehicle_id, v.pickup});

  for (auto& [site_id, pickups] : per_site) {
    const Site& s = inst.site(site_id);
    if (inst.mode == Mode::Mprp && pickups.size() > 1) {
      for (size_t i = 1; i < pickups.size(); ++i)
        flag(ViolationKind::SingleVisitViolation, pickups[i].vehicle, site_id, pickups[i].time,
             static_cast<double>(pickups.size() - 1));
    }
    if (inst.mode == Mode::MprpMvs) {
      // Cumulative availability at pickup instants. Supply is
      // nondecreasing and pickups are step increments, so checking at
      // the pickup instants covers all t. Simultaneous pickups both
      // count at that instant, ordered by vehicle id.
      std::sort(pickups.begin(), pickups.end(), [](const SitePickup& a, const SitePickup& b) {
        if (a.time != b.time) return a.time < b.time;
        return a.vehicle < b.vehicle;
      });
      double cumulative = 0.0;
      for (const SitePickup& p : pickups) {
        cumulative += p.quantity;
        const double available = supply_at(s, p.time);
        if (cumulative > available + kQtyTol)
          flag(ViolationKind::AvailabilityViolation, p.vehicle, site_id, p.time,
               cumulative - available);
      }
    } else {
      double total = 0.0;
      for (const SitePickup& p : pickups) total += p.quantity;
      if (total > s.supply.quantity + kQtyTol)
        flag(ViolationKind::AvailabilityViolation, pickups.front().vehicle, site_id,
             pickups.front().time, total - s.supply.quantity);
    }
  }

  report.audited_profit = audit_profit(inst, sol);
  if (std::abs(report.audited_profit.reward - sol.reward) > kProfitTol ||
      std::abs(report.audited_profit.cost - sol.cost) > kProfitTol ||
      std::abs(report.audited_profit.profit - sol.profit) > kProfitTol)
    flag(ViolationKind::ProfitMismatch, 0, 0, 0.0,
         std::abs(report.audited_profit.profit - sol.profit));
  return report;
}

}  // namespace mprp
