#pragma once

// Text formats for instances, solutions, and run reports: key/value
// lines, LF endings, '#' comments. Floats are written with shortest
// round-trip formatting so canonical files are byte-stable and diffable.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mprp/discretize.hpp"
#include "mprp/model.hpp"
#include "mprp/reassign.hpp"
#include "mprp/validate.hpp"

namespace mprp {

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

inline std::string fmt(double v) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), v);
  return std::string(buffer, result.ptr);
}

namespace io_detail {

struct Line {
  int number;
  std::vector<std::string> tokens;
};

inline std::vector<Line> tokenize(const std::string& text) {
  std::vector<Line> lines;
  std::istringstream stream(text);
  std::string raw;
  int number = 0;
  while (std::getline(stream, raw)) {
    ++number;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    Line line{number, {}};
    std::string token;
    while (ls >> token) line.tokens.push_back(token);
    if (!line.tokens.empty()) lines.push_back(std::move(line));
  }
  return lines;
}

class Cursor {
 public:
  explicit Cursor(std::vector<Line> lines) : lines_(std::move(lines)) {}

  const Line& expect(const std::string& keyword, size_t token_count) {
    if (at_ >= lines_.size())
      throw ParseError(last_line_ + 1, "expected '" + keyword + "', found end of file");
    const Line& line = lines_[at_];
    if (line.tokens[0] != keyword)
      throw ParseError(line.number, "expected '" + keyword + "', found '" + line.tokens[0] + "'");
    if (line.tokens.size() != token_count)
      throw ParseError(line.number, "'" + keyword + "' needs " + std::to_string(token_count - 1) +
                                        " field(s), found " + std::to_string(line.tokens.size() - 1));
    last_line_ = line.number;
    ++at_;
    return line;
  }

  bool done() const { return at_ >= lines_.size(); }
  const Line& current() const { return lines_[at_]; }

 private:
  std::vector<Line> lines_;
  size_t at_ = 0;
  int last_line_ = 0;
};

inline double parse_number(const Line& line, size_t index) {
  const std::string& token = line.tokens[index];
  double value = 0.0;
  const auto result = std::from_chars(token.data(), token.data() + token.size(), value);
  if (result.ec != std::errc() || result.ptr != token.data() + token.size())
    throw ParseError(line.number, "field " + std::to_string(index) + ": '" + token + "' is not a number");
  return value;
}

inline int parse_int(const Line& line, size_t index) {
  const std::string& token = line.tokens[index];
  int value = 0;
  const auto result = std::from_chars(token.data(), token.data() + token.size(), value);
  if (result.ec != std::errc() || result.ptr != token.data() + token.size())
    throw ParseError(line.number, "field " + std::to_string(index) + ": '" + token + "' is not an integer");
  return value;
}

}  // namespace io_detail

inline Mode parse_mode(const std::string& name) {
  if (name == "mprp") return Mode::Mprp;
  if (name == "mprp-m") return Mode::MprpM;
  if (name == "mprp-mvs") return Mode::MprpMvs;
  throw std::invalid_argument("unknown mode '" + name + "' (expected mprp | mprp-m | mprp-mvs)");
}

inline Instance parse_instance(const std::string& text) {
  io_detail::Cursor cursor(io_detail::tokenize(text));
  cursor.expect("mprp-instance", 2);
  Instance inst;
  {
    const auto& line = cursor.expect("mode", 2);
    try {
      inst.mode = parse_mode(line.tokens[1]);
    } catch (const std::invalid_argument& e) {
      throw ParseError(line.number, e.what());
    }
  }
  inst.horizon = io_detail::parse_number(cursor.expect("horizon", 2), 1);
  inst.capacity = io_detail::parse_number(cursor.expect("capacity", 2), 1);
  inst.fleet_size = io_detail::parse_int(cursor.expect("fleet", 2), 1);
  {
    const auto& line = cursor.expect("depot", 3);
    inst.depot = Point{io_detail::parse_number(line, 1), io_detail::parse_number(line, 2)};
  }
  const int n = io_detail::parse_int(cursor.expect("sites", 2), 1);
  for (int i = 0; i < n; ++i) {
    const auto& line = cursor.expect("site", 7);
    Site site;
    site.id = io_detail::parse_int(line, 1);
    site.position = Point{io_detail::parse_number(line, 2), io_detail::parse_number(line, 3)};
    site.window_open = io_detail::parse_number(line, 4);
    site.window_close = io_detail::parse_number(line, 5);
    const double q = io_detail::parse_number(line, 6);
    site.supply = inst.mode == Mode::MprpMvs ? SupplyProfile::ramp(q) : SupplyProfile::fixed(q);
    inst.sites.push_back(site);
    try {
      check_instance(inst);  // catches bad ids/windows at the offending line
    } catch (const std::invalid_argument& e) {
      throw ParseError(line.number, e.what());
    }
  }
  if (!cursor.done())
    throw ParseError(cursor.current().number, "unexpected trailing line '" + cursor.current().tokens[0] + "'");
  try {
    check_instance(inst);
  } catch (const std::invalid_argument& e) {
    throw ParseError(0, e.what());
  }
  return inst;
}

inline std::string write_instance(const Instance& inst) {
  std::string out;
  out += "mprp-instance v1\n";
  out += "mode " + std::string(mode_name(inst.mode)) + "\n";
  out += "horizon " + fmt(inst.horizon) + "\n";
  out += "capacity " + fmt(inst.capacity) + "\n";
  out += "fleet " + std::to_string(inst.fleet_size) + "\n";
  out += "depot " + fmt(inst.depot.x) + " " + fmt(inst.depot.y) + "\n";
  out += "sites " + std::to_string(inst.num_sites()) + "\n";
  for (const Site& s : inst.sites)
    out += "site " + std::to_string(s.id) + " " + fmt(s.position.x) + " " + fmt(s.position.y) + " " +
           fmt(s.window_open) + " " + fmt(s.window_close) + " " + fmt(s.supply.quantity) + "\n";
  return out;
}

inline Solution parse_solution(const std::string& text) {
  io_detail::Cursor cursor(io_detail::tokenize(text));
  cursor.expect("mprp-solution", 2);
  Solution sol;
  const int m = io_detail::parse_int(cursor.expect("fleet", 2), 1);
  sol.reward = io_detail::parse_number(cursor.expect("reward", 2), 1);
  sol.cost = io_detail::parse_number(cursor.expect("cost", 2), 1);
  sol.profit = io_detail::parse_number(cursor.expect("profit", 2), 1);
  for (int k = 1; k <= m; ++k) {
    const auto& line = cursor.expect("tour", 6);
    Tour tour;
    tour.vehicle_id = io_detail::parse_int(line, 1);
    if (line.tokens[2] != "start" || line.tokens[4] != "visits")
      throw ParseError(line.number, "tour line needs the form: tour <vehicle> start <t> visits <count>");
    tour.start_time = io_detail::parse_number(line, 3);
    const int visits = io_detail::parse_int(line, 5);
    for (int v = 0; v < visits; ++v) {
      const auto& vline = cursor.expect("visit", 4);
      tour.visits.push_back(Visit{io_detail::parse_int(vline, 1), io_detail::parse_number(vline, 2),
                                  io_detail::parse_number(vline, 3)});
    }
    sol.tours.push_back(std::move(tour));
  }
  if (!cursor.done())
    throw ParseError(cursor.current().number, "unexpected trailing line '" + cursor.current().tokens[0] + "'");
  return sol;
}

inline std::string write_solution(const Solution& sol) {
  std::string out;
  out += "mprp-solution v1\n";
  out += "fleet " + std::to_string(sol.tours.size()) + "\n";
  out += "reward " + fmt(sol.reward) + "\n";
  out += "cost " + fmt(sol.cost) + "\n";
  out += "profit " + fmt(sol.profit) + "\n";
  for (const Tour& tour : sol.tours) {
    out += "tour " + std::to_string(tour.vehicle_id) + " start " + fmt(tour.start_time) + " visits " +
           std::to_string(tour.visits.size()) + "\n";
    for (const Visit& v : tour.visits)
      out += "visit " + std::to_string(v.site_id) + " " + fmt(v.arrival) + " " + fmt(v.pickup) + "\n";
  }
  return out;
}

// FNV-1a over the canonical instance text.
inline std::string instance_digest(const Instance& inst) {
  const std::string text = write_instance(inst);
  uint64_t hash = 1469598103934665603ull;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  char buffer[17];
  static const char* digits = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buffer[i] = digits[hash & 0xf];
    hash >>= 4;
  }
  buffer[16] = '\0';
  return std::string(buffer);
}

struct RunReport {
  std::string command = "solve";
  const Instance* instance = nullptr;
  std::string solver;
  SolverConfig config;
  std::optional<double> epsilon;
  const Solution* solution = nullptr;
  const ValidationReport* validation = nullptr;
  int reassignments = -1;     // printed when >= 0
  int overload_flags = -1;    // literal-capacity acceptances that Q vetoed
  int derived_sites = -1;     // mvs pipeline facts, printed when >= 0
  double alpha = 0.0;
  int intervals = 0;
  std::optional<double> oracle_profit;
  bool oracle_lower_bound = false;
  std::optional<double> ratio;
  std::optional<OrderingDiagnostic> ordering;
  std::optional<FleetDiagnostic> fleet;
  std::optional<double> seconds;  // only set when timings were requested
};

inline std::string write_report(const RunReport& r) {
  std::string out;
  out += "mprp-report v1\n";
  out += "command " + r.command + "\n";
  if (r.instance) {
    out += "instance-digest " + instance_digest(*r.instance) + "\n";
    out += "mode " + std::string(mode_name(r.instance->mode)) + "\n";
  }
  if (!r.solver.empty()) {
    out += "solver " + r.solver + "\n";
    out += "config exact-threshold " + std::to_string(r.config.exact_threshold) + " insertion-rounds " +
           std::to_string(r.config.insertion_rounds) + " seed " + std::to_string(r.config.rng_seed) + "\n";
  }
  if (r.epsilon) out += "epsilon " + fmt(*r.epsilon) + "\n";
  if (r.derived_sites >= 0)
    out += "derived-sites " + std::to_string(r.derived_sites) + " alpha " + fmt(r.alpha) +
           " intervals " + std::to_string(r.intervals) + "\n";
  if (r.validation) {
    const ProfitBreakdown& p = r.validation->audited_profit;
    out += "reward " + fmt(p.reward) + "\n";
    out += "cost " + fmt(p.cost) + "\n";
    out += "profit " + fmt(p.profit) + "\n";
  }
  if (r.reassignments >= 0) out += "reassignments " + std::to_string(r.reassignments) + "\n";
  if (r.overload_flags >= 0) out += "capacity-overload-flags " + std::to_string(r.overload_flags) + "\n";
  if (r.solution) {
    for (const Tour& tour : r.solution->tours) {
      out += "tour " + std::to_string(tour.vehicle_id) + " start " + fmt(tour.start_time) +
             " visits " + std::to_string(tour.visits.size()) + "\n";
      for (const Visit& v : tour.visits)
        out += "visit " + std::to_string(v.site_id) + " " + fmt(v.arrival) + " " + fmt(v.pickup) + "\n";
    }
  }
  if (r.validation) {
    out += "validation violations " + std::to_string(r.validation->violations.size()) + "\n";
    for (const Violation& v : r.validation->violations)
      out += "violation " + std::string(violation_name(v.kind)) + " vehicle " + std::to_string(v.vehicle) +
             " site " + std::to_string(v.site) + " time " + fmt(v.time) + " magnitude " +
             fmt(v.magnitude) + "\n";
  }
  if (r.oracle_profit) {
    out += "oracle-profit " + fmt(*r.oracle_profit) +
           (r.oracle_lower_bound ? " grid-lower-bound" : " exact") + "\n";
    if (r.ratio) out += "oracle-ratio " + fmt(*r.ratio) + "\n";
  }
  if (r.ordering) {
    out += "diag-ordering trials " + std::to_string(r.ordering->total_gains.size()) + " min-gain " +
           fmt(r.ordering->min_gain) + " max-gain " + fmt(r.ordering->max_gain) + " ratio " +
           fmt(r.ordering->ratio) + "\n";
  }
  if (r.fleet) {
    out += "diag-fleet profit-fleet " + fmt(r.fleet->profit_fleet) + " profit-single " +
           fmt(r.fleet->profit_single) + " ratio " + fmt(r.fleet->ratio) + " bound " +
           fmt(r.fleet->bound) + "\n";
  }
  if (r.seconds) out += "elapsed-seconds " + fmt(*r.seconds) + "\n";
  return out;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

}  // namespace mprp
