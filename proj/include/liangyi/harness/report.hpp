#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "liangyi/errors.hpp"

namespace liangyi {

// Everything here is a pure view of the event log.

struct DynamicsRow {
  int cycle = 0;
  std::string phase;
  double p = 0.0;
};

struct RetentionCell {
  int ip_cycle = 0;
  int ap = 0;
  double p = 0.0;
};

// drop / improvement for AP_m on IP_r, m >= r + 2, where improvement is
// P(AP_{r+1}, IP_r) - P(AP_r, IP_r) and drop is P(AP_{r+1}, IP_r) - P(AP_m, IP_r).
// NaN when the improvement is zero.
struct RetentionRatio {
  int ip_cycle = 0;
  int ap = 0;
  double improvement = 0.0;
  double drop = 0.0;
  double ratio = 0.0;
};

struct CurvePoint {
  int ap = 0;
  double applicability = 0.0;
  double mean_peo = std::numeric_limits<double>::quiet_NaN();
};

struct RunReport {
  std::vector<DynamicsRow> dynamics;
  std::vector<RetentionCell> retention;
  std::vector<RetentionRatio> ratios;
  std::vector<CurvePoint> train_curve;
  std::vector<CurvePoint> test_curve;
  long long training_runs = -1;
  std::uint64_t seed = 0;

  double p_at(int cycle, const std::string& phase) const {
    for (const auto& d : dynamics)
      if (d.cycle == cycle && d.phase == phase) return d.p;
    throw IntegrityError("report: no " + phase + " checkpoint for cycle " + std::to_string(cycle));
  }

  // Mean over the defined ratios; NaN if none are defined.
  double mean_ratio() const {
    double total = 0.0;
    int count = 0;
    for (const auto& r : ratios)
      if (std::isfinite(r.ratio)) {
        total += r.ratio;
        ++count;
      }
    return count ? total / count : std::numeric_limits<double>::quiet_NaN();
  }
};

inline std::vector<RetentionRatio> retention_ratios(const std::vector<RetentionCell>& cells) {
  std::map<std::pair<int, int>, double> p;
  int last_ap = 0;
  for (const auto& c : cells) {
    p[{c.ip_cycle, c.ap}] = c.p;
    last_ap = std::max(last_ap, c.ap);
  }
  std::vector<RetentionRatio> out;
  for (const auto& [key, value] : p) {
    const auto [r, m] = key;
    if (m < r + 2) continue;
    const auto own = p.find({r, r}), next = p.find({r, r + 1});
    if (own == p.end() || next == p.end()) continue;
    RetentionRatio rr{r, m, next->second - own->second, next->second - value, 0.0};
    rr.ratio = rr.improvement != 0.0 ? rr.drop / rr.improvement
                                     : std::numeric_limits<double>::quiet_NaN();
    out.push_back(rr);
  }
  return out;
}

inline RunReport build_report(const std::vector<std::string>& lines) {
  if (lines.empty()) throw ValidationError("report: event log is empty");
  RunReport rep;
  for (const std::string& line : lines) {
    nlohmann::json ev;
    try {
      ev = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("report: malformed event line: ") + e.what());
    }
    const std::string kind = ev.at("event");
    if (kind == "config") {
      rep.seed = ev.at("config").at("run").at("seed");
    } else if (kind == "checkpoint") {
      rep.dynamics.push_back({ev.at("cycle"), ev.at("phase"), ev.at("p")});
    } else if (kind == "retention") {
      const int r = ev.at("ip_cycle"), first = ev.at("first_ap");
      int m = first;
      for (const auto& v : ev.at("p")) rep.retention.push_back({r, m++, v.get<double>()});
    } else if (kind == "train_curve") {
      rep.train_curve.push_back({ev.at("ap"), ev.at("p")});
    } else if (kind == "test_curve") {
      rep.test_curve.push_back({ev.at("ap"), ev.at("applicability"), ev.at("mean_peo")});
    } else if (kind == "train_end") {
      rep.training_runs = ev.at("solver_runs");
    }
  }
  rep.ratios = retention_ratios(rep.retention);
  return rep;
}

inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

inline std::string dynamics_csv(const RunReport& r) {
  std::string out = "cycle,phase,p\n";
  for (const auto& d : r.dynamics) out += std::to_string(d.cycle) + "," + d.phase + "," + fmt(d.p) + "\n";
  return out;
}

inline std::string retention_csv(const RunReport& r) {
  std::string out = "ip_cycle,ap,p\n";
  for (const auto& c : r.retention)
    out += std::to_string(c.ip_cycle) + "," + std::to_string(c.ap) + "," + fmt(c.p) + "\n";
  return out;
}

inline std::string ratios_csv(const RunReport& r) {
  std::string out = "ip_cycle,ap,improvement,drop,ratio\n";
  for (const auto& x : r.ratios)
    out += std::to_string(x.ip_cycle) + "," + std::to_string(x.ap) + "," + fmt(x.improvement) +
           "," + fmt(x.drop) + "," + fmt(x.ratio) + "\n";
  return out;
}

inline std::string curve_csv(const std::vector<CurvePoint>& curve, bool with_peo) {
  std::string out = with_peo ? "ap,applicability,mean_peo\n" : "ap,p\n";
  for (const auto& c : curve) {
    out += std::to_string(c.ap) + "," + fmt(c.applicability);
    if (with_peo) out += "," + fmt(c.mean_peo);
    out += "\n";
  }
  return out;
}

}  // namespace liangyi
