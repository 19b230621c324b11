#include "fbench/hppc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "fbench/csv.hpp"
#include "fbench/errors.hpp"
#include "fbench/numeric.hpp"

namespace fbench {

const char* to_string(Direction d) { return d == Direction::charge ? "charge" : "discharge"; }

Direction direction_from_string(const std::string& s) {
  if (s == "charge") return Direction::charge;
  if (s == "discharge") return Direction::discharge;
  throw ConfigError("direction must be 'charge' or 'discharge', got '" + s + "'");
}

namespace {

// Signed charge passed since the first record, integrated inside segments
// only so inter-step gaps contribute nothing.
std::vector<double> cumulative_charge(const CyclerTimeSeries& s, const std::vector<StepSegment>& segs) {
  const auto& r = s.records;
  std::vector<double> cum(r.size(), 0.0);
  double acc = 0.0;
  for (const auto& seg : segs) {
    cum[seg.begin] = acc;
    for (std::size_t i = seg.begin + 1; i < seg.end; ++i) {
      acc += 0.5 * (r[i].current + r[i - 1].current) * (r[i].test_time - r[i - 1].test_time) / 3600.0;
      cum[i] = acc;
    }
  }
  return cum;
}

bool is_pulse(SegmentKind k) { return k == SegmentKind::pulse_charge || k == SegmentKind::pulse_discharge; }

}  // namespace

ResistanceProfile extract_pulses(const CyclerTimeSeries& series, const HppcConfig& cfg) {
  ResistanceProfile prof;
  prof.cell_id = cfg.cell_id;
  prof.temperature_label = cfg.temperature_label;
  const auto segs = segment_steps(series, cfg.segments);
  const auto& r = series.records;
  const auto cum = cumulative_charge(series, segs);

  const bool any_pulse = std::any_of(segs.begin(), segs.end(), [](const StepSegment& s) { return is_pulse(s.kind); });
  if (!any_pulse) throw InsufficientDataError("extract_pulses: series contains no pulse segment");

  auto is_full_discharge_end = [&](const StepSegment& s) {
    return s.kind == SegmentKind::cc_discharge && r[s.end - 1].voltage <= cfg.v_min + cfg.anchor_tol;
  };

  // Records that may anchor SOC = 0: equilibrium or slow-discharge samples at the lower cut.
  std::vector<bool> anchor_ok(r.size(), false);
  for (const auto& s : segs) {
    if (s.kind != SegmentKind::rest && s.kind != SegmentKind::cc_discharge) continue;
    for (std::size_t i = s.begin; i < s.end; ++i) anchor_ok[i] = r[i].voltage <= cfg.v_min + cfg.anchor_tol;
  }

  for (std::size_t k = 0; k < segs.size(); ++k) {
    const auto& seg = segs[k];
    if (!is_pulse(seg.kind)) continue;
    const std::string where = "pulse at t=" + csv::fmt(r[seg.begin].test_time) + " s";
    if (k == 0 || segs[k - 1].kind != SegmentKind::rest) {
      prof.warnings.push_back(where + ": no preceding rest, skipped");
      continue;
    }

    double ref = cfg.nominal_capacity;
    if (cfg.basis == SocBasis::measured_capacity) {
      if (cfg.reference_capacity) {
        ref = *cfg.reference_capacity;
      } else {
        bool found = false;
        for (std::size_t j = k; j-- > 0;) {
          const auto& d = segs[j];
          if (is_full_discharge_end(d) && std::abs(d.mean_current) <= cfg.nominal_capacity / 15.0) {
            ref = integrate_capacity(series, d);
            found = true;
            break;
          }
        }
        if (!found) prof.warnings.push_back(where + ": no measured C/20 capacity, nominal capacity used");
      }
    }
    if (!(ref > 0.0)) throw ConfigError("SOC reference capacity must be positive");

    std::size_t anchor = 0;
    for (std::size_t j = seg.begin; j-- > 0;) {
      if (anchor_ok[j]) {
        anchor = j;
        break;
      }
    }
    const double soc = (cum[seg.begin] - cum[anchor]) / ref;

    const double v_before = r[segs[k - 1].end - 1].voltage;
    const double t0 = r[seg.begin].test_time;
    std::vector<double> t, v;
    for (std::size_t i = seg.begin; i < seg.end; ++i) {
      t.push_back(r[i].test_time - t0);
      v.push_back(r[i].voltage);
    }
    for (double d : cfg.durations) {
      if (t.size() < 2 || d > t.back() + 1e-9) {
        prof.warnings.push_back(where + ": shorter than " + csv::fmt(d) + " s, duration omitted");
        continue;
      }
      PulseMeasurement m;
      m.soc = soc;
      m.direction = seg.kind == SegmentKind::pulse_charge ? Direction::charge : Direction::discharge;
      m.duration = d;
      m.pulse_current = seg.mean_current;
      m.v_before = v_before;
      m.v_at_duration = linear_interp(t, v, std::min(d, t.back()));
      const double dv = std::abs(m.v_at_duration - m.v_before);
      m.resistance = dv / std::abs(m.pulse_current);
      m.below_floor = dv < cfg.instrument_floor;
      prof.pulses.push_back(m);
    }
  }
  std::stable_sort(prof.pulses.begin(), prof.pulses.end(),
                   [](const PulseMeasurement& a, const PulseMeasurement& b) { return a.soc < b.soc; });
  return prof;
}

double resistance_at_soc(const ResistanceProfile& profile, double soc, double duration, Direction direction,
                         InterpMode mode) {
  std::vector<double> s, rr;
  for (const auto& p : profile.pulses) {
    if (p.direction == direction && std::abs(p.duration - duration) < 1e-9) {
      s.push_back(p.soc);
      rr.push_back(p.resistance);
    }
  }
  if (s.empty()) throw InsufficientDataError("no pulses for the requested duration and direction");
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (!(s[i] > s[i - 1])) throw ValidationError("profile SOC values must increase strictly per family");
  }
  if (soc < s.front() || soc > s.back()) throw ExtrapolationError("SOC outside the measured span");
  if (s.size() == 1) return rr.front();
  if (mode == InterpMode::linear) return linear_interp(s, rr, soc);
  return MonotoneCubic(s, rr)(soc);
}

void write_profile_csv(const std::string& path, const ResistanceProfile& profile) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << "cell_id,temperature_label,soc,direction,duration_s,current_a,resistance_ohm\n";
  for (const auto& p : profile.pulses) {
    out << profile.cell_id << ',' << profile.temperature_label << ',' << csv::fmt(p.soc) << ','
        << to_string(p.direction) << ',' << csv::fmt(p.duration) << ',' << csv::fmt(p.pulse_current) << ','
        << csv::fmt(p.resistance) << '\n';
  }
}

}  // namespace fbench
