#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace fbench {

struct CyclerRecord {
  double test_time = 0.0;  ///< s
  long long cycle_index = 0;
  long long step_index = 0;
  double current = 0.0;  ///< A, positive = charge
  double voltage = 0.0;  ///< V
  double charge_capacity = 0.0;     ///< Ah, cumulative within cycle
  double discharge_capacity = 0.0;  ///< Ah, cumulative within cycle
  double temperature = 0.0;         ///< degC, meaningful only if has_temperature
};

struct CyclerTimeSeries {
  std::vector<CyclerRecord> records;
  bool has_temperature = false;
  std::size_t rejected = 0;
  std::vector<std::string> warnings;
};

/// Logical column name -> header in the file.
struct SchemaMap {
  std::map<std::string, std::string> columns;

  static SchemaMap defaults();
  /// Overrides defaults with a JSON object such as {"current_a": "Current(A)"}.
  static SchemaMap from_json(const std::string& json_text);
  const std::string& operator[](const std::string& logical) const;
};

CyclerTimeSeries parse_cycler_csv(std::istream& in, const SchemaMap& schema = SchemaMap::defaults());
CyclerTimeSeries load_cycler_csv(const std::string& path, const SchemaMap& schema = SchemaMap::defaults());

/// Writes the default header set with round-trip exact number formatting.
void write_cycler_csv(std::ostream& out, const CyclerTimeSeries& series);
void write_cycler_csv(const std::string& path, const CyclerTimeSeries& series);

enum class SegmentKind { cc_charge, cv_charge, cc_discharge, rest, pulse_charge, pulse_discharge };

const char* to_string(SegmentKind k);

struct StepSegment {
  SegmentKind kind = SegmentKind::rest;
  std::size_t begin = 0;  ///< first record
  std::size_t end = 0;    ///< one past the last record
  double mean_current = 0.0;
  double duration = 0.0;  ///< s, last minus first record time
};

struct SegmentConfig {
  double rest_threshold = 1e-3;  ///< A
  double pulse_ceiling = 15.0;   ///< s
  /// CV detection: voltage within this band of the run's final voltage.
  double cv_voltage_tol = 5e-3;
  /// CV detection: current must fall below this fraction of the CC level.
  double cv_current_drop = 0.02;
};

std::vector<StepSegment> segment_steps(const CyclerTimeSeries& series, const SegmentConfig& cfg = {});

/// Trapezoidal integral of |current| over time, in Ah.
double integrate_capacity(std::span<const CyclerRecord> records);
double integrate_capacity(const CyclerTimeSeries& series, const StepSegment& seg);

/// Signed trapezoidal charge in Ah (positive = charge).
double integrate_signed(std::span<const CyclerRecord> records);

}  // namespace fbench
