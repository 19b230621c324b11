#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fbench/ingest.hpp"

namespace fbench {

enum class Direction { charge, discharge };
const char* to_string(Direction d);
Direction direction_from_string(const std::string& s);

struct PulseMeasurement {
  double soc = 0.0;
  Direction direction = Direction::discharge;
  double duration = 10.0;  ///< s
  double pulse_current = 0.0;
  double v_before = 0.0;
  double v_at_duration = 0.0;
  double resistance = 0.0;  ///< ohm
  bool below_floor = false;
};

struct ResistanceProfile {
  std::string cell_id;
  std::string temperature_label = "room";
  std::vector<PulseMeasurement> pulses;
  std::vector<std::string> warnings;
};

enum class SocBasis { measured_capacity, nominal_capacity };

struct HppcConfig {
  std::vector<double> durations{1.0, 5.0, 10.0};
  SocBasis basis = SocBasis::measured_capacity;
  double nominal_capacity = 2.37;  ///< Ah
  /// Most recent measured C/20 capacity. When unset under the measured
  /// basis, the last full low-rate discharge in the series is used.
  std::optional<double> reference_capacity;
  double v_min = 3.0;           ///< full-discharge voltage
  double anchor_tol = 5e-3;     ///< V
  double instrument_floor = 1e-3;  ///< |dV| below this is flagged, V
  SegmentConfig segments;
  std::string cell_id;
  std::string temperature_label = "room";
};

ResistanceProfile extract_pulses(const CyclerTimeSeries& series, const HppcConfig& cfg = {});

enum class InterpMode { monotone_cubic, linear };

/// Resistance of one (duration, direction) family at an SOC inside its
/// measured span. Never extrapolates.
double resistance_at_soc(const ResistanceProfile& profile, double soc, double duration = 10.0,
                         Direction direction = Direction::discharge,
                         InterpMode mode = InterpMode::monotone_cubic);

void write_profile_csv(const std::string& path, const ResistanceProfile& profile);

}  // namespace fbench
