#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fbench/features.hpp"
#include "fbench/hppc.hpp"
#include "fbench/ingest.hpp"
#include "fbench/ocv.hpp"
#include "fbench/stoichsim.hpp"

namespace fbench {

/// Retention r(n) = 1 - a n - b w softplus((n - knee) / w): a linear plateau
/// whose fade rate ramps logistically from a to a + b around the knee.
struct FadeModel {
  double plateau_rate = 1e-4;    ///< a, fraction per cycle
  double knee_cycle = 300.0;
  double post_knee_rate = 1.7e-3;  ///< b, extra fraction per cycle after the knee
  double knee_width = 25.0;        ///< w, cycles

  double retention(double n) const;
  /// Exact crossing of retention level `level`, by bisection on the closed form.
  double crossing(double level) const;
  void validate() const;
};

struct NoiseModel {
  double voltage_sd = 0.0;  ///< V
  double current_sd = 0.0;  ///< A, applied to non-rest samples only
};

struct SynthCellSpec {
  ElectrodeAlignment alignment_truth = default_alignment();
  ResistanceModel rmodel_truth = ResistanceModel::default_model();
  double sei_loss_formation = 0.346;  ///< Ah
  FadeModel fade;
  NoiseModel noise;
  std::uint64_t seed = 0;
  double nominal_capacity = 2.37;  ///< Ah, sets C-rates
  double sample_interval = 30.0;   ///< s, for CC/CV steps
  double temperature_c = 25.0;

  void validate() const;
};

enum class FormationProtocol { fast, baseline };
const char* to_string(FormationProtocol p);
FormationProtocol protocol_from_string(const std::string& s);

struct StepTruth {
  long long step_index = 0;
  double charge_ah = 0.0;  ///< |current| integral, noise-free
  /// Time the constant-voltage phase began, or -1 when the step has none.
  double cv_switch_time = -1.0;
};

struct FormationTruth {
  FormationFeatures features;
  double sei_loss = 0.0;
  std::vector<StepTruth> steps;
  std::vector<SegmentKind> expected_kinds;
};

struct GeneratedFormation {
  CyclerTimeSeries series;
  FormationTruth truth;
};

GeneratedFormation generate_formation(const SynthCellSpec& spec, FormationProtocol protocol);

struct PulseTruth {
  double soc = 0.0;  ///< on the measured-capacity basis
  Direction direction = Direction::discharge;
  double current = 0.0;
  /// Planted resistance per duration {1, 5, 10} s.
  double r_1s = 0.0, r_5s = 0.0, r_10s = 0.0;
};

struct HppcTruth {
  double measured_capacity = 0.0;  ///< Ah, from the leading C/20 discharge
  std::vector<PulseTruth> pulses;
};

struct GeneratedHppc {
  CyclerTimeSeries series;
  HppcTruth truth;
};

std::vector<double> default_hppc_soc_points();

/// Full C/20 discharge from 100% SOC, then per SOC point: C/20 charge, rest,
/// 1C discharge pulse, rest, 1C charge pulse, rest.
GeneratedHppc generate_hppc(const SynthCellSpec& spec, const std::vector<double>& soc_points);

/// C/20 discharge curve (q discharged, V) of a cell aligned as `fresh` after losing
/// enough lithium that its capacity is `retention` of fresh.
QVCurve aged_discharge_curve(const ElectrodeAlignment& fresh, double retention, std::size_t n = 400);

CapacitySeries generate_cycling(const SynthCellSpec& spec, int rpt_every = 100, int max_cycles = 3000);

struct FleetConfig {
  std::size_t n_cells = 40;
  double fast_fraction = 0.5;
  std::vector<std::string> temperatures{"room"};
  double sei_baseline_mean = 0.346, sei_baseline_sd = 0.027;
  double sei_fast_sd = 0.035;
  double qlli_offset = 0.023;  ///< fast-group mean minus baseline mean, Ah
  double knee_ref = 300.0;     ///< knee cycle at the baseline mean SEI loss
  double knee_slope = 3000.0;  ///< cycles per Ah of formation lithium loss
  double life_noise = 0.05;    ///< relative sd on the knee
  double capacity_sd = 0.0;    ///< relative sd on electrode capacities
  NoiseModel noise{5e-4, 5e-4};
  std::uint64_t seed = 1;
};

struct CellTruth {
  double sei_loss = 0.0;
  double knee_cycle = 0.0;
  double r_ls_planted = 0.0;
  ElectrodeAlignment alignment;
};

struct SynthCell {
  std::string cell_id;
  std::string group;  ///< formation protocol name
  std::string temperature_label;
  SynthCellSpec spec;
  CellTruth truth;
  GeneratedFormation formation;
  GeneratedHppc hppc;
  CapacitySeries cycling;
  QVCurve qv_cycle10, qv_cycle100;
};

/// Planted per-cell parameters, drawn from the cell's seed (seed + index).
struct CellDraw {
  bool fast = false;
  double sei_loss = 0.0;  ///< Ah
  double cap_pe = 1.0, cap_ne = 1.0;  ///< electrode capacity multipliers
  double knee_cycle = 0.0;
};

CellDraw draw_cell_parameters(const FleetConfig& cfg, std::size_t index);

SynthCell generate_cell(const FleetConfig& cfg, std::size_t index);

struct Fleet {
  std::vector<SynthCell> cells;
  std::vector<FeatureRecord> features;
  std::vector<LifeOutcome> outcomes;
};

/// Cells are generated from per-cell seeds (seed + index) and their
/// features computed through the ingest/hppc/features pipeline.
Fleet generate_fleet(const FleetConfig& cfg);

}  // namespace fbench
