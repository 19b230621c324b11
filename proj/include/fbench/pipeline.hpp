#pragma once

#include <string>
#include <vector>

#include "fbench/features.hpp"
#include "fbench/hppc.hpp"
#include "fbench/ingest.hpp"

namespace fbench {

/// Raw per-cell artifacts from which every feature is derived.
struct CellData {
  std::string cell_id;
  std::string group;
  std::string temperature_label = "room";
  CyclerTimeSeries formation;
  CyclerTimeSeries hppc;
  CapacitySeries cycling;
  QVCurve qv_cycle10;
  QVCurve qv_cycle100;
};

struct PipelineConfig {
  FormationConfig formation;
  HppcConfig hppc;
  double r_ls_soc = 0.05;
  double r_90_soc = 0.90;
  double duration = 10.0;
  Direction direction = Direction::discharge;
};

struct CellFeatures {
  FeatureRecord record;
  LifeOutcome outcome;
  ResistanceProfile profile;
};

CellFeatures compute_cell_features(const CellData& cell, const PipelineConfig& cfg = {});

/// Reads a cell directory laid out as formation.csv, hppc.csv,
/// cycling.csv, qv_cycle10.csv, qv_cycle100.csv and meta.json.
CellData load_cell_dir(const std::string& dir);
void write_cell_dir(const std::string& dir, const CellData& cell);

}  // namespace fbench
