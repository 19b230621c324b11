#include "fbench/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "fbench/errors.hpp"

namespace fbench {

CellFeatures compute_cell_features(const CellData& cell, const PipelineConfig& cfg) {
  CellFeatures out;
  auto& rec = out.record;
  rec.cell_id = cell.cell_id;
  rec.group = cell.group;
  rec.temperature_label = cell.temperature_label;
  rec.formation = formation_features(cell.formation, cfg.formation);

  HppcConfig hc = cfg.hppc;
  hc.cell_id = cell.cell_id;
  hc.temperature_label = cell.temperature_label;
  out.profile = extract_pulses(cell.hppc, hc);
  rec.r_ls = resistance_at_soc(out.profile, cfg.r_ls_soc, cfg.duration, cfg.direction);
  rec.r_90 = resistance_at_soc(out.profile, cfg.r_90_soc, cfg.duration, cfg.direction);
  if (!(rec.r_ls > 0.0)) throw FeatureError(cell.cell_id + ": low-SOC resistance is not positive");
  rec.var_dq = var_delta_q(cell.qv_cycle10, cell.qv_cycle100);

  std::vector<double> n, q;
  for (std::size_t i = 0; i < cell.cycling.cycle.size(); ++i) {
    if (cell.cycling.is_rpt[i]) continue;
    n.push_back(cell.cycling.cycle[i]);
    q.push_back(cell.cycling.capacity[i]);
  }
  const double q0 = initial_capacity(cell.cycling.capacity, cell.cycling.is_rpt);
  out.outcome.cell_id = cell.cell_id;
  for (int r : {50, 60, 70, 80}) out.outcome.cycles_to_retention[r] = cycle_life(n, q, q0, r / 100.0);
  return out;
}

CellData load_cell_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path p(dir);
  CellData c;
  std::ifstream meta_in(p / "meta.json");
  if (!meta_in) throw SchemaError("cell directory '" + dir + "' has no meta.json");
  nlohmann::json meta;
  try {
    meta_in >> meta;
    c.cell_id = meta.at("cell_id").get<std::string>();
    c.group = meta.value("group", std::string());
    c.temperature_label = meta.value("temperature_label", std::string("room"));
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("bad meta.json in '" + dir + "': " + e.what());
  }
  c.formation = load_cycler_csv((p / "formation.csv").string());
  c.hppc = load_cycler_csv((p / "hppc.csv").string());
  c.cycling = read_capacity_csv((p / "cycling.csv").string());
  c.qv_cycle10 = read_qv_csv((p / "qv_cycle10.csv").string());
  c.qv_cycle100 = read_qv_csv((p / "qv_cycle100.csv").string());
  return c;
}

void write_cell_dir(const std::string& dir, const CellData& cell) {
  namespace fs = std::filesystem;
  const fs::path p(dir);
  fs::create_directories(p);
  write_cycler_csv((p / "formation.csv").string(), cell.formation);
  write_cycler_csv((p / "hppc.csv").string(), cell.hppc);
  write_capacity_csv((p / "cycling.csv").string(), cell.cycling);
  write_qv_csv((p / "qv_cycle10.csv").string(), cell.qv_cycle10);
  write_qv_csv((p / "qv_cycle100.csv").string(), cell.qv_cycle100);
  nlohmann::ordered_json meta;
  meta["cell_id"] = cell.cell_id;
  meta["group"] = cell.group;
  meta["temperature_label"] = cell.temperature_label;
  std::ofstream out(p / "meta.json", std::ios::binary);
  out << meta.dump(2) << '\n';
}

}  // namespace fbench
