#include "fbench/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <ostream>
#include <regex>
#include <set>

#include "fbench/csv.hpp"
#include "fbench/degmode.hpp"
#include "fbench/errors.hpp"
#include "fbench/features.hpp"
#include "fbench/hppc.hpp"
#include "fbench/ingest.hpp"
#include "fbench/ocv.hpp"
#include "fbench/parallel.hpp"
#include "fbench/pipeline.hpp"
#include "fbench/predict.hpp"
#include "fbench/snr.hpp"
#include "fbench/stats.hpp"
#include "fbench/stoichsim.hpp"
#include "fbench/svg.hpp"
#include "fbench/synthcell.hpp"

namespace fbench {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

struct Common {
  std::string input;
  std::string output_dir = ".";
  std::string config;
  std::uint64_t seed = 0;
  json cfg = json::object();
  const CLI::Option* seed_opt = nullptr;
};

void add_common(CLI::App* sub, Common& c, bool needs_input) {
  auto* in = sub->add_option("--input", c.input, "input file or directory");
  if (needs_input) in->required();
  sub->add_option("--output-dir", c.output_dir, "directory for artifacts")->capture_default_str();
  sub->add_option("--config", c.config, "JSON config file; flags override its values");
  c.seed_opt = sub->add_option("--seed", c.seed, "random seed");
}

void load_config(Common& c) {
  if (c.config.empty()) return;
  std::ifstream in(c.config);
  if (!in) throw ConfigError("cannot open config file '" + c.config + "'");
  try {
    c.cfg = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config file '" + c.config + "' is not valid JSON: " + e.what());
  }
  if (!c.cfg.is_object()) throw ConfigError("config file must hold a JSON object");
}

// Flag value when given, else the config entry, else the default.
template <class T>
T pick(const CLI::Option* opt, const T& flag, const json& cfg, const char* key, const T& dflt) {
  if (opt && opt->count() > 0) return flag;
  if (cfg.contains(key)) {
    try {
      return cfg.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
  }
  return dflt;
}

std::uint64_t seed_of(const Common& c, std::uint64_t dflt = 0) {
  return pick<std::uint64_t>(c.seed_opt, c.seed, c.cfg, "seed", dflt);
}

fs::path out_dir(const Common& c) {
  fs::path p(c.output_dir);
  fs::create_directories(p);
  return p;
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write '" + p.string() + "'");
  out << s;
}

std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> v;
  for (const auto& tok : csv::split(s)) v.push_back(csv::to_double(tok, what));
  if (v.empty()) throw ConfigError(std::string(what) + ": empty list");
  return v;
}

json alignment_json(const ElectrodeAlignment& a) {
  return json{{"c_pe", a.c_pe},   {"c_ne", a.c_ne},     {"y_0", a.y_0},   {"y_100", a.y_100},
              {"x_0", a.x_0},     {"x_100", a.x_100},   {"q_full", a.q_full}, {"q_li", a.q_li()},
              {"curves_id", a.curves_id}};
}

CurvePair curves_from(const json& cfg) {
  if (!cfg.contains("positive_curve") && !cfg.contains("negative_curve")) return default_curves();
  if (!cfg.contains("positive_curve") || !cfg.contains("negative_curve")) {
    throw ConfigError("config must name both positive_curve and negative_curve");
  }
  const auto pos = cfg.at("positive_curve").get<std::string>();
  const auto neg = cfg.at("negative_curve").get<std::string>();
  CurvePair c;
  c.positive = load_half_cell_csv(pos, Electrode::positive);
  c.negative = load_half_cell_csv(neg, Electrode::negative);
  c.id = "files:" + fs::path(pos).filename().string() + "+" + fs::path(neg).filename().string();
  return c;
}

FitConfig fit_config(const Common& c) {
  FitConfig f;
  const json& j = c.cfg;
  f.y100 = j.value("y100", f.y100);
  f.c_lo = j.value("c_lo", f.c_lo);
  f.c_hi = j.value("c_hi", f.c_hi);
  f.x100_lo = j.value("x100_lo", f.x100_lo);
  f.x100_hi = j.value("x100_hi", f.x100_hi);
  f.starts = j.value("starts", f.starts);
  f.max_iter = j.value("max_iter", f.max_iter);
  f.seed = seed_of(c);
  return f;
}

// fit-ocv ---------------------------------------------------------------

int run_fit_ocv(Common& c, std::ostream& out) {
  load_config(c);
  const auto curves = curves_from(c.cfg);
  const QVCurve measured = orient_from_empty(read_qv_csv(c.input));
  const FitResult r = fit_electrode_alignment(measured, curves, fit_config(c));
  json j = alignment_json(r.alignment);
  j["rmse_v"] = r.rmse;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  const auto dir = out_dir(c);
  write_text(dir / "alignment.json", j.dump(2) + "\n");
  out << "c_pe " << r.alignment.c_pe << " Ah, c_ne " << r.alignment.c_ne << " Ah, x_100 " << r.alignment.x_100
      << ", rmse " << r.rmse * 1e3 << " mV\n";
  return 0;
}

// degmode ---------------------------------------------------------------

int run_degmode(Common& c, std::ostream& out) {
  load_config(c);
  const auto curves = curves_from(c.cfg);
  const std::regex name(R"(rpt_(\d+)\.csv)");
  std::vector<RptCurve> rpts;
  if (!fs::is_directory(c.input)) throw ConfigError("degmode: --input must be a directory of rpt_<cycle>.csv files");
  for (const auto& e : fs::directory_iterator(c.input)) {
    std::smatch m;
    const std::string fname = e.path().filename().string();
    if (!std::regex_match(fname, m, name)) continue;
    rpts.push_back({std::stoi(m[1].str()), read_qv_csv(e.path().string())});
  }
  std::sort(rpts.begin(), rpts.end(), [](const RptCurve& a, const RptCurve& b) { return a.cycle_number < b.cycle_number; });
  const auto states = degradation_trajectory(rpts, curves, fit_config(c));
  const auto dir = out_dir(c);
  write_trajectory_csv((dir / "trajectory.csv").string(), states);
  svg::Series lli{"LLI", {}, {}}, pe{"LAM_PE", {}, {}}, ne{"LAM_NE", {}, {}};
  for (const auto& s : states) {
    for (auto* sr : {&lli, &pe, &ne}) sr->x.push_back(s.cycle_number);
    lli.y.push_back(s.lli * 100.0);
    pe.y.push_back(s.lam_pe * 100.0);
    ne.y.push_back(s.lam_ne * 100.0);
  }
  svg::write_file((dir / "degradation_modes.svg").string(),
                  svg::line_chart("Degradation modes", "cycle", "loss (%)", {lli, pe, ne}));
  std::size_t gaps = 0;
  for (const auto& s : states) gaps += s.gap ? 1 : 0;
  out << states.size() << " reference tests, " << gaps << " gaps\n";
  return 0;
}

// hppc ------------------------------------------------------------------

int run_hppc(Common& c, double soc_flag, const CLI::Option* soc_opt, double dur_flag, const CLI::Option* dur_opt,
             const std::string& dir_flag, const CLI::Option* dir_opt, std::ostream& out) {
  load_config(c);
  SchemaMap schema = SchemaMap::defaults();
  if (c.cfg.contains("schema")) schema = SchemaMap::from_json(c.cfg.at("schema").dump());
  const auto series = load_cycler_csv(c.input, schema);
  HppcConfig hc;
  hc.cell_id = c.cfg.value("cell_id", fs::path(c.input).stem().string());
  hc.temperature_label = c.cfg.value("temperature_label", hc.temperature_label);
  hc.nominal_capacity = c.cfg.value("nominal_capacity", hc.nominal_capacity);
  if (c.cfg.contains("reference_capacity")) hc.reference_capacity = c.cfg.at("reference_capacity").get<double>();
  const auto basis = c.cfg.value("soc_basis", std::string("measured"));
  if (basis == "nominal") {
    hc.basis = SocBasis::nominal_capacity;
  } else if (basis != "measured") {
    throw ConfigError("soc_basis must be 'measured' or 'nominal'");
  }
  const double soc = pick(soc_opt, soc_flag, c.cfg, "soc", 0.05);
  const double duration = pick(dur_opt, dur_flag, c.cfg, "duration", 10.0);
  const Direction direction = direction_from_string(pick(dir_opt, dir_flag, c.cfg, "direction", std::string("discharge")));
  if (!(soc > 0.0 && soc < 1.0)) throw ConfigError("--soc must lie in (0, 1)");
  if (std::find(hc.durations.begin(), hc.durations.end(), duration) == hc.durations.end()) hc.durations.push_back(duration);
  std::sort(hc.durations.begin(), hc.durations.end());
  const auto profile = extract_pulses(series, hc);
  const double r = resistance_at_soc(profile, soc, duration, direction);
  const auto dir = out_dir(c);
  write_profile_csv((dir / "profile.csv").string(), profile);
  json j{{"cell_id", profile.cell_id}, {"soc", soc}, {"duration_s", duration},
         {"direction", to_string(direction)}, {"resistance_ohm", r}, {"warnings", profile.warnings}};
  write_text(dir / "resistance.json", j.dump(2) + "\n");
  std::vector<svg::Series> lines;
  for (double d : hc.durations) {
    svg::Series s{std::to_string(static_cast<int>(d)) + " s " + to_string(direction), {}, {}};
    for (const auto& p : profile.pulses) {
      if (p.duration == d && p.direction == direction) {
        s.x.push_back(p.soc * 100.0);
        s.y.push_back(p.resistance * 1e3);
      }
    }
    lines.push_back(std::move(s));
  }
  svg::write_file((dir / "resistance_vs_soc.svg").string(),
                  svg::line_chart("Pulse resistance", "SOC (%)", "resistance (mOhm)", lines));
  for (const auto& w : profile.warnings) out << "warning: " << w << '\n';
  out << "R(" << duration << " s, " << soc * 100.0 << "% SOC, " << to_string(direction) << ") = " << r * 1e3
      << " mOhm\n";
  return 0;
}

// features --------------------------------------------------------------

int run_features(Common& c, double retention_flag, const CLI::Option* ret_opt, std::ostream& out) {
  load_config(c);
  fs::path root(c.input);
  if (fs::is_directory(root / "cells")) root /= "cells";
  if (!fs::is_directory(root)) throw ConfigError("features: --input must be a directory of cell directories");
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(root)) {
    if (e.is_directory() && fs::exists(e.path() / "meta.json")) dirs.push_back(e.path());
  }
  std::sort(dirs.begin(), dirs.end());
  if (dirs.empty()) throw EmptyInputError("features: no cell directories under '" + root.string() + "'");
  PipelineConfig pc;
  pc.r_ls_soc = c.cfg.value("r_ls_soc", pc.r_ls_soc);
  pc.r_90_soc = c.cfg.value("r_90_soc", pc.r_90_soc);
  pc.duration = c.cfg.value("duration", pc.duration);
  std::vector<CellFeatures> results(dirs.size());
  std::vector<CellData> cells(dirs.size());
  parallel_for(dirs.size(), [&](std::size_t i) {
    cells[i] = load_cell_dir(dirs[i].string());
    results[i] = compute_cell_features(cells[i], pc);
  });
  std::vector<FeatureRecord> recs;
  std::vector<LifeOutcome> outs;
  for (const auto& r : results) {
    recs.push_back(r.record);
    outs.push_back(r.outcome);
  }
  const auto dir = out_dir(c);
  write_feature_table((dir / "features.csv").string(), recs, outs);

  const int retention = static_cast<int>(pick(ret_opt, retention_flag, c.cfg, "retention", 70.0));
  std::vector<svg::Series> caps;
  std::map<std::string, std::vector<double>> life;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    svg::Series s{cells[i].cell_id, {}, {}};
    for (std::size_t k = 0; k < cells[i].cycling.cycle.size(); ++k) {
      if (cells[i].cycling.is_rpt[k]) continue;
      s.x.push_back(cells[i].cycling.cycle[k]);
      s.y.push_back(cells[i].cycling.capacity[k]);
    }
    caps.push_back(std::move(s));
    const auto it = outs[i].cycles_to_retention.find(retention);
    if (it != outs[i].cycles_to_retention.end()) {
      life[recs[i].group + " " + recs[i].temperature_label].push_back(it->second.cycles);
    }
  }
  svg::write_file((dir / "capacity.svg").string(), svg::line_chart("Discharge capacity", "cycle", "capacity (Ah)", caps));
  std::vector<svg::Box> boxes;
  for (const auto& [label, v] : life) boxes.push_back({label, summarize(v)});
  svg::write_file((dir / "cycle_life.svg").string(),
                  svg::box_chart("Cycles to " + std::to_string(retention) + "% capacity", "cycles", boxes));
  out << recs.size() << " cells -> " << (dir / "features.csv").string() << '\n';
  return 0;
}

// stats -----------------------------------------------------------------

const char* const kFeatureColumns[] = {"q_c_ah", "q_d_ah", "q_lli_ah", "ce_f", "r_ls_ohm", "r_90_ohm", "var_dq_ah2"};

int run_stats(Common& c, double retention_flag, const CLI::Option* ret_opt, std::ostream& out) {
  load_config(c);
  const auto table = read_feature_table(c.input);
  const int retention = static_cast<int>(pick(ret_opt, retention_flag, c.cfg, "retention", 70.0));
  const std::string target = "cycles_to_" + std::to_string(retention);
  const auto variant = c.cfg.value("t_variant", std::string("pooled"));
  if (variant != "pooled" && variant != "welch") throw ConfigError("t_variant must be 'pooled' or 'welch'");
  MslrConfig mc;
  mc.seed = seed_of(c);
  mc.simulations = c.cfg.value("mslr_simulations", mc.simulations);

  std::set<std::string> temps(table.temperature_labels.begin(), table.temperature_labels.end());
  json strata = json::array();
  for (const auto& temp : temps) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < table.cell_ids.size(); ++i) {
      if (table.temperature_labels[i] == temp) rows.push_back(i);
    }
    std::map<std::string, std::vector<std::size_t>> by_group;
    for (std::size_t i : rows) by_group[table.groups[i]].push_back(i);
    auto col = [&](const std::string& name, const std::vector<std::size_t>& idx) {
      const auto all = table.column(name);
      std::vector<double> v;
      for (std::size_t i : idx) v.push_back(all[i]);
      return v;
    };
    json s{{"temperature_label", temp}, {"n_cells", rows.size()}};
    std::vector<std::string> columns(std::begin(kFeatureColumns), std::end(kFeatureColumns));
    columns.push_back(target);

    json summaries = json::array();
    for (const auto& [g, idx] : by_group) {
      for (const auto& name : columns) {
        const auto gs = summarize(col(name, idx));
        summaries.push_back({{"group", g}, {"feature", name}, {"n", gs.n}, {"mean", gs.mean}, {"sd", gs.sd},
                             {"median", gs.median}, {"iqr", gs.iqr}, {"min", gs.min}, {"max", gs.max}});
      }
    }
    s["summaries"] = summaries;

    json tests = json::array();
    if (by_group.size() == 2) {
      const auto& a = by_group.begin()->second;
      const auto& b = std::next(by_group.begin())->second;
      for (const auto& name : columns) {
        if (a.size() < 2 || b.size() < 2) break;
        const auto r = two_sample_t(col(name, a), col(name, b), variant == "welch" ? TVariant::welch : TVariant::pooled);
        json row = json::parse(result_json_row(r));
        row["feature"] = name;
        row["groups"] = {by_group.begin()->first, std::next(by_group.begin())->first};
        tests.push_back(row);
      }
    }
    if (rows.size() >= 3) {
      const auto y = col(target, rows);
      for (const char* name : kFeatureColumns) {
        const auto x = col(name, rows);
        json row;
        try {
          const auto r = pearson(x, y);
          row = json::parse(result_json_row(r));
          row["meaningful"] = std::abs(r.statistic) > 0.5;
        } catch (const DomainError& e) {
          row = {{"test_kind", "pearson"}, {"error", e.what()}};
        }
        row["feature"] = name;
        row["target"] = target;
        tests.push_back(row);
      }
    }
    std::vector<std::vector<double>> life_groups;
    for (const auto& [g, idx] : by_group) {
      if (idx.size() >= 3) life_groups.push_back(col(target, idx));
    }
    if (life_groups.size() >= 2) {
      json row = json::parse(result_json_row(cv_equality_mslr(life_groups, mc)));
      row["feature"] = target;
      tests.push_back(row);
    }
    s["tests"] = tests;
    strata.push_back(s);
  }
  const auto dir = out_dir(c);
  json j{{"input", fs::path(c.input).filename().string()}, {"target", target}, {"t_variant", variant},
         {"strata", strata}};
  write_text(dir / "stats.json", j.dump(2) + "\n");
  out << "stats for " << table.cell_ids.size() << " cells -> " << (dir / "stats.json").string() << '\n';
  return 0;
}

// predict ---------------------------------------------------------------

int run_predict(Common& c, double retention_flag, const CLI::Option* ret_opt, const std::string& grid_flag,
                const CLI::Option* grid_opt, int runs_flag, const CLI::Option* runs_opt, int folds_flag,
                const CLI::Option* folds_opt, std::ostream& out) {
  load_config(c);
  const auto table = read_feature_table(c.input);
  const int retention = static_cast<int>(pick(ret_opt, retention_flag, c.cfg, "retention", 70.0));
  const std::string target = "cycles_to_" + std::to_string(retention);
  CvConfig cv;
  cv.n_runs = pick(runs_opt, runs_flag, c.cfg, "runs", cv.n_runs);
  cv.inner_folds = pick(folds_opt, folds_flag, c.cfg, "folds", cv.inner_folds);
  cv.validation_fraction = c.cfg.value("validation_fraction", cv.validation_fraction);
  cv.base_seed = seed_of(c);
  if (grid_opt && grid_opt->count() > 0) {
    cv.alpha_grid = parse_list(grid_flag, "--alpha-grid");
  } else if (c.cfg.contains("alpha_grid")) {
    cv.alpha_grid = c.cfg.at("alpha_grid").get<std::vector<double>>();
  }
  cv.validate();
  std::vector<std::vector<std::string>> subsets{{"r_ls_ohm"},  {"q_lli_ah"}, {"ce_f"}, {"q_d_ah"},
                                                {"var_dq_ah2"}, {"q_lli_ah", "ce_f", "q_d_ah"},
                                                {"q_lli_ah", "ce_f", "q_d_ah", "r_ls_ohm"}};
  if (c.cfg.contains("subsets")) subsets = c.cfg.at("subsets").get<std::vector<std::vector<std::string>>>();

  std::set<std::string> temps(table.temperature_labels.begin(), table.temperature_labels.end());
  json strata = json::array();
  const auto full = dataset_from_table(table, target);
  for (const auto& temp : temps) {
    std::vector<Eigen::Index> rows;
    for (std::size_t i = 0; i < table.cell_ids.size(); ++i) {
      if (table.temperature_labels[i] == temp) rows.push_back(static_cast<Eigen::Index>(i));
    }
    Dataset d;
    d.columns = full.columns;
    d.x.resize(static_cast<Eigen::Index>(rows.size()), full.x.cols());
    d.y.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
      d.cell_ids.push_back(full.cell_ids[static_cast<std::size_t>(rows[k])]);
      d.x.row(static_cast<Eigen::Index>(k)) = full.x.row(rows[k]);
      d.y(static_cast<Eigen::Index>(k)) = full.y(rows[k]);
    }
    json models = json::array();
    const auto dummy = nested_cv(d, {subsets.front()}, cv, ModelKind::dummy);
    models.push_back(json::parse(report_json(dummy)));
    for (const auto& sub : subsets) models.push_back(json::parse(report_json(nested_cv(d, sub, cv, ModelKind::ridge))));
    strata.push_back({{"temperature_label", temp}, {"n_cells", rows.size()}, {"models", models}});
    out << temp << ": dummy test |MPE| " << dummy.test_mpe_mean << "%";
    for (std::size_t m = 1; m < models.size(); ++m) {
      out << ", " << models[m]["features"].dump() << ' ' << models[m]["aggregate"]["test_mpe_mean"].get<double>()
          << "%";
    }
    out << '\n';
  }
  const auto dir = out_dir(c);
  json j{{"input", fs::path(c.input).filename().string()}, {"target", target}, {"strata", strata}};
  write_text(dir / "predict.json", j.dump(2) + "\n");
  return 0;
}

// sensitivity -----------------------------------------------------------

int run_sensitivity(Common& c, const std::string& setpoints_flag, const CLI::Option* sp_opt, std::ostream& out) {
  load_config(c);
  const auto& curves = default_curves();
  const ElectrodeAlignment a = default_alignment();
  ResistanceModel m = ResistanceModel::default_model();
  if (c.cfg.contains("f_pos")) m = m.with_fpos(c.cfg.at("f_pos").get<double>());
  std::vector<double> setpoints{0.02, 0.05, 0.08};
  if (sp_opt && sp_opt->count() > 0) {
    setpoints = parse_list(setpoints_flag, "--setpoints");
  } else if (c.cfg.contains("setpoints")) {
    setpoints = c.cfg.at("setpoints").get<std::vector<double>>();
  }
  for (double s : setpoints) {
    if (!(s > 0.0 && s < 1.0)) throw ConfigError("setpoints must lie in (0, 1)");
  }
  const auto rep = rls_sensitivity(a, m, setpoints, default_qlli_grid(), curves);
  const auto dir = out_dir(c);
  {
    std::ofstream f(dir / "sensitivity.csv", std::ios::binary);
    f << "soc,dr_dqlli_ohm_per_ah,abs_dr_dqlli_mohm_per_mah,dqd_dqlli\n";
    for (std::size_t i = 0; i < setpoints.size(); ++i) {
      f << csv::fmt(setpoints[i]) << ',' << csv::fmt(rep.dR_dQlli[i]) << ',' << csv::fmt(std::abs(rep.dR_dQlli[i]))
        << ',' << csv::fmt(rep.dQd_dQlli) << '\n';
    }
  }
  // R vs lithium loss over a wider sweep, one curve per setpoint.
  std::vector<double> sweep;
  for (int k = -40; k <= 40; k += 5) sweep.push_back(k * 1e-3);
  const auto wide = rls_sensitivity(a, m, setpoints, sweep, curves);
  std::vector<svg::Series> lines;
  for (std::size_t i = 0; i < setpoints.size(); ++i) {
    svg::Series s{std::to_string(static_cast<int>(std::lround(setpoints[i] * 100))) + "% SOC", {}, {}};
    for (std::size_t k = 0; k < sweep.size(); ++k) {
      s.x.push_back(sweep[k] * 1e3);
      s.y.push_back(wide.r_table[i][k] * 1e3);
    }
    lines.push_back(std::move(s));
  }
  svg::write_file((dir / "sensitivity.svg").string(),
                  svg::line_chart("Resistance vs lithium loss", "delta Q_LLI (mAh)", "R (mOhm)", lines));
  {
    std::ofstream f(dir / "resistance_profile.csv", std::ios::binary);
    f << "q_ah,resistance_ohm\n";
    for (const auto& [q, r] : predicted_resistance_profile(a, m, linspace(0.0, a.q_full, 101))) {
      f << csv::fmt(q) << ',' << csv::fmt(r) << '\n';
    }
  }
  {
    std::ofstream f(dir / "fpos_sweep.csv", std::ios::binary);
    f << "f_pos,dr_dqlli_ohm_per_ah,normalized\n";
    for (const auto& row : fpos_sweep(a, m, linspace(0.0, 1.0, 11), curves)) {
      f << csv::fmt(row.f_pos) << ',' << csv::fmt(row.dR_dQlli) << ',' << csv::fmt(row.normalized) << '\n';
    }
  }
  out << "soc    |dR/dQ_LLI| (mOhm/mAh)\n";
  for (std::size_t i = 0; i < setpoints.size(); ++i) {
    out << setpoints[i] << "   " << std::abs(rep.dR_dQlli[i]) << '\n';
  }
  out << "dQ_d/dQ_LLI " << rep.dQd_dQlli << '\n';
  return 0;
}

// snr -------------------------------------------------------------------

int run_snr(Common& c, bool model_sens, std::ostream& out) {
  load_config(c);
  InstrumentSpec spec;
  if (!c.input.empty()) {
    spec = InstrumentSpec::from_json_file(c.input);
  } else {
    const fs::path bundled = fs::path(FBENCH_DATA_DIR) / "instrument_default.json";
    if (fs::exists(bundled)) spec = InstrumentSpec::from_json_file(bundled.string());
  }
  double sens_r = c.cfg.value("sens_r_ah_per_ohm", kStatedSensR);
  double sens_qd = c.cfg.value("sens_qd", kStatedSensQd);
  if (model_sens) {
    const auto rep = rls_sensitivity(default_alignment(), ResistanceModel::default_model(), {0.05},
                                     default_qlli_grid(), default_curves());
    sens_r = 1.0 / std::abs(rep.dR_dQlli[0]);
    sens_qd = 1.0 / std::abs(rep.dQd_dQlli);
  }
  const auto report = qlli_resolution(resolution_limits(spec), sens_r, sens_qd);
  out << derivation_table(spec, report);
  if (!c.output_dir.empty()) {
    const auto dir = out_dir(c);
    write_text(dir / "snr.json", report_json(spec, report));
  }
  return 0;
}

// simulate --------------------------------------------------------------

int run_simulate(Common& c, std::ostream& out) {
  load_config(c);
  FleetConfig fc;
  const json& j = c.cfg;
  fc.n_cells = j.value("n_cells", fc.n_cells);
  fc.fast_fraction = j.value("fast_fraction", fc.fast_fraction);
  if (j.contains("temperatures")) fc.temperatures = j.at("temperatures").get<std::vector<std::string>>();
  fc.sei_baseline_mean = j.value("sei_baseline_mean", fc.sei_baseline_mean);
  fc.sei_baseline_sd = j.value("sei_baseline_sd", fc.sei_baseline_sd);
  fc.sei_fast_sd = j.value("sei_fast_sd", fc.sei_fast_sd);
  fc.qlli_offset = j.value("qlli_offset", fc.qlli_offset);
  fc.knee_ref = j.value("knee_ref", fc.knee_ref);
  fc.knee_slope = j.value("knee_slope", fc.knee_slope);
  fc.life_noise = j.value("life_noise", fc.life_noise);
  fc.capacity_sd = j.value("capacity_sd", fc.capacity_sd);
  fc.noise.voltage_sd = j.value("voltage_noise_sd", fc.noise.voltage_sd);
  fc.noise.current_sd = j.value("current_noise_sd", fc.noise.current_sd);
  fc.seed = seed_of(c, fc.seed);
  if (fc.n_cells < 4) throw ConfigError("simulate: n_cells must be at least 4");
  if (!(fc.fast_fraction >= 0.0 && fc.fast_fraction <= 1.0)) throw ConfigError("simulate: fast_fraction must lie in [0, 1]");
  if (fc.temperatures.empty()) throw ConfigError("simulate: temperatures must not be empty");

  const auto dir = out_dir(c);
  parallel_for(fc.n_cells, [&](std::size_t i) {
    const SynthCell cell = generate_cell(fc, i);
    const fs::path cd = dir / "cells" / cell.cell_id;
    write_cell_dir(cd.string(), CellData{cell.cell_id, cell.group, cell.temperature_label, cell.formation.series,
                                         cell.hppc.series, cell.cycling, cell.qv_cycle10, cell.qv_cycle100});
    json t{{"cell_id", cell.cell_id},
           {"group", cell.group},
           {"sei_loss_ah", cell.truth.sei_loss},
           {"knee_cycle", cell.truth.knee_cycle},
           {"r_ls_planted_ohm", cell.truth.r_ls_planted},
           {"formation", {{"q_c_ah", cell.formation.truth.features.q_c}, {"q_d_ah", cell.formation.truth.features.q_d},
                          {"q_lli_ah", cell.formation.truth.features.q_lli}, {"ce_f", cell.formation.truth.features.ce_f}}},
           {"hppc_measured_capacity_ah", cell.hppc.truth.measured_capacity},
           {"alignment", alignment_json(cell.truth.alignment)}};
    write_text(cd / "truth.json", t.dump(2) + "\n");
  });
  json echo{{"n_cells", fc.n_cells},
            {"fast_fraction", fc.fast_fraction},
            {"temperatures", fc.temperatures},
            {"sei_baseline_mean", fc.sei_baseline_mean},
            {"sei_baseline_sd", fc.sei_baseline_sd},
            {"sei_fast_sd", fc.sei_fast_sd},
            {"qlli_offset", fc.qlli_offset},
            {"knee_ref", fc.knee_ref},
            {"knee_slope", fc.knee_slope},
            {"life_noise", fc.life_noise},
            {"capacity_sd", fc.capacity_sd},
            {"voltage_noise_sd", fc.noise.voltage_sd},
            {"current_noise_sd", fc.noise.current_sd},
            {"seed", fc.seed}};
  write_text(dir / "fleet.json", echo.dump(2) + "\n");
  out << fc.n_cells << " cells -> " << (dir / "cells").string() << '\n';
  return 0;
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Formation diagnostics bench: OCV fitting, pulse resistance, features, statistics and prediction"};
  app.require_subcommand(1);

  Common c;
  double soc = 0.05, duration = 10.0, retention = 70.0;
  std::string direction = "discharge", alpha_grid, setpoints;
  int runs = 1000, folds = 4;
  bool model_sens = false;

  auto* fit = app.add_subcommand("fit-ocv", "fit an electrode alignment to a C/20 curve (q_ah, voltage_v)");
  add_common(fit, c, true);

  auto* deg = app.add_subcommand("degmode", "degradation-mode trajectory from a directory of rpt_<cycle>.csv curves");
  add_common(deg, c, true);

  auto* hp = app.add_subcommand("hppc", "pulse resistance profile from a cycler CSV");
  add_common(hp, c, true);
  auto* soc_opt = hp->add_option("--soc", soc, "SOC fraction for the reported resistance");
  auto* dur_opt = hp->add_option("--duration", duration, "pulse duration in seconds");
  auto* dir_opt = hp->add_option("--direction", direction, "discharge or charge");

  auto* feat = app.add_subcommand("features", "feature table from a directory of cell directories");
  add_common(feat, c, true);
  auto* feat_ret = feat->add_option("--retention", retention, "end-of-life retention percent for plots");

  auto* st = app.add_subcommand("stats", "group tests and correlations from a feature table");
  add_common(st, c, true);
  auto* st_ret = st->add_option("--retention", retention, "end-of-life retention percent");

  auto* pr = app.add_subcommand("predict", "nested cross-validated life prediction from a feature table");
  add_common(pr, c, true);
  auto* pr_ret = pr->add_option("--retention", retention, "end-of-life retention percent");
  auto* grid_opt = pr->add_option("--alpha-grid", alpha_grid, "comma-separated ridge alphas");
  auto* runs_opt = pr->add_option("--runs", runs, "number of random splits");
  auto* folds_opt = pr->add_option("--folds", folds, "inner cross-validation folds");

  auto* sens = app.add_subcommand("sensitivity", "resistance and capacity sensitivity to lithium loss");
  add_common(sens, c, false);
  auto* sp_opt = sens->add_option("--setpoints", setpoints, "comma-separated SOC fractions");

  auto* snr = app.add_subcommand("snr", "instrument resolution of lithium-loss estimates");
  add_common(snr, c, false);
  snr->add_flag("--model-sensitivity", model_sens, "use sensitivities of the bundled model instead of stated ones");

  auto* sim = app.add_subcommand("simulate", "write a synthetic fleet of cell directories");
  add_common(sim, c, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (fit->parsed()) return run_fit_ocv(c, out);
    if (deg->parsed()) return run_degmode(c, out);
    if (hp->parsed()) return run_hppc(c, soc, soc_opt, duration, dur_opt, direction, dir_opt, out);
    if (feat->parsed()) return run_features(c, retention, feat_ret, out);
    if (st->parsed()) return run_stats(c, retention, st_ret, out);
    if (pr->parsed()) return run_predict(c, retention, pr_ret, alpha_grid, grid_opt, runs, runs_opt, folds, folds_opt, out);
    if (sens->parsed()) return run_sensitivity(c, setpoints, sp_opt, out);
    if (snr->parsed()) return run_snr(c, model_sens, out);
    if (sim->parsed()) return run_simulate(c, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  err << app.help();
  return 2;
}

}  // namespace fbench
