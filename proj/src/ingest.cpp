#include "fbench/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <nlohmann/json.hpp>
#include <ostream>

#include "fbench/csv.hpp"
#include "fbench/errors.hpp"

namespace fbench {

namespace {

const char* const kLogical[] = {"test_time_s",        "cycle_index",           "step_index",
                                "current_a",          "voltage_v",             "charge_capacity_ah",
                                "discharge_capacity_ah", "temperature_c"};

}  // namespace

SchemaMap SchemaMap::defaults() {
  SchemaMap m;
  for (const char* name : kLogical) m.columns[name] = name;
  return m;
}

SchemaMap SchemaMap::from_json(const std::string& json_text) {
  SchemaMap m = defaults();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("schema map is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("schema map must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!m.columns.count(it.key())) throw ConfigError("schema map: unknown logical column '" + it.key() + "'");
    if (!it.value().is_string()) throw ConfigError("schema map: column names must be strings");
    m.columns[it.key()] = it.value().get<std::string>();
  }
  return m;
}

const std::string& SchemaMap::operator[](const std::string& logical) const {
  auto it = columns.find(logical);
  if (it == columns.end()) throw ConfigError("schema map: unknown logical column '" + logical + "'");
  return it->second;
}

CyclerTimeSeries parse_cycler_csv(std::istream& in, const SchemaMap& schema) {
  const auto table = csv::read(in);
  const std::size_t c_time = table.column(schema["test_time_s"]);
  const std::size_t c_cycle = table.column(schema["cycle_index"]);
  const std::size_t c_step = table.column(schema["step_index"]);
  const std::size_t c_i = table.column(schema["current_a"]);
  const std::size_t c_v = table.column(schema["voltage_v"]);
  const std::size_t c_qc = table.column(schema["charge_capacity_ah"]);
  const std::size_t c_qd = table.column(schema["discharge_capacity_ah"]);
  const auto& temp_name = schema["temperature_c"];
  const auto temp_it = std::find(table.header.begin(), table.header.end(), temp_name);
  const bool has_temp = temp_it != table.header.end();
  const std::size_t c_t = has_temp ? static_cast<std::size_t>(temp_it - table.header.begin()) : 0;

  CyclerTimeSeries s;
  s.has_temperature = has_temp;
  s.records.reserve(table.rows.size());
  const std::size_t width = table.header.size();
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t line = r + 2;  // header is line 1
    if (row.size() != width) throw SchemaError("row at line " + std::to_string(line) + " has wrong column count");
    const std::string where = "line " + std::to_string(line);
    CyclerRecord rec;
    rec.test_time = csv::to_double(row[c_time], where);
    rec.cycle_index = csv::to_int(row[c_cycle], where);
    rec.step_index = csv::to_int(row[c_step], where);
    rec.current = csv::to_double(row[c_i], where);
    rec.voltage = csv::to_double(row[c_v], where);
    rec.charge_capacity = csv::to_double(row[c_qc], where);
    rec.discharge_capacity = csv::to_double(row[c_qd], where);
    if (has_temp) rec.temperature = csv::to_double(row[c_t], where);

    if (!(rec.voltage >= 0.0 && rec.voltage <= 5.0)) {
      ++s.rejected;
      s.warnings.push_back(where + ": voltage outside [0, 5] V, row rejected");
      continue;
    }
    if (!(rec.charge_capacity >= 0.0 && rec.discharge_capacity >= 0.0)) {
      ++s.rejected;
      s.warnings.push_back(where + ": negative cumulative capacity, row rejected");
      continue;
    }
    if (!s.records.empty()) {
      const auto& prev = s.records.back();
      if (!(rec.test_time > prev.test_time)) throw IntegrityError("test_time not strictly increasing", line);
      if (prev.step_index == rec.step_index && prev.cycle_index == rec.cycle_index &&
          (rec.charge_capacity < prev.charge_capacity || rec.discharge_capacity < prev.discharge_capacity)) {
        ++s.rejected;
        s.warnings.push_back(where + ": cumulative capacity decreased within a step, row rejected");
        continue;
      }
    }
    s.records.push_back(rec);
  }
  return s;
}

CyclerTimeSeries load_cycler_csv(const std::string& path, const SchemaMap& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open '" + path + "'");
  return parse_cycler_csv(in, schema);
}

void write_cycler_csv(std::ostream& out, const CyclerTimeSeries& series) {
  out << "test_time_s,cycle_index,step_index,current_a,voltage_v,charge_capacity_ah,discharge_capacity_ah";
  if (series.has_temperature) out << ",temperature_c";
  out << '\n';
  for (const auto& r : series.records) {
    out << csv::fmt(r.test_time) << ',' << r.cycle_index << ',' << r.step_index << ',' << csv::fmt(r.current) << ','
        << csv::fmt(r.voltage) << ',' << csv::fmt(r.charge_capacity) << ',' << csv::fmt(r.discharge_capacity);
    if (series.has_temperature) out << ',' << csv::fmt(r.temperature);
    out << '\n';
  }
}

void write_cycler_csv(const std::string& path, const CyclerTimeSeries& series) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  write_cycler_csv(out, series);
}

const char* to_string(SegmentKind k) {
  switch (k) {
    case SegmentKind::cc_charge: return "cc_charge";
    case SegmentKind::cv_charge: return "cv_charge";
    case SegmentKind::cc_discharge: return "cc_discharge";
    case SegmentKind::rest: return "rest";
    case SegmentKind::pulse_charge: return "pulse_charge";
    case SegmentKind::pulse_discharge: return "pulse_discharge";
  }
  return "unknown";
}

namespace {

int sign_class(double current, double threshold) {
  if (std::abs(current) < threshold) return 0;
  return current > 0 ? 1 : -1;
}

StepSegment make_segment(const std::vector<CyclerRecord>& r, SegmentKind kind, std::size_t b, std::size_t e) {
  StepSegment s;
  s.kind = kind;
  s.begin = b;
  s.end = e;
  double acc = 0.0;
  for (std::size_t i = b; i < e; ++i) acc += r[i].current;
  s.mean_current = acc / static_cast<double>(e - b);
  s.duration = r[e - 1].test_time - r[b].test_time;
  return s;
}

// Index where the constant-voltage phase of a charge run starts, or `e`
// when the run holds its current to the end.
std::size_t cv_start(const std::vector<CyclerRecord>& r, std::size_t b, std::size_t e, const SegmentConfig& cfg) {
  std::vector<double> head;
  for (std::size_t i = b; i < std::min(e, b + 5); ++i) head.push_back(std::abs(r[i].current));
  std::nth_element(head.begin(), head.begin() + head.size() / 2, head.end());
  const double i_cc = head[head.size() / 2];
  const double limit = (1.0 - cfg.cv_current_drop) * i_cc;
  if (std::abs(r[e - 1].current) >= limit) return e;
  std::size_t j = e;
  while (j > b && std::abs(r[j - 1].current) < limit) --j;
  auto on_plateau = [&](std::size_t i) { return std::abs(r[i].voltage - r[e - 1].voltage) <= cfg.cv_voltage_tol; };
  // Early hold samples can still sit above the limit while already decaying.
  while (j > b + 1 && on_plateau(j - 1) && std::abs(r[j - 1].current) < std::abs(r[j - 2].current)) --j;
  // The switching sample already sits on the voltage plateau.
  if (j > b && on_plateau(j - 1)) --j;
  return j;
}

}  // namespace

std::vector<StepSegment> segment_steps(const CyclerTimeSeries& series, const SegmentConfig& cfg) {
  const auto& r = series.records;
  if (r.empty()) throw EmptyInputError("segment_steps: empty series");
  std::vector<StepSegment> out;
  std::size_t b = 0;
  while (b < r.size()) {
    const int cls = sign_class(r[b].current, cfg.rest_threshold);
    std::size_t e = b + 1;
    while (e < r.size() && r[e].step_index == r[b].step_index && r[e].cycle_index == r[b].cycle_index &&
           sign_class(r[e].current, cfg.rest_threshold) == cls) {
      ++e;
    }
    const double duration = r[e - 1].test_time - r[b].test_time;
    if (cls == 0) {
      out.push_back(make_segment(r, SegmentKind::rest, b, e));
    } else if (duration <= cfg.pulse_ceiling) {
      out.push_back(make_segment(r, cls > 0 ? SegmentKind::pulse_charge : SegmentKind::pulse_discharge, b, e));
    } else if (cls < 0) {
      out.push_back(make_segment(r, SegmentKind::cc_discharge, b, e));
    } else {
      const std::size_t j = cv_start(r, b, e, cfg);
      if (j > b) out.push_back(make_segment(r, SegmentKind::cc_charge, b, j));
      if (j < e) out.push_back(make_segment(r, SegmentKind::cv_charge, j, e));
    }
    b = e;
  }
  return out;
}

double integrate_capacity(std::span<const CyclerRecord> records) {
  if (records.size() < 2) throw InsufficientDataError("integrate_capacity: need at least 2 records");
  double acc = 0.0;
  for (std::size_t i = 1; i < records.size(); ++i) {
    acc += 0.5 * (std::abs(records[i].current) + std::abs(records[i - 1].current)) *
           (records[i].test_time - records[i - 1].test_time);
  }
  return acc / 3600.0;
}

double integrate_capacity(const CyclerTimeSeries& series, const StepSegment& seg) {
  return integrate_capacity(std::span<const CyclerRecord>(series.records).subspan(seg.begin, seg.end - seg.begin));
}

double integrate_signed(std::span<const CyclerRecord> records) {
  double acc = 0.0;
  for (std::size_t i = 1; i < records.size(); ++i) {
    acc += 0.5 * (records[i].current + records[i - 1].current) * (records[i].test_time - records[i - 1].test_time);
  }
  return acc / 3600.0;
}

}  // namespace fbench
