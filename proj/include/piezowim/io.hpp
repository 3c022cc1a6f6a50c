// Copyright 2026 The piezowim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// CSV emission and ingestion, acceleration/event records, INI run config.

#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "piezowim/beam_fem.hpp"
#include "piezowim/energy_budget.hpp"
#include "piezowim/errors.hpp"
#include "piezowim/pavement.hpp"
#include "piezowim/response.hpp"

namespace piezowim {

// ---------------------------------------------------------------------------
// Number formatting

/// 17 significant digits, '.' decimal point, locale independent.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

inline std::optional<double> try_parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline double parse_double(std::string_view s, std::size_t line, const std::string& what) {
  auto v = try_parse_double(s);
  if (!v) throw ParseError(what + ": '" + std::string(s) + "' is not a number", line);
  return *v;
}

// ---------------------------------------------------------------------------
// Tables

using Cell = std::variant<double, long long, std::string>;

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;

  Table() = default;
  explicit Table(std::vector<std::string> h) : header(std::move(h)) {}

  void add_row(std::vector<Cell> row) {
    detail::require(row.size() == header.size(), "row width does not match the header");
    rows.push_back(std::move(row));
  }
  std::size_t size() const { return rows.size(); }
};

namespace detail {

inline std::string quote_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

inline std::string format_cell(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
  if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
  return quote_field(std::get<std::string>(c));
}

}  // namespace detail

inline std::string to_csv(const Table& t) {
  detail::require(!t.header.empty(), "table needs at least one column");
  std::string out;
  for (std::size_t j = 0; j < t.header.size(); ++j) {
    detail::require(!t.header[j].empty(), "header names must be non-empty");
    out += (j ? "," : "") + detail::quote_field(t.header[j]);
  }
  out += '\n';
  for (const auto& row : t.rows) {
    detail::require(row.size() == t.header.size(), "table is not rectangular");
    for (std::size_t j = 0; j < row.size(); ++j) out += (j ? "," : "") + detail::format_cell(row[j]);
    out += '\n';
  }
  return out;
}

/// Writes through a sibling temporary and renames, so a failed run leaves no
/// partial file behind.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path() && !fs::exists(path.parent_path(), ec))
    throw IoError("directory does not exist: " + path.parent_path().string());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    os << content;
    os.flush();
    if (!os) {
      os.close();
      fs::remove(tmp, ec);
      throw IoError("write failed: " + path.string());
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move output into place: " + path.string());
  }
}

inline void emit_csv(const Table& t, const std::filesystem::path& path) {
  write_file_atomic(path, to_csv(t));
}

struct CsvData {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;  // 1-based source line of each row

  int column(const std::string& name) const {
    for (std::size_t j = 0; j < header.size(); ++j)
      if (header[j] == name) return static_cast<int>(j);
    return -1;
  }
};

/// RFC-4180 reader: quoted fields, doubled quotes, CRLF or LF. Blank lines
/// are skipped.
inline CsvData parse_csv(std::string_view text) {
  CsvData data;
  std::vector<std::string> rec;
  std::string field;
  bool in_quotes = false, any = false;
  std::size_t line = 1, rec_line = 1;
  auto end_record = [&] {
    if (any || !field.empty() || !rec.empty()) {
      rec.push_back(field);
      if (data.header.empty() && data.rows.empty() && data.lines.empty()) {
        data.header = rec;
        data.lines.clear();
      } else {
        if (rec.size() != data.header.size())
          throw ParseError("expected " + std::to_string(data.header.size()) + " fields, got " +
                               std::to_string(rec.size()),
                           rec_line);
        data.rows.push_back(rec);
        data.lines.push_back(rec_line);
      }
    }
    rec.clear();
    field.clear();
    any = false;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    if (c == '"') {
      in_quotes = true;
      any = true;
    } else if (c == ',') {
      rec.push_back(field);
      field.clear();
      any = true;
    } else if (c == '\r') {
      // swallowed; LF terminates the record
    } else if (c == '\n') {
      end_record();
      ++line;
      rec_line = line;
    } else {
      if (field.empty() && rec.empty()) rec_line = line;
      field += c;
    }
  }
  if (in_quotes) throw ParseError("unterminated quoted field", rec_line);
  end_record();
  if (data.header.empty()) throw ParseError("empty file: header row required", 1);
  return data;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

inline CsvData read_csv(const std::filesystem::path& path) {
  try {
    return parse_csv(read_text(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Acceleration records

struct AccelerationRecord {
  std::vector<double> t;  // as read [s]
  SampledExcitation excitation;
  double fs() const { return excitation.fs(); }
  double duration() const { return excitation.duration(); }
};

/// Two columns t_s, a_mps2 with a header row; uniform sampling within 1e-6
/// relative.
inline AccelerationRecord parse_acceleration_csv(std::string_view text) {
  const CsvData csv = parse_csv(text);
  if (csv.header.size() != 2) throw ParseError("acceleration record needs two columns (t_s, a_mps2)", 1);
  if (try_parse_double(csv.header[0]))
    throw ParseError("acceleration record needs a header row (t_s, a_mps2)", 1);
  if (csv.rows.size() < 2) throw ParseError("insufficient samples: need at least 2 rows");
  AccelerationRecord rec;
  for (std::size_t k = 0; k < csv.rows.size(); ++k) {
    const std::size_t ln = csv.lines[k];
    const double t = parse_double(csv.rows[k][0], ln, "time");
    const double a = parse_double(csv.rows[k][1], ln, "acceleration");
    if (!std::isfinite(t) || !std::isfinite(a)) throw ParseError("non-finite value", ln);
    if (!rec.t.empty() && !(t > rec.t.back())) throw ParseError("time is not strictly increasing", ln);
    rec.t.push_back(t);
    rec.excitation.accel.push_back(a);
  }
  const double dt = (rec.t.back() - rec.t.front()) / static_cast<double>(rec.t.size() - 1);
  const double step0 = rec.t[1] - rec.t[0];
  for (std::size_t k = 1; k < rec.t.size(); ++k)
    if (std::abs((rec.t[k] - rec.t[k - 1]) - step0) > 1e-6 * step0)
      throw ParseError("non-uniform sampling", csv.lines[k]);
  rec.excitation.t0 = rec.t.front();
  rec.excitation.dt = dt;
  return rec;
}

inline AccelerationRecord load_acceleration_csv(const std::filesystem::path& path) {
  try {
    return parse_acceleration_csv(read_text(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

inline Table acceleration_table(const AccelerationRecord& rec) {
  Table t({"t_s", "a_mps2"});
  for (std::size_t k = 0; k < rec.t.size(); ++k) t.add_row({rec.t[k], rec.excitation.accel[k]});
  return t;
}

// ---------------------------------------------------------------------------
// Event lists (columns t_start_s, t_end_s, peak_strain[, label])

inline std::vector<LoadEvent> parse_events_csv(std::string_view text) {
  const CsvData csv = parse_csv(text);
  const int c0 = csv.column("t_start_s"), c1 = csv.column("t_end_s"), c2 = csv.column("peak_strain");
  const int cl = csv.column("label");
  if (c0 < 0 || c1 < 0 || c2 < 0)
    throw ParseError("event list needs columns t_start_s, t_end_s, peak_strain", 1);
  std::vector<LoadEvent> out;
  for (std::size_t k = 0; k < csv.rows.size(); ++k) {
    const auto& r = csv.rows[k];
    const std::size_t ln = csv.lines[k];
    LoadEvent e;
    e.t_start = parse_double(r[c0], ln, "t_start_s");
    e.t_end = parse_double(r[c1], ln, "t_end_s");
    e.peak_strain = parse_double(r[c2], ln, "peak_strain");
    e.label = cl >= 0 ? r[cl] : "event" + std::to_string(k + 1);
    if (!(e.t_end > e.t_start)) throw ParseError("t_end_s must exceed t_start_s", ln);
    out.push_back(e);
  }
  return out;
}

inline std::vector<LoadEvent> load_events_csv(const std::filesystem::path& path) {
  try {
    return parse_events_csv(read_text(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

inline Table events_table(std::span<const LoadEvent> events) {
  Table t({"t_start_s", "t_end_s", "peak_strain", "label"});
  for (const auto& e : events) t.add_row({e.t_start, e.t_end, e.peak_strain, e.label});
  return t;
}

/// A numeric column by name, or the only column of a one-column file.
inline std::vector<double> load_column_csv(const std::filesystem::path& path,
                                           const std::string& name = {}) {
  const CsvData csv = read_csv(path);
  int c = name.empty() ? -1 : csv.column(name);
  if (c < 0) {
    if (csv.header.size() != 1)
      throw ParseError(path.string() + ": expected a single column" +
                       (name.empty() ? std::string() : " or a column named '" + name + "'"));
    c = 0;
  }
  std::vector<double> out;
  for (std::size_t k = 0; k < csv.rows.size(); ++k)
    out.push_back(parse_double(csv.rows[k][c], csv.lines[k], path.string()));
  return out;
}

inline Table matrix_table(const Eigen::MatrixXd& A) {
  std::vector<std::string> h;
  for (Eigen::Index j = 0; j < A.cols(); ++j) h.push_back("c" + std::to_string(j));
  Table t(h);
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    std::vector<Cell> row;
    for (Eigen::Index j = 0; j < A.cols(); ++j) row.emplace_back(A(i, j));
    t.add_row(std::move(row));
  }
  return t;
}

inline void write_json(const nlohmann::json& j, const std::filesystem::path& path) {
  write_file_atomic(path, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Run configuration

struct RunConfig {
  HarvesterSpec harvester = reference_harvester();
  TipMass tip{};  // mass 0 -> bare beam
  PavementSpec pavement{};
  SensingCircuit circuit{};
  DutyCycleSpec duty{};
  BatterySpec battery{};
  RectifierSpec rectifier{};
  double series_resistance = 10;  // rectifier path [Ohm]
  double harvest_power = 0.53e-3; // [W]
  double horizon = 86400;         // [s]
  double initial_soc = 0.875;
  std::string output_dir = ".";

  std::optional<TipMass> tip_mass() const {
    if (tip.mass > 0) return tip;
    return std::nullopt;
  }
  void validate() const {
    harvester.validate();
    tip.validate();
    pavement.validate();
    circuit.validate();
    duty.validate();
    battery.validate();
    rectifier.validate();
    detail::require(series_resistance > 0, "rectifier series resistance must be > 0");
    detail::require(harvest_power >= 0, "harvest power must be >= 0");
    detail::require(horizon > 0, "horizon must be > 0");
    detail::require(initial_soc >= 0 && initial_soc <= 1, "initial SoC must lie in [0, 1]");
  }
  bool operator==(const RunConfig&) const = default;
};

namespace detail {

struct ConfigKey {
  std::string section;
  std::string name;
  // Exactly one accessor pair is set: numeric (with unit scaling) or text.
  std::function<double&(RunConfig&)> num;
  double to_si = 1;    // SI = file value * to_si (or / from_si when set)
  double from_si = 0;  // when nonzero: SI = file value / from_si
  bool integer = false;
  std::function<std::string(const RunConfig&)> get_text;
  std::function<void(RunConfig&, const std::string&, std::size_t)> set_text;

  double si(double v) const { return from_si != 0 ? v / from_si : v * to_si; }
  double file(double v) const { return from_si != 0 ? v * from_si : v / to_si; }
};

inline const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> k;
    auto num = [&](std::string sec, std::string name, std::function<double&(RunConfig&)> f,
                   double to_si = 1, double from_si = 0) {
      ConfigKey c;
      c.section = std::move(sec);
      c.name = std::move(name);
      c.num = std::move(f);
      c.to_si = to_si;
      c.from_si = from_si;
      k.push_back(std::move(c));
    };
    auto integer = [&](std::string sec, std::string name, std::function<int&(RunConfig&)> f) {
      ConfigKey c;
      c.section = std::move(sec);
      c.name = name;
      c.integer = true;
      c.get_text = [f](const RunConfig& r) { return std::to_string(f(const_cast<RunConfig&>(r))); };
      c.set_text = [f, name](RunConfig& r, const std::string& v, std::size_t line) {
        int x = 0;
        auto res = std::from_chars(v.data(), v.data() + v.size(), x);
        if (res.ec != std::errc() || res.ptr != v.data() + v.size())
          throw ParseError(name + ": '" + v + "' is not an integer", line);
        f(r) = x;
      };
      k.push_back(std::move(c));
    };
    const double mm = 1e3, g = 1e3, mW = 1e3;
    num("harvester", "length_mm", [](RunConfig& r) -> double& { return r.harvester.length; }, 1, mm);
    num("harvester", "width_mm", [](RunConfig& r) -> double& { return r.harvester.width; }, 1, mm);
    num("harvester", "h_s_mm", [](RunConfig& r) -> double& { return r.harvester.h_s; }, 1, mm);
    num("harvester", "h_p_mm", [](RunConfig& r) -> double& { return r.harvester.h_p; }, 1, mm);
    num("harvester", "Ys_GPa", [](RunConfig& r) -> double& { return r.harvester.Y_s; }, 1e9);
    num("harvester", "c11_GPa", [](RunConfig& r) -> double& { return r.harvester.c11; }, 1e9);
    num("harvester", "rho_s", [](RunConfig& r) -> double& { return r.harvester.rho_s; });
    num("harvester", "rho_p", [](RunConfig& r) -> double& { return r.harvester.rho_p; });
    num("harvester", "e31", [](RunConfig& r) -> double& { return r.harvester.e31; });
    num("harvester", "eps33_nF_per_m", [](RunConfig& r) -> double& { return r.harvester.eps33; }, 1, 1e9);
    num("harvester", "zeta", [](RunConfig& r) -> double& { return r.harvester.zeta; });
    integer("harvester", "n_elements", [](RunConfig& r) -> int& { return r.harvester.n_elements; });

    num("tip", "tip_mass_g", [](RunConfig& r) -> double& { return r.tip.mass; }, 1, g);
    num("tip", "tip_la_mm", [](RunConfig& r) -> double& { return r.tip.l_a; }, 1, mm);
    num("tip", "tip_lb_mm", [](RunConfig& r) -> double& { return r.tip.l_b; }, 1, mm);
    {
      ConfigKey c;
      c.section = "tip";
      c.name = "tip_inertia";
      c.get_text = [](const RunConfig& r) {
        return std::string(r.tip.model == TipInertiaModel::width_offset ? "width_offset"
                                                                          : "block_centroid");
      };
      c.set_text = [](RunConfig& r, const std::string& v, std::size_t line) {
        if (v == "width_offset") r.tip.model = TipInertiaModel::width_offset;
        else if (v == "block_centroid") r.tip.model = TipInertiaModel::block_centroid;
        else throw ParseError("tip_inertia must be width_offset or block_centroid", line);
      };
      k.push_back(std::move(c));
    }

    num("pavement", "R0_ohm", [](RunConfig& r) -> double& { return r.pavement.R0; });
    num("pavement", "lambda", [](RunConfig& r) -> double& { return r.pavement.lambda; });
    num("pavement", "nu", [](RunConfig& r) -> double& { return r.pavement.nu; });
    num("pavement", "e_spacing_mm", [](RunConfig& r) -> double& { return r.pavement.e_spacing; }, 1, mm);
    num("pavement", "area_mm2", [](RunConfig& r) -> double& { return r.pavement.area; }, 1, 1e6);

    num("circuit", "V_supply_V", [](RunConfig& r) -> double& { return r.circuit.V_supply; });
    num("circuit", "R_k_ohm", [](RunConfig& r) -> double& { return r.circuit.R_k; });
    num("circuit", "fs_Hz", [](RunConfig& r) -> double& { return r.circuit.fs; });
    integer("circuit", "record_len", [](RunConfig& r) -> int& { return r.circuit.record_len; });

    num("budget", "monitor_mW", [](RunConfig& r) -> double& { return r.duty.monitor_power; }, 1, mW);
    num("budget", "monitor_s", [](RunConfig& r) -> double& { return r.duty.monitor_duration; });
    num("budget", "sleep_mW", [](RunConfig& r) -> double& { return r.duty.sleep_power; }, 1, mW);
    num("budget", "events_per_day", [](RunConfig& r) -> double& { return r.duty.events_per_day; });
    num("budget", "harvest_mW", [](RunConfig& r) -> double& { return r.harvest_power; }, 1, mW);
    num("budget", "horizon_h", [](RunConfig& r) -> double& { return r.horizon; }, 3600);

    num("battery", "capacity_Ah", [](RunConfig& r) -> double& { return r.battery.capacity_Ah; });
    num("battery", "nominal_V", [](RunConfig& r) -> double& { return r.battery.nominal_V; });
    num("battery", "v_full_V", [](RunConfig& r) -> double& { return r.battery.v_full; });
    num("battery", "v_empty_V", [](RunConfig& r) -> double& { return r.battery.v_empty; });
    num("battery", "charge_eff", [](RunConfig& r) -> double& { return r.battery.charge_eff; });
    num("battery", "initial_soc", [](RunConfig& r) -> double& { return r.initial_soc; });

    num("rectifier", "diode_drop_V", [](RunConfig& r) -> double& { return r.rectifier.diode_drop; });
    integer("rectifier", "bridge_diodes", [](RunConfig& r) -> int& { return r.rectifier.bridge_diodes; });
    integer("rectifier", "series_diodes", [](RunConfig& r) -> int& { return r.rectifier.series_diodes; });
    num("rectifier", "series_resistance_ohm", [](RunConfig& r) -> double& { return r.series_resistance; });

    {
      ConfigKey c;
      c.section = "run";
      c.name = "output_dir";
      c.get_text = [](const RunConfig& r) { return r.output_dir; };
      c.set_text = [](RunConfig& r, const std::string& v, std::size_t) { r.output_dir = v; };
      k.push_back(std::move(c));
    }
    return k;
  }();
  return keys;
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

/// Shortest-safe decimal text for `si` under `key` such that parsing it back
/// reproduces `si` exactly.
inline std::string serialize_value(const ConfigKey& key, double si) {
  double v = key.file(si);
  for (int step = 0; step < 8; ++step) {
    if (key.si(v) == si) return format_double(v);
    v = key.si(v) < si ? std::nextafter(v, HUGE_VAL) : std::nextafter(v, -HUGE_VAL);
  }
  return format_double(key.file(si));
}

}  // namespace detail

struct ConfigParseResult {
  RunConfig config;
  std::vector<std::string> warnings;  // unknown keys in lenient mode
};

/// INI text: `key = value` lines, optional `[section]` headers, `#` or `;`
/// comments. Keys may be written bare, as `section.key`, or under their
/// section. Unknown keys are errors when `strict`.
inline ConfigParseResult parse_config(std::string_view text, bool strict = true,
                                      RunConfig base = {}) {
  ConfigParseResult res{std::move(base), {}};
  std::string section;
  std::map<std::string, std::size_t> seen;
  std::size_t line_no = 0;
  std::istringstream is{std::string(text)};
  std::string raw;
  while (std::getline(is, raw)) {
    ++line_no;
    std::string line = detail::trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("malformed section header", line_no);
      section = detail::trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected key = value", line_no);
    std::string key = detail::trim(std::string_view(line).substr(0, eq));
    std::string value = detail::trim(std::string_view(line).substr(eq + 1));
    if (const auto h = value.find(" #"); h != std::string::npos) value = detail::trim(value.substr(0, h));
    std::string sec = section;
    if (const auto dot = key.find('.'); dot != std::string::npos) {
      sec = key.substr(0, dot);
      key = key.substr(dot + 1);
    }
    const detail::ConfigKey* match = nullptr;
    for (const auto& k : detail::config_keys())
      if (k.name == key && (sec.empty() || k.section == sec)) match = &k;
    if (!match) {
      const std::string msg = "unknown config key '" + (sec.empty() ? key : sec + "." + key) + "'";
      if (strict) throw ParseError(msg, line_no);
      res.warnings.push_back(msg + " (line " + std::to_string(line_no) + ")");
      continue;
    }
    const std::string full = match->section + "." + match->name;
    if (seen.count(full))
      throw ParseError("duplicate key '" + full + "' (first on line " +
                           std::to_string(seen[full]) + ")",
                       line_no);
    seen[full] = line_no;
    if (match->num) {
      match->num(res.config) = match->si(parse_double(value, line_no, full));
    } else {
      match->set_text(res.config, value, line_no);
    }
  }
  try {
    res.config.validate();
  } catch (const ValidationError& e) {
    throw ParseError(std::string("invalid configuration: ") + e.what());
  }
  return res;
}

inline ConfigParseResult load_config(const std::filesystem::path& path, bool strict = true) {
  try {
    return parse_config(read_text(path), strict);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

/// Full config in sectioned INI form; parse_config(serialize_config(c)) == c.
inline std::string serialize_config(const RunConfig& cfg) {
  std::string out, section;
  for (const auto& k : detail::config_keys()) {
    if (k.section != section) {
      out += (section.empty() ? "" : "\n") + ("[" + k.section + "]\n");
      section = k.section;
    }
    const std::string v = k.num ? detail::serialize_value(k, k.num(const_cast<RunConfig&>(cfg)))
                                : k.get_text(cfg);
    out += k.name + " = " + v + "\n";
  }
  return out;
}

}  // namespace piezowim
