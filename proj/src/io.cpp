#include "memsrel/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <system_error>

#include "memsrel/error.hpp"

namespace memsrel {

namespace {

std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string printf_str(const char* format, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

/// Nonblank lines with their 1-based line numbers.
std::vector<std::pair<int, std::string_view>> lines_of(std::string_view text) {
  std::vector<std::pair<int, std::string_view>> out;
  int number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t pos = text.find('\n', start);
    ++number;
    const std::string_view line = trim(text.substr(start, pos - start));
    if (!line.empty()) out.emplace_back(number, line);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool to_double(std::string_view field, double& out) {
  if (field.empty()) return false;
  if (field.front() == '+') field.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
  return ec == std::errc() && ptr == field.data() + field.size();
}

[[noreturn]] void fail_at(const std::string& source, int line, const std::string& what) {
  throw ParseError(source + ":" + std::to_string(line) + ": " + what);
}

double field_double(std::string_view field, const std::string& source, int line,
                    std::string_view column) {
  double v = 0.0;
  if (!to_double(field, v)) {
    fail_at(source, line, "column " + std::string(column) + ": not a number '" + std::string(field) + "'");
  }
  return v;
}

std::vector<std::pair<int, std::vector<std::string_view>>> table_rows(
    std::string_view text, std::string_view header, std::size_t columns, const std::string& source) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw ParseError(source + ": empty file");
  if (lines.front().second != header) {
    fail_at(source, lines.front().first, "expected header '" + std::string(header) + "'");
  }
  std::vector<std::pair<int, std::vector<std::string_view>>> rows;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    auto fields = split(lines[k].second, ',');
    if (fields.size() != columns) {
      fail_at(source, lines[k].first,
              "expected " + std::to_string(columns) + " fields, got " + std::to_string(fields.size()));
    }
    rows.emplace_back(lines[k].first, std::move(fields));
  }
  return rows;
}

constexpr std::array<std::string_view, 4> kOffsetColumns{"voffA_mV", "voffB_mV", "voffC_mV", "voffD_mV"};

}  // namespace

std::string format_curve_csv(const LoadCurve& curve) {
  std::string out(kCurveHeader);
  out += '\n';
  for (Eigen::Index i = 0; i < curve.size(); ++i) {
    out += std::to_string(i);
    out += ',' + fmt_num(curve.dz_um[i]);
    out += ',' + fmt_num(curve.force_n[i]);
    for (int k = 0; k < 4; ++k) out += ',' + fmt_num(curve.v_off_mv(i, k));
    out += curve.valid[std::size_t(i)] ? ",1\n" : ",0\n";
  }
  return out;
}

LoadCurve parse_curve_csv(std::string_view text, LoadSide side, const std::string& source) {
  const auto rows = table_rows(text, kCurveHeader, 8, source);
  LoadCurve curve;
  curve.side = side;
  curve.resize(Eigen::Index(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& [line, f] = rows[r];
    const auto i = Eigen::Index(r);
    const double index = field_double(f[0], source, line, "index");
    if (index != double(r)) fail_at(source, line, "index out of sequence");
    curve.dz_um[i] = field_double(f[1], source, line, "dz_um");
    curve.force_n[i] = field_double(f[2], source, line, "force_N");
    if (!std::isfinite(curve.dz_um[i]) || !std::isfinite(curve.force_n[i])) {
      fail_at(source, line, "non-finite displacement or force");
    }
    if (i > 0 && curve.dz_um[i] < curve.dz_um[i - 1]) {
      fail_at(source, line, "displacement decreases (dz must be nondecreasing)");
    }
    for (int k = 0; k < 4; ++k) {
      curve.v_off_mv(i, k) = field_double(f[std::size_t(k) + 3], source, line, kOffsetColumns[std::size_t(k)]);
    }
    if (f[7] == "1") {
      curve.valid[r] = 1;
    } else if (f[7] == "0") {
      curve.valid[r] = 0;
    } else {
      fail_at(source, line, "valid must be 0 or 1");
    }
  }
  return curve;
}

std::string format_cycle_csv(const CycleLog& log) {
  std::string out(kCycleHeader);
  out += '\n';
  for (Eigen::Index i = 0; i < log.size(); ++i) {
    out += printf_str("%.0f", log.cycle[i]);
    out += ',' + fmt_num(log.force_n[i]);
    for (int k = 0; k < 4; ++k) out += ',' + fmt_num(log.v_off_mv(i, k));
    out += '\n';
  }
  return out;
}

CycleLog parse_cycle_csv(std::string_view text, const std::string& source, double v_ges) {
  const auto rows = table_rows(text, kCycleHeader, 6, source);
  CycleLog log;
  log.v_ges = v_ges;
  log.resize(Eigen::Index(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& [line, f] = rows[r];
    const auto i = Eigen::Index(r);
    log.cycle[i] = field_double(f[0], source, line, "cycle");
    if (log.cycle[i] != std::floor(log.cycle[i])) fail_at(source, line, "cycle must be an integer");
    if (i > 0 && log.cycle[i] <= log.cycle[i - 1]) fail_at(source, line, "cycle must increase");
    if (i > 1 && log.cycle[i] - log.cycle[i - 1] != log.cycle[1] - log.cycle[0]) {
      fail_at(source, line, "non-constant record spacing");
    }
    log.force_n[i] = field_double(f[1], source, line, "force_N");
    for (int k = 0; k < 4; ++k) {
      log.v_off_mv(i, k) = field_double(f[std::size_t(k) + 2], source, line, kOffsetColumns[std::size_t(k)]);
    }
  }
  log.record_interval = log.size() > 1 ? int(log.cycle[1] - log.cycle[0])
                                        : (log.size() == 1 ? int(log.cycle[0]) : 0);
  return log;
}

std::vector<double> parse_force_list(std::string_view text, const std::string& source) {
  std::vector<double> forces;
  const auto lines = lines_of(text);
  for (std::size_t k = 0; k < lines.size(); ++k) {
    const auto [line, content] = lines[k];
    const std::string_view field = split(content, ',').front();
    double v = 0.0;
    if (!to_double(field, v)) {
      if (k == 0) continue;  // header
      fail_at(source, line, "not a number '" + std::string(field) + "'");
    }
    if (!(v > 0.0) || !std::isfinite(v)) fail_at(source, line, "force must be positive");
    forces.push_back(v);
  }
  if (forces.empty()) throw ParseError(source + ": no forces");
  return forces;
}

std::vector<double> parse_number_list(std::string_view text) {
  std::vector<double> out;
  for (std::string_view field : split(text, ',')) {
    double v = 0.0;
    if (!to_double(field, v)) throw ParseError("not a number in list: '" + std::string(field) + "'");
    out.push_back(v);
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("cannot read " + path.string());
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create " + tmp.string());
    out.write(contents.data(), std::streamsize(contents.size()));
    out.flush();
    if (!out) throw IoError("cannot write " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

std::string fnv1a_hex(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return printf_str("%016llx", static_cast<unsigned long long>(h));
}

// JSON ------------------------------------------------------------------------

void to_json(json& j, const WeibullParams& p) { j = json{{"f0", p.f0}, {"beta", p.beta}}; }

void from_json(const json& j, WeibullParams& p) {
  j.at("f0").get_to(p.f0);
  j.at("beta").get_to(p.beta);
}

void to_json(json& j, const WeibullFit& f) {
  j = json{{"f0", f.params.f0}, {"beta", f.params.beta}, {"r", f.r}};
}

void from_json(const json& j, WeibullFit& f) {
  j.get_to(f.params);
  j.at("r").get_to(f.r);
}

namespace {

json mean_std_json(const MeanStd& m) { return json{{"mean", m.mean}, {"std", m.std}}; }

MeanStd mean_std_from(const json& j) { return {j.at("mean").get<double>(), j.at("std").get<double>()}; }

double number_or_inf(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

json channel_json(const ChannelStats& c) {
  return json{{"mean", c.mean},
              {"std", c.std},
              {"relative_std_pct", c.relative_std_pct},
              {"slope_per_cycle", c.slope_per_cycle},
              {"residual_std", c.residual_std}};
}

ChannelStats channel_from(const json& j) {
  ChannelStats c;
  j.at("mean").get_to(c.mean);
  j.at("std").get_to(c.std);
  c.relative_std_pct = number_or_inf(j.at("relative_std_pct"));
  j.at("slope_per_cycle").get_to(c.slope_per_cycle);
  j.at("residual_std").get_to(c.residual_std);
  return c;
}

}  // namespace

void to_json(json& j, const FleetSummary& s) {
  json budget = json::array();
  for (const BudgetRow& row : s.budget) {
    budget.push_back({{"probability", row.probability},
                      {"probability_ppm", row.probability * 1e6},
                      {"f_max_N", row.f_max},
                      {"dz_max_um", row.dz_max}});
  }
  j = json{{"side", std::string(to_string(s.side))},
           {"curves_analyzed", s.curves_analyzed},
           {"curves_without_failure", s.curves_without_failure},
           {"fracture_force_N", mean_std_json(s.fracture_force)},
           {"fracture_dz_um", mean_std_json(s.fracture_dz)},
           {"hinge_counts",
            {{"inner", s.hinge_counts.inner},
             {"outer", s.hinge_counts.outer},
             {"unknown", s.hinge_counts.unknown}}},
           {"weibull", s.weibull ? json(*s.weibull) : json(nullptr)},
           {"budget", budget}};
}

void from_json(const json& j, FleetSummary& s) {
  s.side = parse_load_side(j.at("side").get<std::string>());
  j.at("curves_analyzed").get_to(s.curves_analyzed);
  j.at("curves_without_failure").get_to(s.curves_without_failure);
  s.fracture_force = mean_std_from(j.at("fracture_force_N"));
  s.fracture_dz = mean_std_from(j.at("fracture_dz_um"));
  const json& counts = j.at("hinge_counts");
  counts.at("inner").get_to(s.hinge_counts.inner);
  counts.at("outer").get_to(s.hinge_counts.outer);
  counts.at("unknown").get_to(s.hinge_counts.unknown);
  if (j.at("weibull").is_null()) {
    s.weibull.reset();
  } else {
    s.weibull = j.at("weibull").get<WeibullFit>();
  }
  s.budget.clear();
  for (const json& row : j.at("budget")) {
    s.budget.push_back({row.at("probability").get<double>(), row.at("f_max_N").get<double>(),
                        row.at("dz_max_um").get<double>()});
  }
}

void to_json(json& j, const OverloadFactors& o) {
  j = json{{"displacement_factor", o.displacement_factor}, {"force_factor", o.force_factor}};
}

void from_json(const json& j, OverloadFactors& o) {
  j.at("displacement_factor").get_to(o.displacement_factor);
  j.at("force_factor").get_to(o.force_factor);
}

void to_json(json& j, const DegradationReport& r) {
  json channels{{"force_N", channel_json(r.force)}};
  for (std::size_t k = 0; k < 4; ++k) channels[std::string(kOffsetColumns[k])] = channel_json(r.offsets[k]);
  j = json{{"entries", r.entries},
           {"total_cycles", r.total_cycles},
           {"sigma_multiple", r.sigma_multiple},
           {"channels", channels},
           {"verdict", r.degraded ? "degraded" : "stable"}};
}

void from_json(const json& j, DegradationReport& r) {
  j.at("entries").get_to(r.entries);
  j.at("total_cycles").get_to(r.total_cycles);
  j.at("sigma_multiple").get_to(r.sigma_multiple);
  const json& channels = j.at("channels");
  r.force = channel_from(channels.at("force_N"));
  for (std::size_t k = 0; k < 4; ++k) r.offsets[k] = channel_from(channels.at(std::string(kOffsetColumns[k])));
  const std::string verdict = j.at("verdict").get<std::string>();
  if (verdict != "degraded" && verdict != "stable") throw ParseError("unknown verdict '" + verdict + "'");
  r.degraded = verdict == "degraded";
}

void to_json(json& j, const Provenance& p) {
  j = json{{"seed", p.seed ? json(*p.seed) : json(nullptr)},
           {"config_hash", p.config_hash},
           {"tool_version", p.tool_version}};
}

void from_json(const json& j, Provenance& p) {
  if (j.at("seed").is_null()) {
    p.seed.reset();
  } else {
    p.seed = j.at("seed").get<std::uint64_t>();
  }
  j.at("config_hash").get_to(p.config_hash);
  j.at("tool_version").get_to(p.tool_version);
}

void to_json(json& j, const Report& r) {
  json fleets = json::array();
  for (const SideReport& side : r.fleets) {
    json entry = side.summary;
    entry["overload"] = side.overload ? json(*side.overload) : json(nullptr);
    fleets.push_back(std::move(entry));
  }
  j = json{{"fleets", fleets},
           {"degradation", r.degradation ? json(*r.degradation) : json(nullptr)},
           {"provenance", r.provenance}};
}

void from_json(const json& j, Report& r) {
  r.fleets.clear();
  for (const json& entry : j.at("fleets")) {
    SideReport side;
    side.summary = entry.get<FleetSummary>();
    if (!entry.at("overload").is_null()) side.overload = entry.at("overload").get<OverloadFactors>();
    r.fleets.push_back(std::move(side));
  }
  if (j.at("degradation").is_null()) {
    r.degradation.reset();
  } else {
    r.degradation = j.at("degradation").get<DegradationReport>();
  }
  j.at("provenance").get_to(r.provenance);
}

void to_json(json& j, const StaticProtocol& p) {
  j = json{{"side", std::string(to_string(p.side))},
           {"dz_max_um", p.dz_max},
           {"step_um", p.step},
           {"v_ges_V", p.v_ges}};
}

void to_json(json& j, const DynamicProtocol& p) {
  j = json{{"side", std::string(to_string(p.side))},
           {"f_min_N", p.f_min},
           {"f_max_N", p.f_max},
           {"frequency_Hz", p.frequency},
           {"n_cycles", p.n_cycles},
           {"record_interval", p.record_interval},
           {"v_ges_V", p.v_ges},
           {"drift_mV", p.drift_mv}};
}

void to_json(json& j, const RigConfig& r) {
  j = json{{"force_resolution_N", r.force_resolution},
           {"stage_accuracy_um", r.stage_accuracy},
           {"nano_accuracy_um", r.nano_accuracy},
           {"max_force_N", r.max_force},
           {"max_frequency_Hz", r.max_frequency},
           {"dz_max_um", r.dz_max},
           {"static_force_sd_N", r.static_force_sd},
           {"displacement_sd_um", r.displacement_sd},
           {"static_offset_sd_mV", r.static_offset_sd},
           {"hold_force_sd_N", r.hold_force_sd},
           {"hold_offset_sd_mV", r.hold_offset_sd},
           {"hold_force_bias_N", r.hold_force_bias}};
}

// Tables ----------------------------------------------------------------------

std::string format_fleet_table(const SideReport& side) {
  const FleetSummary& s = side.summary;
  std::string out;
  out += printf_str("Load side: %s (%d curves with failures, %d without)\n",
                    std::string(to_string(s.side)).c_str(), s.curves_analyzed, s.curves_without_failure);
  out += printf_str("  Fracture force         %.2f +/- %.2f N\n", s.fracture_force.mean, s.fracture_force.std);
  out += printf_str("  Fracture displacement  %.2f +/- %.2f um\n", s.fracture_dz.mean, s.fracture_dz.std);
  out += printf_str("  Failed hinges          inner %d  outer %d  unknown %d\n", s.hinge_counts.inner,
                    s.hinge_counts.outer, s.hinge_counts.unknown);
  if (s.weibull) {
    out += printf_str("  Weibull fit            F0 = %.2f N  beta = %.2f  R = %.4f\n", s.weibull->params.f0,
                      s.weibull->params.beta, s.weibull->r);
    out += "  Failure prob [ppm]   F_z,max [N]   dz_max [um]\n";
    for (const BudgetRow& row : s.budget) {
      out += printf_str("  %-20g %-13.2f %.2f\n", row.probability * 1e6, row.f_max, row.dz_max);
    }
  } else {
    out += "  Weibull fit            not available (degenerate fracture forces)\n";
  }
  if (side.overload) {
    out += printf_str("  Overload at 1 ppm      %.1f-fold displacement, %.1f-fold force\n",
                      side.overload->displacement_factor, side.overload->force_factor);
  }
  return out;
}

std::string format_degradation_table(const DegradationReport& r) {
  std::string out = printf_str("Long-term log: %d entries over %.0f cycles\n", r.entries, r.total_cycles);
  out += "  Channel        Average      Std. dev.   Rel. std [%]  Trend over run\n";
  auto row = [&](const char* name, const ChannelStats& c, double scale, const char* fmt) {
    out += printf_str(fmt, name, c.mean * scale, c.std * scale, c.relative_std_pct,
                      c.slope_per_cycle * r.total_cycles * scale);
  };
  row("Force [N]", r.force, 1.0, "  %-14s %-12.5f %-11.5f %-13.3f %.5f\n");
  const char* names[] = {"Voff,A [mV]", "Voff,B [mV]", "Voff,C [mV]", "Voff,D [mV]"};
  for (std::size_t k = 0; k < 4; ++k) row(names[k], r.offsets[k], 1.0, "  %-14s %-12.2f %-11.2f %-13.3f %.3f\n");
  out += std::string("  Verdict: ") + (r.degraded ? "degraded" : "stable") + "\n";
  return out;
}

}  // namespace memsrel
