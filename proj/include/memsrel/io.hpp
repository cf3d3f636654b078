#pragma once

// File formats and report serialisation: load-curve and cycle-log CSV, force
// lists, JSON reports and manifests. Writes go through a temporary file that is
// renamed into place.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "memsrel/curve_analysis.hpp"
#include "memsrel/testbench.hpp"

namespace memsrel {

inline constexpr std::string_view kToolVersion = "1.0.0";
inline constexpr std::string_view kCurveHeader =
    "index,dz_um,force_N,voffA_mV,voffB_mV,voffC_mV,voffD_mV,valid";
inline constexpr std::string_view kCycleHeader = "cycle,force_N,voffA_mV,voffB_mV,voffC_mV,voffD_mV";

std::string format_curve_csv(const LoadCurve& curve);
/// Throws ParseError naming `source` and the offending line.
LoadCurve parse_curve_csv(std::string_view text, LoadSide side, const std::string& source);

std::string format_cycle_csv(const CycleLog& log);
CycleLog parse_cycle_csv(std::string_view text, const std::string& source, double v_ges = 1.0);

/// One force per line; an optional non-numeric header line is skipped.
std::vector<double> parse_force_list(std::string_view text, const std::string& source);

/// Comma-separated numbers, e.g. "1e-6,1e-5".
std::vector<double> parse_number_list(std::string_view text);

std::string read_file(const std::filesystem::path& path);
/// Writes `path.tmp` then renames it over `path`. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(std::string_view data);

struct Provenance {
  std::optional<std::uint64_t> seed;
  std::string config_hash;
  std::string tool_version{kToolVersion};
  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct SideReport {
  FleetSummary summary;
  std::optional<OverloadFactors> overload;
};

struct Report {
  std::vector<SideReport> fleets;
  std::optional<DegradationReport> degradation;
  Provenance provenance;
};

using nlohmann::json;

void to_json(json& j, const WeibullParams& p);
void from_json(const json& j, WeibullParams& p);
void to_json(json& j, const WeibullFit& f);
void from_json(const json& j, WeibullFit& f);
void to_json(json& j, const FleetSummary& s);
void from_json(const json& j, FleetSummary& s);
void to_json(json& j, const OverloadFactors& o);
void from_json(const json& j, OverloadFactors& o);
void to_json(json& j, const DegradationReport& r);
void from_json(const json& j, DegradationReport& r);
void to_json(json& j, const Provenance& p);
void from_json(const json& j, Provenance& p);
void to_json(json& j, const Report& r);
void from_json(const json& j, Report& r);

void to_json(json& j, const StaticProtocol& p);
void to_json(json& j, const DynamicProtocol& p);
void to_json(json& j, const RigConfig& r);

/// Human-readable tables; forces and displacements rounded to 2 decimals.
std::string format_fleet_table(const SideReport& side);
std::string format_degradation_table(const DegradationReport& report);

}  // namespace memsrel
