#pragma once

// Measurement analysis of static destructive ramps and long-term cycling logs:
// stiffness extraction, discontinuity detection, failure localisation from the
// bridge signals, fleet statistics and the degradation verdict.

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "memsrel/reliability_stats.hpp"
#include "memsrel/sensor_model.hpp"

namespace memsrel {

using OffsetMatrix = Eigen::Matrix<double, Eigen::Dynamic, 4>;

/// One static ramp: per-sample displacement, force and the four bridge offsets.
/// A sample's signals are either all valid or all invalid.
struct LoadCurve {
  LoadSide side = LoadSide::Front;
  Eigen::VectorXd dz_um;
  Eigen::VectorXd force_n;
  OffsetMatrix v_off_mv;
  std::vector<std::uint8_t> valid;

  Eigen::Index size() const { return dz_um.size(); }
  void resize(Eigen::Index n);
  /// Throws DomainError on mismatched columns or decreasing dz.
  void validate() const;
};

struct FailureEvent {
  Eigen::Index sample_index = 0;  ///< last sample before the drop
  double force_drop = 0.0;        ///< f[i] - f[i+1] > 0 [N]
  std::optional<Arm> arm;
  std::optional<HingePosition> position;
};

struct DetectionThresholds {
  double drop_fraction = 0.10;
  double drop_floor = 0.05;  ///< [N]
};

struct FracturePoint {
  double force = 0.0;  ///< [N]
  double dz = 0.0;     ///< [um]
};

struct BudgetRow {
  double probability = 0.0;
  double f_max = 0.0;   ///< [N]
  double dz_max = 0.0;  ///< [um]
};

struct HingeCounts {
  int inner = 0;
  int outer = 0;
  int unknown = 0;
  int total() const { return inner + outer + unknown; }
};

struct FleetSummary {
  LoadSide side = LoadSide::Front;
  int curves_analyzed = 0;
  int curves_without_failure = 0;
  MeanStd fracture_force;  ///< [N]
  MeanStd fracture_dz;     ///< [um]
  HingeCounts hinge_counts;
  std::optional<WeibullFit> weibull;  ///< absent when fracture forces are degenerate
  std::vector<BudgetRow> budget;
};

struct OverloadFactors {
  double displacement_factor = 0.0;
  double force_factor = 0.0;
};

struct CycleLog {
  Eigen::VectorXd cycle;  ///< cycle index of each record (integral values)
  Eigen::VectorXd force_n;
  OffsetMatrix v_off_mv;
  double v_ges = 1.0;
  int record_interval = 0;

  Eigen::Index size() const { return cycle.size(); }
  void resize(Eigen::Index n);
  /// Throws DomainError unless cycles increase with constant spacing.
  void validate() const;
};

struct ChannelStats {
  double mean = 0.0;
  double std = 0.0;
  double relative_std_pct = 0.0;
  double slope_per_cycle = 0.0;
  double residual_std = 0.0;
};

struct DegradationReport {
  int entries = 0;
  double total_cycles = 0.0;
  double sigma_multiple = 3.0;
  ChannelStats force;
  std::array<ChannelStats, 4> offsets;
  bool degraded = false;
};

inline constexpr std::array<double, 3> kBudgetProbabilities{1e-6, 1e-5, 1e-4};

/// Least-squares slope (free intercept) of force over samples with
/// dz <= dz_limit, in mN/um. Throws InsufficientData below 3 samples.
double extract_stiffness(const LoadCurve& curve, double dz_limit = 20.0);

/// An event at i whenever f[i+1] < f[i] - max(fraction * f[i], floor) while dz
/// increases.
std::vector<FailureEvent> detect_failures(const LoadCurve& curve,
                                          const DetectionThresholds& thresholds = {});

/// Force and displacement at the first detected event. Throws NoFailure.
FracturePoint fracture_point(const LoadCurve& curve, const DetectionThresholds& thresholds = {});

/// Fills arm and position of each event from the bridge signals.
std::vector<FailureEvent> classify_failures(const LoadCurve& curve,
                                            std::vector<FailureEvent> events, LoadSide side);

/// F_max and dz_max at each probability for a fit and load side.
std::vector<BudgetRow> budget_table(const WeibullParams& params, const SensorSpec& spec,
                                    LoadSide side,
                                    std::span<const double> probabilities = kBudgetProbabilities);

FleetSummary fleet_summary(std::span<const LoadCurve> curves, const SensorSpec& spec,
                           const DetectionThresholds& thresholds = {});

OverloadFactors overload_factors(const FleetSummary& summary, const SensorSpec& spec,
                                 double nominal_dz = 2.0);

DegradationReport degradation_report(const CycleLog& log, double sigma_multiple = 3.0);

}  // namespace memsrel
