#pragma once

// Virtual electromechanical test rig: seeded specimen generation, static
// destructive displacement ramps and long-term force cycling with instrument
// noise. Every output is a pure function of its inputs and seed.

#include <cstdint>
#include <random>
#include <vector>

#include "memsrel/curve_analysis.hpp"
#include "memsrel/reliability_stats.hpp"
#include "memsrel/sensor_model.hpp"

namespace memsrel {

using Rng = std::mt19937_64;

struct RigConfig {
  double force_resolution = 5e-3;  ///< [N]
  double stage_accuracy = 2.0;     ///< x/y stage [um]
  double nano_accuracy = 0.02;     ///< nanopositioner [um]
  double max_force = 3.6;          ///< [N]
  double max_frequency = 20.0;     ///< [Hz]
  double dz_max = 200.0;           ///< [um]

  // Noise standard deviations. Static force noise is half the force
  // resolution, displacement noise half the nanopositioner accuracy; hold-point
  // noise is back-solved from the long-term offset and force scatter.
  double static_force_sd = 2.5e-3;      ///< [N]
  double displacement_sd = 0.01;        ///< [um]
  double static_offset_sd = 0.28;       ///< [mV]
  double hold_force_sd = 0.37e-3;       ///< [N]
  double hold_offset_sd = 0.28;         ///< [mV]
  /// Systematic excess of the held force over the setpoint [N].
  double hold_force_bias = 0.50352 - 0.5;

  /// Same limits with every noise term and the hold bias set to zero.
  static RigConfig noiseless();
  void validate() const;
};

struct StaticProtocol {
  LoadSide side = LoadSide::Front;
  double dz_max = 200.0;  ///< [um]
  double step = 0.5;      ///< [um]
  double v_ges = 1.0;     ///< [V]

  void validate(const RigConfig& rig) const;
};

struct DynamicProtocol {
  double f_min = 0.01;  ///< [N]
  double f_max = 0.5;   ///< [N]
  double frequency = 2.0;  ///< [Hz]
  int n_cycles = 50'000;
  int record_interval = 500;
  double v_ges = 1.0;   ///< [V]
  double drift_mv = 0.0;  ///< linear offset drift accumulated over the run
  LoadSide side = LoadSide::Front;

  void validate(const RigConfig& rig) const;
};

struct FleetParams {
  WeibullParams front{1.22, 10.69};
  WeibullParams back{0.77, 7.21};
  int count = 20;
  std::uint64_t seed = 0;

  const WeibullParams& params(LoadSide side) const {
    return side == LoadSide::Front ? front : back;
  }
};

/// A hinge fracture recorded by the simulator.
struct HingeFailure {
  Eigen::Index sample_index = 0;
  HingeId hinge;
};

/// Seed of specimen `index` in a fleet; a splitmix64 step over (master, index).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Hinge strengths drawn so that the first-fracture force of the tensile ring
/// (weakest of four) is Weibull(f0, beta): each hinge force strength is
/// Weibull(f0 * 4^(1/beta), beta), converted to stress by its ring's gain.
SensorState sample_specimen(const FleetParams& params, const SensorSpec& spec, LoadSide side,
                            Rng& rng);

/// Smallest force at which any tensile hinge of an intact specimen fails.
double first_fracture_force(const SensorState& state, const SensorSpec& spec, LoadSide side);

/// Displacement-controlled ramp from 0 to dz_max. Each sample records the
/// force before the hinge check at that sample, so a fracture shows up as a
/// drop to the next sample. `failures`, when given, receives ground truth.
LoadCurve run_static(SensorState& state, const SensorSpec& spec, const StaticProtocol& protocol,
                     const RigConfig& rig, Rng& rng,
                     std::vector<HingeFailure>* failures = nullptr);

/// Hold-point records every record_interval cycles. Throws Overload when the
/// held force would fracture the specimen.
CycleLog run_dynamic(const SensorState& state, const SensorSpec& spec,
                     const DynamicProtocol& protocol, const RigConfig& rig, Rng& rng);

/// One static ramp per specimen, each from its own derived seed.
std::vector<LoadCurve> run_fleet(const FleetParams& params, const SensorSpec& spec,
                                 const StaticProtocol& protocol, const RigConfig& rig);

}  // namespace memsrel
