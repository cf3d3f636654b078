#include "memsrel/testbench.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "memsrel/error.hpp"

namespace memsrel {

RigConfig RigConfig::noiseless() {
  RigConfig rig;
  rig.static_force_sd = 0.0;
  rig.displacement_sd = 0.0;
  rig.static_offset_sd = 0.0;
  rig.hold_force_sd = 0.0;
  rig.hold_offset_sd = 0.0;
  rig.hold_force_bias = 0.0;
  return rig;
}

void RigConfig::validate() const {
  for (double v : {force_resolution, stage_accuracy, nano_accuracy, max_force, max_frequency, dz_max}) {
    if (!(v > 0.0)) throw ProtocolLimit("rig limits must be positive");
  }
  for (double v : {static_force_sd, displacement_sd, static_offset_sd, hold_force_sd, hold_offset_sd}) {
    if (!(v >= 0.0)) throw ProtocolLimit("noise levels must be nonnegative");
  }
}

void StaticProtocol::validate(const RigConfig& rig) const {
  if (!(step > 0.0)) throw ProtocolLimit("static step must be positive");
  if (!(dz_max > 0.0)) throw ProtocolLimit("static dz_max must be positive");
  if (dz_max > rig.dz_max) {
    throw ProtocolLimit("static dz_max " + std::to_string(dz_max) + " um exceeds rig limit " +
                        std::to_string(rig.dz_max) + " um");
  }
  if (!(v_ges > 0.0)) throw ProtocolLimit("supply voltage must be positive");
}

void DynamicProtocol::validate(const RigConfig& rig) const {
  if (!(f_min > 0.0 && f_min < f_max)) throw ProtocolLimit("dynamic forces need 0 < f_min < f_max");
  if (f_max > rig.max_force) throw ProtocolLimit("dynamic f_max exceeds rig force limit");
  if (!(frequency > 0.0) || frequency > rig.max_frequency) {
    throw ProtocolLimit("dynamic frequency outside rig range");
  }
  if (record_interval <= 0 || n_cycles < record_interval) {
    throw ProtocolLimit("dynamic run needs n_cycles >= record_interval > 0");
  }
  if (!(v_ges > 0.0)) throw ProtocolLimit("supply voltage must be positive");
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

double gaussian(Rng& rng, double sd) {
  if (sd == 0.0) return 0.0;
  return std::normal_distribution<double>(0.0, sd)(rng);
}

}  // namespace

SensorState sample_specimen(const FleetParams& params, const SensorSpec& spec, LoadSide side,
                            Rng& rng) {
  const WeibullParams& w = params.params(side);
  if (!(w.f0 > 0.0 && w.beta > 0.0)) throw DomainError("fleet Weibull parameters must be positive");
  const double hinge_scale = w.f0 * std::pow(double(kHingesPerRing), 1.0 / w.beta);
  std::weibull_distribution<double> strength_force(w.beta, hinge_scale);

  std::array<double, kHingeCount> strengths{};
  for (std::size_t i = 0; i < kHingeCount; ++i) {
    const HingeId h = HingeId::from_index(i);
    const double gain = std::abs(spec.stress_gain(side, h.position));
    strengths[i] = gain * strength_force(rng);
  }
  return SensorState(strengths);
}

double first_fracture_force(const SensorState& state, const SensorSpec& spec, LoadSide side) {
  const HingePosition ring = tensile_ring(side);
  const double gain = spec.stress_gain(side, ring);
  double weakest = std::numeric_limits<double>::infinity();
  for (Arm arm : kArms) weakest = std::min(weakest, state.strength({arm, ring}));
  return weakest / gain;
}

LoadCurve run_static(SensorState& state, const SensorSpec& spec, const StaticProtocol& protocol,
                     const RigConfig& rig, Rng& rng, std::vector<HingeFailure>* failures) {
  rig.validate();
  protocol.validate(rig);
  const auto steps = Eigen::Index(std::floor(protocol.dz_max / protocol.step + 1e-9));

  LoadCurve curve;
  curve.side = protocol.side;
  curve.resize(steps + 1);
  for (Eigen::Index i = 0; i <= steps; ++i) {
    const double dz_cmd = double(i) * protocol.step;
    const double dz_act = std::max(0.0, dz_cmd + gaussian(rng, rig.displacement_sd));
    const double f_true = force_at_displacement(spec, protocol.side, dz_act, state);
    BridgeSignal bridge = bridge_offsets_at_load(spec, f_true, protocol.side, protocol.v_ges, state);

    curve.dz_um[i] = dz_cmd;
    curve.force_n[i] = f_true + gaussian(rng, rig.static_force_sd);
    curve.valid[std::size_t(i)] = bridge.all_valid() ? 1 : 0;
    for (int k = 0; k < 4; ++k) {
      curve.v_off_mv(i, k) = bridge.all_valid()
                                 ? bridge.v_off_mv[k] + gaussian(rng, rig.static_offset_sd)
                                 : std::numeric_limits<double>::quiet_NaN();
    }

    for (HingeId h : check_hinge_failures(spec, state, f_true, protocol.side)) {
      if (failures) failures->push_back({i, h});
    }
  }
  return curve;
}

CycleLog run_dynamic(const SensorState& state, const SensorSpec& spec,
                     const DynamicProtocol& protocol, const RigConfig& rig, Rng& rng) {
  rig.validate();
  protocol.validate(rig);
  const double f_hold = protocol.f_max + rig.hold_force_bias;
  {
    SensorState probe = state;
    if (!check_hinge_failures(spec, probe, f_hold, protocol.side).empty()) {
      throw Overload("dynamic hold force " + std::to_string(f_hold) +
                     " N would fracture the specimen");
    }
  }

  const Eigen::Vector4d model =
      bridge_offsets_at_load(spec, f_hold, protocol.side, protocol.v_ges, state).v_off_mv;
  const Eigen::Index n = protocol.n_cycles / protocol.record_interval;
  CycleLog log;
  log.v_ges = protocol.v_ges;
  log.record_interval = protocol.record_interval;
  log.resize(n);
  for (Eigen::Index e = 0; e < n; ++e) {
    const double cycle = double((e + 1) * protocol.record_interval);
    log.cycle[e] = cycle;
    log.force_n[e] = f_hold + gaussian(rng, rig.hold_force_sd);
    const double drift = protocol.drift_mv * cycle / double(protocol.n_cycles);
    for (int k = 0; k < 4; ++k) {
      log.v_off_mv(e, k) = model[k] + drift + gaussian(rng, rig.hold_offset_sd);
    }
  }
  return log;
}

std::vector<LoadCurve> run_fleet(const FleetParams& params, const SensorSpec& spec,
                                 const StaticProtocol& protocol, const RigConfig& rig) {
  if (params.count < 1) throw DomainError("fleet needs at least one specimen");
  std::vector<LoadCurve> curves;
  curves.reserve(std::size_t(params.count));
  for (int i = 0; i < params.count; ++i) {
    Rng rng(derive_seed(params.seed, std::uint64_t(i)));
    SensorState state = sample_specimen(params, spec, protocol.side, rng);
    curves.push_back(run_static(state, spec, protocol, rig, rng));
  }
  return curves;
}

}  // namespace memsrel
