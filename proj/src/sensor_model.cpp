#include "memsrel/sensor_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "memsrel/error.hpp"

namespace memsrel {

std::string_view to_string(Arm arm) {
  static constexpr std::array<std::string_view, 4> names{"A", "B", "C", "D"};
  return names[std::size_t(arm)];
}

std::string_view to_string(HingePosition position) {
  return position == HingePosition::Inner ? "inner" : "outer";
}

std::string_view to_string(LoadSide side) {
  return side == LoadSide::Front ? "front" : "back";
}

LoadSide parse_load_side(std::string_view text) {
  if (text == "front") return LoadSide::Front;
  if (text == "back") return LoadSide::Back;
  throw ParseError("load side must be 'front' or 'back', got '" + std::string(text) + "'");
}

double calibrate_cubic(double k1, double force, double dz) {
  return (force - k1 * dz) / (dz * dz * dz);
}

double SensorSpec::stress_gain(LoadSide side, HingePosition position) const {
  const double front = position == HingePosition::Inner ? stress_gain_inner : stress_gain_outer;
  return side == LoadSide::Front ? front : -front;
}

Eigen::Vector4d SensorSpec::offset_gains(LoadSide side) const {
  return side == LoadSide::Front ? offset_gain : Eigen::Vector4d(-offset_gain);
}

void SensorSpec::validate() const {
  if (!(k1_front > 0.0 && k1_back > 0.0)) throw DomainError("sensor spec: k1 must be positive");
  if (!(k3_front >= 0.0 && k3_back >= 0.0)) throw DomainError("sensor spec: k3 must be nonnegative");
  if (!(stress_gain_inner < 0.0 && stress_gain_outer > 0.0)) {
    throw DomainError("sensor spec: front-load gains must be inner < 0 < outer");
  }
  if (!offset_gain.allFinite() || !std::isfinite(piezo.pi_l) || !std::isfinite(piezo.pi_t)) {
    throw DomainError("sensor spec: non-finite gain or coefficient");
  }
}

SensorState::SensorState(double strength_mpa) {
  status_.fill(HingeStatus::Intact);
  strength_.fill(strength_mpa);
  if (!(strength_mpa > 0.0)) throw DomainError("hinge strength must be positive");
}

SensorState::SensorState(const std::array<double, kHingeCount>& strengths_mpa)
    : strength_(strengths_mpa) {
  status_.fill(HingeStatus::Intact);
  for (double s : strength_) {
    if (!(s > 0.0)) throw DomainError("hinge strength must be positive");
  }
}

int SensorState::intact_count() const {
  return int(std::count(status_.begin(), status_.end(), HingeStatus::Intact));
}

int SensorState::intact_in_ring(HingePosition position) const {
  return kHingesPerRing - failed_in_ring(position);
}

int SensorState::failed_in_ring(HingePosition position) const {
  int n = 0;
  for (Arm arm : kArms) n += failed({arm, position}) ? 1 : 0;
  return n;
}

int SensorState::failed_in_arm(Arm arm) const {
  return int(failed({arm, HingePosition::Inner})) + int(failed({arm, HingePosition::Outer}));
}

double bridge_offset(double drho_in_rel, double drho_out_rel, double v_ges) {
  const double denom = 2.0 + drho_in_rel + drho_out_rel;
  if (std::abs(denom) < 1e-12) throw DomainError("bridge offset: degenerate denominator");
  return (drho_in_rel - drho_out_rel) / denom * v_ges;
}

double hinge_stress(const SensorSpec& spec, double f_z, LoadSide side, HingePosition position) {
  return spec.stress_gain(side, position) * f_z;
}

double force_at_displacement(const SensorSpec& spec, LoadSide side, double dz,
                             const SensorState& state) {
  const double scale = double(state.intact_count()) / double(kHingeCount);
  return scale * (spec.k1(side) * dz + spec.k3(side) * dz * dz * dz);
}

double force_at_displacement(const SensorSpec& spec, LoadSide side, double dz) {
  return spec.k1(side) * dz + spec.k3(side) * dz * dz * dz;
}

double displacement_at_force(const SensorSpec& spec, LoadSide side, double f_z) {
  if (f_z < 0.0) throw DomainError("displacement_at_force: negative force");
  const double k1 = spec.k1(side);
  const double k3 = spec.k3(side);
  // F is convex and increasing on z >= 0, and F(f/k1) >= f, so Newton from
  // f/k1 decreases monotonically onto the root.
  double z = f_z / k1;
  for (int it = 0; it < 100; ++it) {
    const double residual = k1 * z + k3 * z * z * z - f_z;
    const double step = residual / (k1 + 3.0 * k3 * z * z);
    z -= step;
    if (std::abs(step) <= 1e-14 * std::max(1.0, z)) break;
  }
  return z;
}

BridgeSignal bridge_offsets_at_load(const SensorSpec& spec, double f_z, LoadSide side,
                                    double v_ges, const SensorState& state) {
  BridgeSignal out;
  const Eigen::Vector4d gains = spec.offset_gains(side);
  for (Arm arm : kArms) {
    const auto i = std::size_t(arm);
    out.v_off_mv[Eigen::Index(i)] =
        gains[Eigen::Index(i)] * f_z * v_ges * std::pow(0.5, state.failed_in_arm(arm));
  }
  if (state.failed_in_arm(Arm::C) > 0) out.valid.fill(false);
  return out;
}

double loaded_hinge_stress(const SensorSpec& spec, const SensorState& state, HingeId hinge,
                           double f_z, LoadSide side) {
  const int remaining = state.intact_in_ring(hinge.position);
  const double redistribution = remaining > 0 ? double(kHingesPerRing) / remaining : 1.0;
  return hinge_stress(spec, f_z, side, hinge.position) * redistribution;
}

std::vector<HingeId> check_hinge_failures(const SensorSpec& spec, SensorState& state,
                                          double f_z, LoadSide side) {
  std::vector<HingeId> newly_failed;
  for (std::size_t i = 0; i < kHingeCount; ++i) {
    const HingeId h = HingeId::from_index(i);
    if (state.failed(h)) continue;
    const double stress = loaded_hinge_stress(spec, state, h, f_z, side);
    if (stress > 0.0 && stress >= state.strength(h)) newly_failed.push_back(h);
  }
  for (HingeId h : newly_failed) state.mark_failed(h);
  return newly_failed;
}

}  // namespace memsrel
