#pragma once

// Physical model of the three-axial piezoresistive force sensor: resistivity
// change of a piezoresistor under stress, Wheatstone bridge offset, hardening
// force-displacement law, hinge stresses and the tensile fracture criterion.
//
// Units used throughout: force N, displacement um, stress MPa (Pa only for
// the piezoresistive coefficients), bridge offsets mV, supply voltage V.

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace memsrel {

enum class Arm : std::uint8_t { A = 0, B = 1, C = 2, D = 3 };
enum class HingePosition : std::uint8_t { Inner = 0, Outer = 1 };
enum class LoadSide : std::uint8_t { Front = 0, Back = 1 };

inline constexpr std::array<Arm, 4> kArms{Arm::A, Arm::B, Arm::C, Arm::D};
inline constexpr std::size_t kHingeCount = 8;
inline constexpr int kHingesPerRing = 4;

std::string_view to_string(Arm arm);
std::string_view to_string(HingePosition position);
std::string_view to_string(LoadSide side);
LoadSide parse_load_side(std::string_view text);

/// The ring that carries tension for a given load side: outer for front loads,
/// inner for back loads.
constexpr HingePosition tensile_ring(LoadSide side) {
  return side == LoadSide::Front ? HingePosition::Outer : HingePosition::Inner;
}

constexpr HingePosition other_ring(HingePosition p) {
  return p == HingePosition::Inner ? HingePosition::Outer : HingePosition::Inner;
}

struct HingeId {
  Arm arm = Arm::A;
  HingePosition position = HingePosition::Inner;

  constexpr std::size_t index() const {
    return std::size_t(arm) * 2 + std::size_t(position);
  }
  static constexpr HingeId from_index(std::size_t i) {
    return {Arm(i / 2), HingePosition(i % 2)};
  }
  friend constexpr bool operator==(HingeId, HingeId) = default;
};

struct PiezoCoefficients {
  double pi_l = 71.8e-11;  ///< longitudinal [1/Pa]
  double pi_t = -66.3e-11; ///< transversal [1/Pa]
};

/// Stress parallel and transverse to a resistor, in Pa.
struct StressState {
  double sigma_l = 0.0;
  double sigma_t = 0.0;
};

/// k3 such that k1 * dz + k3 * dz^3 passes through (dz, force).
double calibrate_cubic(double k1, double force, double dz);

struct SensorSpec {
  // Geometry, metadata only.
  double membrane_thickness_um = 25.0;
  double cross_size_mm = 4.5;
  double pin_length_mm = 7.0;
  double resistor_aspect = 2.0;

  // Initial stiffness [N/um] and cubic hardening [N/um^3] per load side.
  double k1_front = 7.01e-3;
  double k1_back = 6.61e-3;
  double k3_front = calibrate_cubic(7.01e-3, 1.16, 78.2);
  double k3_back = calibrate_cubic(6.61e-3, 0.72, 55.1);

  // Hinge surface stress per unit front-side force [MPa/N]. Back-side gains
  // are the negated front-side gains.
  double stress_gain_inner = -373.0 / 0.5;
  double stress_gain_outer = 489.0 / 0.5;

  // Front-side bridge offset per unit force and supply voltage [mV/(N V)],
  // arms A..D: long-term offset means divided by the mean applied force.
  Eigen::Vector4d offset_gain{-191.32 / 0.50352, -192.33 / 0.50352,
                              -190.36 / 0.50352, -191.73 / 0.50352};

  PiezoCoefficients piezo{};

  double k1(LoadSide side) const { return side == LoadSide::Front ? k1_front : k1_back; }
  double k3(LoadSide side) const { return side == LoadSide::Front ? k3_front : k3_back; }
  double stress_gain(LoadSide side, HingePosition position) const;
  /// Offset gains for the given side (sign-reversed for back loads).
  Eigen::Vector4d offset_gains(LoadSide side) const;

  /// Throws DomainError when an invariant is violated.
  void validate() const;
};

enum class HingeStatus : std::uint8_t { Intact, Failed };

/// Per-specimen hinge health and critical tensile stresses [MPa].
class SensorState {
 public:
  /// All hinges intact with the given strength.
  explicit SensorState(double strength_mpa = std::numeric_limits<double>::infinity());
  explicit SensorState(const std::array<double, kHingeCount>& strengths_mpa);

  bool failed(HingeId h) const { return status_[h.index()] == HingeStatus::Failed; }
  double strength(HingeId h) const { return strength_[h.index()]; }
  const std::array<double, kHingeCount>& strengths() const { return strength_; }

  /// One-way transition; failed hinges stay failed.
  void mark_failed(HingeId h) { status_[h.index()] = HingeStatus::Failed; }

  int intact_count() const;
  int intact_in_ring(HingePosition position) const;
  int failed_in_arm(Arm arm) const;
  int failed_in_ring(HingePosition position) const;

  friend bool operator==(const SensorState&, const SensorState&) = default;

 private:
  std::array<HingeStatus, kHingeCount> status_{};
  std::array<double, kHingeCount> strength_{};
};

struct BridgeSignal {
  Eigen::Vector4d v_off_mv = Eigen::Vector4d::Zero();
  std::array<bool, 4> valid{true, true, true, true};

  bool all_valid() const { return valid[0] && valid[1] && valid[2] && valid[3]; }
};

/// Relative resistivity change pi_l * sigma_l + pi_t * sigma_t.
template <typename Scalar>
Scalar resistivity_change(const PiezoCoefficients& c, Scalar sigma_l, Scalar sigma_t) {
  return Scalar(c.pi_l) * sigma_l + Scalar(c.pi_t) * sigma_t;
}

inline double resistivity_change(const PiezoCoefficients& c, const StressState& s) {
  return resistivity_change<double>(c, s.sigma_l, s.sigma_t);
}

/// Bridge offset voltage from the relative resistivity changes of the inner
/// and outer hinge resistors, in the unit of v_ges. Throws DomainError when
/// |2 + drho_in + drho_out| < 1e-12.
double bridge_offset(double drho_in_rel, double drho_out_rel, double v_ges);

/// Surface stress [MPa] of a hinge ring under force f_z (intact sensor).
double hinge_stress(const SensorSpec& spec, double f_z, LoadSide side,
                    HingePosition position);

/// Force [N] at displacement dz [um]; both stiffness terms are scaled by
/// intact_hinges / 8.
double force_at_displacement(const SensorSpec& spec, LoadSide side, double dz,
                             const SensorState& state);

/// Intact-sensor force at displacement dz.
double force_at_displacement(const SensorSpec& spec, LoadSide side, double dz);

/// Positive root of k1 z + k3 z^3 = f_z for an intact sensor.
double displacement_at_force(const SensorSpec& spec, LoadSide side, double f_z);

/// Bridge offsets [mV] of arms A..D at force f_z and supply v_ges. Each failed
/// hinge halves its arm's offset; a failed arm-C hinge invalidates every arm
/// because arm C carries the bridge supply leads.
BridgeSignal bridge_offsets_at_load(const SensorSpec& spec, double f_z, LoadSide side,
                                    double v_ges, const SensorState& state);

/// Effective tensile stress on an intact hinge including ring redistribution
/// (factor 4 / intact hinges remaining in its ring).
double loaded_hinge_stress(const SensorSpec& spec, const SensorState& state,
                           HingeId hinge, double f_z, LoadSide side);

/// Marks and returns every intact hinge whose tensile stress meets or exceeds
/// its strength. Redistribution is evaluated on the state at entry, so a single
/// call is one pass; cascades unfold over subsequent calls.
std::vector<HingeId> check_hinge_failures(const SensorSpec& spec, SensorState& state,
                                          double f_z, LoadSide side);

}  // namespace memsrel
