#include "memsrel/curve_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "memsrel/error.hpp"
#include "memsrel/linear_fit.hpp"

namespace memsrel {

void LoadCurve::resize(Eigen::Index n) {
  dz_um.resize(n);
  force_n.resize(n);
  v_off_mv.resize(n, 4);
  valid.assign(std::size_t(n), 1);
}

void LoadCurve::validate() const {
  const Eigen::Index n = size();
  if (force_n.size() != n || v_off_mv.rows() != n || Eigen::Index(valid.size()) != n) {
    throw DomainError("load curve: column lengths differ");
  }
  for (Eigen::Index i = 1; i < n; ++i) {
    if (dz_um[i] < dz_um[i - 1]) {
      throw DomainError("load curve: displacement decreases at sample " + std::to_string(i));
    }
  }
}

void CycleLog::resize(Eigen::Index n) {
  cycle.resize(n);
  force_n.resize(n);
  v_off_mv.resize(n, 4);
}

void CycleLog::validate() const {
  const Eigen::Index n = size();
  if (force_n.size() != n || v_off_mv.rows() != n) {
    throw DomainError("cycle log: column lengths differ");
  }
  if (n < 2) return;
  const double spacing = cycle[1] - cycle[0];
  if (!(spacing > 0.0)) throw DomainError("cycle log: cycle index must increase");
  for (Eigen::Index i = 1; i < n; ++i) {
    if (cycle[i] - cycle[i - 1] != spacing) {
      throw DomainError("cycle log: non-constant record spacing at entry " + std::to_string(i));
    }
  }
}

double extract_stiffness(const LoadCurve& curve, double dz_limit) {
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < curve.size(); ++i) {
    if (curve.dz_um[i] <= dz_limit) rows.push_back(i);
  }
  if (rows.size() < 3) {
    throw InsufficientData("stiffness extraction needs at least 3 samples below the limit");
  }
  const LineFit line = fit_line(curve.dz_um(rows), curve.force_n(rows));
  return line.slope * 1e3;
}

std::vector<FailureEvent> detect_failures(const LoadCurve& curve,
                                          const DetectionThresholds& thresholds) {
  std::vector<FailureEvent> events;
  for (Eigen::Index i = 0; i + 1 < curve.size(); ++i) {
    if (!(curve.dz_um[i + 1] > curve.dz_um[i])) continue;
    const double f = curve.force_n[i];
    const double threshold = std::max(thresholds.drop_fraction * f, thresholds.drop_floor);
    if (curve.force_n[i + 1] < f - threshold) {
      events.push_back({i, f - curve.force_n[i + 1], std::nullopt, std::nullopt});
    }
  }
  return events;
}

FracturePoint fracture_point(const LoadCurve& curve, const DetectionThresholds& thresholds) {
  const auto events = detect_failures(curve, thresholds);
  if (events.empty()) throw NoFailure("curve has no detected hinge failure");
  const Eigen::Index i = events.front().sample_index;
  return {curve.force_n[i], curve.dz_um[i]};
}

std::vector<FailureEvent> classify_failures(const LoadCurve& curve,
                                            std::vector<FailureEvent> events, LoadSide side) {
  const bool any_signal = std::any_of(curve.valid.begin(), curve.valid.end(),
                                      [](std::uint8_t v) { return v != 0; });
  int tensile_events = 0;
  for (FailureEvent& e : events) {
    e.arm.reset();
    e.position.reset();
    if (!any_signal) continue;

    const Eigen::Index pre = e.sample_index;
    const Eigen::Index post = pre + 1;
    if (post < curve.size() && curve.valid[std::size_t(pre)]) {
      if (curve.valid[std::size_t(post)]) {
        const Eigen::Vector4d change =
            (curve.v_off_mv.row(post).cwiseAbs() - curve.v_off_mv.row(pre).cwiseAbs())
                .cwiseAbs()
                .transpose();
        Eigen::Index best = 0;
        change.maxCoeff(&best);
        e.arm = Arm(best);
      } else {
        // Losing every bridge at once means the supply arm broke.
        e.arm = Arm::C;
      }
    }

    if (tensile_events < kHingesPerRing) {
      e.position = tensile_ring(side);
      ++tensile_events;
    } else {
      e.position = other_ring(tensile_ring(side));
    }
  }
  return events;
}

std::vector<BudgetRow> budget_table(const WeibullParams& params, const SensorSpec& spec,
                                    LoadSide side, std::span<const double> probabilities) {
  std::vector<BudgetRow> rows;
  rows.reserve(probabilities.size());
  for (double p : probabilities) {
    const double f = invert_failure_probability(params, p);
    rows.push_back({p, f, displacement_at_force(spec, side, f)});
  }
  return rows;
}

FleetSummary fleet_summary(std::span<const LoadCurve> curves, const SensorSpec& spec,
                           const DetectionThresholds& thresholds) {
  if (curves.empty()) throw InsufficientData("fleet summary needs at least 3 curves");
  FleetSummary summary;
  summary.side = curves.front().side;

  std::vector<double> forces;
  std::vector<double> displacements;
  for (const LoadCurve& curve : curves) {
    if (curve.side != summary.side) throw DomainError("fleet mixes front and back load curves");
    curve.validate();
    auto events = detect_failures(curve, thresholds);
    if (events.empty()) {
      ++summary.curves_without_failure;
      continue;
    }
    const Eigen::Index first = events.front().sample_index;
    forces.push_back(curve.force_n[first]);
    displacements.push_back(curve.dz_um[first]);
    for (const FailureEvent& e : classify_failures(curve, std::move(events), curve.side)) {
      if (!e.position) {
        ++summary.hinge_counts.unknown;
      } else if (*e.position == HingePosition::Inner) {
        ++summary.hinge_counts.inner;
      } else {
        ++summary.hinge_counts.outer;
      }
    }
  }
  if (forces.size() < 3) {
    throw InsufficientData("fleet summary needs at least 3 curves with detected failures, got " +
                           std::to_string(forces.size()));
  }
  summary.curves_analyzed = int(forces.size());

  const Eigen::Map<const Eigen::VectorXd> f(forces.data(), Eigen::Index(forces.size()));
  const Eigen::Map<const Eigen::VectorXd> z(displacements.data(), Eigen::Index(displacements.size()));
  summary.fracture_force = {f.mean(), sample_std(f)};
  summary.fracture_dz = {z.mean(), sample_std(z)};

  try {
    summary.weibull = fit_weibull(forces);
    summary.budget = budget_table(summary.weibull->params, spec, summary.side);
  } catch (const DegenerateData&) {
    summary.weibull.reset();
  }
  return summary;
}

OverloadFactors overload_factors(const FleetSummary& summary, const SensorSpec& spec,
                                 double nominal_dz) {
  const auto row = std::find_if(summary.budget.begin(), summary.budget.end(),
                                [](const BudgetRow& r) { return std::abs(r.probability - 1e-6) < 1e-12; });
  if (row == summary.budget.end()) throw DomainError("budget table lacks the 1 ppm row");
  if (!(nominal_dz > 0.0)) throw DomainError("nominal displacement must be positive");
  return {row->dz_max / nominal_dz,
          row->f_max / force_at_displacement(spec, summary.side, nominal_dz)};
}

namespace {

ChannelStats channel_stats(const Eigen::VectorXd& cycles, const Eigen::VectorXd& values) {
  ChannelStats s;
  s.mean = values.mean();
  s.std = sample_std(values);
  if (s.std == 0.0) {
    s.relative_std_pct = 0.0;
  } else {
    s.relative_std_pct = s.mean != 0.0 ? 100.0 * s.std / std::abs(s.mean)
                                       : std::numeric_limits<double>::infinity();
  }
  const LineFit line = fit_line(cycles, values);
  s.slope_per_cycle = line.slope;
  s.residual_std = line.residual_std;
  return s;
}

}  // namespace

DegradationReport degradation_report(const CycleLog& log, double sigma_multiple) {
  if (log.size() < 10) {
    throw InsufficientData("degradation report needs at least 10 log entries, got " +
                           std::to_string(log.size()));
  }
  log.validate();
  DegradationReport report;
  report.entries = int(log.size());
  report.total_cycles = log.cycle[log.size() - 1];
  report.sigma_multiple = sigma_multiple;
  report.force = channel_stats(log.cycle, log.force_n);
  for (int k = 0; k < 4; ++k) {
    const ChannelStats s = channel_stats(log.cycle, log.v_off_mv.col(k));
    report.offsets[std::size_t(k)] = s;
    const double trend = std::abs(s.slope_per_cycle) * report.total_cycles;
    // Round-off floor so a constant log never trips the test.
    const double floor = 1e-9 * std::max(1.0, std::abs(s.mean));
    if (trend > sigma_multiple * s.residual_std && trend > floor) report.degraded = true;
  }
  return report;
}

}  // namespace memsrel
