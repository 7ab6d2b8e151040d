#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "predstab/errors.hpp"
#include "predstab/loess.hpp"

namespace predstab {

enum class CurveKind { calibration, decision, band };

struct Curve {
  std::vector<double> x;  // strictly increasing
  std::vector<double> y;
  CurveKind kind = CurveKind::calibration;
  double bandwidth = 0.0;  // loess span when applicable
};

// Loess of the 0/1 outcome on estimated risk, evaluated on an equally
// spaced grid over the observed risk range and clamped to [0,1].
inline Curve calibration_curve(const std::vector<double>& risks,
                               const std::vector<int>& outcomes, double span = 0.5,
                               std::size_t grid_points = 100) {
  if (risks.size() != outcomes.size())
    throw InvalidInput("calibration curve: length mismatch");
  if (grid_points < 2) throw InvalidInput("calibration curve: grid too small");
  const auto [mn_it, mx_it] = std::minmax_element(risks.begin(), risks.end());
  const double mn = *mn_it, mx = *mx_it;
  if (!(mx > mn))
    throw InvalidInput("calibration curve: risks are constant, nothing to smooth over");

  std::vector<double> y(outcomes.size());
  for (std::size_t i = 0; i < outcomes.size(); ++i) y[i] = outcomes[i];
  const LoessFit fit(risks, y, span);

  Curve c;
  c.kind = CurveKind::calibration;
  c.bandwidth = span;
  c.x.resize(grid_points);
  c.y.resize(grid_points);
  const double step = (mx - mn) / static_cast<double>(grid_points - 1);
  for (std::size_t g = 0; g < grid_points; ++g) {
    const double xg = g + 1 == grid_points ? mx : mn + step * static_cast<double>(g);
    c.x[g] = xg;
    c.y[g] = std::clamp(fit(xg), 0.0, 1.0);
  }
  return c;
}

// Calibration payload that tolerates constant risk vectors (a heavily
// penalized or intercept-only model can estimate one risk for everyone):
// degenerates to the single point (risk, event rate) instead of failing.
inline Curve calibration_curve_or_point(const std::vector<double>& risks,
                                        const std::vector<int>& outcomes,
                                        double span = 0.5,
                                        std::size_t grid_points = 100) {
  const auto [mn, mx] = std::minmax_element(risks.begin(), risks.end());
  if (!(*mx - *mn > 1e-12)) {
    Curve c;
    c.kind = CurveKind::calibration;
    c.bandwidth = span;
    double rate = 0.0;
    for (const int y : outcomes) rate += y;
    c.x = {*mn};
    c.y = {rate / static_cast<double>(outcomes.size())};
    return c;
  }
  return calibration_curve(risks, outcomes, span, grid_points);
}

// Net benefit of treating at risk >= t:
//   NB(t) = TP/n - (FP/n) * t/(1-t).
inline double net_benefit(const std::vector<double>& risks,
                          const std::vector<int>& outcomes, double t) {
  if (!(t > 0.0 && t < 1.0))
    throw InvalidInput("net benefit: threshold must be in (0,1)");
  if (risks.size() != outcomes.size())
    throw InvalidInput("net benefit: length mismatch");
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < risks.size(); ++i) {
    if (risks[i] >= t) {
      if (outcomes[i] == 1)
        ++tp;
      else
        ++fp;
    }
  }
  const double n = static_cast<double>(risks.size());
  return static_cast<double>(tp) / n -
         (static_cast<double>(fp) / n) * t / (1.0 - t);
}

// Reference policies: treat everyone / treat no one.
inline double treat_all_net_benefit(double prevalence, double t) {
  return prevalence - (1.0 - prevalence) * t / (1.0 - t);
}
inline constexpr double treat_none_net_benefit() { return 0.0; }

inline std::vector<double> default_decision_grid() {
  std::vector<double> g;
  for (int k = 1; k <= 50; ++k) g.push_back(static_cast<double>(k) / 100.0);
  return g;
}

struct DecisionCurves {
  std::vector<double> thresholds;
  std::vector<double> model;
  std::vector<double> treat_all;
  std::vector<double> treat_none;
};

inline DecisionCurves decision_curve(const std::vector<double>& risks,
                                     const std::vector<int>& outcomes,
                                     const std::vector<double>& thresholds) {
  for (std::size_t k = 0; k < thresholds.size(); ++k) {
    if (!(thresholds[k] > 0.0 && thresholds[k] < 1.0))
      throw InvalidInput("decision curve: thresholds must lie strictly in (0,1)");
    if (k > 0 && thresholds[k] <= thresholds[k - 1])
      throw InvalidInput("decision curve: thresholds must be strictly increasing");
  }
  double prevalence = 0.0;
  for (const int y : outcomes) prevalence += y;
  prevalence /= static_cast<double>(outcomes.size());

  DecisionCurves dc;
  dc.thresholds = thresholds;
  for (const double t : thresholds) {
    dc.model.push_back(net_benefit(risks, outcomes, t));
    dc.treat_all.push_back(treat_all_net_benefit(prevalence, t));
    dc.treat_none.push_back(treat_none_net_benefit());
  }
  return dc;
}

inline DecisionCurves decision_curve(const std::vector<double>& risks,
                                     const std::vector<int>& outcomes) {
  return decision_curve(risks, outcomes, default_decision_grid());
}

}  // namespace predstab
