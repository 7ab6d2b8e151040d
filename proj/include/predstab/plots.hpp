#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "predstab/curves.hpp"
#include "predstab/rng.hpp"
#include "predstab/simstudy.hpp"
#include "predstab/stability.hpp"
#include "predstab/svg.hpp"

namespace predstab {
namespace plots {

inline std::string num_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

// Margins, linear data-to-pixel mapping, axis frame with ticks.
class Frame {
 public:
  Frame(std::string title, std::string xlabel, std::string ylabel, double xmin,
        double xmax, double ymin, double ymax, double width = 640, double height = 480)
      : title_(std::move(title)),
        xlabel_(std::move(xlabel)),
        ylabel_(std::move(ylabel)),
        xmin_(xmin),
        xmax_(xmax),
        ymin_(ymin),
        ymax_(ymax),
        width_(width),
        height_(height) {
    if (xmax_ <= xmin_) xmax_ = xmin_ + 1.0;
    if (ymax_ <= ymin_) ymax_ = ymin_ + 1.0;
  }

  double width() const { return width_; }
  double height() const { return height_; }

  double X(double x) const {
    return left_ + (x - xmin_) / (xmax_ - xmin_) * (width_ - left_ - right_);
  }
  double Y(double y) const {
    return height_ - bottom_ -
           (y - ymin_) / (ymax_ - ymin_) * (height_ - top_ - bottom_);
  }

  static std::vector<double> ticks(double lo, double hi) {
    const double range = hi - lo;
    const double raw = range / 4.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (const double m : {1.0, 2.0, 2.5, 5.0, 10.0}) {
      if (mag * m >= raw) {
        step = mag * m;
        break;
      }
    }
    std::vector<double> t;
    const double start = std::ceil(lo / step - 1e-9) * step;
    for (double v = start; v <= hi + 1e-9; v += step) {
      const double vv = std::fabs(v) < step * 1e-9 ? 0.0 : v;
      t.push_back(vv);
    }
    return t;
  }

  void draw(svg::Document& doc) const {
    svg::Style axis{.stroke = "#333333", .stroke_width = 1.0};
    doc.line(left_, height_ - bottom_, width_ - right_, height_ - bottom_, axis);
    doc.line(left_, top_, left_, height_ - bottom_, axis);
    for (const double t : ticks(xmin_, xmax_)) {
      const double x = X(t);
      doc.line(x, height_ - bottom_, x, height_ - bottom_ + 4, axis);
      doc.text(x, height_ - bottom_ + 16, num_label(t), 10, "middle");
    }
    for (const double t : ticks(ymin_, ymax_)) {
      const double y = Y(t);
      doc.line(left_ - 4, y, left_, y, axis);
      doc.text(left_ - 6, y + 3, num_label(t), 10, "end");
    }
    doc.text(width_ / 2.0, height_ - 6, xlabel_, 12, "middle");
    doc.text(14, height_ / 2.0, ylabel_, 12, "middle", -90.0);
    doc.text(width_ / 2.0, 14, title_, 13, "middle");
  }

 private:
  std::string title_, xlabel_, ylabel_;
  double xmin_, xmax_, ymin_, ymax_;
  double width_, height_;
  double left_ = 55, right_ = 15, top_ = 24, bottom_ = 42;
};

inline void draw_curve(svg::Document& doc, const Frame& fr, const Curve& c,
                       const svg::Style& st) {
  std::vector<std::pair<double, double>> pts;
  pts.reserve(c.x.size());
  for (std::size_t i = 0; i < c.x.size(); ++i)
    pts.emplace_back(fr.X(c.x[i]), fr.Y(c.y[i]));
  if (pts.size() == 1) {
    doc.circle(pts[0].first, pts[0].second, 2.0, {.stroke = "none", .fill = st.stroke});
    return;
  }
  doc.polyline(pts, st);
}

// Scatter of every bootstrap prediction against the original prediction,
// identity line, smoothed percentile band. Above max_points the point cloud
// is subsampled with a seeded stream (the full data still lands in the CSVs).
inline std::string render_prediction_instability(const BootstrapPredictions& bp,
                                                 const Curve& band_lower,
                                                 const Curve& band_upper,
                                                 std::uint64_t subsample_seed = 1,
                                                 std::size_t max_points = 200000) {
  Frame fr("Prediction instability", "Original model risk", "Bootstrap model risk",
           0, 1, 0, 1);
  svg::Document doc(fr.width(), fr.height());
  fr.draw(doc);

  const std::size_t total = bp.n * bp.B;
  svg::Style pt{.stroke = "none", .fill = "#1f77b4", .opacity = 0.25};
  if (total <= max_points) {
    for (std::size_t b = 0; b < bp.B; ++b)
      for (std::size_t i = 0; i < bp.n; ++i)
        doc.circle(fr.X(bp.original[i]), fr.Y(bp.at(i, b)), 1.2, pt);
  } else {
    Rng rng(derive_seed(subsample_seed, 0x9D07));
    for (std::size_t k = 0; k < max_points; ++k) {
      const std::size_t flat = static_cast<std::size_t>(rng.below(total));
      const std::size_t b = flat / bp.n;
      const std::size_t i = flat % bp.n;
      doc.circle(fr.X(bp.original[i]), fr.Y(bp.at(i, b)), 1.2, pt);
    }
  }

  doc.line(fr.X(0), fr.Y(0), fr.X(1), fr.Y(1),
           {.stroke = "#333333", .stroke_width = 1.0, .css_class = "identity-line"});
  draw_curve(doc, fr, band_lower,
             {.stroke = "#d62728", .stroke_width = 1.5, .css_class = "band-lower"});
  draw_curve(doc, fr, band_upper,
             {.stroke = "#d62728", .stroke_width = 1.5, .css_class = "band-upper"});
  return doc.str();
}

// Bootstrap calibration curves (a seeded random sample of max_curves when
// there are more) under the original model's curve and the diagonal.
inline std::string render_calibration_instability(const Curve& original,
                                                  const std::vector<Curve>& bootstrap,
                                                  int max_curves = 200,
                                                  std::uint64_t seed = 1) {
  Frame fr("Calibration instability", "Estimated risk", "Observed outcome rate", 0, 1,
           0, 1);
  svg::Document doc(fr.width(), fr.height());
  fr.draw(doc);
  doc.line(fr.X(0), fr.Y(0), fr.X(1), fr.Y(1),
           {.stroke = "#999999", .stroke_width = 1.0, .css_class = "identity-line"});

  std::vector<std::size_t> pick(bootstrap.size());
  for (std::size_t i = 0; i < pick.size(); ++i) pick[i] = i;
  if (max_curves > 0 && bootstrap.size() > static_cast<std::size_t>(max_curves)) {
    Rng rng(derive_seed(seed, 0xCA11));
    rng.shuffle(pick);
    pick.resize(static_cast<std::size_t>(max_curves));
    std::sort(pick.begin(), pick.end());
  }
  for (const std::size_t i : pick)
    draw_curve(doc, fr, bootstrap[i],
               {.stroke = "#1f77b4", .stroke_width = 0.8, .opacity = 0.35,
                .css_class = "curve"});
  draw_curve(doc, fr, original,
             {.stroke = "#d62728", .stroke_width = 2.0, .css_class = "curve"});
  return doc.str();
}

inline std::string render_mape_instability(const std::vector<double>& original,
                                           const std::vector<double>& mape) {
  double ymax = 0.0;
  for (const double m : mape) ymax = std::max(ymax, m);
  ymax = std::max(ymax * 1.05, 0.01);
  Frame fr("MAPE instability", "Original model risk", "Individual MAPE", 0, 1, 0, ymax);
  svg::Document doc(fr.width(), fr.height());
  fr.draw(doc);
  svg::Style pt{.stroke = "none", .fill = "#1f77b4", .opacity = 0.5};
  for (std::size_t i = 0; i < original.size(); ++i)
    doc.circle(fr.X(original[i]), fr.Y(mape[i]), 1.5, pt);
  return doc.str();
}

inline std::string render_classification_instability(
    const std::vector<double>& original, const std::vector<double>& index,
    double threshold) {
  Frame fr("Classification instability", "Original model risk",
           "Classification instability index", 0, 1, 0, 1);
  svg::Document doc(fr.width(), fr.height());
  fr.draw(doc);
  doc.line(fr.X(threshold), fr.Y(0), fr.X(threshold), fr.Y(1),
           {.stroke = "#999999", .stroke_width = 1.0, .css_class = "threshold-line"});
  svg::Style pt{.stroke = "none", .fill = "#1f77b4", .opacity = 0.5};
  for (std::size_t i = 0; i < original.size(); ++i)
    doc.circle(fr.X(original[i]), fr.Y(index[i]), 1.5, pt);
  return doc.str();
}

inline std::string render_decision_instability(const DecisionCurves& original,
                                               const std::vector<DecisionCurves>& boot) {
  double ymin = 0.0, ymax = 0.05;
  auto widen = [&](const std::vector<double>& v) {
    for (const double nb : v) {
      ymin = std::min(ymin, nb);
      ymax = std::max(ymax, nb);
    }
  };
  widen(original.model);
  widen(original.treat_all);
  for (const auto& dc : boot) widen(dc.model);
  ymin = std::max(ymin, -0.25);  // clip hopeless treat-all tails for readability
  const double tmin = original.thresholds.front(), tmax = original.thresholds.back();
  Frame fr("Decision curve instability", "Risk threshold", "Net benefit", tmin, tmax,
           ymin * 1.05 - 0.01, ymax * 1.05 + 0.01);
  svg::Document doc(fr.width(), fr.height());
  fr.draw(doc);

  auto as_curve = [](const std::vector<double>& t, const std::vector<double>& nb) {
    Curve c;
    c.x = t;
    c.y = nb;
    c.kind = CurveKind::decision;
    return c;
  };
  for (const auto& dc : boot)
    draw_curve(doc, fr, as_curve(dc.thresholds, dc.model),
               {.stroke = "#1f77b4", .stroke_width = 0.8, .opacity = 0.3,
                .css_class = "curve"});
  draw_curve(doc, fr, as_curve(original.thresholds, original.treat_all),
             {.stroke = "#2ca02c", .stroke_width = 1.3, .css_class = "treat-all"});
  draw_curve(doc, fr, as_curve(original.thresholds, original.treat_none),
             {.stroke = "#7f7f7f", .stroke_width = 1.3, .css_class = "treat-none"});
  draw_curve(doc, fr, as_curve(original.thresholds, original.model),
             {.stroke = "#d62728", .stroke_width = 2.0, .css_class = "curve"});
  return doc.str();
}

inline std::string render_c_stat_histogram(const std::vector<double>& bootstrap_c,
                                           double original_c) {
  double lo = original_c, hi = original_c;
  for (const double c : bootstrap_c) {
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  const double pad = std::max(0.005, (hi - lo) * 0.05);
  lo -= pad;
  hi += pad;
  const int bins = 20;
  std::vector<int> count(bins, 0);
  for (const double c : bootstrap_c) {
    int k = static_cast<int>((c - lo) / (hi - lo) * bins);
    k = std::clamp(k, 0, bins - 1);
    ++count[static_cast<std::size_t>(k)];
  }
  const int peak = *std::max_element(count.begin(), count.end());
  Frame fr("C-statistic instability", "C-statistic of bootstrap models", "Count", lo,
           hi, 0, std::max(peak, 1) * 1.1);
  svg::Document doc(fr.width(), fr.height());
  fr.draw(doc);
  for (int k = 0; k < bins; ++k) {
    const double x0 = lo + (hi - lo) * k / bins;
    const double x1 = lo + (hi - lo) * (k + 1) / bins;
    const double h = count[static_cast<std::size_t>(k)];
    if (h <= 0) continue;
    doc.rect(fr.X(x0), fr.Y(h), fr.X(x1) - fr.X(x0) - 0.5, fr.Y(0) - fr.Y(h),
             {.stroke = "none", .fill = "#1f77b4", .css_class = "bar"});
  }
  doc.line(fr.X(original_c), fr.Y(0), fr.X(original_c), fr.Y(peak * 1.05),
           {.stroke = "#d62728", .stroke_width = 2.0, .css_class = "original-line"});
  return doc.str();
}

// --- simulation figures -----------------------------------------------

// Level 1: per sample size, every replicate's mean estimated risk plus the
// 2.5-97.5 percentile segment.
inline std::string render_sim_level1(const SimResult& res,
                                     const std::vector<CellSummary>& summaries) {
  const double k = static_cast<double>(res.cells.size());
  Frame fr("Stability of the mean estimated risk", "Development sample size",
           "Mean estimated risk", -0.5, k - 0.5, 0, 1);
  svg::Document doc(fr.width(), fr.height());
  fr.draw(doc);
  svg::Style pt{.stroke = "none", .fill = "#1f77b4", .opacity = 0.35};
  for (std::size_t c = 0; c < res.cells.size(); ++c) {
    const double x = static_cast<double>(c);
    for (const double m : res.cells[c].mean_risk)
      doc.circle(fr.X(x), fr.Y(m), 1.5, pt);
    doc.line(fr.X(x) + 8, fr.Y(summaries[c].mean_risk_lo), fr.X(x) + 8,
             fr.Y(summaries[c].mean_risk_hi),
             {.stroke = "#d62728", .stroke_width = 2.0, .css_class = "range"});
    doc.text(fr.X(x), fr.Y(0) + 28, num_label(static_cast<double>(res.cells[c].n_dev)),
             10, "middle");
  }
  return doc.str();
}

// Level 2 payloads: calibration spaghetti for one cell, and the MAPE spread.
inline std::string render_sim_level2_curves(const SimResult& res, std::size_t cell_idx,
                                            int max_curves = 200,
                                            std::uint64_t seed = 1) {
  const auto& cell = res.cells[cell_idx];
  Frame fr("Calibration instability, n=" + std::to_string(cell.n_dev),
           "Estimated risk", "Observed outcome rate", 0, 1, 0, 1);
  svg::Document doc(fr.width(), fr.height());
  fr.draw(doc);
  doc.line(fr.X(0), fr.Y(0), fr.X(1), fr.Y(1),
           {.stroke = "#999999", .stroke_width = 1.0, .css_class = "identity-line"});
  std::vector<std::size_t> pick(cell.calibration.size());
  for (std::size_t i = 0; i < pick.size(); ++i) pick[i] = i;
  if (max_curves > 0 && pick.size() > static_cast<std::size_t>(max_curves)) {
    Rng rng(derive_seed(seed, 0x51D2, cell.n_dev));
    rng.shuffle(pick);
    pick.resize(static_cast<std::size_t>(max_curves));
    std::sort(pick.begin(), pick.end());
  }
  for (const std::size_t i : pick)
    draw_curve(doc, fr, cell.calibration[i],
               {.stroke = "#1f77b4", .stroke_width = 0.8, .opacity = 0.25,
                .css_class = "curve"});
  return doc.str();
}

inline std::string render_sim_level2_mape(const SimResult& res,
                                          const std::vector<CellSummary>& summaries) {
  double ymax = 0.0;
  for (const auto& cell : res.cells)
    for (const double m : cell.mape_truth) ymax = std::max(ymax, m);
  const double k = static_cast<double>(res.cells.size());
  Frame fr("MAPE against true risks", "Development sample size", "MAPE", -0.5, k - 0.5,
           0, std::max(0.01, ymax * 1.05));
  svg::Document doc(fr.width(), fr.height());
  fr.draw(doc);
  svg::Style pt{.stroke = "none", .fill = "#1f77b4", .opacity = 0.35};
  for (std::size_t c = 0; c < res.cells.size(); ++c) {
    const double x = static_cast<double>(c);
    for (const double m : res.cells[c].mape_truth) doc.circle(fr.X(x), fr.Y(m), 1.5, pt);
    doc.line(fr.X(x) - 10, fr.Y(summaries[c].mape_median), fr.X(x) + 10,
             fr.Y(summaries[c].mape_median),
             {.stroke = "#d62728", .stroke_width = 2.0, .css_class = "median"});
    doc.text(fr.X(x), fr.Y(0) + 28, num_label(static_cast<double>(res.cells[c].n_dev)),
             10, "middle");
  }
  return doc.str();
}

inline std::string render_sim_level3(const SimResult& res,
                                     const std::vector<CellSummary>& summaries) {
  const double k = static_cast<double>(res.cells.size());
  Frame fr("Stability of the subgroup mean risk", "Development sample size",
           "Subgroup mean estimated risk", -0.5, k - 0.5, 0, 1);
  svg::Document doc(fr.width(), fr.height());
  fr.draw(doc);
  svg::Style pt{.stroke = "none", .fill = "#1f77b4", .opacity = 0.35};
  for (std::size_t c = 0; c < res.cells.size(); ++c) {
    const double x = static_cast<double>(c);
    for (const double m : res.cells[c].subgroup_mean_risk)
      doc.circle(fr.X(x), fr.Y(m), 1.5, pt);
    doc.line(fr.X(x) + 8, fr.Y(summaries[c].subgroup_lo), fr.X(x) + 8,
             fr.Y(summaries[c].subgroup_hi),
             {.stroke = "#d62728", .stroke_width = 2.0, .css_class = "range"});
    doc.text(fr.X(x), fr.Y(0) + 28, num_label(static_cast<double>(res.cells[c].n_dev)),
             10, "middle");
  }
  return doc.str();
}

// Level 4: estimated-risk spread per tracked individual for one sample size.
inline std::string render_sim_level4(const SimResult& res,
                                     const std::vector<CellSummary>& summaries,
                                     std::size_t cell_idx) {
  const auto& cell = res.cells[cell_idx];
  const auto& sum = summaries[cell_idx];
  Frame fr("Individual-level instability, n=" + std::to_string(cell.n_dev),
           "True risk of tracked individual", "Estimated risk", 0, 1, 0, 1);
  svg::Document doc(fr.width(), fr.height());
  fr.draw(doc);
  svg::Style pt{.stroke = "none", .fill = "#1f77b4", .opacity = 0.25};
  for (std::size_t t = 0; t < sum.tracked.size(); ++t) {
    const double x = sum.tracked[t].true_risk;
    for (const auto& row : cell.tracked) doc.circle(fr.X(x), fr.Y(row[t]), 1.3, pt);
    doc.line(fr.X(x) + 6, fr.Y(sum.tracked[t].min), fr.X(x) + 6, fr.Y(sum.tracked[t].max),
             {.stroke = "#7f7f7f", .stroke_width = 1.0, .css_class = "minmax"});
    doc.line(fr.X(x) + 9, fr.Y(sum.tracked[t].lo95), fr.X(x) + 9,
             fr.Y(sum.tracked[t].hi95),
             {.stroke = "#d62728", .stroke_width = 2.0, .css_class = "range"});
  }
  doc.line(fr.X(0), fr.Y(0), fr.X(1), fr.Y(1),
           {.stroke = "#999999", .stroke_width = 1.0, .css_class = "identity-line"});
  return doc.str();
}

}  // namespace plots
}  // namespace predstab
