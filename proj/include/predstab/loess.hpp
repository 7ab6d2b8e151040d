#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "predstab/errors.hpp"

namespace predstab {

// Locally weighted linear regression (degree 1) with tricube weights over
// the span-fraction nearest neighbours. Evaluation points are clamped to
// the observed x range.
class LoessFit {
 public:
  LoessFit(std::vector<double> x, std::vector<double> y, double span)
      : span_(span) {
    if (x.size() != y.size()) throw InvalidInput("loess: x/y length mismatch");
    if (x.size() < 5) throw InvalidInput("loess: need at least 5 points");
    if (!(span > 0.0 && span <= 1.0))
      throw InvalidInput("loess: span must be in (0, 1]");
    for (const double v : x)
      if (!std::isfinite(v)) throw InvalidInput("loess: non-finite x value");

    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    x_.reserve(x.size());
    y_.reserve(y.size());
    for (const std::size_t i : order) {
      x_.push_back(x[i]);
      y_.push_back(y[i]);
    }
    window_ = static_cast<std::size_t>(
        std::ceil(span * static_cast<double>(x_.size())));
    window_ = std::min(window_, x_.size());
    if (window_ < 3)
      throw InvalidInput("loess: span too small, window has fewer than 3 points");
  }

  double operator()(double x0) const {
    x0 = std::clamp(x0, x_.front(), x_.back());

    // contiguous window of the `window_` nearest x's
    std::size_t lo = static_cast<std::size_t>(
        std::lower_bound(x_.begin(), x_.end(), x0) - x_.begin());
    std::size_t hi = lo;  // [lo, hi) grows to window_ points
    while (hi - lo < window_) {
      const bool can_left = lo > 0;
      const bool can_right = hi < x_.size();
      if (can_left && (!can_right || x0 - x_[lo - 1] <= x_[hi] - x0))
        --lo;
      else if (can_right)
        ++hi;
      else
        break;
    }

    double dmax = std::max(x0 - x_[lo], x_[hi - 1] - x0);
    if (dmax <= 0.0) {
      // every window point sits exactly at x0
      double s = 0.0;
      for (std::size_t i = lo; i < hi; ++i) s += y_[i];
      return s / static_cast<double>(hi - lo);
    }

    // weighted linear fit centred at x0; fitted value is the intercept
    double sw = 0.0, swx = 0.0, swxx = 0.0, swy = 0.0, swxy = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      const double u = std::fabs(x_[i] - x0) / dmax;
      if (u >= 1.0) continue;
      const double t = 1.0 - u * u * u;
      const double w = t * t * t;
      const double dx = x_[i] - x0;
      sw += w;
      swx += w * dx;
      swxx += w * dx * dx;
      swy += w * y_[i];
      swxy += w * dx * y_[i];
    }
    const double det = sw * swxx - swx * swx;
    if (std::fabs(det) < 1e-14 * std::max(1.0, sw * swxx)) {
      // degenerate spread in the window; fall back to the weighted mean
      return sw > 0.0 ? swy / sw : y_[lo];
    }
    return (swxx * swy - swx * swxy) / det;
  }

  double x_min() const { return x_.front(); }
  double x_max() const { return x_.back(); }
  double span() const { return span_; }

 private:
  std::vector<double> x_, y_;
  std::size_t window_ = 0;
  double span_ = 0.5;
};

inline LoessFit loess_fit(const std::vector<double>& x, const std::vector<double>& y,
                          double span = 0.5) {
  return LoessFit(x, y, span);
}

}  // namespace predstab
