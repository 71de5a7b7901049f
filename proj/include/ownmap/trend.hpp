#pragma once

#include <cmath>
#include <span>

#include "error.hpp"

namespace ownmap {

inline constexpr std::size_t min_history_points = 12;

struct TrendEntry {
    double slope = 0.0;               // OLS slope per month, in metric units
    double trend_pct_per_month = 0.0; // slope relative to the series mean, in percent
    double sigma_12m = 0.0;           // sample standard deviation of the series
};

// Least-squares slope of value against month index 0..n-1. Values are
// shifted by the first point, which leaves the slope unchanged and makes a
// constant series come out exactly flat.
inline double ols_slope(std::span<const double> series) {
    const double n = static_cast<double>(series.size());
    if (series.size() < 2) return 0.0;
    const double origin = series[0];
    const double t_mean = (n - 1.0) / 2.0;
    double v_mean = 0.0;
    for (double v : series) v_mean += v - origin;
    v_mean /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t t = 0; t < series.size(); ++t) {
        const double dt = static_cast<double>(t) - t_mean;
        sxy += dt * ((series[t] - origin) - v_mean);
        sxx += dt * dt;
    }
    return sxy / sxx;
}

inline TrendEntry trend_and_vol(std::span<const double> series) {
    if (series.size() < min_history_points) throw InsufficientHistory(series.size());
    TrendEntry e;
    e.slope = ols_slope(series);
    double mean = 0.0;
    for (double v : series) mean += v;
    mean /= static_cast<double>(series.size());
    e.trend_pct_per_month = mean == 0.0 ? 0.0 : e.slope / mean * 100.0;
    double shifted_mean = 0.0;
    for (double v : series) shifted_mean += v - series[0];
    shifted_mean /= static_cast<double>(series.size());
    double ss = 0.0;
    for (double v : series) {
        const double d = (v - series[0]) - shifted_mean;
        ss += d * d;
    }
    e.sigma_12m = std::sqrt(ss / static_cast<double>(series.size() - 1));
    return e;
}

}  // namespace ownmap
