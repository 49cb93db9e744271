#pragma once

// Static SVG figures: a per-system scatter of mean scores under ground-truth
// versus candidate qrels, and metric-versus-sampling-fraction curves. Output
// is byte-deterministic for a given input.

#include <string>
#include <string_view>
#include <vector>

namespace qrelcmp {

enum class PlotStyle { automatic, scatter, sweep };

struct ScatterPoint {
  std::string system;
  double gt_mean = 0.0;
  double cand_mean = 0.0;
};

struct ScatterOverlay {
  std::string system_a;
  std::string system_b;
  bool type_one = false;  ///< false positive, otherwise false negative
};

struct CurvePoint {
  double fraction = 0.0;
  double mean = 0.0;
  double variance = 0.0;
};

struct Curve {
  std::string metric;
  std::vector<CurvePoint> points;
};

std::string scatter_svg(const std::vector<ScatterPoint>& points,
                        const std::vector<ScatterOverlay>& overlays);
std::string sweep_svg(const std::vector<Curve>& curves);

/// Metrics drawn by the sweep plot.
inline constexpr std::string_view kPlottedMetrics[] = {"p1", "r1", "p2", "r2", "bac", "mcc"};

/// Renders a pairs CSV (scatter) or a per-repetition sweep CSV (curves, with
/// mean and variance over repetitions per fraction). Throws ValidationError
/// naming the missing columns when the header matches neither schema.
std::string render_plot(std::string_view csv, PlotStyle style = PlotStyle::automatic);

}  // namespace qrelcmp
