#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ranagent/common/json_util.hpp"

namespace ranagent::eval {

struct CdfPoint {
  double t = 0.0;
  double f = 0.0;  ///< fraction of samples <= t
};

/// Right-continuous empirical CDF: one point per distinct sample value,
/// ascending. Empty input gives an empty curve.
std::vector<CdfPoint> tta_cdf(std::vector<double> samples);
/// F(t) read off a curve from tta_cdf.
double cdf_at(const std::vector<CdfPoint>& curve, double t);

struct ParetoPoint {
  std::string label;
  double coherence = 0.0;  ///< 0..5
  double latency_s = 0.0;  ///< > 0
  std::string deployment = "local";  ///< local | cloud
  std::optional<double> vram_gb;
};

json to_json(const ParetoPoint& p);
ParetoPoint pareto_point_from_json(const json& doc);

/// Non-dominated points under (max coherence, min latency), input order
/// kept. Throws Error{kValidation} for coherence outside [0,5] or
/// non-positive latency.
std::vector<ParetoPoint> pareto_frontier(const std::vector<ParetoPoint>& points);
std::vector<char> pareto_mask(const std::vector<ParetoPoint>& points);

/// 100 * true / size; nullopt when there are no rows.
std::optional<double> action_accuracy(const std::vector<bool>& outcomes);

struct Summary {
  std::size_t n = 0;
  double mean = 0.0;
  double std = 0.0;  ///< sample standard deviation, 0 for n < 2
  double median = 0.0;
  double p95 = 0.0;  ///< linear interpolation between order statistics
  double min = 0.0;
  double max = 0.0;
};

Summary summarize(std::vector<double> values);
json to_json(const Summary& s);

/// Linear-interpolated quantile, q in [0,1], of non-empty sorted data.
double quantile_sorted(const std::vector<double>& sorted, double q);

}  // namespace ranagent::eval
