#include "ranagent/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ranagent/common/error.hpp"
#include "ranagent/kernels/kernels.hpp"

namespace ranagent::eval {

std::vector<CdfPoint> tta_cdf(std::vector<double> samples) {
  std::vector<CdfPoint> out;
  if (samples.empty()) return out;
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    // last index of a run of equal values carries the count <= t
    if (i + 1 < samples.size() && samples[i + 1] == samples[i]) continue;
    out.push_back({samples[i], static_cast<double>(i + 1) / n});
  }
  return out;
}

double cdf_at(const std::vector<CdfPoint>& curve, double t) {
  auto it = std::upper_bound(curve.begin(), curve.end(), t, [](double v, const CdfPoint& p) { return v < p.t; });
  return it == curve.begin() ? 0.0 : std::prev(it)->f;
}

json to_json(const ParetoPoint& p) {
  return {{"label", p.label},
          {"coherence", p.coherence},
          {"latency_s", p.latency_s},
          {"deployment", p.deployment},
          {"vram_gb", p.vram_gb ? json(*p.vram_gb) : json(nullptr)}};
}

ParetoPoint pareto_point_from_json(const json& doc) {
  ParetoPoint p;
  p.label = doc.at("label").get<std::string>();
  p.coherence = doc.at("coherence").get<double>();
  p.latency_s = doc.at("latency_s").get<double>();
  p.deployment = doc.value("deployment", std::string("local"));
  if (doc.contains("vram_gb") && doc["vram_gb"].is_number()) p.vram_gb = doc["vram_gb"].get<double>();
  return p;
}

std::vector<char> pareto_mask(const std::vector<ParetoPoint>& points) {
  std::vector<double> coh, lat;
  coh.reserve(points.size());
  lat.reserve(points.size());
  for (const auto& p : points) {
    if (!(p.coherence >= 0.0 && p.coherence <= 5.0))
      throw Error(ErrorCode::kValidation, p.label + ": coherence must be within [0, 5]");
    if (!(p.latency_s > 0.0)) throw Error(ErrorCode::kValidation, p.label + ": latency must be positive");
    coh.push_back(p.coherence);
    lat.push_back(p.latency_s);
  }
  return points.size() >= kernels::kParallelThreshold ? kernels::pareto_mask_parallel(coh, lat)
                                                      : kernels::pareto_mask_serial(coh, lat);
}

std::vector<ParetoPoint> pareto_frontier(const std::vector<ParetoPoint>& points) {
  const auto mask = pareto_mask(points);
  std::vector<ParetoPoint> out;
  for (std::size_t i = 0; i < points.size(); ++i)
    if (mask[i]) out.push_back(points[i]);
  return out;
}

std::optional<double> action_accuracy(const std::vector<bool>& outcomes) {
  if (outcomes.empty()) return std::nullopt;
  const auto ok = std::count(outcomes.begin(), outcomes.end(), true);
  return 100.0 * static_cast<double>(ok) / static_cast<double>(outcomes.size());
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw Error(ErrorCode::kValidation, "quantile of an empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Summary summarize(std::vector<double> values) {
  Summary s;
  s.n = values.size();
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / (n - 1.0));
  }
  s.median = quantile_sorted(values, 0.5);
  s.p95 = quantile_sorted(values, 0.95);
  s.min = values.front();
  s.max = values.back();
  return s;
}

json to_json(const Summary& s) {
  if (s.n == 0) return {{"n", 0}, {"mean", nullptr}, {"std", nullptr}, {"median", nullptr}, {"p95", nullptr}};
  return {{"n", s.n}, {"mean", s.mean}, {"std", s.std}, {"median", s.median},
          {"p95", s.p95}, {"min", s.min},   {"max", s.max}};
}

}  // namespace ranagent::eval
