#include "ranagent/kernels/kernels.hpp"

#include <cassert>
#include <cstdint>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace ranagent::kernels {

namespace {

inline float row_dot(const float* row, const float* q, std::size_t dim) {
  double acc = 0.0;
  for (std::size_t j = 0; j < dim; ++j) acc += static_cast<double>(row[j]) * q[j];
  return static_cast<float>(acc);
}

inline bool dominates(double ca, double la, double cb, double lb) {
  return ca >= cb && la <= lb && (ca > cb || la < lb);
}

inline char non_dominated(std::span<const double> c, std::span<const double> l, std::size_t i) {
  for (std::size_t j = 0; j < c.size(); ++j) {
    if (j != i && dominates(c[j], l[j], c[i], l[i])) return 0;
  }
  return 1;
}

}  // namespace

void dot_scores_serial(std::span<const float> matrix, std::size_t dim,
                       std::span<const float> query, std::span<float> out) {
  assert(query.size() == dim && matrix.size() == out.size() * dim);
  for (std::size_t r = 0; r < out.size(); ++r) {
    out[r] = row_dot(matrix.data() + r * dim, query.data(), dim);
  }
}

void dot_scores_parallel(std::span<const float> matrix, std::size_t dim,
                         std::span<const float> query, std::span<float> out) {
  assert(query.size() == dim && matrix.size() == out.size() * dim);
  const auto rows = static_cast<std::int64_t>(out.size());
  const float* m = matrix.data();
  const float* q = query.data();
  float* o = out.data();
#pragma omp parallel for schedule(static)
  for (std::int64_t r = 0; r < rows; ++r) {
    o[r] = row_dot(m + r * static_cast<std::int64_t>(dim), q, dim);
  }
}

std::vector<char> pareto_mask_serial(std::span<const double> coherence,
                                     std::span<const double> latency) {
  assert(coherence.size() == latency.size());
  std::vector<char> mask(coherence.size());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = non_dominated(coherence, latency, i);
  return mask;
}

std::vector<char> pareto_mask_parallel(std::span<const double> coherence,
                                       std::span<const double> latency) {
  assert(coherence.size() == latency.size());
  std::vector<char> mask(coherence.size());
  const auto n = static_cast<std::int64_t>(mask.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::int64_t i = 0; i < n; ++i) {
    mask[static_cast<std::size_t>(i)] =
        non_dominated(coherence, latency, static_cast<std::size_t>(i));
  }
  return mask;
}

int max_threads() {
#if defined(_OPENMP)
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace ranagent::kernels
