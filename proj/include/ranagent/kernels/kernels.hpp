#pragma once

// Data-parallel inner loops used by the context index and the evaluation
// harness. Each kernel has a serial reference; the parallel variant must
// produce bit-identical output (per-row work is independent and computed
// in the same order).

#include <cstddef>
#include <span>
#include <vector>

namespace ranagent::kernels {

/// out[r] = <matrix row r, query>, rows stored contiguously with `dim` columns.
void dot_scores_serial(std::span<const float> matrix, std::size_t dim,
                       std::span<const float> query, std::span<float> out);
void dot_scores_parallel(std::span<const float> matrix, std::size_t dim,
                         std::span<const float> query, std::span<float> out);

/// mask[i] != 0 iff point i is not dominated, where A dominates B iff
/// coh_A >= coh_B and lat_A <= lat_B with at least one strict.
std::vector<char> pareto_mask_serial(std::span<const double> coherence,
                                     std::span<const double> latency);
std::vector<char> pareto_mask_parallel(std::span<const double> coherence,
                                       std::span<const double> latency);

/// Row count above which callers should prefer the parallel variants.
inline constexpr std::size_t kParallelThreshold = 2048;

int max_threads();

}  // namespace ranagent::kernels
