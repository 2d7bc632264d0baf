#include "ranagent/index/embedding.hpp"

#include <cmath>
#include <cstdint>

#include "ranagent/common/json_util.hpp"
#include "ranagent/common/text.hpp"

namespace ranagent::index {

void embed_into(std::string_view text, std::span<float> out) {
  const std::size_t dim = out.size();
  std::vector<double> acc(dim, 0.0);
  for (const auto& tok : tokenize(text)) acc[fnv1a(tok) % dim] += 1.0;
  double norm = 0.0;
  for (double v : acc) norm += v * v;
  if (norm == 0.0) {
    for (auto& v : out) v = 0.0f;
    out[0] = 1.0f;
    return;
  }
  norm = std::sqrt(norm);
  for (std::size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(acc[i] / norm);
}

std::vector<float> embed(std::string_view text, std::size_t dim) {
  std::vector<float> v(dim);
  embed_into(text, v);
  return v;
}

std::vector<float> embed_batch_serial(std::span<const std::string> texts, std::size_t dim) {
  std::vector<float> m(texts.size() * dim);
  for (std::size_t i = 0; i < texts.size(); ++i)
    embed_into(texts[i], std::span<float>(m).subspan(i * dim, dim));
  return m;
}

std::vector<float> embed_batch_parallel(std::span<const std::string> texts, std::size_t dim) {
  std::vector<float> m(texts.size() * dim);
  const auto n = static_cast<std::int64_t>(texts.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto row = static_cast<std::size_t>(i);
    embed_into(texts[row], std::span<float>(m).subspan(row * dim, dim));
  }
  return m;
}

float cosine(std::span<const float> a, std::span<const float> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0f;
  return static_cast<float>(dot / std::sqrt(na * nb));
}

}  // namespace ranagent::index
