#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ranagent::index {

inline constexpr std::size_t kDefaultDim = 256;

/// Feature-hashed bag of lowercased alphanumeric tokens, L2-normalised.
/// Text without tokens maps to the unit basis vector e0.
std::vector<float> embed(std::string_view text, std::size_t dim = kDefaultDim);
void embed_into(std::string_view text, std::span<float> out);

/// Row-major matrix of embeddings, one row per text.
std::vector<float> embed_batch_serial(std::span<const std::string> texts, std::size_t dim);
std::vector<float> embed_batch_parallel(std::span<const std::string> texts, std::size_t dim);

float cosine(std::span<const float> a, std::span<const float> b);

}  // namespace ranagent::index
