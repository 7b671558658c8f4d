#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "e2lvlm/rng.hpp"
#include "e2lvlm/types.hpp"

namespace e2lvlm {

/// Ranking of evidence indices, best first. When scores are present they are
/// aligned with `order`, non-increasing, and ties are broken by the original
/// retrieval index.
struct RankResult {
  std::vector<std::size_t> order;
  std::optional<std::vector<double>> scores;
};

/// Cosine similarity in [-1, 1]; clamped against rounding drift. Zero
/// vectors are rejected rather than mapped to 0 so that upstream embedding
/// bugs surface instead of silently reranking on noise.
inline double cosine(const Embedding& a, const Embedding& b) {
  if (a.dim() != b.dim())
    throw Error(ErrorCode::DimMismatch, "cosine: dims " + std::to_string(a.dim()) + " vs " +
                                            std::to_string(b.dim()));
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    dot += a.values[i] * b.values[i];
    na += a.values[i] * a.values[i];
    nb += b.values[i] * b.values[i];
  }
  if (na == 0.0 || nb == 0.0) throw Error(ErrorCode::ZeroVector, "cosine of a zero vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

/// Sorts items by descending cosine(query, item); ties keep retrieval order.
inline RankResult rerank_cosine(const Embedding& query, const std::vector<Embedding>& items) {
  if (items.empty()) throw Error(ErrorCode::EmptyItems, "rerank_cosine: no items");
  std::vector<double> sims;
  sims.reserve(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    try {
      sims.push_back(cosine(query, items[i]));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ZeroVector)
        throw Error(ErrorCode::ZeroVector, "item " + std::to_string(i) + " is a zero vector");
      throw;
    }
  }
  RankResult r;
  r.order.resize(items.size());
  std::iota(r.order.begin(), r.order.end(), std::size_t{0});
  std::sort(r.order.begin(), r.order.end(), [&](std::size_t i, std::size_t j) {
    if (sims[i] != sims[j]) return sims[i] > sims[j];
    return i < j;
  });
  std::vector<double> ordered;
  ordered.reserve(items.size());
  for (std::size_t i : r.order) ordered.push_back(sims[i]);
  r.scores = std::move(ordered);
  return r;
}

/// Seeded permutation of 0..n-1, reproducible across platforms (see kRngId).
inline RankResult rerank_random(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw Error(ErrorCode::EmptyItems, "rerank_random: n must be >= 1");
  RankResult r;
  r.order.resize(n);
  std::iota(r.order.begin(), r.order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(r.order);
  return r;
}

inline std::vector<std::size_t> top_k(const RankResult& result, std::size_t k) {
  if (k < 1 || k > result.order.size())
    throw Error(ErrorCode::KOutOfRange, "k=" + std::to_string(k) + " with n=" +
                                            std::to_string(result.order.size()));
  return {result.order.begin(), result.order.begin() + static_cast<std::ptrdiff_t>(k)};
}

}  // namespace e2lvlm
