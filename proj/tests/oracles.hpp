#pragma once

// Test-only reference computations. They share no code path with the
// library routines they check.

#include <cstdint>
#include <limits>
#include <vector>

#include "musener/tagger.hpp"

namespace musener::testing {

// Every label sequence of length n, in lexicographic label order.
inline std::vector<std::vector<Label>> all_sequences(std::size_t n) {
  std::vector<std::vector<Label>> out;
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= kNumLabels;
  for (std::size_t code = 0; code < total; ++code) {
    std::vector<Label> seq(n);
    std::size_t c = code;
    for (std::size_t i = n; i-- > 0;) {
      seq[i] = kAllLabels[c % kNumLabels];
      c /= kNumLabels;
    }
    out.push_back(std::move(seq));
  }
  return out;
}

// Direct weight lookups, independent of sequence_score.
inline double brute_score(const LinearModel& model, const std::vector<FeatureVector>& tokens,
                          const std::vector<Label>& labels) {
  double s = 0.0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    for (const auto& f : tokens[i].features) s += model.emission(f, labels[i]);
    s += i == 0 ? model.transition_from_bos(labels[0]) : model.transition(labels[i - 1], labels[i]);
  }
  return s;
}

inline double brute_best_score(const LinearModel& model, const std::vector<FeatureVector>& tokens) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& seq : all_sequences(tokens.size()))
    best = std::max(best, brute_score(model, tokens, seq));
  return best;
}

struct RankSumEnumeration {
  std::size_t assignments = 0;
  std::size_t at_or_below = 0;  // assignments with W <= observed
  std::size_t at_or_above = 0;
};

// Enumerates every way of choosing which |a| pooled observations belong to
// sample A; average ranks for ties, compared in doubled integer form.
inline RankSumEnumeration enumerate_rank_sums(const std::vector<double>& a,
                                              const std::vector<double>& b) {
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  const std::size_t n = pooled.size();
  std::vector<std::int64_t> rank2(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::int64_t less = 0, equal = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (pooled[j] < pooled[i]) ++less;
      if (pooled[j] == pooled[i]) ++equal;
    }
    rank2[i] = 2 * less + equal + 1;  // 2 * (less + (equal + 1) / 2)
  }
  std::int64_t observed = 0;
  for (std::size_t i = 0; i < a.size(); ++i) observed += rank2[i];

  RankSumEnumeration out;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != a.size()) continue;
    std::int64_t s = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1u << i)) s += rank2[i];
    ++out.assignments;
    if (s <= observed) ++out.at_or_below;
    if (s >= observed) ++out.at_or_above;
  }
  return out;
}

}  // namespace musener::testing
