#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "musener/corpus.hpp"
#include "musener/matcher.hpp"

namespace musener {

// --- Reconciliation ------------------------------------------------------------------

enum class Granularity { Tweet, Type };

Granularity parse_granularity(std::string_view name);  // "tweet" | "type"

// Model spans take priority. Tweet granularity falls back to the schedule
// spans only when the model found nothing at all; type granularity decides
// per entity type and drops schedule spans overlapping a kept model span.
std::vector<EntitySpan> reconcile(std::span<const EntitySpan> model_spans,
                                  std::span<const EntitySpan> schedule_spans,
                                  Granularity granularity = Granularity::Type);

// Tweet-level form; throws DataError when ids (if both set) or token counts differ.
TaggedTweet reconcile(const TaggedTweet& model, const TaggedTweet& schedule,
                      Granularity granularity = Granularity::Type);

Corpus reconcile_corpus(const Corpus& model, const Corpus& schedule,
                        Granularity granularity = Granularity::Type);

// --- Evaluation -----------------------------------------------------------------------

struct TypeScores {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  double precision() const;
  double recall() const;
  double f1() const;
};

struct EvalReport {
  TypeScores contributor;
  TypeScores work;

  const TypeScores& of(EntityType type) const;
  TypeScores& of(EntityType type);
  // Micro-average: pooled counts.
  TypeScores overall() const;
};

// Exact (type, start, end) span matching. Throws DataError when the corpora
// differ in size, ids, or token counts, or a tweet is unlabeled.
EvalReport evaluate(const Corpus& gold, const Corpus& predicted);

// Span-level form for one tweet, accumulated into `report`.
void accumulate(EvalReport& report, std::span<const EntitySpan> gold,
                std::span<const EntitySpan> predicted);

// --- Threshold sweep ------------------------------------------------------------------

struct SweepRow {
  std::int64_t t = 0;
  double w = 0.0;
  double c = 0.0;
  EvalReport report;
};

struct SweepGrid {
  std::vector<std::int64_t> t = {800, 1000, 1200};
  std::vector<double> w = {0.33, 0.5};
  std::vector<double> c = {0.33, 0.5};
};

// One row per grid point, t outermost, then w, then c.
std::vector<SweepRow> sweep(const Corpus& gold, const Schedule& schedule, const SweepGrid& grid,
                            double alpha, const StopWords& stopwords = default_stopwords(),
                            unsigned jobs = 1);

// --- Wilcoxon rank-sum ------------------------------------------------------------------

enum class WilcoxonMethod { Auto, Exact, Normal };

struct WilcoxonResult {
  double statistic = 0.0;   // rank sum of sample A (average ranks for ties)
  double p_less = 0.0;      // P(W <= observed)
  double p_greater = 0.0;   // P(W >= observed)
  double p_two_sided = 0.0;
  bool exact = false;
};

inline constexpr std::size_t kExactWilcoxonLimit = 12;

// Exact enumeration when n_a + n_b <= 12 (Auto), otherwise normal
// approximation with tie and continuity corrections. Throws DataError on
// an empty sample.
WilcoxonResult wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b,
                                 WilcoxonMethod method = WilcoxonMethod::Auto);

// Null distribution of the doubled rank sum of sample A over all
// C(n_a + n_b, n_a) assignments of the pooled ranks: doubled W -> probability.
std::map<std::int64_t, double> exact_rank_sum_distribution(std::span<const double> a,
                                                           std::span<const double> b);

}  // namespace musener
