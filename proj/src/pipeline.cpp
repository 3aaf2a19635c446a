#include "musener/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>
#include <tuple>

#include "musener/error.hpp"

namespace musener {

Granularity parse_granularity(std::string_view name) {
  if (name == "tweet") return Granularity::Tweet;
  if (name == "type") return Granularity::Type;
  throw DataError("unknown granularity '" + std::string(name) + "' (expected tweet or type)");
}

// --- Reconciliation ----------------------------------------------------------------

namespace {

bool overlaps(const EntitySpan& a, const EntitySpan& b) {
  return a.start < b.end && b.start < a.end;
}

void sort_spans(std::vector<EntitySpan>& spans) {
  std::sort(spans.begin(), spans.end(),
            [](const EntitySpan& a, const EntitySpan& b) { return a.start < b.start; });
}

}  // namespace

std::vector<EntitySpan> reconcile(std::span<const EntitySpan> model_spans,
                                  std::span<const EntitySpan> schedule_spans,
                                  Granularity granularity) {
  std::vector<EntitySpan> out(model_spans.begin(), model_spans.end());
  if (granularity == Granularity::Tweet) {
    if (out.empty()) out.assign(schedule_spans.begin(), schedule_spans.end());
    sort_spans(out);
    return out;
  }
  for (EntityType type : kAllEntityTypes) {
    bool model_has = std::any_of(model_spans.begin(), model_spans.end(),
                                 [type](const EntitySpan& s) { return s.etype == type; });
    if (model_has) continue;
    for (const auto& s : schedule_spans) {
      if (s.etype != type) continue;
      bool clash = std::any_of(model_spans.begin(), model_spans.end(),
                               [&s](const EntitySpan& m) { return overlaps(m, s); });
      if (!clash) out.push_back(s);
    }
  }
  sort_spans(out);
  return out;
}

TaggedTweet reconcile(const TaggedTweet& model, const TaggedTweet& schedule,
                      Granularity granularity) {
  if (!model.id.empty() && !schedule.id.empty() && model.id != schedule.id)
    throw DataError("cannot reconcile tweet '" + model.id + "' with tweet '" + schedule.id + "'");
  if (model.tokens.size() != schedule.tokens.size())
    throw DataError("cannot reconcile tweets with different token counts (id '" + model.id + "')");
  auto merged = reconcile(tweet_spans(model), tweet_spans(schedule), granularity);
  TaggedTweet out = model;
  out.labels = iob_from_spans(merged, out.tokens.size());
  return out;
}

Corpus reconcile_corpus(const Corpus& model, const Corpus& schedule, Granularity granularity) {
  if (model.size() != schedule.size())
    throw DataError("model and schedule predictions differ in tweet count (" +
                    std::to_string(model.size()) + " vs " + std::to_string(schedule.size()) + ")");
  Corpus out;
  out.reserve(model.size());
  for (std::size_t i = 0; i < model.size(); ++i)
    out.push_back(reconcile(model[i], schedule[i], granularity));
  return out;
}

// --- Evaluation --------------------------------------------------------------------

double TypeScores::precision() const { return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / (tp + fp); }

double TypeScores::recall() const { return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / (tp + fn); }

double TypeScores::f1() const {
  double p = precision();
  double r = recall();
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

const TypeScores& EvalReport::of(EntityType type) const {
  return type == EntityType::Contributor ? contributor : work;
}

TypeScores& EvalReport::of(EntityType type) {
  return type == EntityType::Contributor ? contributor : work;
}

TypeScores EvalReport::overall() const {
  return TypeScores{contributor.tp + work.tp, contributor.fp + work.fp, contributor.fn + work.fn};
}

void accumulate(EvalReport& report, std::span<const EntitySpan> gold,
                std::span<const EntitySpan> predicted) {
  auto key = [](const EntitySpan& s) { return std::make_tuple(s.etype, s.start, s.end); };
  std::vector<std::tuple<EntityType, std::size_t, std::size_t>> g;
  std::vector<std::tuple<EntityType, std::size_t, std::size_t>> p;
  for (const auto& s : gold) g.push_back(key(s));
  for (const auto& s : predicted) p.push_back(key(s));
  std::sort(g.begin(), g.end());
  std::sort(p.begin(), p.end());
  std::vector<std::tuple<EntityType, std::size_t, std::size_t>> hit;
  std::set_intersection(g.begin(), g.end(), p.begin(), p.end(), std::back_inserter(hit));
  for (const auto& k : hit) ++report.of(std::get<0>(k)).tp;
  for (const auto& k : p)
    if (!std::binary_search(hit.begin(), hit.end(), k)) ++report.of(std::get<0>(k)).fp;
  for (const auto& k : g)
    if (!std::binary_search(hit.begin(), hit.end(), k)) ++report.of(std::get<0>(k)).fn;
}

EvalReport evaluate(const Corpus& gold, const Corpus& predicted) {
  if (gold.size() != predicted.size())
    throw DataError("gold and predicted corpora differ in tweet count (" +
                    std::to_string(gold.size()) + " vs " + std::to_string(predicted.size()) + ")");
  EvalReport report;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto& g = gold[i];
    const auto& p = predicted[i];
    if (!g.id.empty() && !p.id.empty() && g.id != p.id)
      throw DataError("tweet " + std::to_string(i) + ": gold id '" + g.id + "' vs predicted id '" +
                      p.id + "'");
    if (g.tokens.size() != p.tokens.size())
      throw DataError("tweet " + std::to_string(i) + " ('" + g.id + "'): token counts differ");
    accumulate(report, tweet_spans(g), tweet_spans(p));
  }
  return report;
}

// --- Sweep ---------------------------------------------------------------------------

std::vector<SweepRow> sweep(const Corpus& gold, const Schedule& schedule, const SweepGrid& grid,
                            double alpha, const StopWords& stopwords, unsigned jobs) {
  if (grid.t.empty() || grid.w.empty() || grid.c.empty())
    throw DataError("sweep grid lists must be non-empty");
  for (const auto& tweet : gold)
    if (!tweet.labels) throw DataError("sweep needs a labeled gold corpus");

  std::vector<SweepRow> rows;
  for (auto t : grid.t)
    for (auto w : grid.w)
      for (auto c : grid.c) rows.push_back(SweepRow{t, w, c, {}});
  for (const auto& row : rows) {
    MatchConfig cfg{row.t, row.w, row.c, alpha, stopwords};
    cfg.validate();
  }

  auto work = [&](std::size_t begin, std::size_t step) {
    for (std::size_t i = begin; i < rows.size(); i += step) {
      MatchConfig cfg{rows[i].t, rows[i].w, rows[i].c, alpha, stopwords};
      rows[i].report = evaluate(gold, match_corpus(gold, schedule, cfg));
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(rows.size())));
  if (jobs == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> threads;
    for (unsigned j = 0; j < jobs; ++j) threads.emplace_back(work, j, jobs);
    for (auto& th : threads) th.join();
  }
  return rows;
}

// --- Wilcoxon rank-sum -----------------------------------------------------------------

namespace {

// Doubled average ranks (integers) of the pooled sample, A first.
std::vector<std::int64_t> doubled_ranks(std::span<const double> a, std::span<const double> b,
                                        std::vector<std::size_t>* tie_sizes) {
  const std::size_t n = a.size() + b.size();
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return pooled[x] < pooled[y]; });
  std::vector<std::int64_t> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
    // Ranks i+1 .. j+1 averaged, doubled: (i+1) + (j+1).
    auto r2 = static_cast<std::int64_t>(i + j + 2);
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r2;
    if (tie_sizes) tie_sizes->push_back(j - i + 1);
    i = j + 1;
  }
  return ranks;
}

void require_samples(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw DataError("Wilcoxon rank-sum test needs two non-empty samples");
  for (double x : a)
    if (std::isnan(x)) throw DataError("Wilcoxon sample contains NaN");
  for (double x : b)
    if (std::isnan(x)) throw DataError("Wilcoxon sample contains NaN");
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

std::map<std::int64_t, double> exact_rank_sum_distribution(std::span<const double> a,
                                                           std::span<const double> b) {
  require_samples(a, b);
  auto ranks = doubled_ranks(a, b, nullptr);
  const std::size_t k = a.size();
  // counts[m][s]: number of m-subsets of the ranks seen so far with doubled sum s.
  std::vector<std::map<std::int64_t, double>> counts(k + 1);
  counts[0][0] = 1.0;
  for (std::int64_t r : ranks) {
    for (std::size_t m = k; m-- > 0;) {
      for (const auto& [s, cnt] : counts[m]) counts[m + 1][s + r] += cnt;
    }
  }
  double total = 0.0;
  for (const auto& [s, cnt] : counts[k]) total += cnt;
  std::map<std::int64_t, double> dist;
  for (const auto& [s, cnt] : counts[k]) dist[s] = cnt / total;
  return dist;
}

WilcoxonResult wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b,
                                 WilcoxonMethod method) {
  require_samples(a, b);
  std::vector<std::size_t> ties;
  auto ranks = doubled_ranks(a, b, &ties);
  std::int64_t w2 = 0;
  for (std::size_t i = 0; i < a.size(); ++i) w2 += ranks[i];

  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double n = na + nb;

  WilcoxonResult res;
  res.statistic = static_cast<double>(w2) / 2.0;
  res.exact = method == WilcoxonMethod::Exact ||
              (method == WilcoxonMethod::Auto && a.size() + b.size() <= kExactWilcoxonLimit);

  if (res.exact) {
    auto dist = exact_rank_sum_distribution(a, b);
    for (const auto& [s, p] : dist) {
      if (s <= w2) res.p_less += p;
      if (s >= w2) res.p_greater += p;
    }
    res.p_less = std::min(1.0, res.p_less);
    res.p_greater = std::min(1.0, res.p_greater);
  } else {
    double mean = na * (n + 1.0) / 2.0;
    double tie_term = 0.0;
    for (std::size_t t : ties) {
      double td = static_cast<double>(t);
      tie_term += td * td * td - td;
    }
    double var = na * nb / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if (var <= 0.0) {
      res.p_less = res.p_greater = 1.0;
    } else {
      double sd = std::sqrt(var);
      res.p_less = normal_cdf((res.statistic - mean + 0.5) / sd);
      res.p_greater = 1.0 - normal_cdf((res.statistic - mean - 0.5) / sd);
    }
  }
  res.p_two_sided = std::min(1.0, 2.0 * std::min(res.p_less, res.p_greater));
  return res;
}

}  // namespace musener
