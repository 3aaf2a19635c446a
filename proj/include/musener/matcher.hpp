#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "musener/corpus.hpp"

namespace musener {

using StopWords = std::unordered_set<std::string>;

// the a an in of for and to on at by with from is it his her
const StopWords& default_stopwords();

// Reads one word per line ('#' comments allowed); entries are normalized.
StopWords load_stopwords(const std::string& path);

struct MatchConfig {
  std::int64_t t = 1000;  // half-width of the time window, seconds
  double w = 0.33;        // Musical Work string threshold
  double c = 0.33;        // Contributor string threshold
  double alpha = 0.7;     // weight of the string score in the final score
  StopWords stopwords = default_stopwords();

  // Throws DataError unless t > 0 and w, c, alpha lie in [0,1].
  void validate() const;
};

// Indices of entries with |entry.ts - tweet_ts| <= t, in schedule order.
std::vector<std::size_t> candidate_tracks(const Schedule& schedule, std::int64_t tweet_ts,
                                          std::int64_t t);

// Normalized, deduplicated, non-stopword tokens of an entity name, in
// first-occurrence order.
std::vector<std::string> entity_tokens(std::string_view entity_text, const StopWords& stopwords);

// Fraction of the entity's non-stopword tokens that occur among the tweet
// tokens. Both inputs are already normalized. 0 when no entity token
// survives the stop list.
double string_match_score(std::span<const std::string> entity_tokens,
                          std::span<const std::string> tweet_tokens, const StopWords& stopwords);

// 1 - |entry_ts - tweet_ts| / t. Throws DataError outside the window.
double time_proximity(std::int64_t entry_ts, std::int64_t tweet_ts, std::int64_t t);

struct Candidate {
  EntityType etype;
  std::string entity_text;
  std::vector<std::string> entity_tokens;
  std::size_t entry_index = 0;  // into Schedule::entries
  std::int64_t entry_ts = 0;
  double s_string = 0.0;
  double s_time = 0.0;
  double s_final = 0.0;
};

struct MatchResult {
  std::vector<EntitySpan> spans;       // non-overlapping, sorted by start
  std::vector<Candidate> candidates;   // those passing the thresholds
};

// Throws DataError when the tweet has no timestamp or the config is invalid.
MatchResult match_tweet(const TaggedTweet& tweet, const Schedule& schedule,
                        const MatchConfig& config);

// Labels every tweet from its matched spans. When `results` is non-null it
// receives the per-tweet match results in corpus order.
Corpus match_corpus(const Corpus& corpus, const Schedule& schedule, const MatchConfig& config,
                    std::vector<MatchResult>* results = nullptr, unsigned jobs = 1);

// One JSON object per line: id, ts, retained candidates with their scores,
// and the chosen spans.
void write_match_diagnostics(std::ostream& out, const TaggedTweet& tweet,
                             const MatchResult& result);

}  // namespace musener
