#include "musener/matcher.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <thread>

#include "json.hpp"

#include "musener/error.hpp"
#include "musener/text.hpp"

namespace musener {

const StopWords& default_stopwords() {
  static const StopWords words = {"the",  "a",  "an", "in", "of",   "for", "and", "to", "on",
                                  "at",   "by", "with", "from", "is", "it", "his", "her"};
  return words;
}

StopWords load_stopwords(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open stop-word file '" + path + "'");
  StopWords words;
  std::string line;
  while (std::getline(in, line)) {
    auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto n = normalize_token(t);
    if (!n.empty()) words.insert(std::move(n));
  }
  return words;
}

void MatchConfig::validate() const {
  if (t <= 0) throw DataError("time window t must be positive");
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!unit(w)) throw DataError("threshold w must lie in [0,1]");
  if (!unit(c)) throw DataError("threshold c must lie in [0,1]");
  if (!unit(alpha)) throw DataError("alpha must lie in [0,1]");
}

std::vector<std::size_t> candidate_tracks(const Schedule& schedule, std::int64_t tweet_ts,
                                          std::int64_t t) {
  const auto& entries = schedule.entries;
  auto first = std::lower_bound(entries.begin(), entries.end(), tweet_ts - t,
                                [](const ScheduleEntry& e, std::int64_t ts) { return e.timestamp < ts; });
  std::vector<std::size_t> out;
  for (auto it = first; it != entries.end() && it->timestamp <= tweet_ts + t; ++it)
    out.push_back(static_cast<std::size_t>(it - entries.begin()));
  return out;
}

std::vector<std::string> entity_tokens(std::string_view entity_text, const StopWords& stopwords) {
  std::vector<std::string> out;
  for (const auto& surface : tokenize(entity_text)) {
    auto n = normalize_token(surface);
    if (n.empty() || stopwords.count(n)) continue;
    if (std::find(out.begin(), out.end(), n) == out.end()) out.push_back(std::move(n));
  }
  return out;
}

double string_match_score(std::span<const std::string> entity, std::span<const std::string> tweet,
                          const StopWords& stopwords) {
  std::unordered_set<std::string> tweet_set(tweet.begin(), tweet.end());
  std::unordered_set<std::string> seen;
  std::size_t total = 0;
  std::size_t shared = 0;
  for (const auto& e : entity) {
    if (e.empty() || stopwords.count(e) || !seen.insert(e).second) continue;
    ++total;
    if (tweet_set.count(e)) ++shared;
  }
  return total == 0 ? 0.0 : static_cast<double>(shared) / static_cast<double>(total);
}

double time_proximity(std::int64_t entry_ts, std::int64_t tweet_ts, std::int64_t t) {
  if (t <= 0) throw DataError("time window t must be positive");
  std::int64_t delta = entry_ts > tweet_ts ? entry_ts - tweet_ts : tweet_ts - entry_ts;
  if (delta > t) throw DataError("track lies outside the time window");
  return 1.0 - static_cast<double>(delta) / static_cast<double>(t);
}

namespace {

struct Projected {
  EntitySpan span;
  double s_final;
  std::int64_t entry_ts;
};

// Maximal runs of tweet tokens drawn from the entity's own tokens
// (stopwords included), trimmed of stopwords at both ends.
std::vector<std::pair<std::size_t, std::size_t>> project(const std::vector<std::string>& tweet_norm,
                                                         std::string_view entity_text,
                                                         const StopWords& stopwords) {
  std::unordered_set<std::string> vocab;
  for (const auto& s : tokenize(entity_text)) {
    auto n = normalize_token(s);
    if (!n.empty()) vocab.insert(std::move(n));
  }
  std::vector<std::pair<std::size_t, std::size_t>> runs;
  const std::size_t n = tweet_norm.size();
  std::size_t i = 0;
  while (i < n) {
    if (tweet_norm[i].empty() || !vocab.count(tweet_norm[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && !tweet_norm[j].empty() && vocab.count(tweet_norm[j])) ++j;
    std::size_t b = i;
    std::size_t e = j;
    while (b < e && stopwords.count(tweet_norm[b])) ++b;
    while (e > b && stopwords.count(tweet_norm[e - 1])) --e;
    if (b < e) runs.emplace_back(b, e);
    i = j;
  }
  return runs;
}

}  // namespace

MatchResult match_tweet(const TaggedTweet& tweet, const Schedule& schedule,
                        const MatchConfig& config) {
  config.validate();
  if (!tweet.timestamp) throw DataError("tweet '" + tweet.id + "' has no timestamp");
  const std::int64_t ts = *tweet.timestamp;

  std::vector<std::string> tweet_norm;
  tweet_norm.reserve(tweet.tokens.size());
  for (const auto& t : tweet.tokens) tweet_norm.push_back(normalize_token(t.surface));

  MatchResult result;
  std::vector<Projected> projected;

  auto consider = [&](EntityType etype, const std::string& text, std::size_t entry_index) {
    const ScheduleEntry& entry = schedule.entries[entry_index];
    Candidate cand;
    cand.etype = etype;
    cand.entity_text = text;
    cand.entity_tokens = entity_tokens(text, config.stopwords);
    cand.entry_index = entry_index;
    cand.entry_ts = entry.timestamp;
    cand.s_string = string_match_score(cand.entity_tokens, tweet_norm, config.stopwords);
    double threshold = etype == EntityType::Contributor ? config.c : config.w;
    if (cand.entity_tokens.empty() || cand.s_string < threshold) return;
    cand.s_time = time_proximity(entry.timestamp, ts, config.t);
    cand.s_final = config.alpha * cand.s_string + (1.0 - config.alpha) * cand.s_time;
    for (auto [b, e] : project(tweet_norm, text, config.stopwords))
      projected.push_back({EntitySpan{etype, b, e, {}}, cand.s_final, cand.entry_ts});
    result.candidates.push_back(std::move(cand));
  };

  for (std::size_t idx : candidate_tracks(schedule, ts, config.t)) {
    const ScheduleEntry& entry = schedule.entries[idx];
    for (const auto& name : entry.contributors) consider(EntityType::Contributor, name, idx);
    consider(EntityType::MusicalWork, entry.work, idx);
  }

  std::stable_sort(projected.begin(), projected.end(), [](const Projected& a, const Projected& b) {
    if (a.s_final != b.s_final) return a.s_final > b.s_final;
    if (a.entry_ts != b.entry_ts) return a.entry_ts < b.entry_ts;
    if (a.span.etype != b.span.etype) return a.span.etype == EntityType::Contributor;
    if (a.span.start != b.span.start) return a.span.start < b.span.start;
    return a.span.end > b.span.end;
  });

  std::vector<bool> taken(tweet.tokens.size(), false);
  for (const auto& p : projected) {
    bool free = true;
    for (std::size_t i = p.span.start; i < p.span.end; ++i) free = free && !taken[i];
    if (!free) continue;
    for (std::size_t i = p.span.start; i < p.span.end; ++i) taken[i] = true;
    EntitySpan span = p.span;
    span.surface = join_surfaces(tweet.tokens, span.start, span.end);
    result.spans.push_back(std::move(span));
  }
  std::sort(result.spans.begin(), result.spans.end(),
            [](const EntitySpan& a, const EntitySpan& b) { return a.start < b.start; });
  return result;
}

Corpus match_corpus(const Corpus& corpus, const Schedule& schedule, const MatchConfig& config,
                    std::vector<MatchResult>* results, unsigned jobs) {
  config.validate();
  for (const auto& tweet : corpus)
    if (!tweet.timestamp) throw DataError("tweet '" + tweet.id + "' has no timestamp");

  std::vector<MatchResult> local(corpus.size());
  auto work = [&](std::size_t begin, std::size_t step) {
    for (std::size_t i = begin; i < corpus.size(); i += step)
      local[i] = match_tweet(corpus[i], schedule, config);
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(1, corpus.size()))));
  if (jobs == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> threads;
    for (unsigned j = 0; j < jobs; ++j) threads.emplace_back(work, j, jobs);
    for (auto& t : threads) t.join();
  }

  Corpus out = corpus;
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i].labels = iob_from_spans(local[i].spans, out[i].tokens.size());
  if (results) *results = std::move(local);
  return out;
}

void write_match_diagnostics(std::ostream& out, const TaggedTweet& tweet,
                             const MatchResult& result) {
  nlohmann::ordered_json j;
  j["id"] = tweet.id;
  j["ts"] = tweet.timestamp ? nlohmann::ordered_json(format_iso8601(*tweet.timestamp))
                            : nlohmann::ordered_json(nullptr);
  auto cands = nlohmann::ordered_json::array();
  for (const auto& c : result.candidates) {
    nlohmann::ordered_json cj;
    cj["type"] = entity_type_code(c.etype);
    cj["text"] = c.entity_text;
    cj["entry_ts"] = format_iso8601(c.entry_ts);
    cj["s_string"] = c.s_string;
    cj["s_time"] = c.s_time;
    cj["s_final"] = c.s_final;
    cands.push_back(std::move(cj));
  }
  j["candidates"] = std::move(cands);
  auto spans = nlohmann::ordered_json::array();
  for (const auto& s : result.spans) {
    nlohmann::ordered_json sj;
    sj["type"] = entity_type_code(s.etype);
    sj["start"] = s.start;
    sj["end"] = s.end;
    sj["surface"] = s.surface;
    spans.push_back(std::move(sj));
  }
  j["spans"] = std::move(spans);
  out << j.dump() << '\n';
}

}  // namespace musener
