#include <algorithm>
#include <cctype>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "musener/error.hpp"
#include "musener/matcher.hpp"
#include "musener/text.hpp"

using namespace musener;

namespace {

std::vector<std::string> normalized(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& t : tokenize(text)) out.push_back(normalize_token(t));
  return out;
}

Schedule schedule_of(std::vector<std::pair<std::int64_t, std::string>> items) {
  std::vector<RawMessage> msgs;
  for (auto& [ts, text] : items) msgs.push_back({ts, text, ""});
  return build_schedule(msgs).schedule;
}

}  // namespace

TEST_CASE("candidate_tracks") {
  auto s = schedule_of({{0, "Now Playing A - One #a"}, {900, "Now Playing B - Two #b"},
                        {2000, "Now Playing C - Three #c"}});
  CHECK(candidate_tracks(s, 1000, 800) == std::vector<std::size_t>{1});
  CHECK(candidate_tracks(s, 900, 1) == std::vector<std::size_t>{1});
  CHECK(candidate_tracks(s, 1000, 1000) == std::vector<std::size_t>{0, 1, 2});
  CHECK(candidate_tracks(s, 100000, 10).empty());
  CHECK(candidate_tracks(Schedule{}, 0, 10).empty());

  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    std::int64_t ts = static_cast<std::int64_t>(rng() % 3000);
    std::int64_t t1 = 1 + static_cast<std::int64_t>(rng() % 1500);
    std::int64_t t2 = t1 + static_cast<std::int64_t>(rng() % 1500);
    auto small = candidate_tracks(s, ts, t1);
    auto large = candidate_tracks(s, ts, t2);
    CHECK(std::includes(large.begin(), large.end(), small.begin(), small.end()));
  }
}

TEST_CASE("string_match_score") {
  const auto& stop = default_stopwords();
  auto entity = entity_tokens("Piano Sonata No. 28 in A major, Op. 101", stop);
  CHECK(entity == std::vector<std::string>{"piano", "sonata", "no", "28", "major", "op", "101"});
  auto tweet = normalized("pno sonata op. 101");
  CHECK(string_match_score(entity, tweet, stop) == doctest::Approx(3.0 / 7.0).epsilon(1e-12));
  // The whole message also contains a leading "No", which counts.
  auto full = normalized("No Schoenberg or Webern?? Beethoven is there but not his pno sonata op. 101??");
  CHECK(string_match_score(entity, full, stop) == doctest::Approx(4.0 / 7.0).epsilon(1e-12));

  auto raw_entity = normalized("Piano Sonata No. 28 in A major, Op. 101");
  CHECK(string_match_score(raw_entity, tweet, stop) == doctest::Approx(3.0 / 7.0).epsilon(1e-12));

  auto cav = entity_tokens("Cavalleria Rusticana", stop);
  CHECK(string_match_score(cav, normalized("Cavalleria Rusticana...hm..from a Competition"), stop) == 1.0);
  CHECK(string_match_score(cav, normalized("nothing in common"), stop) == 0.0);
  CHECK(string_match_score(entity_tokens("The Of And", stop), normalized("the of and"), stop) == 0.0);
  CHECK(string_match_score({}, tweet, stop) == 0.0);
}

TEST_CASE("stop list keeps catalogue words") {
  const auto& stop = default_stopwords();
  CHECK(stop.size() == 17);
  for (auto w : {"no", "op", "b", "c", "major"}) CHECK(stop.count(w) == 0);
  for (auto w : {"the", "a", "in", "his", "her"}) CHECK(stop.count(w) == 1);
}

TEST_CASE("time_proximity") {
  CHECK(time_proximity(100, 100, 50) == 1.0);
  CHECK(time_proximity(150, 100, 50) == 0.0);
  CHECK(time_proximity(0, 600, 1200) == 0.5);
  CHECK(time_proximity(1200, 600, 1200) == 0.5);
  CHECK_THROWS_AS(time_proximity(0, 1000, 999), DataError);
}

TEST_CASE("match_tweet") {
  auto sched = schedule_of(
      {{1000, "Now Playing Pietro Mascagni, Berlin Philharmonic - Cavalleria Rusticana #mascagni"}});
  MatchConfig cfg;

  SUBCASE("schedule work projected onto the tweet") {
    auto tweet = make_tweet("u3", 1300, "Cavalleria Rusticana...hm..from a Competition that very nearly didn't get entered!");
    auto r = match_tweet(tweet, sched, cfg);
    REQUIRE(r.spans.size() == 1);
    CHECK(r.spans[0] == EntitySpan{EntityType::MusicalWork, 0, 2, "Cavalleria Rusticana"});
    REQUIRE(r.candidates.size() == 1);
    const auto& c = r.candidates[0];
    CHECK(c.s_string == 1.0);
    CHECK(c.s_time == doctest::Approx(0.7));
    CHECK(c.s_final == doctest::Approx(0.7 * 1.0 + 0.3 * 0.7));
  }

  SUBCASE("empty window") {
    auto tweet = make_tweet("u", 50000, "Cavalleria Rusticana");
    auto r = match_tweet(tweet, sched, cfg);
    CHECK(r.spans.empty());
    CHECK(r.candidates.empty());
  }

  SUBCASE("strict thresholds drop partial matches") {
    cfg.w = cfg.c = 1.0;
    auto tweet = make_tweet("u", 1000, "Cavalleria tonight with Mascagni");
    auto r = match_tweet(tweet, sched, cfg);
    CHECK(r.spans.empty());
    CHECK(r.candidates.empty());
  }

  SUBCASE("errors") {
    auto tweet = make_tweet("u", std::nullopt, "Cavalleria");
    CHECK_THROWS_AS(match_tweet(tweet, sched, cfg), DataError);
    auto ok = make_tweet("u", 1000, "Cavalleria");
    cfg.t = 0;
    CHECK_THROWS_AS(match_tweet(ok, sched, cfg), DataError);
    cfg.t = 10;
    cfg.alpha = 1.5;
    CHECK_THROWS_AS(match_tweet(ok, sched, cfg), DataError);
  }

  SUBCASE("stopwords inside a title are bridged but never stand alone") {
    auto s = schedule_of({{0, "Now Playing Pyotr Ilyich Tchaikovsky - Symphony No.6 in B minor #t"}});
    auto tweet = make_tweet("u", 0, "in the symphony in b minor in");
    auto r = match_tweet(tweet, s, cfg);
    REQUIRE(r.spans.size() == 1);
    CHECK(r.spans[0].start == 2);
    CHECK(r.spans[0].end == 6);
  }

  SUBCASE("overlaps resolved by final score then time") {
    auto s = schedule_of({{0, "Now Playing Someone - Piano Sonata #a"},
                          {500, "Now Playing Other - Sonata #b"}});
    auto tweet = make_tweet("u", 600, "the sonata was nice");
    auto r = match_tweet(tweet, s, cfg);
    REQUIRE(r.candidates.size() == 2);
    REQUIRE(r.spans.size() == 1);
    CHECK(r.spans[0] == EntitySpan{EntityType::MusicalWork, 1, 2, "sonata"});
  }

  SUBCASE("contributor wins an exact tie") {
    auto s = schedule_of({{0, "Now Playing Rachel Field - Field #a"}});
    auto tweet = make_tweet("u", 0, "field");
    cfg.c = 0.5;
    auto r = match_tweet(tweet, s, cfg);
    REQUIRE(r.spans.size() == 1);
    // Contributor "Rachel Field" scores 1/2, work "Field" scores 1.
    CHECK(r.spans[0].etype == EntityType::MusicalWork);
    auto s2 = schedule_of({{0, "Now Playing Field - Field #a"}});
    auto r2 = match_tweet(tweet, s2, cfg);
    REQUIRE(r2.spans.size() == 1);
    CHECK(r2.spans[0].etype == EntityType::Contributor);
  }
}

TEST_CASE("matcher properties") {
  std::mt19937_64 rng(8);
  const std::vector<std::string> names = {"Joaquín Rodrigo", "Goran Listes", "Robert Schumann",
                                          "Igor Levit", "Pyotr Ilyich Tchaikovsky"};
  const std::vector<std::string> works = {"Symphony No. 6 in B minor", "Piano Sonata No. 28 in A major",
                                          "Cavalleria Rusticana", "Phantasiestücke, Op 73",
                                          "3 Piezas españolas for guitar"};
  const std::vector<std::string> words = {"the", "symphony", "rodrigo", "sonata", "in", "b", "minor",
                                          "Levit", "cavalleria", "op", "73", "lovely", "a", "piano"};
  for (int trial = 0; trial < 150; ++trial) {
    std::vector<std::pair<std::int64_t, std::string>> items;
    for (int k = 0; k < 6; ++k)
      items.emplace_back(static_cast<std::int64_t>(rng() % 5000),
                         "Now Playing " + names[rng() % names.size()] + ", " +
                             names[rng() % names.size()] + " - " + works[rng() % works.size()] + " #x");
    auto sched = schedule_of(items);
    std::string text;
    for (std::size_t i = 0, n = 2 + rng() % 10; i < n; ++i) text += words[rng() % words.size()] + " ";
    auto tweet = make_tweet("p", static_cast<std::int64_t>(rng() % 5000), text);

    MatchConfig cfg;
    cfg.t = 200 + static_cast<std::int64_t>(rng() % 2000);
    cfg.w = static_cast<double>(rng() % 100) / 100.0;
    cfg.c = static_cast<double>(rng() % 100) / 100.0;
    cfg.alpha = static_cast<double>(rng() % 101) / 100.0;
    auto r = match_tweet(tweet, sched, cfg);

    for (const auto& c : r.candidates) {
      CHECK(c.s_string >= 0.0);
      CHECK(c.s_string <= 1.0);
      CHECK(c.s_time >= 0.0);
      CHECK(c.s_time <= 1.0);
      CHECK(c.s_final == cfg.alpha * c.s_string + (1.0 - cfg.alpha) * c.s_time);
      CHECK(c.s_string >= (c.etype == EntityType::Contributor ? cfg.c : cfg.w));
    }
    for (std::size_t i = 0; i < r.spans.size(); ++i) {
      if (i > 0) CHECK(r.spans[i - 1].end <= r.spans[i].start);
      bool has_content = false;
      for (std::size_t k = r.spans[i].start; k < r.spans[i].end; ++k)
        has_content = has_content || !cfg.stopwords.count(normalize_token(tweet.tokens[k].surface));
      CHECK(has_content);
    }

    // Case changes in the tweet do not change the spans.
    std::string upper;
    for (char ch : text) upper += static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    auto shouted = match_tweet(make_tweet("p", tweet.timestamp, upper), sched, cfg);
    REQUIRE(shouted.spans.size() == r.spans.size());
    for (std::size_t i = 0; i < r.spans.size(); ++i) {
      CHECK(shouted.spans[i].start == r.spans[i].start);
      CHECK(shouted.spans[i].end == r.spans[i].end);
      CHECK(shouted.spans[i].etype == r.spans[i].etype);
    }
  }
}

TEST_CASE("match_corpus and diagnostics") {
  auto sched = schedule_of({{0, "Now Playing Pietro Mascagni - Cavalleria Rusticana #m"}});
  Corpus corpus = {make_tweet("a", 10, "Cavalleria Rusticana again"), make_tweet("b", 10, "nothing")};
  std::vector<MatchResult> results;
  auto labeled = match_corpus(corpus, sched, MatchConfig{}, &results, 2);
  REQUIRE(labeled[0].labels);
  CHECK(*labeled[0].labels == std::vector<Label>{Label::BWork, Label::IWork, Label::O});
  CHECK(*labeled[1].labels == std::vector<Label>{Label::O});

  std::ostringstream out;
  write_match_diagnostics(out, corpus[0], results[0]);
  auto j = nlohmann::json::parse(out.str());
  CHECK(j["id"] == "a");
  CHECK(j["candidates"].size() == 1);
  CHECK(j["candidates"][0]["s_string"] == 1.0);
  CHECK(j["spans"][0]["surface"] == "Cavalleria Rusticana");

  Corpus missing_ts = {make_tweet("x", std::nullopt, "a")};
  CHECK_THROWS_AS(match_corpus(missing_ts, sched, MatchConfig{}), DataError);
}
