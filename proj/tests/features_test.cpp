#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "musener/error.hpp"
#include "musener/features.hpp"
#include "musener/text.hpp"

using namespace musener;

namespace {

const std::string kGazDir = std::string(MUSENER_DATA_DIR) + "/gazetteers";

std::string temp_file(const std::string& name, const std::string& content) {
  auto path = std::filesystem::temp_directory_path() / ("musener_test_" + name);
  std::ofstream(path) << content;
  return path.string();
}

TaggedTweet sentence_tweet() {
  return make_tweet("t5", std::nullopt, "Beethoven is there but not his pno sonata op. 101");
}

std::string value_of(const FeatureVector& fv, std::string_view slot) {
  for (const auto& f : fv.features)
    if (feature_slot(f) == slot) return f.substr(slot.size() + 1);
  FAIL("missing slot " << slot);
  return {};
}

}  // namespace

TEST_CASE("load_gazetteer") {
  auto keys = load_gazetteer("key", temp_file("keys.txt", "C\nD\nE\nF\nG\nA\nB\nflat\nsharp\n"));
  CHECK(keys.size() == 9);
  auto modes = load_gazetteer("mode", temp_file("modes.txt", "major\nminor\nm\n"));
  CHECK(modes.size() == 3);
  auto opus = load_gazetteer("opus", temp_file("opus.txt", "# comment\nop\nop\n\n"));
  CHECK(opus.size() == 1);

  for (const auto& e : keys.entries()) CHECK(normalize_token(e) == e);

  CHECK_THROWS_AS(load_gazetteer("colours", temp_file("c.txt", "red\n")), DataError);
  CHECK_THROWS_AS(load_gazetteer("key", "/nonexistent/keys.txt"), DataError);
  CHECK_THROWS_AS(load_gazetteer("key", temp_file("bad.txt", "C sharp\n")), ParseError);
}

TEST_CASE("gazetteer_contains") {
  Gazetteer opus("opus", {"op", "opus"});
  Gazetteer keys("key", {"C", "D", "E", "F", "G", "A", "B", "flat", "sharp"});
  CHECK(opus.contains("Op."));
  CHECK_FALSE(opus.contains("sonata"));
  CHECK(keys.contains("A"));
  CHECK(keys.contains("a"));
  CHECK(keys.contains("FLAT"));
}

TEST_CASE("bundled gazetteers load") {
  auto set = load_gazetteer_dir(kGazDir);
  CHECK(set.complete());
  CHECK(set.find("lastname")->contains("Beethoven"));
  CHECK(set.find("instrument")->contains("pno"));
  CHECK(set.find("worktype")->contains("sonata"));
  CHECK(set.find("opus")->contains("op."));
  CHECK(set.find("key")->size() == 9);
  CHECK(set.find("mode")->size() == 3);
}

TEST_CASE("fallback_pos_chunk") {
  using P = std::pair<std::string, std::string>;
  auto tags = fallback_pos_chunk({"101", "Beethoven", "quickly", "the", "playing", "??", "symphonies"});
  CHECK(tags[0] == P{"CD", "B-NP"});
  CHECK(tags[1] == P{"NNP", "B-NP"});
  CHECK(tags[2] == P{"RB", "O"});
  CHECK(tags[3] == P{"DT", "O"});
  CHECK(tags[4] == P{"VBG", "O"});
  CHECK(tags[5] == P{".", "O"});
  CHECK(tags[6] == P{"NNS", "B-NP"});
  CHECK(fallback_pos_chunk({"The"})[0] == P{"DT", "O"});

  SUBCASE("corpus columns take precedence") {
    TaggedTweet t;
    t.tokens = {Token{"Beethoven", "NN", "I-NP"}, Token{"rocks", "UNK", "UNK"}};
    auto r = resolve_pos_chunk(t);
    CHECK(r[0] == P{"NN", "I-NP"});
    CHECK(r[1] == P{"NNS", "B-NP"});
  }
}

TEST_CASE("extract_features") {
  auto gaz = load_gazetteer_dir(kGazDir);
  auto tweet = sentence_tweet();

  auto f0 = extract_features(tweet, 0, gaz);
  REQUIRE(f0.features.size() == kNumFeatureSlots);
  CHECK(f0.position == 0.0);
  CHECK(value_of(f0, "position") == "0.0");
  CHECK(value_of(f0, "cap") == "1");
  CHECK(value_of(f0, "digit") == "0");
  CHECK(value_of(f0, "gaz.lastname") == "1");
  CHECK(value_of(f0, "gaz.firstname") == "0");
  for (auto s : {"w[-2]", "pos[-2]", "chunk[-2]", "w[-1]", "pos[-1]", "chunk[-1]"})
    CHECK(value_of(f0, s) == "<BOS>");
  CHECK(value_of(f0, "w[+1]") == "is");
  CHECK(value_of(f0, "pos[+1]") == "VBZ");

  auto f9 = extract_features(tweet, 9, gaz);
  CHECK(f9.position == 1.0);
  CHECK(value_of(f9, "position") == "1.0");
  CHECK(value_of(f9, "digit") == "1");
  CHECK(value_of(f9, "w[-1]") == "op.");
  CHECK(value_of(f9, "w[+1]") == "<EOS>");
  CHECK(value_of(f9, "w[+2]") == "<EOS>");

  auto f8 = extract_features(tweet, 8, gaz);
  CHECK(value_of(f8, "gaz.opus") == "1");
  CHECK(value_of(f8, "w[+1]") == "101");
  CHECK(value_of(f8, "w[+2]") == "<EOS>");

  auto single = make_tweet("s", std::nullopt, "Beethoven");
  auto fs = extract_features(single, 0, gaz);
  CHECK(fs.position == 0.0);
  for (auto s : {"w[-2]", "w[-1]", "w[+1]", "w[+2]", "pos[-2]", "chunk[+2]"})
    CHECK((value_of(fs, s) == "<BOS>" || value_of(fs, s) == "<EOS>"));

  CHECK_THROWS_AS(extract_features(tweet, 10, gaz), DataError);
  GazetteerSet partial;
  partial.add(Gazetteer("key", {"a"}));
  CHECK_THROWS_AS(extract_features(tweet, 0, partial), DataError);
}

TEST_CASE("feature invariants") {
  auto gaz = load_gazetteer_dir(kGazDir);
  std::mt19937_64 rng(13);
  const std::vector<std::string> words = {"Beethoven", "sonata", "op.", "101", "the", "A",
                                          "minor",     "...",    "Piano", "no", "lovely"};
  for (int trial = 0; trial < 100; ++trial) {
    std::string text;
    std::size_t n = 1 + rng() % 15;
    for (std::size_t i = 0; i < n; ++i) text += words[rng() % words.size()] + " ";
    auto tweet = make_tweet("r", std::nullopt, text);
    auto fvs = extract_tweet_features(tweet, gaz);
    double prev = -1.0;
    for (std::size_t i = 0; i < fvs.size(); ++i) {
      REQUIRE(fvs[i].features.size() == kNumFeatureSlots);
      for (std::size_t k = 0; k < kNumFeatureSlots; ++k)
        CHECK(feature_slot(fvs[i].features[k]) == kFeatureSlotNames[k]);
      CHECK(fvs[i].position >= 0.0);
      CHECK(fvs[i].position <= 1.0);
      if (fvs.size() > 1) CHECK(fvs[i].position > prev);
      prev = fvs[i].position;
      CHECK(fvs[i] == extract_features(tweet, i, gaz));
    }

    // Gazetteer flags do not depend on case.
    std::string upper;
    for (char c : text) upper += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    auto shouted = extract_tweet_features(make_tweet("r", std::nullopt, upper), gaz);
    REQUIRE(shouted.size() == fvs.size());
    for (std::size_t i = 0; i < fvs.size(); ++i)
      for (std::size_t k = 5; k < 14; ++k) CHECK(shouted[i].features[k] == fvs[i].features[k]);
  }
}
