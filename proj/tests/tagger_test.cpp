#include <random>
#include <sstream>

#include "doctest.h"
#include "musener/error.hpp"
#include "musener/pipeline.hpp"
#include "musener/tagger.hpp"
#include "oracles.hpp"

using namespace musener;
using musener::testing::brute_best_score;

namespace {

const std::string kData = MUSENER_DATA_DIR;

FeatureVector fv(std::initializer_list<const char*> feats) {
  FeatureVector v;
  for (const char* f : feats) v.features.emplace_back(f);
  return v;
}

// Random model over a small feature vocabulary; weights are multiples of
// 1/4 so every sum is exact.
LinearModel random_model(std::mt19937_64& rng, const std::vector<std::string>& vocab,
                         bool with_transitions = true) {
  auto w = [&rng] { return static_cast<double>(static_cast<int>(rng() % 33) - 16) / 4.0; };
  LinearModel m;
  for (const auto& f : vocab)
    for (Label l : kAllLabels) m.set_emission(f, l, w());
  if (with_transitions) {
    for (Label l : kAllLabels) {
      m.set_transition_from_bos(l, w());
      for (Label p : kAllLabels) m.set_transition(p, l, w());
    }
  }
  return m;
}

std::vector<FeatureVector> random_tokens(std::mt19937_64& rng, const std::vector<std::string>& vocab,
                                         std::size_t n) {
  std::vector<FeatureVector> out(n);
  for (auto& t : out) {
    std::size_t k = 1 + rng() % 3;
    for (std::size_t j = 0; j < k; ++j) t.features.push_back(vocab[rng() % vocab.size()]);
  }
  return out;
}

const std::vector<std::string> kVocab = {"a=1", "b=1", "c=1", "d=1", "e=1", "f=1"};

}  // namespace

TEST_CASE("decode_token") {
  LinearModel zero;
  auto tokens = std::vector<FeatureVector>{fv({"x=1"}), fv({"y=1"})};
  CHECK(decode_token(zero, tokens) == std::vector<Label>{Label::O, Label::O});
  CHECK(decode_token(zero, {}).empty());

  auto gaz = load_gazetteer_dir(kData + "/gazetteers");
  auto tweet = make_tweet("t5", std::nullopt, "Beethoven is there but not his pno sonata op. 101");
  auto fvs = extract_tweet_features(tweet, gaz);
  LinearModel one;
  one.set_emission("gaz.lastname=1", Label::BContr, 1.0);
  auto labels = decode_token(one, fvs);
  CHECK(labels[0] == Label::BContr);
  for (std::size_t i = 1; i < labels.size(); ++i) CHECK(labels[i] == Label::O);
}

TEST_CASE("decode_viterbi") {
  LinearModel zero;
  CHECK(decode_viterbi(zero, {}).empty());

  SUBCASE("zero transitions reduce to per-token argmax") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 300; ++trial) {
      auto m = random_model(rng, kVocab, false);
      auto tokens = random_tokens(rng, kVocab, 1 + rng() % 6);
      CHECK(decode_viterbi(m, tokens) == decode_token(m, tokens));
    }
  }

  SUBCASE("strong B-WORK -> I-WORK transition joins a span") {
    // Emissions alone: token 0 prefers B-WORK (1.0), token 1 prefers O (0.5
    // vs 0.4 for I-WORK). With transition +10 the pair B-WORK I-WORK scores
    // 1.0 + 0.4 + 10 = 11.4 against 1.0 + 0.5 = 1.5 for B-WORK O.
    LinearModel m;
    m.set_emission("w=symphony", Label::BWork, 1.0);
    m.set_emission("w=five", Label::O, 0.5);
    m.set_emission("w=five", Label::IWork, 0.4);
    std::vector<FeatureVector> tokens = {fv({"w=symphony"}), fv({"w=five"})};
    CHECK(decode_token(m, tokens) == std::vector<Label>{Label::BWork, Label::O});
    m.set_transition(Label::BWork, Label::IWork, 10.0);
    auto best = decode_viterbi(m, tokens);
    CHECK(best == std::vector<Label>{Label::BWork, Label::IWork});
    CHECK(sequence_score(m, tokens, best) == doctest::Approx(11.4));
  }

  SUBCASE("matches exhaustive enumeration") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 300; ++trial) {
      auto m = random_model(rng, kVocab);
      auto tokens = random_tokens(rng, kVocab, 1 + rng() % 4);
      auto best = decode_viterbi(m, tokens);
      CHECK(sequence_score(m, tokens, best) == brute_best_score(m, tokens));
    }
  }

  SUBCASE("constant emission shift leaves both decoders unchanged") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
      auto m = random_model(rng, kVocab);
      auto tokens = random_tokens(rng, kVocab, 1 + rng() % 5);
      auto shifted = m;
      for (const auto& f : kVocab)
        for (Label l : kAllLabels) shifted.set_emission(f, l, m.emission(f, l) + 3.0);
      CHECK(decode_token(shifted, tokens) == decode_token(m, tokens));
      CHECK(decode_viterbi(shifted, tokens) == decode_viterbi(m, tokens));
    }
  }
}

TEST_CASE("sequence_score") {
  LinearModel zero;
  std::vector<FeatureVector> tokens = {fv({"a=1"}), fv({"b=1"})};
  std::vector<Label> labels = {Label::BWork, Label::IWork};
  CHECK(sequence_score(zero, tokens, labels) == 0.0);

  LinearModel m;
  m.set_emission("a=1", Label::BWork, 2.5);
  m.set_transition_from_bos(Label::BWork, 0.5);
  std::vector<FeatureVector> single = {fv({"a=1"})};
  std::vector<Label> one = {Label::BWork};
  CHECK(sequence_score(m, single, one) == 3.0);

  CHECK_THROWS_AS(sequence_score(m, tokens, one), DataError);
}

TEST_CASE("model file round-trip") {
  std::mt19937_64 rng(17);
  auto m = random_model(rng, kVocab);
  m.set_emission("z=1", Label::O, 0.1 + 0.2);  // not exactly representable in short decimal
  m.set_emission("zero=1", Label::O, 0.0);
  std::ostringstream out;
  write_model(out, m);
  std::string text = out.str();
  CHECK(text.rfind("musener-model v1\n", 0) == 0);
  CHECK(text.find("zero=1") == std::string::npos);

  std::istringstream in(text);
  auto back = read_model(in);
  CHECK(back == m);
  CHECK(back.emission("z=1", Label::O) == 0.1 + 0.2);

  std::ostringstream again;
  write_model(again, back);
  CHECK(again.str() == text);

  for (int trial = 0; trial < 50; ++trial) {
    auto tokens = random_tokens(rng, kVocab, 1 + rng() % 6);
    CHECK(decode_viterbi(back, tokens) == decode_viterbi(m, tokens));
  }

  std::istringstream wrong("musener-model v2\n");
  CHECK_THROWS_AS(read_model(wrong), ParseError);
  std::istringstream malformed("musener-model v1\nE\tf=1\tO\n");
  CHECK_THROWS_AS(read_model(malformed), ParseError);
  std::istringstream bad_label("musener-model v1\nT\tBOS\tB-PER\t1\n");
  CHECK_THROWS_AS(read_model(bad_label), ParseError);
  std::istringstream bad_weight("musener-model v1\nE\tf=1\tO\tone\n");
  CHECK_THROWS_AS(read_model(bad_weight), ParseError);
}

TEST_CASE("train") {
  auto gaz = load_gazetteer_dir(kData + "/gazetteers");
  auto corpus = load_corpus(kData + "/fixtures/separable_train.iob");

  TrainConfig bad;
  bad.epochs = 0;
  CHECK_THROWS_AS(train(corpus, gaz, bad), DataError);
  CHECK_THROWS_AS(train(Corpus{}, gaz, TrainConfig{}), DataError);
  CHECK_THROWS_AS(train(Corpus{make_tweet("u", std::nullopt, "a b")}, gaz, TrainConfig{}), DataError);

  for (Decoder d : {Decoder::Viterbi, Decoder::Token}) {
    CAPTURE(decoder_name(d));
    TrainConfig cfg;
    cfg.decoder = d;
    auto model = train(corpus, gaz, cfg);
    auto tagged = tag_corpus(model, corpus, gaz, d);
    auto report = evaluate(corpus, tagged);
    CHECK(report.contributor.f1() == 1.0);
    CHECK(report.work.f1() == 1.0);

    std::ostringstream a, b;
    write_model(a, model);
    write_model(b, train(corpus, gaz, cfg));
    CHECK(a.str() == b.str());
  }

  SUBCASE("token decoder leaves transitions untouched") {
    TrainConfig cfg;
    cfg.decoder = Decoder::Token;
    auto model = train(corpus, gaz, cfg);
    for (const auto& row : model.transitions())
      for (double w : row) CHECK(w == 0.0);
  }

  SUBCASE("parallel tagging matches serial") {
    auto model = train(corpus, gaz, TrainConfig{});
    CHECK(tag_corpus(model, corpus, gaz, Decoder::Viterbi, 4) ==
          tag_corpus(model, corpus, gaz, Decoder::Viterbi, 1));
  }
}

TEST_CASE("averaging differs from final weights only through the running mean") {
  // One example, one feature: the first epoch mispredicts O and updates
  // (B-CONTR +1, O -1) at c = 1; later epochs are correct. With E epochs
  // the averaged weight is 1 - 1/(E + 1) = E / (E + 1).
  std::vector<TrainingExample> ex = {{{fv({"f=1"})}, {Label::BContr}}};
  TrainConfig cfg;
  cfg.shuffle = false;
  cfg.decoder = Decoder::Token;
  cfg.epochs = 3;
  auto averaged = train(ex, cfg);
  CHECK(averaged.emission("f=1", Label::BContr) == doctest::Approx(0.75));
  CHECK(averaged.emission("f=1", Label::O) == doctest::Approx(-0.75));
  cfg.average = false;
  auto last = train(ex, cfg);
  CHECK(last.emission("f=1", Label::BContr) == 1.0);
}
