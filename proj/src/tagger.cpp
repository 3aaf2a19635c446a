#include "musener/tagger.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <thread>

#include "musener/error.hpp"
#include "musener/text.hpp"

namespace musener {

std::string_view decoder_name(Decoder d) { return d == Decoder::Token ? "token" : "viterbi"; }

Decoder parse_decoder(std::string_view name) {
  if (name == "token") return Decoder::Token;
  if (name == "viterbi") return Decoder::Viterbi;
  throw DataError("unknown decoder '" + std::string(name) + "' (expected token or viterbi)");
}

namespace {
std::size_t idx(Label l) { return static_cast<std::size_t>(l); }
}  // namespace

double LinearModel::emission(std::string_view feature, Label label) const {
  auto it = emissions_.find(std::string(feature));
  return it == emissions_.end() ? 0.0 : it->second[idx(label)];
}

double LinearModel::transition_from_bos(Label label) const {
  return transitions_[kBos][idx(label)];
}

double LinearModel::transition(Label prev, Label label) const {
  return transitions_[idx(prev)][idx(label)];
}

void LinearModel::set_emission(const std::string& feature, Label label, double weight) {
  emissions_[feature][idx(label)] = weight;
}

void LinearModel::set_transition_from_bos(Label label, double weight) {
  transitions_[kBos][idx(label)] = weight;
}

void LinearModel::set_transition(Label prev, Label label, double weight) {
  transitions_[idx(prev)][idx(label)] = weight;
}

bool LinearModel::operator==(const LinearModel& other) const {
  if (transitions_ != other.transitions_) return false;
  auto covered = [](const LinearModel& a, const LinearModel& b) {
    for (const auto& [feature, row] : a.emissions_) {
      auto it = b.emissions_.find(feature);
      LabelWeights theirs = it == b.emissions_.end() ? LabelWeights{} : it->second;
      if (row != theirs) return false;
    }
    return true;
  };
  return covered(*this, other) && covered(other, *this);
}

LinearModel::LabelWeights LinearModel::emission_scores(const FeatureVector& fv) const {
  LabelWeights scores{};
  for (const auto& f : fv.features) {
    auto it = emissions_.find(f);
    if (it == emissions_.end()) continue;
    for (std::size_t l = 0; l < kNumLabels; ++l) scores[l] += it->second[l];
  }
  return scores;
}

// --- Decoding ---------------------------------------------------------------------

std::vector<Label> decode_token(const LinearModel& model, std::span<const FeatureVector> tokens) {
  std::vector<Label> out;
  out.reserve(tokens.size());
  for (const auto& fv : tokens) {
    auto scores = model.emission_scores(fv);
    std::size_t best = 0;
    for (std::size_t l = 1; l < kNumLabels; ++l)
      if (scores[l] > scores[best]) best = l;
    out.push_back(kAllLabels[best]);
  }
  return out;
}

std::vector<Label> decode_viterbi(const LinearModel& model, std::span<const FeatureVector> tokens) {
  const std::size_t n = tokens.size();
  if (n == 0) return {};
  using Row = LinearModel::LabelWeights;
  std::vector<Row> best(n);
  std::vector<std::array<std::uint8_t, kNumLabels>> back(n);

  const auto& trans = model.transitions();
  Row em = model.emission_scores(tokens[0]);
  for (std::size_t l = 0; l < kNumLabels; ++l) best[0][l] = trans[LinearModel::kBos][l] + em[l];

  for (std::size_t i = 1; i < n; ++i) {
    em = model.emission_scores(tokens[i]);
    for (std::size_t l = 0; l < kNumLabels; ++l) {
      std::size_t arg = 0;
      double top = best[i - 1][0] + trans[0][l];
      for (std::size_t p = 1; p < kNumLabels; ++p) {
        double s = best[i - 1][p] + trans[p][l];
        if (s > top) {
          top = s;
          arg = p;
        }
      }
      best[i][l] = top + em[l];
      back[i][l] = static_cast<std::uint8_t>(arg);
    }
  }

  std::size_t last = 0;
  for (std::size_t l = 1; l < kNumLabels; ++l)
    if (best[n - 1][l] > best[n - 1][last]) last = l;

  std::vector<Label> out(n);
  for (std::size_t i = n; i-- > 0;) {
    out[i] = kAllLabels[last];
    if (i > 0) last = back[i][last];
  }
  return out;
}

std::vector<Label> decode(const LinearModel& model, std::span<const FeatureVector> tokens,
                          Decoder decoder) {
  return decoder == Decoder::Token ? decode_token(model, tokens) : decode_viterbi(model, tokens);
}

double sequence_score(const LinearModel& model, std::span<const FeatureVector> tokens,
                      std::span<const Label> labels) {
  if (tokens.size() != labels.size())
    throw DataError("sequence_score: " + std::to_string(labels.size()) + " labels for " +
                    std::to_string(tokens.size()) + " tokens");
  double score = 0.0;
  for (std::size_t i = 0; i < tokens.size(); ++i)
    score += model.emission_scores(tokens[i])[idx(labels[i])];
  if (!labels.empty()) score += model.transition_from_bos(labels[0]);
  for (std::size_t i = 1; i < labels.size(); ++i) score += model.transition(labels[i - 1], labels[i]);
  return score;
}

// --- Training ---------------------------------------------------------------------

namespace {

// Applies +scale to the gold structure and -scale to the predicted one.
void update(LinearModel& model, const TrainingExample& ex, std::span<const Label> predicted,
            double scale, bool transitions) {
  for (std::size_t i = 0; i < ex.labels.size(); ++i) {
    if (ex.labels[i] == predicted[i]) continue;
    for (const auto& f : ex.features[i].features) {
      auto& row = model.emission_row(f);
      row[idx(ex.labels[i])] += scale;
      row[idx(predicted[i])] -= scale;
    }
  }
  if (!transitions) return;
  auto& trans = model.transitions();
  for (std::size_t i = 0; i < ex.labels.size(); ++i) {
    std::size_t gp = i == 0 ? LinearModel::kBos : idx(ex.labels[i - 1]);
    std::size_t pp = i == 0 ? LinearModel::kBos : idx(predicted[i - 1]);
    trans[gp][idx(ex.labels[i])] += scale;
    trans[pp][idx(predicted[i])] -= scale;
  }
}

void drop_zero_rows(LinearModel& model) {
  LinearModel cleaned;
  for (const auto& [feature, row] : model.emissions())
    if (std::any_of(row.begin(), row.end(), [](double w) { return w != 0.0; }))
      cleaned.emission_row(feature) = row;
  cleaned.transitions() = model.transitions();
  model = std::move(cleaned);
}

}  // namespace

LinearModel train(std::span<const TrainingExample> examples, const TrainConfig& config) {
  if (config.epochs < 1) throw DataError("epochs must be at least 1");
  if (examples.empty()) throw DataError("cannot train on an empty corpus");
  for (const auto& ex : examples)
    if (ex.features.size() != ex.labels.size())
      throw DataError("training example has mismatched features and labels");

  const bool use_transitions = config.decoder == Decoder::Viterbi;
  LinearModel weights;
  // Sum of c * delta over all updates; the average is weights - accum / c.
  LinearModel accum;
  double c = 1.0;

  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(config.seed);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    if (config.shuffle) {
      for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[static_cast<std::size_t>(rng() % i)]);
    }
    for (std::size_t k : order) {
      const TrainingExample& ex = examples[k];
      auto predicted = decode(weights, ex.features, config.decoder);
      if (predicted != ex.labels) {
        update(weights, ex, predicted, 1.0, use_transitions);
        update(accum, ex, predicted, c, use_transitions);
      }
      c += 1.0;
    }
  }

  if (config.average) {
    for (const auto& [feature, row] : accum.emissions()) {
      auto& w = weights.emission_row(feature);
      for (std::size_t l = 0; l < kNumLabels; ++l) w[l] -= row[l] / c;
    }
    for (std::size_t p = 0; p <= kNumLabels; ++p)
      for (std::size_t l = 0; l < kNumLabels; ++l)
        weights.transitions()[p][l] -= accum.transitions()[p][l] / c;
  }
  drop_zero_rows(weights);
  return weights;
}

LinearModel train(const Corpus& corpus, const GazetteerSet& gazetteers, const TrainConfig& config) {
  if (config.epochs < 1) throw DataError("epochs must be at least 1");
  if (corpus.empty()) throw DataError("cannot train on an empty corpus");
  std::vector<TrainingExample> examples;
  examples.reserve(corpus.size());
  for (const auto& tweet : corpus) {
    if (!tweet.labels) throw DataError("training tweet '" + tweet.id + "' is unlabeled");
    examples.push_back({extract_tweet_features(tweet, gazetteers), *tweet.labels});
  }
  return train(examples, config);
}

// --- Model files ----------------------------------------------------------------------

void write_model(std::ostream& out, const LinearModel& model) {
  out << kModelHeader << '\n';
  std::vector<const std::string*> features;
  features.reserve(model.emissions().size());
  for (const auto& [f, row] : model.emissions()) features.push_back(&f);
  std::sort(features.begin(), features.end(),
            [](const std::string* a, const std::string* b) { return *a < *b; });
  for (const std::string* f : features) {
    const auto& row = model.emissions().at(*f);
    for (std::size_t l = 0; l < kNumLabels; ++l) {
      if (row[l] == 0.0) continue;
      if (!std::isfinite(row[l])) throw DataError("non-finite weight for feature '" + *f + "'");
      out << "E\t" << *f << '\t' << label_name(kAllLabels[l]) << '\t' << format_double(row[l])
          << '\n';
    }
  }
  const auto& trans = model.transitions();
  for (std::size_t p : {LinearModel::kBos, std::size_t{0}, std::size_t{1}, std::size_t{2},
                        std::size_t{3}, std::size_t{4}}) {
    std::string_view prev = p == LinearModel::kBos ? "BOS" : label_name(kAllLabels[p]);
    for (std::size_t l = 0; l < kNumLabels; ++l) {
      if (trans[p][l] == 0.0) continue;
      if (!std::isfinite(trans[p][l])) throw DataError("non-finite transition weight");
      out << "T\t" << prev << '\t' << label_name(kAllLabels[l]) << '\t'
          << format_double(trans[p][l]) << '\n';
    }
  }
}

LinearModel read_model(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != kModelHeader)
    throw ParseError(source, 1, "model version mismatch: expected '" + std::string(kModelHeader) + "'");
  LinearModel model;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cols = split(line, '\t');
    if (cols.size() != 4 || (cols[0] != "E" && cols[0] != "T"))
      throw ParseError(source, line_no, "malformed model line");
    try {
      Label label = parse_label(cols[2]);
      double weight = parse_double(cols[3]);
      if (cols[0] == "E") {
        model.set_emission(cols[1], label, weight);
      } else if (cols[1] == "BOS") {
        model.set_transition_from_bos(label, weight);
      } else {
        model.set_transition(parse_label(cols[1]), label, weight);
      }
    } catch (const ParseError&) {
      throw;
    } catch (const DataError& e) {
      throw ParseError(source, line_no, e.what());
    }
  }
  return model;
}

void save_model(const std::string& path, const LinearModel& model) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write model file '" + path + "'");
  write_model(out, model);
  if (!out) throw DataError("error writing model file '" + path + "'");
}

LinearModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file '" + path + "'");
  return read_model(in, path);
}

Corpus tag_corpus(const LinearModel& model, const Corpus& corpus, const GazetteerSet& gazetteers,
                  Decoder decoder, unsigned jobs) {
  gazetteers.require_complete();
  Corpus out = corpus;
  auto work = [&](std::size_t begin, std::size_t step) {
    for (std::size_t i = begin; i < out.size(); i += step) {
      auto fv = extract_tweet_features(out[i], gazetteers);
      out[i].labels = decode(model, fv, decoder);
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(1, out.size()))));
  if (jobs == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> threads;
    for (unsigned j = 0; j < jobs; ++j) threads.emplace_back(work, j, jobs);
    for (auto& t : threads) t.join();
  }
  return out;
}

}  // namespace musener
