#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "musener/corpus.hpp"
#include "musener/features.hpp"

namespace musener {

inline constexpr std::string_view kModelHeader = "musener-model v1";

enum class Decoder { Token, Viterbi };

std::string_view decoder_name(Decoder d);
Decoder parse_decoder(std::string_view name);  // "token" | "viterbi"

// Linear sequence model: emission weights per (feature id, label) and
// transition weights per (previous label or BOS, label). Absent weights
// read as zero.
class LinearModel {
 public:
  using LabelWeights = std::array<double, kNumLabels>;
  // Row kBos holds the BOS -> label weights.
  static constexpr std::size_t kBos = kNumLabels;

  double emission(std::string_view feature, Label label) const;
  double transition_from_bos(Label label) const;
  double transition(Label prev, Label label) const;

  void set_emission(const std::string& feature, Label label, double weight);
  void set_transition_from_bos(Label label, double weight);
  void set_transition(Label prev, Label label, double weight);

  // Σ emission weights of the active features for every label.
  LabelWeights emission_scores(const FeatureVector& fv) const;

  const std::unordered_map<std::string, LabelWeights>& emissions() const { return emissions_; }
  LabelWeights& emission_row(const std::string& feature) { return emissions_[feature]; }
  const std::array<LabelWeights, kNumLabels + 1>& transitions() const { return transitions_; }
  std::array<LabelWeights, kNumLabels + 1>& transitions() { return transitions_; }

  // Weight-wise equality; an all-zero row equals an absent one.
  bool operator==(const LinearModel& other) const;

 private:
  std::unordered_map<std::string, LabelWeights> emissions_;
  std::array<LabelWeights, kNumLabels + 1> transitions_{};
};

struct TrainConfig {
  int epochs = 10;
  std::uint64_t seed = 42;
  Decoder decoder = Decoder::Viterbi;
  bool shuffle = true;
  bool average = true;
};

// Per-token argmax of emission scores; ties go to the earlier label.
std::vector<Label> decode_token(const LinearModel& model, std::span<const FeatureVector> tokens);

// Highest-scoring sequence under emissions plus transitions (BOS included).
// Ties prefer the lower label at each backpointer and at the final step.
std::vector<Label> decode_viterbi(const LinearModel& model, std::span<const FeatureVector> tokens);

std::vector<Label> decode(const LinearModel& model, std::span<const FeatureVector> tokens,
                          Decoder decoder);

// Throws DataError on a length mismatch.
double sequence_score(const LinearModel& model, std::span<const FeatureVector> tokens,
                      std::span<const Label> labels);

// Averaged structured perceptron. Throws DataError on an empty corpus, an
// unlabeled tweet, or epochs < 1.
LinearModel train(const Corpus& corpus, const GazetteerSet& gazetteers, const TrainConfig& config);

// Same, over pre-extracted features.
struct TrainingExample {
  std::vector<FeatureVector> features;
  std::vector<Label> labels;
};
LinearModel train(std::span<const TrainingExample> examples, const TrainConfig& config);

// Text format: header line, then E/T lines sorted by key; zero weights
// are omitted.
void write_model(std::ostream& out, const LinearModel& model);
LinearModel read_model(std::istream& in, const std::string& source = "<stream>");
void save_model(const std::string& path, const LinearModel& model);
LinearModel load_model(const std::string& path);

// Replaces the labels of every tweet with the model's predictions.
Corpus tag_corpus(const LinearModel& model, const Corpus& corpus, const GazetteerSet& gazetteers,
                  Decoder decoder, unsigned jobs = 1);

}  // namespace musener
