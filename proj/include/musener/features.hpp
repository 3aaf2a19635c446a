#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "musener/corpus.hpp"

namespace musener {

// The nine classical-music word lists, in feature order.
inline constexpr std::array<std::string_view, 9> kGazetteerNames = {
    "firstname",  // contributor first names
    "lastname",   // contributor last names
    "contribtype",  // "soprano", "violinist", ...
    "worktype",   // "symphony", "overture", ...
    "instrument",
    "opus",    // "op", "opus"
    "number",  // "no", "number"
    "key",     // c d e f g a b flat sharp
    "mode",    // major minor m
};

class Gazetteer {
 public:
  Gazetteer() = default;
  // Entries are normalized with normalize_token; empty results are dropped.
  Gazetteer(std::string name, const std::vector<std::string>& entries);

  const std::string& name() const { return name_; }
  std::size_t size() const { return entries_.size(); }

  // Membership of normalize_token(surface).
  bool contains(std::string_view surface) const;

  // Sorted copy of the entries.
  std::vector<std::string> entries() const;

 private:
  std::string name_;
  std::unordered_set<std::string> entries_;
};

// Reads one entry per line; blank and '#' lines are skipped. Throws
// DataError for an unknown name, an unreadable file, or an entry that
// contains whitespace.
Gazetteer load_gazetteer(std::string_view name, const std::string& path);

class GazetteerSet {
 public:
  void add(Gazetteer gazetteer);
  const Gazetteer* find(std::string_view name) const;
  bool complete() const;
  // Throws DataError naming the first missing gazetteer.
  void require_complete() const;

 private:
  std::array<std::optional<Gazetteer>, kGazetteerNames.size()> slots_;
};

// Loads <dir>/<name>.txt for every gazetteer name.
GazetteerSet load_gazetteer_dir(const std::string& dir);

// Deterministic heuristic tags: digits -> CD, closed-class lexicon,
// capitalized -> NNP, suffix rules, default NN. Chunk is B-NP for nominal
// tags and O otherwise.
std::vector<std::pair<std::string, std::string>> fallback_pos_chunk(
    const std::vector<std::string>& surfaces);

// Per-token (pos, chunk): corpus columns win unless they hold "UNK", in
// which case the heuristic fills in.
std::vector<std::pair<std::string, std::string>> resolve_pos_chunk(const TaggedTweet& tweet);

inline constexpr std::size_t kNumFeatureSlots = 26;

// Slot names in emission order.
extern const std::array<std::string_view, kNumFeatureSlots> kFeatureSlotNames;

struct FeatureVector {
  // "name=value" identifiers, one per slot, in kFeatureSlotNames order.
  std::vector<std::string> features;
  // Unbucketed relative position, index / (n - 1). The "position" slot
  // carries it rounded to one decimal.
  double position = 0.0;

  bool operator==(const FeatureVector&) const = default;
};

// Slot name of a "name=value" identifier.
std::string_view feature_slot(std::string_view feature);

// Throws DataError if index is out of range or a gazetteer is missing.
FeatureVector extract_features(const TaggedTweet& tweet, std::size_t index,
                               const GazetteerSet& gazetteers);

// All tokens of a tweet at once (shares the POS/chunk resolution).
std::vector<FeatureVector> extract_tweet_features(const TaggedTweet& tweet,
                                                  const GazetteerSet& gazetteers);

}  // namespace musener
