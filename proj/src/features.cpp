#include "musener/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <unordered_map>

#include "musener/error.hpp"
#include "musener/text.hpp"

namespace musener {

const std::array<std::string_view, kNumFeatureSlots> kFeatureSlotNames = {
    "pos",        "chunk",       "position",       "cap",       "digit",
    "gaz.firstname", "gaz.lastname", "gaz.contribtype", "gaz.worktype", "gaz.instrument",
    "gaz.opus",   "gaz.number",  "gaz.key",        "gaz.mode",
    "w[-2]",      "pos[-2]",     "chunk[-2]",
    "w[-1]",      "pos[-1]",     "chunk[-1]",
    "w[+1]",      "pos[+1]",     "chunk[+1]",
    "w[+2]",      "pos[+2]",     "chunk[+2]",
};

namespace {

std::optional<std::size_t> gazetteer_index(std::string_view name) {
  for (std::size_t i = 0; i < kGazetteerNames.size(); ++i)
    if (kGazetteerNames[i] == name) return i;
  return std::nullopt;
}

}  // namespace

Gazetteer::Gazetteer(std::string name, const std::vector<std::string>& entries)
    : name_(std::move(name)) {
  for (const auto& e : entries) {
    auto n = normalize_token(e);
    if (!n.empty()) entries_.insert(std::move(n));
  }
}

bool Gazetteer::contains(std::string_view surface) const {
  return entries_.count(normalize_token(surface)) > 0;
}

std::vector<std::string> Gazetteer::entries() const {
  std::vector<std::string> out(entries_.begin(), entries_.end());
  std::sort(out.begin(), out.end());
  return out;
}

Gazetteer load_gazetteer(std::string_view name, const std::string& path) {
  if (!gazetteer_index(name)) throw DataError("unknown gazetteer '" + std::string(name) + "'");
  std::ifstream in(path);
  if (!in) throw DataError("cannot open gazetteer file '" + path + "'");
  std::vector<std::string> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.find_first_of(" \t") != std::string_view::npos)
      throw ParseError(path, line_no, "gazetteer entries are single tokens");
    entries.emplace_back(t);
  }
  return Gazetteer(std::string(name), entries);
}

void GazetteerSet::add(Gazetteer gazetteer) {
  auto idx = gazetteer_index(gazetteer.name());
  if (!idx) throw DataError("unknown gazetteer '" + gazetteer.name() + "'");
  slots_[*idx] = std::move(gazetteer);
}

const Gazetteer* GazetteerSet::find(std::string_view name) const {
  auto idx = gazetteer_index(name);
  if (!idx || !slots_[*idx]) return nullptr;
  return &*slots_[*idx];
}

bool GazetteerSet::complete() const {
  return std::all_of(slots_.begin(), slots_.end(), [](const auto& s) { return s.has_value(); });
}

void GazetteerSet::require_complete() const {
  for (std::size_t i = 0; i < slots_.size(); ++i)
    if (!slots_[i]) throw DataError("missing gazetteer '" + std::string(kGazetteerNames[i]) + "'");
}

GazetteerSet load_gazetteer_dir(const std::string& dir) {
  GazetteerSet set;
  for (auto name : kGazetteerNames)
    set.add(load_gazetteer(name, dir + "/" + std::string(name) + ".txt"));
  return set;
}

// --- POS / chunk ------------------------------------------------------------------

namespace {

const std::unordered_map<std::string, std::string>& closed_class_lexicon() {
  static const auto* lexicon = [] {
    auto* m = new std::unordered_map<std::string, std::string>;
    auto add = [m](const char* tag, std::initializer_list<const char*> words) {
      for (const char* w : words) m->emplace(w, tag);
    };
    add("DT", {"the", "a", "an", "this", "that", "these", "those", "some", "every"});
    add("IN", {"in", "of", "for", "from", "on", "at", "by", "with", "into", "about", "after",
               "before", "during", "than", "like"});
    add("TO", {"to"});
    add("CC", {"and", "but", "or", "nor"});
    add("PRP", {"i", "you", "he", "she", "it", "we", "they", "me", "him", "us", "them"});
    add("PRP$", {"my", "your", "his", "her", "its", "our", "their"});
    add("EX", {"there"});
    add("MD", {"can", "could", "will", "would", "should", "must", "may", "might"});
    add("VBZ", {"is", "has", "does"});
    add("VBP", {"are", "am", "have", "do"});
    add("VBD", {"was", "were", "had", "did"});
    add("RB", {"not", "very", "so", "too", "just", "only", "now", "today", "tonight"});
    add("UH", {"hm", "oh", "wow", "yes"});
    return m;
  }();
  return *lexicon;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() > suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

std::string heuristic_pos(std::string_view surface) {
  if (is_all_digits(surface)) return "CD";
  if (is_all_punct(surface)) {
    if (surface == ",") return ",";
    if (surface.find_first_not_of(".!?") == std::string_view::npos) return ".";
    return ":";
  }
  if (surface[0] == '#') return "HT";
  if (surface[0] == '@') return "USR";
  std::string lower = to_lower(surface);
  const auto& lex = closed_class_lexicon();
  if (auto it = lex.find(lower); it != lex.end()) return it->second;
  if (starts_with_capital(surface)) return "NNP";
  if (ends_with(lower, "ly")) return "RB";
  if (ends_with(lower, "ing")) return "VBG";
  if (ends_with(lower, "ed")) return "VBD";
  for (std::string_view adj : {"ous", "ful", "ive", "able", "ic", "al"})
    if (ends_with(lower, adj) && lower.size() > 4) return "JJ";
  if (ends_with(lower, "s") && !ends_with(lower, "ss") && lower.size() > 3) return "NNS";
  return "NN";
}

bool is_nominal(std::string_view pos) {
  return pos == "NN" || pos == "NNS" || pos == "NNP" || pos == "NNPS" || pos == "CD" ||
         pos == "PRP";
}

}  // namespace

std::vector<std::pair<std::string, std::string>> fallback_pos_chunk(
    const std::vector<std::string>& surfaces) {
  std::vector<std::pair<std::string, std::string>> out;
  out.reserve(surfaces.size());
  for (const auto& s : surfaces) {
    std::string pos = s.empty() ? std::string("NN") : heuristic_pos(s);
    std::string chunk = is_nominal(pos) ? "B-NP" : "O";
    out.emplace_back(std::move(pos), std::move(chunk));
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> resolve_pos_chunk(const TaggedTweet& tweet) {
  std::vector<std::string> surfaces;
  surfaces.reserve(tweet.tokens.size());
  for (const auto& t : tweet.tokens) surfaces.push_back(t.surface);
  auto out = fallback_pos_chunk(surfaces);
  for (std::size_t i = 0; i < tweet.tokens.size(); ++i) {
    const Token& t = tweet.tokens[i];
    if (t.pos != kUnknownTag) out[i].first = t.pos;
    if (t.chunk != kUnknownTag) out[i].second = t.chunk;
  }
  return out;
}

// --- Feature extraction ----------------------------------------------------------

std::string_view feature_slot(std::string_view feature) {
  return feature.substr(0, feature.find('='));
}

namespace {

std::string slot(std::string_view name, std::string_view value) {
  std::string out;
  out.reserve(name.size() + value.size() + 1);
  out += name;
  out += '=';
  out += value;
  return out;
}

FeatureVector features_at(const TaggedTweet& tweet,
                          const std::vector<std::pair<std::string, std::string>>& tags,
                          std::size_t index, const GazetteerSet& gazetteers) {
  const std::size_t n = tweet.tokens.size();
  const std::string& surface = tweet.tokens[index].surface;

  FeatureVector fv;
  fv.features.reserve(kNumFeatureSlots);
  fv.position = n > 1 ? static_cast<double>(index) / static_cast<double>(n - 1) : 0.0;

  char bucket[8];
  std::snprintf(bucket, sizeof(bucket), "%.1f", std::round(fv.position * 10.0) / 10.0);

  std::size_t k = 0;
  auto emit = [&](std::string_view value) { fv.features.push_back(slot(kFeatureSlotNames[k++], value)); };

  emit(tags[index].first);
  emit(tags[index].second);
  emit(bucket);
  emit(starts_with_capital(surface) ? "1" : "0");
  emit(is_all_digits(surface) ? "1" : "0");
  for (auto name : kGazetteerNames) emit(gazetteers.find(name)->contains(surface) ? "1" : "0");

  for (int offset : {-2, -1, 1, 2}) {
    auto j = static_cast<std::ptrdiff_t>(index) + offset;
    if (j < 0 || j >= static_cast<std::ptrdiff_t>(n)) {
      std::string_view sentinel = j < 0 ? "<BOS>" : "<EOS>";
      emit(sentinel);
      emit(sentinel);
      emit(sentinel);
    } else {
      auto u = static_cast<std::size_t>(j);
      emit(to_lower(tweet.tokens[u].surface));
      emit(tags[u].first);
      emit(tags[u].second);
    }
  }
  return fv;
}

}  // namespace

FeatureVector extract_features(const TaggedTweet& tweet, std::size_t index,
                               const GazetteerSet& gazetteers) {
  gazetteers.require_complete();
  if (index >= tweet.tokens.size())
    throw DataError("token index " + std::to_string(index) + " out of range for tweet of " +
                    std::to_string(tweet.tokens.size()) + " tokens");
  return features_at(tweet, resolve_pos_chunk(tweet), index, gazetteers);
}

std::vector<FeatureVector> extract_tweet_features(const TaggedTweet& tweet,
                                                  const GazetteerSet& gazetteers) {
  gazetteers.require_complete();
  auto tags = resolve_pos_chunk(tweet);
  std::vector<FeatureVector> out;
  out.reserve(tweet.tokens.size());
  for (std::size_t i = 0; i < tweet.tokens.size(); ++i)
    out.push_back(features_at(tweet, tags, i, gazetteers));
  return out;
}

}  // namespace musener
