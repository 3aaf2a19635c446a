#include "musener/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>

#include "json.hpp"

#include "musener/error.hpp"
#include "musener/text.hpp"

namespace musener {

namespace {

constexpr std::array<std::string_view, kNumLabels> kLabelNames = {"O", "B-CONTR", "I-CONTR",
                                                                  "B-WORK", "I-WORK"};

bool is_begin(Label l) { return l == Label::BContr || l == Label::BWork; }

EntityType type_of(Label l) {
  return (l == Label::BContr || l == Label::IContr) ? EntityType::Contributor
                                                    : EntityType::MusicalWork;
}

Label begin_label(EntityType t) {
  return t == EntityType::Contributor ? Label::BContr : Label::BWork;
}

Label inside_label(EntityType t) {
  return t == EntityType::Contributor ? Label::IContr : Label::IWork;
}

}  // namespace

std::string_view label_name(Label label) { return kLabelNames[static_cast<std::size_t>(label)]; }

Label parse_label(std::string_view name) {
  for (std::size_t i = 0; i < kNumLabels; ++i)
    if (kLabelNames[i] == name) return kAllLabels[i];
  throw DataError("unknown label '" + std::string(name) + "'");
}

std::string_view entity_type_name(EntityType type) {
  return type == EntityType::Contributor ? "Contributor" : "Musical Work";
}

std::string_view entity_type_code(EntityType type) {
  return type == EntityType::Contributor ? "C" : "MW";
}

TaggedTweet make_tweet(std::string id, std::optional<std::int64_t> timestamp,
                       std::string_view text) {
  TaggedTweet tweet;
  tweet.id = std::move(id);
  tweet.timestamp = timestamp;
  for (auto& surface : tokenize(text)) tweet.tokens.push_back(Token{std::move(surface)});
  return tweet;
}

// --- IOB corpus files ---------------------------------------------------------

namespace {

void parse_header(std::string_view line, TaggedTweet& tweet, const std::string& source,
                  std::size_t line_no) {
  line.remove_prefix(1);
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    std::size_t j = line.find(' ', i);
    if (j == std::string_view::npos) j = line.size();
    std::string_view field = line.substr(i, j - i);
    i = j;
    if (field.empty()) continue;
    auto eq = field.find('=');
    if (eq == std::string_view::npos)
      throw ParseError(source, line_no, "header field without '=': '" + std::string(field) + "'");
    std::string_view key = field.substr(0, eq);
    std::string_view value = field.substr(eq + 1);
    if (key == "id") {
      tweet.id = std::string(value);
    } else if (key == "ts") {
      try {
        tweet.timestamp = parse_iso8601(value);
      } catch (const DataError& e) {
        throw ParseError(source, line_no, e.what());
      }
    } else {
      throw ParseError(source, line_no, "unknown header field '" + std::string(key) + "'");
    }
  }
}

}  // namespace

Corpus read_corpus(std::istream& in, const std::string& source) {
  Corpus corpus;
  TaggedTweet current;
  bool open = false;         // header or tokens seen for the current tweet
  bool has_header = false;
  int labeled = -1;  // -1 until the first token line of a tweet
  std::vector<Label> labels;
  std::size_t first_token_line = 0;

  auto finish = [&] {
    if (!open) return;
    if (labeled == 1) current.labels = std::move(labels);
    corpus.push_back(std::move(current));
    current = TaggedTweet{};
    labels.clear();
    labeled = -1;
    open = false;
    has_header = false;
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      finish();
      continue;
    }
    if (line[0] == '#' && line.find('\t') == std::string::npos) {
      if (has_header || !current.tokens.empty())
        throw ParseError(source, line_no, "header inside a tweet (missing blank line?)");
      parse_header(line, current, source, line_no);
      has_header = true;
      open = true;
      continue;
    }
    auto cols = split(line, '\t');
    if (cols.size() != 4)
      throw ParseError(source, line_no,
                       "expected 4 tab-separated columns, got " + std::to_string(cols.size()));
    for (const auto& c : cols)
      if (c.empty()) throw ParseError(source, line_no, "empty column");
    if (current.tokens.empty()) first_token_line = line_no;
    bool has_label = cols[3] != "-";
    if (labeled >= 0 && (labeled == 1) != has_label)
      throw ParseError(source, line_no,
                       "labels/tokens length mismatch: tweet starting at line " +
                           std::to_string(first_token_line) + " mixes labeled and unlabeled tokens");
    labeled = has_label ? 1 : 0;
    if (has_label) {
      try {
        labels.push_back(parse_label(cols[3]));
      } catch (const DataError& e) {
        throw ParseError(source, line_no, e.what());
      }
    }
    current.tokens.push_back(Token{std::move(cols[0]), std::move(cols[1]), std::move(cols[2])});
    open = true;
  }
  finish();
  return corpus;
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const auto& tweet : corpus) {
    if (tweet.labels && tweet.labels->size() != tweet.tokens.size())
      throw DataError("tweet '" + tweet.id + "': labels/tokens length mismatch");
    if (!tweet.id.empty() || tweet.timestamp) {
      out << '#';
      if (!tweet.id.empty()) out << " id=" << tweet.id;
      if (tweet.timestamp) out << " ts=" << format_iso8601(*tweet.timestamp);
      out << '\n';
    }
    for (std::size_t i = 0; i < tweet.tokens.size(); ++i) {
      const Token& t = tweet.tokens[i];
      out << t.surface << '\t' << t.pos << '\t' << t.chunk << '\t'
          << (tweet.labels ? label_name((*tweet.labels)[i]) : std::string_view("-")) << '\n';
    }
    out << '\n';
  }
}

Corpus load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file '" + path + "'");
  return read_corpus(in, path);
}

void save_corpus(const std::string& path, const Corpus& corpus) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write corpus file '" + path + "'");
  write_corpus(out, corpus);
  if (!out) throw DataError("error writing corpus file '" + path + "'");
}

// --- Spans --------------------------------------------------------------------

std::vector<EntitySpan> spans_from_iob(std::span<const Label> labels) {
  std::vector<EntitySpan> spans;
  std::optional<EntitySpan> open;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    Label l = labels[i];
    if (l == Label::O) {
      if (open) spans.push_back(*std::exchange(open, std::nullopt));
      continue;
    }
    EntityType t = type_of(l);
    if (is_begin(l) || !open || open->etype != t) {
      if (open) spans.push_back(*open);
      open = EntitySpan{t, i, i + 1, {}};
    } else {
      open->end = i + 1;
    }
  }
  if (open) spans.push_back(*open);
  return spans;
}

std::vector<EntitySpan> spans_from_iob(std::span<const std::string> labels) {
  std::vector<Label> parsed;
  parsed.reserve(labels.size());
  for (const auto& l : labels) parsed.push_back(parse_label(l));
  return spans_from_iob(std::span<const Label>(parsed));
}

std::string join_surfaces(const std::vector<Token>& tokens, std::size_t start, std::size_t end) {
  std::string out;
  for (std::size_t i = start; i < end && i < tokens.size(); ++i) {
    if (i > start) out += ' ';
    out += tokens[i].surface;
  }
  return out;
}

std::vector<EntitySpan> tweet_spans(const TaggedTweet& tweet) {
  if (!tweet.labels) throw DataError("tweet '" + tweet.id + "' is unlabeled");
  auto spans = spans_from_iob(std::span<const Label>(*tweet.labels));
  for (auto& s : spans) s.surface = join_surfaces(tweet.tokens, s.start, s.end);
  return spans;
}

std::vector<Label> iob_from_spans(std::span<const EntitySpan> spans, std::size_t n_tokens) {
  std::vector<Label> labels(n_tokens, Label::O);
  std::vector<bool> used(n_tokens, false);
  for (const auto& s : spans) {
    if (s.start >= s.end || s.end > n_tokens)
      throw DataError("span [" + std::to_string(s.start) + "," + std::to_string(s.end) +
                      ") out of range for " + std::to_string(n_tokens) + " tokens");
    for (std::size_t i = s.start; i < s.end; ++i) {
      if (used[i])
        throw DataError("overlapping spans at token " + std::to_string(i));
      used[i] = true;
      labels[i] = i == s.start ? begin_label(s.etype) : inside_label(s.etype);
    }
  }
  return labels;
}

// --- Splitting ----------------------------------------------------------------

CorpusSplit split_corpus(const Corpus& corpus, std::uint64_t seed, std::array<double, 3> ratios) {
  if (corpus.empty()) throw DataError("cannot split an empty corpus");
  double sum = 0.0;
  for (double r : ratios) {
    if (!(r >= 0.0) || r > 1.0) throw DataError("split ratios must lie in [0,1]");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw DataError("split ratios must sum to 1");

  const std::size_t n = corpus.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  // Fisher-Yates over mt19937_64, whose output sequence is fixed by the
  // standard (unlike std::shuffle / distributions).
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }

  auto part_size = [n](double r) {
    return static_cast<std::size_t>(std::floor(r * static_cast<double>(n) + 1e-9));
  };
  const std::size_t n_a = part_size(ratios[1]);
  const std::size_t n_b = part_size(ratios[2]);

  std::vector<std::size_t> a(order.begin(), order.begin() + n_a);
  std::vector<std::size_t> b(order.begin() + n_a, order.begin() + n_a + n_b);
  std::vector<std::size_t> train(order.begin() + n_a + n_b, order.end());
  for (auto* part : {&a, &b, &train}) std::sort(part->begin(), part->end());

  CorpusSplit out;
  for (auto i : train) out.train.push_back(corpus[i]);
  for (auto i : a) out.test_a.push_back(corpus[i]);
  for (auto i : b) out.test_b.push_back(corpus[i]);
  return out;
}

// --- Bot messages and schedule ------------------------------------------------

namespace {

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char c : trim(s)) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      pending_space = true;
      continue;
    }
    if (pending_space && !out.empty()) out += ' ';
    pending_space = false;
    out += c;
  }
  return out;
}

// Start of the hashtag block: the first '#' at the start of a
// whitespace-separated word. "C#" inside a title does not qualify.
std::size_t hashtag_block_start(std::string_view s) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '#') continue;
    if (i == 0 || s[i - 1] == ' ' || s[i - 1] == '\t' || s[i - 1] == '\n') return i;
  }
  return s.size();
}

}  // namespace

ScheduleEntry parse_bot_tweet(std::string_view text, std::int64_t timestamp) {
  constexpr std::string_view kPrefix = "now playing";
  std::string flat = collapse_whitespace(text);
  if (flat.size() < kPrefix.size() || to_lower(flat.substr(0, kPrefix.size())) != kPrefix)
    throw DataError("missing 'Now Playing' prefix");

  std::string_view body = std::string_view(flat).substr(kPrefix.size());
  body = body.substr(0, hashtag_block_start(body));

  constexpr std::string_view kSep = " - ";
  auto sep = body.rfind(kSep);
  if (sep == std::string_view::npos) throw DataError("missing ' - ' separator");

  ScheduleEntry entry;
  entry.timestamp = timestamp;
  entry.raw = std::string(text);
  entry.work = std::string(trim(body.substr(sep + kSep.size())));
  for (const auto& name : split(body.substr(0, sep), ',')) {
    auto t = trim(name);
    if (!t.empty()) entry.contributors.emplace_back(t);
  }
  if (entry.contributors.empty()) throw DataError("no contributors before ' - '");
  if (entry.work.empty()) throw DataError("empty work title");
  return entry;
}

ScheduleBuild build_schedule(std::span<const RawMessage> messages) {
  ScheduleBuild out;
  for (const auto& m : messages) {
    try {
      out.schedule.entries.push_back(parse_bot_tweet(m.text, m.timestamp));
    } catch (const DataError&) {
      ++out.skipped;
    }
  }
  std::stable_sort(out.schedule.entries.begin(), out.schedule.entries.end(),
                   [](const ScheduleEntry& a, const ScheduleEntry& b) {
                     return a.timestamp < b.timestamp;
                   });
  return out;
}

std::vector<RawMessage> read_messages_jsonl(std::istream& in, const std::string& source) {
  std::vector<RawMessage> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      throw ParseError(source, line_no, "invalid JSON");
    }
    if (!j.is_object() || !j.contains("ts") || !j.contains("text") || !j["text"].is_string())
      throw ParseError(source, line_no, "expected an object with 'ts' and 'text'");
    RawMessage m;
    const auto& ts = j["ts"];
    try {
      if (ts.is_string())
        m.timestamp = parse_iso8601(ts.get<std::string>());
      else if (ts.is_number_integer())
        m.timestamp = ts.get<std::int64_t>();
      else
        throw DataError("'ts' must be an ISO-8601 string or integer seconds");
    } catch (const ParseError&) {
      throw;
    } catch (const DataError& e) {
      throw ParseError(source, line_no, e.what());
    }
    m.text = j["text"].get<std::string>();
    if (j.contains("id")) {
      const auto& id = j["id"];
      if (id.is_string())
        m.id = id.get<std::string>();
      else if (id.is_number_integer())
        m.id = std::to_string(id.get<std::int64_t>());
      else
        throw ParseError(source, line_no, "'id' must be a string or integer");
      if (m.id.find_first_of(" \t\n") != std::string::npos)
        throw ParseError(source, line_no, "'id' must not contain whitespace");
    }
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<RawMessage> load_messages_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open message file '" + path + "'");
  return read_messages_jsonl(in, path);
}

void write_schedule_jsonl(std::ostream& out, const Schedule& schedule) {
  for (const auto& e : schedule.entries) {
    nlohmann::ordered_json j;
    j["ts"] = format_iso8601(e.timestamp);
    j["text"] = e.raw;
    j["contributors"] = e.contributors;
    j["work"] = e.work;
    out << j.dump() << '\n';
  }
}

// --- Statistics -----------------------------------------------------------------

double CorpusStats::contributor_share() const {
  return total_tokens == 0 ? 0.0 : static_cast<double>(contributor_tokens) / total_tokens;
}

double CorpusStats::work_share() const {
  return total_tokens == 0 ? 0.0 : static_cast<double>(work_tokens) / total_tokens;
}

CorpusStats corpus_stats(const Corpus& corpus) {
  CorpusStats s;
  for (const auto& tweet : corpus) {
    if (!tweet.labels) throw DataError("corpus statistics need labels; tweet '" + tweet.id + "' has none");
    ++s.tweets;
    s.total_tokens += tweet.tokens.size();
    for (Label l : *tweet.labels) {
      if (l == Label::O) continue;
      if (type_of(l) == EntityType::Contributor)
        ++s.contributor_tokens;
      else
        ++s.work_tokens;
    }
  }
  return s;
}

}  // namespace musener
