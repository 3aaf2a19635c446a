#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace musener {

inline constexpr std::string_view kUnknownTag = "UNK";

struct Token {
  std::string surface;
  std::string pos{kUnknownTag};
  std::string chunk{kUnknownTag};

  bool operator==(const Token&) const = default;
};

// IOB tag set. The enumerator order is the fixed label order used for
// tie-breaking by the tagger (O first).
enum class Label : std::uint8_t { O, BContr, IContr, BWork, IWork };

inline constexpr std::size_t kNumLabels = 5;
inline constexpr std::array<Label, kNumLabels> kAllLabels = {Label::O, Label::BContr, Label::IContr,
                                                             Label::BWork, Label::IWork};

std::string_view label_name(Label label);
// Throws DataError for anything outside the tag set.
Label parse_label(std::string_view name);

enum class EntityType : std::uint8_t { Contributor, MusicalWork };

inline constexpr std::array<EntityType, 2> kAllEntityTypes = {EntityType::Contributor,
                                                              EntityType::MusicalWork};

std::string_view entity_type_name(EntityType type);  // "Contributor" / "Musical Work"
std::string_view entity_type_code(EntityType type);  // "C" / "MW"

struct TaggedTweet {
  std::string id;
  std::optional<std::int64_t> timestamp;  // seconds since epoch, UTC
  std::vector<Token> tokens;
  std::optional<std::vector<Label>> labels;

  bool labeled() const { return labels.has_value(); }
  bool operator==(const TaggedTweet&) const = default;
};

using Corpus = std::vector<TaggedTweet>;

// Token range [start, end) of one entity.
struct EntitySpan {
  EntityType etype;
  std::size_t start;
  std::size_t end;
  std::string surface;

  bool operator==(const EntitySpan&) const = default;
};

// Builds a tweet from raw text with UNK POS/chunk columns and no labels.
TaggedTweet make_tweet(std::string id, std::optional<std::int64_t> timestamp,
                       std::string_view text);

// --- IOB corpus files -----------------------------------------------------

// Reads the tab-separated IOB format. `source` names the input in error
// messages. Throws ParseError on malformed lines.
Corpus read_corpus(std::istream& in, const std::string& source = "<stream>");
void write_corpus(std::ostream& out, const Corpus& corpus);

Corpus load_corpus(const std::string& path);
void save_corpus(const std::string& path, const Corpus& corpus);

// --- Spans ----------------------------------------------------------------

// Maximal B-X (I-X)* runs become spans; a dangling I-X opens a new span.
// Surfaces are left empty.
std::vector<EntitySpan> spans_from_iob(std::span<const Label> labels);
std::vector<EntitySpan> spans_from_iob(std::span<const std::string> labels);

// Same as above with surfaces joined from the tweet tokens. Requires labels.
std::vector<EntitySpan> tweet_spans(const TaggedTweet& tweet);

// Throws DataError on overlapping or out-of-range spans.
std::vector<Label> iob_from_spans(std::span<const EntitySpan> spans, std::size_t n_tokens);

std::string join_surfaces(const std::vector<Token>& tokens, std::size_t start, std::size_t end);

// --- Splitting --------------------------------------------------------------

struct CorpusSplit {
  Corpus train;
  Corpus test_a;
  Corpus test_b;
};

// Seeded random partition at tweet granularity. test_a and test_b receive
// floor(ratio * N) tweets each, train gets the remainder. Tweets keep their
// original relative order inside each part.
CorpusSplit split_corpus(const Corpus& corpus, std::uint64_t seed,
                         std::array<double, 3> ratios = {0.8, 0.1, 0.1});

// --- Bot messages and schedule -----------------------------------------------

struct ScheduleEntry {
  std::int64_t timestamp = 0;
  std::vector<std::string> contributors;
  std::string work;
  std::string raw;

  bool operator==(const ScheduleEntry&) const = default;
};

// Entries sorted ascending by timestamp; ties keep input order.
struct Schedule {
  std::vector<ScheduleEntry> entries;
};

// Parses "Now Playing <name>, <name> - <work> #tag,#tag". Throws DataError
// when the prefix or the " - " separator is missing or a field is empty.
ScheduleEntry parse_bot_tweet(std::string_view text, std::int64_t timestamp);

struct RawMessage {
  std::int64_t timestamp = 0;
  std::string text;
  std::string id;  // optional "id" field
};

struct ScheduleBuild {
  Schedule schedule;
  std::size_t skipped = 0;
};

ScheduleBuild build_schedule(std::span<const RawMessage> messages);

// One JSON object per line with "ts" (ISO-8601 string or integer seconds)
// and "text", optionally "id". Blank lines are ignored.
std::vector<RawMessage> read_messages_jsonl(std::istream& in, const std::string& source = "<stream>");
std::vector<RawMessage> load_messages_jsonl(const std::string& path);

// Schedule as JSON lines: ts, text, contributors, work. Readable back by
// read_messages_jsonl.
void write_schedule_jsonl(std::ostream& out, const Schedule& schedule);

// --- Statistics ---------------------------------------------------------------

struct CorpusStats {
  std::size_t tweets = 0;
  std::size_t total_tokens = 0;
  std::size_t contributor_tokens = 0;
  std::size_t work_tokens = 0;

  double contributor_share() const;  // fraction of total tokens, 0 when empty
  double work_share() const;
};

// Throws DataError when any tweet is unlabeled.
CorpusStats corpus_stats(const Corpus& corpus);

}  // namespace musener
