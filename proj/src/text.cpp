#include "musener/text.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

#include "musener/error.hpp"

namespace musener {

namespace {

bool is_ascii_punct(unsigned char c) {
  return c < 0x80 && ((c >= 0x21 && c <= 0x2f) || (c >= 0x3a && c <= 0x40) ||
                      (c >= 0x5b && c <= 0x60) || (c >= 0x7b && c <= 0x7e));
}

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_word_byte(unsigned char c) { return !is_space(c) && !is_ascii_punct(c); }

bool is_joiner(char c) { return c == '.' || c == '\'' || c == '-'; }

bool is_prefix_mark(char c) { return c == '#' || c == '@'; }

void tokenize_chunk(std::string_view chunk, std::vector<std::string>& out) {
  // Alternating maximal runs of word bytes and punctuation bytes.
  struct Run {
    std::string_view text;
    bool word;
  };
  std::vector<Run> runs;
  std::size_t i = 0;
  while (i < chunk.size()) {
    bool word = is_word_byte(static_cast<unsigned char>(chunk[i]));
    std::size_t j = i;
    while (j < chunk.size() && is_word_byte(static_cast<unsigned char>(chunk[j])) == word) ++j;
    runs.push_back({chunk.substr(i, j - i), word});
    i = j;
  }

  std::string current;
  auto flush = [&] {
    if (!current.empty()) out.push_back(std::move(current));
    current.clear();
  };

  for (std::size_t r = 0; r < runs.size(); ++r) {
    const Run& run = runs[r];
    if (run.word) {
      current += run.text;
      continue;
    }
    bool prev_word = r > 0 && runs[r - 1].word;
    bool next_word = r + 1 < runs.size() && runs[r + 1].word;
    if (run.text.size() == 1 && prev_word && next_word && is_joiner(run.text[0])) {
      current += run.text;
      continue;
    }
    if (run.text.size() == 1 && prev_word && !next_word && r + 1 == runs.size() &&
        run.text[0] == '.') {
      current += run.text;
      continue;
    }
    if (next_word && is_prefix_mark(run.text.back())) {
      // "...#tag" keeps the mark with the word and splits off the rest.
      flush();
      if (run.text.size() > 1) out.emplace_back(run.text.substr(0, run.text.size() - 1));
      current.assign(1, run.text.back());
      continue;
    }
    flush();
    out.emplace_back(run.text);
  }
  flush();
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) tokenize_chunk(text.substr(i, j - i), out);
    i = j;
  }
  return out;
}

std::string to_lower(std::string_view text) {
  std::string out(text);
  for (std::size_t i = 0; i < out.size(); ++i) {
    unsigned char c = static_cast<unsigned char>(out[i]);
    if (c >= 'A' && c <= 'Z') {
      out[i] = static_cast<char>(c + 32);
    } else if (c == 0xC3 && i + 1 < out.size()) {
      // U+00C0..U+00DE except U+00D7 map to +0x20.
      unsigned char d = static_cast<unsigned char>(out[i + 1]);
      if (d >= 0x80 && d <= 0x9E && d != 0x97) out[i + 1] = static_cast<char>(d + 0x20);
      ++i;
    }
  }
  return out;
}

std::string normalize_token(std::string_view surface) {
  std::size_t b = 0;
  std::size_t e = surface.size();
  while (b < e && is_ascii_punct(static_cast<unsigned char>(surface[b]))) ++b;
  while (e > b && is_ascii_punct(static_cast<unsigned char>(surface[e - 1]))) --e;
  return to_lower(surface.substr(b, e - b));
}

bool starts_with_capital(std::string_view surface) {
  if (surface.empty()) return false;
  unsigned char c = static_cast<unsigned char>(surface[0]);
  if (c >= 'A' && c <= 'Z') return true;
  if (c == 0xC3 && surface.size() > 1) {
    unsigned char d = static_cast<unsigned char>(surface[1]);
    return d >= 0x80 && d <= 0x9E && d != 0x97;
  }
  return false;
}

bool is_all_digits(std::string_view surface) {
  if (surface.empty()) return false;
  for (char c : surface)
    if (c < '0' || c > '9') return false;
  return true;
}

bool is_all_punct(std::string_view surface) {
  if (surface.empty()) return false;
  for (char c : surface)
    if (!is_ascii_punct(static_cast<unsigned char>(c))) return false;
  return true;
}

std::string_view trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && is_space(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      return out;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

namespace {

int read_int(std::string_view text, std::size_t pos, std::size_t len) {
  if (pos + len > text.size()) throw DataError("malformed timestamp: '" + std::string(text) + "'");
  int value = 0;
  for (std::size_t i = pos; i < pos + len; ++i) {
    char c = text[i];
    if (c < '0' || c > '9') throw DataError("malformed timestamp: '" + std::string(text) + "'");
    value = value * 10 + (c - '0');
  }
  return value;
}

void expect_char(std::string_view text, std::size_t pos, std::string_view allowed) {
  if (pos >= text.size() || allowed.find(text[pos]) == std::string_view::npos)
    throw DataError("malformed timestamp: '" + std::string(text) + "'");
}

}  // namespace

std::int64_t parse_iso8601(std::string_view text) {
  using namespace std::chrono;
  text = trim(text);
  int y = read_int(text, 0, 4);
  expect_char(text, 4, "-");
  int mo = read_int(text, 5, 2);
  expect_char(text, 7, "-");
  int d = read_int(text, 8, 2);
  expect_char(text, 10, "T ");
  int h = read_int(text, 11, 2);
  expect_char(text, 13, ":");
  int mi = read_int(text, 14, 2);
  expect_char(text, 16, ":");
  int s = read_int(text, 17, 2);

  year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 60)
    throw DataError("invalid timestamp: '" + std::string(text) + "'");

  std::size_t pos = 19;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
  }
  std::int64_t offset = 0;
  if (pos < text.size()) {
    if (text[pos] == 'Z' && pos + 1 == text.size()) {
      // UTC
    } else if ((text[pos] == '+' || text[pos] == '-') && pos + 6 == text.size()) {
      int oh = read_int(text, pos + 1, 2);
      expect_char(text, pos + 3, ":");
      int om = read_int(text, pos + 4, 2);
      offset = (oh * 3600 + om * 60) * (text[pos] == '+' ? 1 : -1);
    } else {
      throw DataError("malformed timestamp: '" + std::string(text) + "'");
    }
  }
  std::int64_t days = sys_days{ymd}.time_since_epoch().count();
  return days * 86400 + h * 3600 + mi * 60 + s - offset;
}

std::string format_iso8601(std::int64_t seconds) {
  using namespace std::chrono;
  std::int64_t days = seconds >= 0 ? seconds / 86400 : (seconds - 86399) / 86400;
  std::int64_t rem = seconds - days * 86400;
  year_month_day ymd{sys_days{std::chrono::days{days}}};
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(rem / 3600), static_cast<int>((rem / 60) % 60),
                static_cast<int>(rem % 60));
  return buf;
}

std::string format_double(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  if (begin != end && *begin == '+') ++begin;
  auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end)
    throw DataError("not a number: '" + std::string(text) + "'");
  return value;
}

}  // namespace musener
