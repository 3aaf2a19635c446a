#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace musener {

// Splits informal text into surface tokens. Whitespace separates chunks;
// inside a chunk, punctuation runs become their own tokens except for a
// single '.', '\'' or '-' between word characters ("No.6", "didn't"), a
// single trailing '.' after a word ("Op."), and a leading '#' or '@' on a
// word (hashtags, mentions). Bytes >= 0x80 count as word characters.
std::vector<std::string> tokenize(std::string_view text);

// Lowercases and strips leading/trailing ASCII punctuation. Pure
// punctuation yields the empty string.
std::string normalize_token(std::string_view surface);

// ASCII plus Latin-1 supplement lowercasing of UTF-8 text.
std::string to_lower(std::string_view text);

// True when the first character is an uppercase letter (ASCII or Latin-1).
bool starts_with_capital(std::string_view surface);

// True when the token is a non-empty run of ASCII digits.
bool is_all_digits(std::string_view surface);

// True when every byte is ASCII punctuation (and the string is non-empty).
bool is_all_punct(std::string_view surface);

std::string_view trim(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);

// Parses "YYYY-MM-DDTHH:MM:SS" followed by "Z", "+HH:MM" or "-HH:MM"
// (a space may replace 'T'; no suffix means UTC). Returns seconds since
// the Unix epoch. Throws DataError on malformed input.
std::int64_t parse_iso8601(std::string_view text);

// Formats seconds since the epoch as "YYYY-MM-DDTHH:MM:SSZ".
std::string format_iso8601(std::int64_t seconds);

// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

// Strict decimal parse; throws DataError on trailing garbage.
double parse_double(std::string_view text);

}  // namespace musener
