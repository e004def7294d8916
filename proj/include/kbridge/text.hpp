#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace kbridge::text {

/// Decodes UTF-8 into code points. Invalid bytes decode to U+FFFD.
std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);
void append_utf8(std::string& out, char32_t cp);

/// Number of code points in a UTF-8 string.
std::size_t length(std::string_view s);

/// Prefix of at most `max_chars` code points; never splits a multi-byte sequence.
std::string truncate(std::string_view s, std::size_t max_chars);

bool is_cjk(char32_t cp);
bool is_space(char32_t cp);
bool is_punct(char32_t cp);

char32_t fold_char(char32_t cp);
std::string case_fold(std::string_view s);

/// Maps full-width ASCII variants (U+FF01..U+FF5E) and the ideographic space
/// onto their half-width forms.
std::string to_half_width(std::string_view s);

std::string trim(std::string_view s);

/// Case-folded tokens. CJK ideographs are one token each; everything else is
/// split on whitespace and punctuation.
std::vector<std::string> tokenize(std::string_view s);

/// Same as tokenize() but deduplicated, keeping first-occurrence order.
std::vector<std::string> token_set(std::string_view s);

std::vector<std::string> split(std::string_view s, char delim);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

bool starts_with(std::string_view s, std::string_view prefix);

/// Sentences split on . ! ? and their full-width forms when followed by
/// whitespace or end of text. Terminators stay attached; pieces are trimmed.
std::vector<std::string> split_sentences(std::string_view s);

}  // namespace kbridge::text
