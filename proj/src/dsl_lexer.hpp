#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "kbridge/dsl.hpp"

namespace kbridge::dsl::detail {

enum class Tok { Name, String, Number, Op, Newline, Indent, Dedent, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;  // identifier, decoded string value, number or operator
    std::size_t line = 1;
    std::size_t column = 1;
};

/// `layout` produces NEWLINE/INDENT/DEDENT tokens the way Python does; without
/// it the source is treated as a flat token stream (used by extract_calls).
std::vector<Token> lex(std::string_view src, bool layout = true);

}  // namespace kbridge::dsl::detail
