#include "dsl_lexer.hpp"

#include <cctype>

namespace kbridge::dsl::detail {
namespace {

bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }

class Lexer {
  public:
    Lexer(std::string_view src, bool layout) : src_(src), layout_(layout) {}

    std::vector<Token> run() {
        indents_.push_back(0);
        at_line_start_ = layout_;
        while (pos_ < src_.size()) {
            if (at_line_start_ && depth_ == 0) {
                if (handle_indentation()) continue;
            }
            char c = src_[pos_];
            if (c == '\n') {
                if (layout_ && depth_ == 0) {
                    emit(Tok::Newline, "");
                    at_line_start_ = true;
                }
                advance_line();
                continue;
            }
            if (c == ' ' || c == '\t' || c == '\r' || c == '\f') {
                advance();
                continue;
            }
            if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
                continue;
            }
            if (c == '\\' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '\n') {
                advance();
                advance_line();
                continue;
            }
            if (ident_start(static_cast<unsigned char>(c))) {
                lex_name();
            } else if (std::isdigit(static_cast<unsigned char>(c))) {
                lex_number();
            } else if (c == '\'' || c == '"') {
                lex_string();
            } else {
                lex_op();
            }
        }
        if (layout_) {
            if (!toks_.empty() && toks_.back().kind != Tok::Newline && toks_.back().kind != Tok::Dedent) {
                emit(Tok::Newline, "");
            }
            while (indents_.size() > 1) {
                indents_.pop_back();
                emit(Tok::Dedent, "");
            }
        }
        emit(Tok::End, "");
        return std::move(toks_);
    }

  private:
    // Returns true when it consumed a blank/comment line.
    bool handle_indentation() {
        std::size_t width = 0;
        std::size_t p = pos_;
        while (p < src_.size() && (src_[p] == ' ' || src_[p] == '\t')) {
            width += src_[p] == '\t' ? 4 : 1;
            ++p;
        }
        if (p >= src_.size() || src_[p] == '\n' || src_[p] == '#' || src_[p] == '\r') {
            while (pos_ < p) advance();
            while (pos_ < src_.size() && src_[pos_] != '\n') advance();
            if (pos_ < src_.size()) advance_line();
            return true;
        }
        while (pos_ < p) advance();
        at_line_start_ = false;
        if (width > indents_.back()) {
            indents_.push_back(width);
            emit(Tok::Indent, "");
        } else {
            while (width < indents_.back()) {
                indents_.pop_back();
                emit(Tok::Dedent, "");
            }
            if (width != indents_.back()) throw ParseError(line_, col_, "inconsistent indentation");
        }
        return false;
    }

    void lex_name() {
        auto start_col = col_;
        std::string s;
        while (pos_ < src_.size() && ident_char(static_cast<unsigned char>(src_[pos_]))) {
            s += src_[pos_];
            advance();
        }
        if (pos_ < src_.size() && (src_[pos_] == '\'' || src_[pos_] == '"') && s.size() <= 2) {
            throw ParseError(line_, start_col, "string prefix '" + s + "' is not supported");
        }
        toks_.push_back({Tok::Name, std::move(s), line_, start_col});
    }

    void lex_number() {
        auto start_col = col_;
        std::string s;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.' || src_[pos_] == '_')) {
            s += src_[pos_];
            advance();
        }
        toks_.push_back({Tok::Number, std::move(s), line_, start_col});
    }

    void lex_string() {
        auto start_line = line_;
        auto start_col = col_;
        char quote = src_[pos_];
        if (src_.substr(pos_, 3) == std::string(3, quote)) {
            throw ParseError(line_, col_, "triple-quoted strings are not supported");
        }
        advance();
        std::string s;
        while (true) {
            if (pos_ >= src_.size() || src_[pos_] == '\n') {
                throw ParseError(start_line, start_col, "unterminated string literal");
            }
            char c = src_[pos_];
            if (c == quote) {
                advance();
                break;
            }
            if (c == '\\' && pos_ + 1 < src_.size()) {
                char e = src_[pos_ + 1];
                advance();
                advance();
                switch (e) {
                    case 'n':
                        s += '\n';
                        break;
                    case 't':
                        s += '\t';
                        break;
                    case '\\':
                    case '\'':
                    case '"':
                        s += e;
                        break;
                    case '\n':
                        ++line_;
                        col_ = 1;
                        break;
                    default:
                        s += '\\';
                        s += e;
                }
                continue;
            }
            s += c;
            advance();
        }
        toks_.push_back({Tok::String, std::move(s), start_line, start_col});
    }

    void lex_op() {
        static const char* kTwo[] = {"+=", "-=", "==", "!=", "<=", ">=", "**", "//", "->"};
        auto start_col = col_;
        for (const char* op : kTwo) {
            if (src_.substr(pos_, 2) == op) {
                advance();
                advance();
                toks_.push_back({Tok::Op, op, line_, start_col});
                return;
            }
        }
        char c = src_[pos_];
        static const std::string_view kSingle = "()[]{},:=.+-*/%<>;@!&|^~";
        if (kSingle.find(c) == std::string_view::npos) {
            throw ParseError(line_, col_, std::string("unexpected character '") + c + "'");
        }
        if (c == '(' || c == '[' || c == '{') ++depth_;
        if ((c == ')' || c == ']' || c == '}') && depth_ > 0) --depth_;
        advance();
        toks_.push_back({Tok::Op, std::string(1, c), line_, start_col});
    }

    void emit(Tok k, std::string text) { toks_.push_back({k, std::move(text), line_, col_}); }

    void advance() {
        ++pos_;
        ++col_;
    }
    void advance_line() {
        ++pos_;
        ++line_;
        col_ = 1;
    }

    std::string_view src_;
    bool layout_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;
    int depth_ = 0;
    bool at_line_start_ = true;
    std::vector<std::size_t> indents_;
    std::vector<Token> toks_;
};

}  // namespace

std::vector<Token> lex(std::string_view src, bool layout) { return Lexer(src, layout).run(); }

}  // namespace kbridge::dsl::detail
