#include <set>

#include "dsl_lexer.hpp"
#include "kbridge/dsl.hpp"

namespace kbridge::dsl {

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
      line_(line),
      column_(column) {}

std::string_view builtin_name(Builtin b) {
    switch (b) {
        case Builtin::GetEntityInfo:
            return "get_entity_info";
        case Builtin::FindEntityOrValue:
            return "find_entity_or_value";
        case Builtin::FindRelationship:
            break;
    }
    return "find_relationship";
}

std::optional<Builtin> builtin_from_name(std::string_view name) {
    for (auto b : {Builtin::GetEntityInfo, Builtin::FindEntityOrValue, Builtin::FindRelationship}) {
        if (builtin_name(b) == name) return b;
    }
    return std::nullopt;
}

const std::vector<std::string>& builtin_params(Builtin b) {
    static const std::vector<std::string> kInfo = {"entity_aliases"};
    static const std::vector<std::string> kValue = {"entity_aliases", "relation_aliases"};
    static const std::vector<std::string> kRel = {"entity1_aliases", "entity2_aliases"};
    switch (b) {
        case Builtin::GetEntityInfo:
            return kInfo;
        case Builtin::FindEntityOrValue:
            return kValue;
        case Builtin::FindRelationship:
            break;
    }
    return kRel;
}

Expr Expr::string(std::string s) {
    Expr e;
    e.kind = Kind::String;
    e.text = std::move(s);
    return e;
}
Expr Expr::name(std::string n) {
    Expr e;
    e.kind = Kind::Name;
    e.text = std::move(n);
    return e;
}
Expr Expr::list(std::vector<Expr> items) {
    Expr e;
    e.kind = Kind::List;
    e.items = std::move(items);
    return e;
}
Expr Expr::indexed(Expr base, long long i) {
    Expr e;
    e.kind = Kind::Index;
    e.index = i;
    e.items.push_back(std::move(base));
    return e;
}
Expr Expr::none() { return Expr{}; }
Expr Expr::boolean(bool b) {
    Expr e;
    e.kind = Kind::Bool;
    e.flag = b;
    return e;
}

namespace detail {

const std::set<std::string>& keywords() {
    static const std::set<std::string> k = {"def",  "if",  "elif", "else", "for",  "in",    "return", "and",
                                            "or",   "not", "None", "True", "False", "pass", "while",  "import",
                                            "from", "lambda", "class", "with", "try", "except", "is", "break",
                                            "continue", "global", "yield", "del", "raise", "assert"};
    return k;
}

/// Recursive-descent parser over the token stream. Also used by
/// extract_calls() to parse isolated call expressions.
class Parser {
  public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    SearchProgram program() {
        skip_newlines();
        expect_name("def");
        expect_name("search");
        expect_op("(");
        expect_op(")");
        expect_op(":");
        expect(Tok::Newline, "newline after 'def search():'");
        expect(Tok::Indent, "indented function body");
        bound_.insert(std::string(kQueryGlobal));
        SearchProgram p;
        p.statements = block();
        expect(Tok::Dedent, "end of function body");
        skip_newlines();
        if (peek().kind != Tok::End) fail(peek(), "code outside the search function is not supported");
        if (p.statements.empty() || p.statements.back().kind != Stmt::Kind::Return) {
            fail(peek(), "search() must end with 'return messages'");
        }
        return p;
    }

    Call isolated_call() {
        auto name_tok = take();
        auto b = builtin_from_name(name_tok.text);
        if (!b) fail(name_tok, "not a builtin");
        auto c = call_args(*b, name_tok);
        return c;
    }

    bool at_end() const { return peek().kind == Tok::End; }

  private:
    // ---- statements ----

    std::vector<Stmt> block() {
        std::vector<Stmt> out;
        while (peek().kind != Tok::Dedent && peek().kind != Tok::End) {
            out.push_back(statement());
        }
        return out;
    }

    std::vector<Stmt> suite() {
        expect_op(":");
        if (peek().kind != Tok::Newline) {
            std::vector<Stmt> one;
            one.push_back(simple_statement());
            return one;
        }
        take();
        expect(Tok::Indent, "indented block");
        auto body = block();
        if (body.empty()) fail(peek(), "empty block");
        expect(Tok::Dedent, "end of block");
        return body;
    }

    Stmt statement() {
        const auto& t = peek();
        if (is_name(t, "if")) return if_statement();
        if (is_name(t, "for")) return for_statement();
        return simple_statement();
    }

    Stmt if_statement() {
        Stmt s;
        s.kind = Stmt::Kind::If;
        take();
        Branch first;
        first.cond = condition();
        first.body = suite();
        s.branches.push_back(std::move(first));
        while (is_name(peek(), "elif")) {
            take();
            Branch b;
            b.cond = condition();
            b.body = suite();
            s.branches.push_back(std::move(b));
        }
        if (is_name(peek(), "else")) {
            take();
            s.else_body = suite();
        }
        return s;
    }

    Stmt for_statement() {
        Stmt s;
        s.kind = Stmt::Kind::For;
        take();
        auto var = take();
        if (var.kind != Tok::Name || keywords().contains(var.text)) fail(var, "expected loop variable");
        if (!is_name(peek(), "in")) fail(peek(), "expected 'in'");
        take();
        s.value = expression();
        check_assignable(var);
        bound_.insert(var.text);
        s.loop_var = var.text;
        s.body = suite();
        return s;
    }

    Stmt simple_statement() {
        const auto t = peek();
        Stmt s;
        if (is_name(t, "return")) {
            take();
            auto v = take();
            if (v.kind != Tok::Name || v.text != kAccumulator) fail(v, "only 'return messages' is supported");
            require_bound(v);
            s.kind = Stmt::Kind::Return;
        } else if (is_name(t, "pass")) {
            take();
            s.kind = Stmt::Kind::Pass;
        } else if (t.kind == Tok::Name && !keywords().contains(t.text) && !builtin_from_name(t.text)) {
            if (peek(1).kind == Tok::Op && peek(1).text == "+=") {
                if (t.text != kAccumulator) fail(t, "'+=' is only supported on messages");
                take();
                take();
                require_bound(t);
                s.kind = Stmt::Kind::ConcatMsg;
                s.value = expression();
            } else {
                s = assignment();
            }
        } else {
            fail(t, "unsupported statement");
        }
        end_of_statement();
        return s;
    }

    Stmt assignment() {
        std::vector<Token> targets;
        targets.push_back(take());
        while (peek().kind == Tok::Op && peek().text == ",") {
            take();
            auto n = take();
            if (n.kind != Tok::Name || keywords().contains(n.text)) fail(n, "expected a variable name");
            targets.push_back(n);
        }
        if (!(peek().kind == Tok::Op && peek().text == "=")) {
            const auto& t = peek();
            if (t.kind == Tok::Op && (t.text == "." || t.text == "(")) fail(t, "method and function calls are not supported");
            if (t.kind == Tok::Op && (t.text == "-=" || t.text == "[")) fail(t, "unsupported assignment");
            fail(t, "expected '='");
        }
        take();
        Stmt s;
        const auto& rhs = peek();
        if (rhs.kind == Tok::Name && builtin_from_name(rhs.text) && peek(1).kind == Tok::Op && peek(1).text == "(") {
            if (targets.size() > 2) fail(targets[2], "a builtin call yields at most two results");
            auto name_tok = take();
            s.kind = Stmt::Kind::AssignCall;
            s.call = call_args(*builtin_from_name(name_tok.text), name_tok);
        } else {
            if (targets.size() != 1) fail(targets[1], "tuple assignment needs a builtin call");
            s.kind = Stmt::Kind::Assign;
            s.value = expression();
        }
        for (const auto& t : targets) {
            check_assignable(t);
            bound_.insert(t.text);
            s.targets.push_back(t.text);
        }
        return s;
    }

    Call call_args(Builtin b, const Token& name_tok) {
        expect_op("(");
        const auto& params = builtin_params(b);
        std::vector<std::optional<Expr>> slots(params.size());
        std::size_t positional = 0;
        bool seen_keyword = false;
        while (!(peek().kind == Tok::Op && peek().text == ")")) {
            if (peek().kind == Tok::Name && peek(1).kind == Tok::Op && peek(1).text == "=") {
                auto kw = take();
                take();
                auto it = std::find(params.begin(), params.end(), kw.text);
                if (it == params.end()) {
                    fail(kw, "unknown argument '" + kw.text + "' for " + std::string(builtin_name(b)));
                }
                auto idx = static_cast<std::size_t>(it - params.begin());
                if (slots[idx]) fail(kw, "duplicate argument '" + kw.text + "'");
                slots[idx] = expression();
                seen_keyword = true;
            } else {
                if (seen_keyword) fail(peek(), "positional argument after keyword argument");
                if (positional >= params.size()) fail(peek(), "too many arguments");
                slots[positional++] = expression();
            }
            if (peek().kind == Tok::Op && peek().text == ",") {
                take();
                continue;
            }
            if (!(peek().kind == Tok::Op && peek().text == ")")) fail(peek(), "expected ',' or ')'");
        }
        take();
        Call c;
        c.builtin = b;
        for (std::size_t i = 0; i < params.size(); ++i) {
            if (!slots[i]) fail(name_tok, "missing argument '" + params[i] + "'");
            c.args.emplace_back(params[i], std::move(*slots[i]));
        }
        return c;
    }

    // ---- conditions ----

    Cond condition() {
        auto first = and_test();
        if (!is_name(peek(), "or")) return first;
        Cond c;
        c.kind = Cond::Kind::Or;
        c.children.push_back(std::move(first));
        while (is_name(peek(), "or")) {
            take();
            c.children.push_back(and_test());
        }
        return c;
    }

    Cond and_test() {
        auto first = not_test();
        if (!is_name(peek(), "and")) return first;
        Cond c;
        c.kind = Cond::Kind::And;
        c.children.push_back(std::move(first));
        while (is_name(peek(), "and")) {
            take();
            c.children.push_back(not_test());
        }
        return c;
    }

    Cond not_test() {
        if (is_name(peek(), "not")) {
            take();
            Cond c;
            c.kind = Cond::Kind::Not;
            c.children.push_back(not_test());
            return c;
        }
        if (peek().kind == Tok::Op && peek().text == "(") {
            take();
            auto inner = condition();
            expect_op(")");
            return inner;
        }
        return comparison();
    }

    Cond comparison() {
        Cond c;
        c.operands.push_back(expression());
        while (true) {
            const auto& t = peek();
            if (t.kind == Tok::Op && (t.text == "==" || t.text == "!=")) {
                take();
                c.ops.push_back(t.text == "==" ? CmpOp::Eq : CmpOp::Ne);
                c.operands.push_back(expression());
                continue;
            }
            if (t.kind == Tok::Op && (t.text == "<" || t.text == ">" || t.text == "<=" || t.text == ">=")) {
                fail(t, "order comparison '" + t.text + "' is not supported (values compare as strings)");
            }
            if (is_name(t, "in") || is_name(t, "is")) fail(t, "'" + t.text + "' is not supported");
            break;
        }
        c.kind = c.ops.empty() ? Cond::Kind::Truthy : Cond::Kind::Compare;
        return c;
    }

    // ---- expressions ----

    Expr expression() {
        auto e = primary();
        while (peek().kind == Tok::Op && peek().text == "[") {
            take();
            bool neg = false;
            if (peek().kind == Tok::Op && peek().text == "-") {
                take();
                neg = true;
            }
            auto n = take();
            if (n.kind != Tok::Number) fail(n, "only integer indexes are supported");
            long long idx = 0;
            try {
                std::size_t used = 0;
                idx = std::stoll(n.text, &used);
                if (used != n.text.size()) fail(n, "only integer indexes are supported");
            } catch (const std::logic_error&) {
                fail(n, "only integer indexes are supported");
            }
            expect_op("]");
            e = Expr::indexed(std::move(e), neg ? -idx : idx);
        }
        const auto& t = peek();
        if (t.kind == Tok::Op) {
            static const std::set<std::string> kArith = {"+", "-", "*", "/", "%", "**", "//", "@", "&", "|", "^"};
            if (kArith.contains(t.text)) fail(t, "arithmetic is not supported");
            if (t.text == ".") fail(t, "attribute access is not supported");
            if (t.text == "(") fail(t, "calls are not supported here");
        }
        return e;
    }

    Expr primary() {
        auto t = take();
        switch (t.kind) {
            case Tok::String: {
                std::string s = t.text;
                while (peek().kind == Tok::String) s += take().text;
                return Expr::string(std::move(s));
            }
            case Tok::Name: {
                if (t.text == "None") return Expr::none();
                if (t.text == "True") return Expr::boolean(true);
                if (t.text == "False") return Expr::boolean(false);
                if (keywords().contains(t.text)) fail(t, "unexpected keyword '" + t.text + "'");
                if (peek().kind == Tok::Op && peek().text == "(") {
                    if (builtin_from_name(t.text)) fail(t, "builtin results must be assigned to variables");
                    fail(t, "function '" + t.text + "' is not supported");
                }
                require_bound(t);
                return Expr::name(t.text);
            }
            case Tok::Op:
                if (t.text == "[") {
                    std::vector<Expr> items;
                    while (!(peek().kind == Tok::Op && peek().text == "]")) {
                        items.push_back(expression());
                        if (peek().kind == Tok::Op && peek().text == ",") {
                            take();
                        } else if (!(peek().kind == Tok::Op && peek().text == "]")) {
                            fail(peek(), "expected ',' or ']'");
                        }
                    }
                    take();
                    return Expr::list(std::move(items));
                }
                break;
            case Tok::Number:
                fail(t, "numeric values are not supported");
            default:
                break;
        }
        fail(t, "expected an expression");
    }

    // ---- helpers ----

    void require_bound(const Token& t) {
        if (!check_bindings_) return;
        if (!bound_.contains(t.text)) fail(t, "variable '" + t.text + "' is read before assignment");
    }

    void check_assignable(const Token& t) {
        if (t.text == kQueryGlobal) fail(t, "'query' is read-only");
        if (builtin_from_name(t.text)) fail(t, "cannot assign to a builtin");
    }

    void end_of_statement() {
        const auto& t = peek();
        if (t.kind == Tok::Newline) {
            take();
            return;
        }
        if (t.kind == Tok::Dedent || t.kind == Tok::End) return;
        if (t.kind == Tok::Op && t.text == ";") fail(t, "';' is not supported");
        fail(t, "unexpected token '" + t.text + "'");
    }

    void skip_newlines() {
        while (peek().kind == Tok::Newline) take();
    }

    static bool is_name(const Token& t, std::string_view n) { return t.kind == Tok::Name && t.text == n; }

    const Token& peek(std::size_t ahead = 0) const {
        auto i = std::min(pos_ + ahead, toks_.size() - 1);
        return toks_[i];
    }

    Token take() {
        auto t = peek();
        if (pos_ < toks_.size() - 1) ++pos_;
        return t;
    }

    void expect(Tok kind, const char* what) {
        if (peek().kind != kind) fail(peek(), std::string("expected ") + what);
        take();
    }

    void expect_op(const char* op) {
        if (!(peek().kind == Tok::Op && peek().text == op)) fail(peek(), std::string("expected '") + op + "'");
        take();
    }

    void expect_name(const char* n) {
        if (!is_name(peek(), n)) fail(peek(), std::string("expected '") + n + "'");
        take();
    }

    [[noreturn]] static void fail(const Token& t, const std::string& what) {
        throw ParseError(t.line, t.column, what);
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    std::set<std::string> bound_;

  public:
    bool check_bindings_ = true;
};

}  // namespace detail

SearchProgram parse(std::string_view code) {
    detail::Parser p(detail::lex(code));
    return p.program();
}

std::vector<Call> extract_calls(std::string_view code) {
    std::vector<Call> out;
    auto ident = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
    // Earliest builtin-name occurrence at or after `from`.
    auto next_occurrence = [&](std::size_t from) -> std::pair<std::size_t, std::size_t> {
        std::size_t best = std::string_view::npos;
        std::size_t len = 0;
        for (auto b : {Builtin::GetEntityInfo, Builtin::FindEntityOrValue, Builtin::FindRelationship}) {
            auto name = builtin_name(b);
            auto pos = from;
            while ((pos = code.find(name, pos)) != std::string_view::npos) {
                bool left_ok = pos == 0 || (!ident(code[pos - 1]) && code[pos - 1] != '.');
                bool right_ok = pos + name.size() >= code.size() || !ident(code[pos + name.size()]);
                if (left_ok && right_ok) break;
                pos += name.size();
            }
            if (pos < best) {
                best = pos;
                len = name.size();
            }
        }
        return {best, len};
    };

    std::size_t from = 0;
    while (true) {
        auto [pos, len] = next_occurrence(from);
        if (pos == std::string_view::npos) break;
        from = pos + len;
        // Find the balanced closing parenthesis, skipping string literals.
        std::size_t i = pos + len;
        while (i < code.size() && (code[i] == ' ' || code[i] == '\t')) ++i;
        if (i >= code.size() || code[i] != '(') continue;
        int depth = 0;
        char quote = 0;
        std::size_t end = std::string_view::npos;
        for (; i < code.size(); ++i) {
            char c = code[i];
            if (quote) {
                if (c == '\\') {
                    ++i;
                } else if (c == quote || c == '\n') {
                    quote = 0;
                }
                continue;
            }
            if (c == '\'' || c == '"') {
                quote = c;
            } else if (c == '(' || c == '[') {
                ++depth;
            } else if (c == ')' || c == ']') {
                if (--depth == 0) {
                    end = i;
                    break;
                }
            }
        }
        if (end == std::string_view::npos) continue;
        auto fragment = code.substr(pos, end - pos + 1);
        Call call;
        try {
            detail::Parser p(detail::lex(fragment, false));
            p.check_bindings_ = false;
            call = p.isolated_call();
            if (!p.at_end()) continue;
        } catch (const ParseError&) {
            continue;
        }
        bool keep = true;
        for (auto& [name, expr] : call.args) {
            std::vector<Expr> literals;
            if (expr.kind == Expr::Kind::String) {
                literals.push_back(expr);
            } else if (expr.kind == Expr::Kind::List) {
                for (auto& item : expr.items) {
                    if (item.kind == Expr::Kind::String) literals.push_back(item);
                }
            }
            if (literals.empty()) {
                keep = false;
                break;
            }
            expr = Expr::list(std::move(literals));
        }
        if (keep) {
            out.push_back(std::move(call));
            from = end + 1;
        }
    }
    return out;
}

SearchProgram program_from_calls(const std::vector<Call>& calls) {
    SearchProgram p;
    Stmt init;
    init.kind = Stmt::Kind::Assign;
    init.targets = {std::string(kAccumulator)};
    init.value = Expr::string("");
    p.statements.push_back(init);
    for (const auto& c : calls) {
        Stmt call;
        call.kind = Stmt::Kind::AssignCall;
        call.targets = {"result", "msg"};
        call.call = c;
        p.statements.push_back(std::move(call));
        Stmt append;
        append.kind = Stmt::Kind::ConcatMsg;
        append.value = Expr::name("msg");
        p.statements.push_back(std::move(append));
    }
    Stmt ret;
    ret.kind = Stmt::Kind::Return;
    p.statements.push_back(ret);
    return p;
}

namespace {

void collect(const std::vector<Stmt>& stmts, std::vector<Call>& out) {
    for (const auto& s : stmts) {
        switch (s.kind) {
            case Stmt::Kind::AssignCall:
                out.push_back(s.call);
                break;
            case Stmt::Kind::If:
                for (const auto& b : s.branches) collect(b.body, out);
                collect(s.else_body, out);
                break;
            case Stmt::Kind::For:
                collect(s.body, out);
                break;
            default:
                break;
        }
    }
}

}  // namespace

std::vector<Call> collect_calls(const SearchProgram& program) {
    std::vector<Call> out;
    collect(program.statements, out);
    return out;
}

}  // namespace kbridge::dsl
