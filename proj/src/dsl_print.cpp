#include "kbridge/dsl.hpp"

namespace kbridge::dsl {
namespace {

std::string cond_source(const Cond& c);

std::string wrapped(const Cond& c, bool wrap) { return wrap ? "(" + cond_source(c) + ")" : cond_source(c); }

std::string cond_source(const Cond& c) {
    std::string out;
    switch (c.kind) {
        case Cond::Kind::Truthy:
            return to_source(c.operands.front());
        case Cond::Kind::Compare:
            out = to_source(c.operands.front());
            for (std::size_t i = 0; i < c.ops.size(); ++i) {
                out += c.ops[i] == CmpOp::Eq ? " == " : " != ";
                out += to_source(c.operands[i + 1]);
            }
            return out;
        case Cond::Kind::And:
            for (std::size_t i = 0; i < c.children.size(); ++i) {
                const auto& ch = c.children[i];
                if (i) out += " and ";
                out += wrapped(ch, ch.kind == Cond::Kind::And || ch.kind == Cond::Kind::Or);
            }
            return out;
        case Cond::Kind::Or:
            for (std::size_t i = 0; i < c.children.size(); ++i) {
                const auto& ch = c.children[i];
                if (i) out += " or ";
                out += wrapped(ch, ch.kind == Cond::Kind::Or);
            }
            return out;
        case Cond::Kind::Not: {
            const auto& ch = c.children.front();
            return "not " + wrapped(ch, ch.kind == Cond::Kind::And || ch.kind == Cond::Kind::Or);
        }
    }
    return out;
}

void print_block(const std::vector<Stmt>& stmts, int depth, std::string& out);

void print_stmt(const Stmt& s, int depth, std::string& out) {
    std::string pad(static_cast<std::size_t>(depth) * 4, ' ');
    switch (s.kind) {
        case Stmt::Kind::Assign:
            out += pad + s.targets.front() + " = " + to_source(s.value) + "\n";
            break;
        case Stmt::Kind::AssignCall: {
            std::string lhs;
            for (std::size_t i = 0; i < s.targets.size(); ++i) lhs += (i ? ", " : "") + s.targets[i];
            out += pad + lhs + " = " + to_source(s.call) + "\n";
            break;
        }
        case Stmt::Kind::ConcatMsg:
            out += pad + std::string(kAccumulator) + " += " + to_source(s.value) + "\n";
            break;
        case Stmt::Kind::If:
            for (std::size_t i = 0; i < s.branches.size(); ++i) {
                out += pad + (i ? "elif " : "if ") + cond_source(s.branches[i].cond) + ":\n";
                print_block(s.branches[i].body, depth + 1, out);
            }
            if (!s.else_body.empty()) {
                out += pad + "else:\n";
                print_block(s.else_body, depth + 1, out);
            }
            break;
        case Stmt::Kind::For:
            out += pad + "for " + s.loop_var + " in " + to_source(s.value) + ":\n";
            print_block(s.body, depth + 1, out);
            break;
        case Stmt::Kind::Return:
            out += pad + "return " + std::string(kAccumulator) + "\n";
            break;
        case Stmt::Kind::Pass:
            out += pad + "pass\n";
            break;
    }
}

void print_block(const std::vector<Stmt>& stmts, int depth, std::string& out) {
    for (const auto& s : stmts) print_stmt(s, depth, out);
}

}  // namespace

std::string to_source(const Expr& e) {
    switch (e.kind) {
        case Expr::Kind::String:
            return python_repr(e.text);
        case Expr::Kind::Name:
            return e.text;
        case Expr::Kind::List: {
            std::string out = "[";
            for (std::size_t i = 0; i < e.items.size(); ++i) {
                if (i) out += ", ";
                out += to_source(e.items[i]);
            }
            return out + "]";
        }
        case Expr::Kind::Index:
            return to_source(e.items.front()) + "[" + std::to_string(e.index) + "]";
        case Expr::Kind::Bool:
            return e.flag ? "True" : "False";
        case Expr::Kind::None:
            break;
    }
    return "None";
}

std::string to_source(const Call& call) {
    std::string out = std::string(builtin_name(call.builtin)) + "(";
    for (std::size_t i = 0; i < call.args.size(); ++i) {
        if (i) out += ", ";
        out += call.args[i].first + " = " + to_source(call.args[i].second);
    }
    return out + ")";
}

std::string pretty_print(const SearchProgram& program) {
    std::string out = "def search():\n";
    print_block(program.statements, 1, out);
    return out;
}

}  // namespace kbridge::dsl
