#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "kbridge/model.hpp"

/// The restricted search language: a single `def search():` function whose
/// body assigns builtin call results, accumulates `messages`, branches on
/// truthiness or (in)equality, loops over returned lists and returns the
/// accumulator. See docs/search_language.md for the grammar.
namespace kbridge::dsl {

enum class Builtin { GetEntityInfo, FindEntityOrValue, FindRelationship };

std::string_view builtin_name(Builtin b);
std::optional<Builtin> builtin_from_name(std::string_view name);
/// Keyword parameters in declaration order.
const std::vector<std::string>& builtin_params(Builtin b);

inline constexpr std::string_view kAccumulator = "messages";
inline constexpr std::string_view kQueryGlobal = "query";
inline constexpr std::size_t kLoopCap = 16;

class ParseError : public std::runtime_error {
  public:
    ParseError(std::size_t line, std::size_t column, const std::string& what);
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

  private:
    std::size_t line_;
    std::size_t column_;
};

struct Expr {
    enum class Kind { String, Name, List, Index, None, Bool };

    Kind kind = Kind::None;
    std::string text;         // String value or Name identifier
    bool flag = false;        // Bool value
    long long index = 0;      // Index offset
    std::vector<Expr> items;  // List elements, or the single base of an Index

    static Expr string(std::string s);
    static Expr name(std::string n);
    static Expr list(std::vector<Expr> items);
    static Expr indexed(Expr base, long long i);
    static Expr none();
    static Expr boolean(bool b);

    bool operator==(const Expr&) const = default;
};

struct Call {
    Builtin builtin = Builtin::GetEntityInfo;
    /// Keyword arguments in builtin_params() order.
    std::vector<std::pair<std::string, Expr>> args;

    bool operator==(const Call&) const = default;
};

enum class CmpOp { Eq, Ne };

struct Cond {
    enum class Kind { Truthy, Compare, And, Or, Not };

    Kind kind = Kind::Truthy;
    std::vector<Expr> operands;  // Truthy: one; Compare: two or more (chained)
    std::vector<CmpOp> ops;      // Compare: operands.size() - 1
    std::vector<Cond> children;  // And/Or: two or more; Not: one

    bool operator==(const Cond&) const = default;
};

struct Stmt;

struct Branch {
    Cond cond;
    std::vector<Stmt> body;
    bool operator==(const Branch&) const = default;
};

struct Stmt {
    enum class Kind { Assign, AssignCall, ConcatMsg, If, For, Return, Pass };

    Kind kind = Kind::Pass;
    std::vector<std::string> targets;  // Assign: one; AssignCall: one or two
    Expr value;                        // Assign / ConcatMsg / For iterable
    Call call;                         // AssignCall
    std::vector<Branch> branches;      // If: if + elifs
    std::vector<Stmt> else_body;       // If
    std::string loop_var;              // For
    std::vector<Stmt> body;            // For

    bool operator==(const Stmt&) const = default;
};

struct SearchProgram {
    std::vector<Stmt> statements;
    bool operator==(const SearchProgram&) const = default;
};

SearchProgram parse(std::string_view code);

/// Canonical source for a program; parse(pretty_print(p)) == p.
std::string pretty_print(const SearchProgram& program);
std::string to_source(const Call& call);
std::string to_source(const Expr& expr);

/// Pattern-scan fallback for code that does not parse. Returns builtin calls
/// in textual order whose alias arguments are string literals; variable
/// references are dropped, and a call left with an empty alias argument is
/// dropped too.
std::vector<Call> extract_calls(std::string_view code);

/// Program that runs each call in order and appends its message.
SearchProgram program_from_calls(const std::vector<Call>& calls);

/// All calls syntactically present in a program, in textual order.
std::vector<Call> collect_calls(const SearchProgram& program);

/// Runtime values: None, bool, string or list of strings.
struct Value {
    enum class Kind { None, Bool, Str, List };

    Kind kind = Kind::None;
    bool b = false;
    std::string s;
    std::vector<std::string> list;

    static Value none() { return {}; }
    static Value boolean(bool v);
    static Value str(std::string v);
    static Value strings(std::vector<std::string> v);

    bool truthy() const;
    bool operator==(const Value&) const = default;
};

struct BuiltinResult {
    Value value;
    std::string message;
};

/// What the interpreter calls for builtins; one host per KB execution.
class BuiltinHost {
  public:
    virtual ~BuiltinHost() = default;
    virtual BuiltinResult invoke(Builtin builtin, const std::vector<AliasList>& args) = 0;
    /// Call-and-result log the host has written so far, if it keeps one.
    virtual const TraceLog* trace() const { return nullptr; }
};

struct ExecOutcome {
    std::string messages;
    /// Pieces appended to the accumulator, in order; messages == concat(segments).
    std::vector<std::string> segments;
    TraceLog trace;
    bool halted_early = false;
    std::optional<std::string> halt_reason;
    /// Calls actually issued, with evaluated alias arguments.
    std::vector<std::pair<Builtin, std::vector<AliasList>>> executed_calls;
};

/// Runs the program. Never throws: any runtime failure stops execution and
/// is reported through halted_early/halt_reason with the messages gathered so
/// far. The host's trace is copied into the outcome.
ExecOutcome execute(const SearchProgram& program, BuiltinHost& host, const Query& query);

}  // namespace kbridge::dsl
