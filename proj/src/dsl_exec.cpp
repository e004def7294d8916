#include <map>

#include "kbridge/dsl.hpp"

namespace kbridge::dsl {

Value Value::boolean(bool v) {
    Value out;
    out.kind = Kind::Bool;
    out.b = v;
    return out;
}

Value Value::str(std::string v) {
    Value out;
    out.kind = Kind::Str;
    out.s = std::move(v);
    return out;
}

Value Value::strings(std::vector<std::string> v) {
    Value out;
    out.kind = Kind::List;
    out.list = std::move(v);
    return out;
}

bool Value::truthy() const {
    switch (kind) {
        case Kind::Bool:
            return b;
        case Kind::Str:
            return !s.empty();
        case Kind::List:
            return !list.empty();
        case Kind::None:
            break;
    }
    return false;
}

namespace {

/// Raised inside the interpreter for any failure of the running program.
struct Halt {
    std::string reason;
};

struct Returned {};

class Interpreter {
  public:
    Interpreter(BuiltinHost& host, const Query& query, ExecOutcome& out) : host_(host), out_(out) {
        env_[std::string(kQueryGlobal)] = Value::str(query.text);
    }

    void run(const SearchProgram& p) {
        try {
            block(p.statements);
        } catch (const Returned&) {
        }
    }

  private:
    void block(const std::vector<Stmt>& stmts) {
        for (const auto& s : stmts) statement(s);
    }

    void statement(const Stmt& s) {
        switch (s.kind) {
            case Stmt::Kind::Assign:
                assign(s.targets.front(), eval(s.value));
                break;
            case Stmt::Kind::AssignCall: {
                auto r = call(s.call);
                if (s.targets.size() == 1) {
                    assign(s.targets[0], r.value);
                } else {
                    assign(s.targets[0], r.value);
                    assign(s.targets[1], Value::str(r.message));
                }
                break;
            }
            case Stmt::Kind::ConcatMsg: {
                auto v = eval(s.value);
                if (v.kind != Value::Kind::Str) throw Halt{"can only append strings to messages"};
                auto& acc = lookup(std::string(kAccumulator));
                if (acc.kind != Value::Kind::Str) throw Halt{"messages is not a string"};
                acc.s += v.s;
                out_.segments.push_back(v.s);
                break;
            }
            case Stmt::Kind::If:
                for (const auto& br : s.branches) {
                    if (test(br.cond)) {
                        block(br.body);
                        return;
                    }
                }
                block(s.else_body);
                break;
            case Stmt::Kind::For: {
                auto iterable = eval(s.value);
                if (iterable.kind != Value::Kind::List) throw Halt{"for loop needs a list"};
                auto items = iterable.list;
                if (items.size() > kLoopCap) items.resize(kLoopCap);
                for (const auto& item : items) {
                    assign(s.loop_var, Value::str(item));
                    block(s.body);
                }
                break;
            }
            case Stmt::Kind::Return:
                throw Returned{};
            case Stmt::Kind::Pass:
                break;
        }
    }

    void assign(const std::string& name, Value v) {
        if (name == kAccumulator) {
            if (v.kind != Value::Kind::Str) throw Halt{"messages must hold a string"};
            out_.segments.clear();
            if (!v.s.empty()) out_.segments.push_back(v.s);
        }
        env_[name] = std::move(v);
    }

    Value& lookup(const std::string& name) {
        auto it = env_.find(name);
        if (it == env_.end()) throw Halt{"variable '" + name + "' is not bound"};
        return it->second;
    }

    Value eval(const Expr& e) {
        switch (e.kind) {
            case Expr::Kind::String:
                return Value::str(e.text);
            case Expr::Kind::Name:
                return lookup(e.text);
            case Expr::Kind::Bool:
                return Value::boolean(e.flag);
            case Expr::Kind::None:
                return Value::none();
            case Expr::Kind::List: {
                std::vector<std::string> items;
                for (const auto& item : e.items) {
                    auto v = eval(item);
                    if (v.kind == Value::Kind::Str) {
                        items.push_back(v.s);
                    } else if (v.kind == Value::Kind::List) {
                        items.insert(items.end(), v.list.begin(), v.list.end());
                    } else {
                        throw Halt{"list items must be strings"};
                    }
                }
                return Value::strings(std::move(items));
            }
            case Expr::Kind::Index: {
                auto base = eval(e.items.front());
                if (base.kind != Value::Kind::List) throw Halt{"only lists can be indexed"};
                auto n = static_cast<long long>(base.list.size());
                auto i = e.index < 0 ? e.index + n : e.index;
                if (i < 0 || i >= n) throw Halt{"index " + std::to_string(e.index) + " out of range"};
                return Value::str(base.list[static_cast<std::size_t>(i)]);
            }
        }
        return Value::none();
    }

    bool test(const Cond& c) {
        switch (c.kind) {
            case Cond::Kind::Truthy:
                return eval(c.operands.front()).truthy();
            case Cond::Kind::Compare: {
                auto left = eval(c.operands.front());
                for (std::size_t i = 0; i < c.ops.size(); ++i) {
                    auto right = eval(c.operands[i + 1]);
                    bool eq = left == right;
                    if (eq != (c.ops[i] == CmpOp::Eq)) return false;
                    left = std::move(right);
                }
                return true;
            }
            case Cond::Kind::And:
                for (const auto& ch : c.children) {
                    if (!test(ch)) return false;
                }
                return true;
            case Cond::Kind::Or:
                for (const auto& ch : c.children) {
                    if (test(ch)) return true;
                }
                return false;
            case Cond::Kind::Not:
                return !test(c.children.front());
        }
        return false;
    }

    BuiltinResult call(const Call& c) {
        std::vector<AliasList> args;
        for (const auto& [name, expr] : c.args) {
            auto v = eval(expr);
            std::vector<std::string> items;
            if (v.kind == Value::Kind::Str) {
                items.push_back(v.s);
            } else if (v.kind == Value::Kind::List) {
                items = v.list;
            } else {
                throw Halt{"argument '" + name + "' of " + std::string(builtin_name(c.builtin)) + " is not a list of strings"};
            }
            AliasList list(items);
            if (list.empty()) throw Halt{"argument '" + name + "' of " + std::string(builtin_name(c.builtin)) + " is empty"};
            args.push_back(std::move(list));
        }
        out_.executed_calls.emplace_back(c.builtin, args);
        try {
            return host_.invoke(c.builtin, args);
        } catch (const std::exception& ex) {
            throw Halt{std::string(builtin_name(c.builtin)) + " failed: " + ex.what()};
        }
    }

    BuiltinHost& host_;
    ExecOutcome& out_;
    std::map<std::string, Value> env_;
};

}  // namespace

ExecOutcome execute(const SearchProgram& program, BuiltinHost& host, const Query& query) {
    ExecOutcome out;
    try {
        Interpreter interp(host, query, out);
        try {
            interp.run(program);
        } catch (const Halt& h) {
            out.halted_early = true;
            out.halt_reason = h.reason;
        }
    } catch (const std::exception& ex) {
        out.halted_early = true;
        out.halt_reason = ex.what();
    }
    for (const auto& seg : out.segments) out.messages += seg;
    if (const auto* log = host.trace()) out.trace = *log;
    return out;
}

}  // namespace kbridge::dsl
