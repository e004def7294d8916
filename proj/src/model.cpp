#include "kbridge/model.hpp"

#include <functional>
#include <stdexcept>
#include <unordered_set>

#include "kbridge/text.hpp"

namespace kbridge {

AliasList::AliasList(std::initializer_list<std::string> aliases)
    : AliasList(std::vector<std::string>(aliases)) {}

AliasList::AliasList(const std::vector<std::string>& aliases) {
    std::unordered_set<std::string> seen;
    for (const auto& raw : aliases) {
        auto a = text::trim(raw);
        if (a.empty()) continue;
        if (seen.insert(text::case_fold(a)).second) items_.push_back(std::move(a));
    }
}

AliasList AliasList::require(const std::vector<std::string>& aliases) {
    AliasList list(aliases);
    if (list.empty()) throw std::invalid_argument("alias list is empty");
    return list;
}

std::size_t EntityIdHash::operator()(const EntityId& id) const noexcept {
    auto h = std::hash<std::string>{}(id.kb_tag);
    return h ^ (std::hash<std::string>{}(id.local_id) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

std::string Triple::tail_text() const {
    if (const auto* e = std::get_if<EntityId>(&tail)) return e->local_id;
    return std::get<std::string>(tail);
}

const EntityId& KnowledgeRecord::entity() const {
    return std::visit(
        [](const auto& f) -> const EntityId& {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, Triple>) {
                return f.head;
            } else {
                return f.entity;
            }
        },
        form);
}

std::string_view to_string(Language lang) {
    switch (lang) {
        case Language::English:
            return "English";
        case Language::Chinese:
            return "Chinese";
        case Language::Other:
            break;
    }
    return "Other";
}

Language detect_language(std::string_view s) {
    std::size_t total = 0;
    std::size_t cjk = 0;
    bool letter = false;
    for (char32_t cp : text::decode_utf8(s)) {
        if (text::is_space(cp)) continue;
        ++total;
        if (text::is_cjk(cp)) {
            ++cjk;
        } else if ((cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') || (cp >= 0xC0 && cp <= 0x24F)) {
            letter = true;
        }
    }
    if (total > 0 && cjk * 10 >= total * 3) return Language::Chinese;
    return letter ? Language::English : Language::Other;
}

Query Query::from_text(std::string t) {
    if (text::trim(t).empty()) throw std::invalid_argument("query text is empty");
    Query q;
    q.language = detect_language(t);
    q.text = std::move(t);
    return q;
}

std::string render_message(std::string_view kb_tag, std::string_view function_name, std::string_view args,
                           std::string_view result) {
    std::string out;
    out.reserve(kb_tag.size() + function_name.size() + args.size() + result.size() + 16);
    out += "[FROM ";
    out += kb_tag;
    out += "][";
    out += function_name;
    out += '(';
    out += args;
    out += ") -> ] ";
    out += result;
    return out;
}

std::string python_repr(std::string_view s) {
    bool has_single = s.find('\'') != std::string_view::npos;
    bool has_double = s.find('"') != std::string_view::npos;
    char quote = (has_single && !has_double) ? '"' : '\'';
    std::string out(1, quote);
    for (char c : s) {
        if (c == quote || c == '\\') {
            out += '\\';
            out += c;
        } else if (c == '\n') {
            out += "\\n";
        } else if (c == '\t') {
            out += "\\t";
        } else {
            out += c;
        }
    }
    out += quote;
    return out;
}

std::string python_list_repr(const std::vector<std::string>& items) {
    std::string out = "[";
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += python_repr(items[i]);
    }
    out += ']';
    return out;
}

}  // namespace kbridge
