#pragma once

#include <compare>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace kbridge {

/// Ordered surface forms for one entity or relation. The first alias is the
/// preferred form; duplicates (after case folding) and empty strings are
/// dropped on construction.
class AliasList {
  public:
    AliasList() = default;
    AliasList(std::initializer_list<std::string> aliases);
    explicit AliasList(const std::vector<std::string>& aliases);

    /// Throws std::invalid_argument if no non-empty alias remains.
    static AliasList require(const std::vector<std::string>& aliases);

    const std::vector<std::string>& items() const noexcept { return items_; }
    const std::string& preferred() const { return items_.front(); }
    bool empty() const noexcept { return items_.empty(); }
    std::size_t size() const noexcept { return items_.size(); }
    auto begin() const noexcept { return items_.begin(); }
    auto end() const noexcept { return items_.end(); }

    bool operator==(const AliasList&) const = default;

  private:
    std::vector<std::string> items_;
};

struct EntityId {
    std::string kb_tag;
    std::string local_id;

    auto operator<=>(const EntityId&) const = default;
    bool operator==(const EntityId&) const = default;
};

struct EntityIdHash {
    std::size_t operator()(const EntityId& id) const noexcept;
};

struct Triple {
    EntityId head;
    std::string relation;
    std::variant<EntityId, std::string> tail;

    /// Tail as display text (entity tails render as their local id).
    std::string tail_text() const;
    bool operator==(const Triple&) const = default;
};

struct AspectRecord {
    EntityId entity;
    std::string aspect;
    std::string text;
    bool operator==(const AspectRecord&) const = default;
};

struct Description {
    EntityId entity;
    std::string text;
    bool operator==(const Description&) const = default;
};

struct KnowledgeRecord {
    std::variant<Description, Triple, AspectRecord> form;
    std::optional<std::string> source_doc;

    const EntityId& entity() const;
    bool operator==(const KnowledgeRecord&) const = default;
};

/// A KB entity offered for disambiguation. `aliases` holds every stored
/// surface form (the bare name for file KBs, the extracted alias list for the
/// personal KB).
struct EntityCandidate {
    EntityId entity;
    std::string display_name;
    std::vector<std::string> aliases;
    std::string info_snippet;
    bool operator==(const EntityCandidate&) const = default;
};

struct TraceEntry {
    std::string kb_tag;
    std::string call_rendering;
    std::string result_rendering;
    bool operator==(const TraceEntry&) const = default;
};

/// Call-and-result log of one program execution. Append-only.
class TraceLog {
  public:
    void append(TraceEntry entry) { entries_.push_back(std::move(entry)); }
    const std::vector<TraceEntry>& entries() const noexcept { return entries_; }
    bool empty() const noexcept { return entries_.empty(); }
    std::size_t size() const noexcept { return entries_.size(); }

  private:
    std::vector<TraceEntry> entries_;
};

enum class Language { English, Chinese, Other };

std::string_view to_string(Language lang);

/// Chinese when at least 30% of the non-whitespace characters are CJK;
/// English when any letter is present; Other otherwise.
Language detect_language(std::string_view text);

struct Query {
    std::string text;
    Language language = Language::English;

    /// Throws std::invalid_argument on empty text.
    static Query from_text(std::string text);
};

/// "[FROM <kb_tag>][<function_name>(<args>) -> ] <result>"
std::string render_message(std::string_view kb_tag, std::string_view function_name,
                           std::string_view args, std::string_view result);

/// Python-style literal for a string: single quotes unless the text
/// contains a single quote and no double quote.
std::string python_repr(std::string_view s);

/// "['a', 'b']"
std::string python_list_repr(const std::vector<std::string>& items);

}  // namespace kbridge
