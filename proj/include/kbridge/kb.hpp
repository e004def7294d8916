#pragma once

#include <cstddef>
#include <filesystem>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "kbridge/model.hpp"

namespace kbridge {

struct KbCapabilities {
    bool has_descriptions = true;
    bool kbqa_mode = false;
    /// Personal-KB read semantics: several matches per alias and
    /// threshold-based relation retrieval.
    bool pkb_mode = false;
};

struct EntityInfo {
    std::optional<std::string> description;
    std::vector<Triple> triples;
    std::vector<AspectRecord> aspects;
};

/// The KB-specific primitives every backend provides. Implementations must
/// be safe for concurrent reads.
class KbBackend {
  public:
    virtual ~KbBackend() = default;

    virtual const std::string& kb_tag() const = 0;
    virtual KbCapabilities capabilities() const = 0;

    /// Candidate entities for the aliases, deduplicated by id, in source
    /// order. `info_snippet` may be left empty for the linker to fill.
    virtual std::vector<EntityCandidate> find_candidates(const Query& query, const AliasList& aliases) = 0;

    /// Every triple with this head; [] for unknown entities.
    virtual std::vector<Triple> get_entity_triples(const EntityId& entity) = 0;

    /// Description and triples; in KBQA mode with a hint, the ten triples
    /// whose relations best match the hint and no description.
    virtual EntityInfo get_entity_info(const EntityId& entity,
                                       const std::optional<AliasList>& relation_hint = std::nullopt) = 0;

    /// Long-form (aspect, text) records; only the personal KB has them.
    virtual std::vector<AspectRecord> get_entity_aspects(const EntityId&) { return {}; }

    /// Name used when rendering results for this entity.
    virtual std::string display_name(const EntityId& entity) = 0;
};

inline constexpr std::size_t kKbqaTripleLimit = 10;

/// Stable sort of triples by descending jaccard between the relation tokens
/// and the best-matching hint alias, truncated to `limit`.
std::vector<Triple> rank_triples_by_hint(const std::vector<Triple>& triples, const AliasList& hint,
                                         std::size_t limit = kKbqaTripleLimit);

// ---------------------------------------------------------------------------
// File-backed KB

enum class KbFormat { NlpccTsv, TriplesTsv };

std::optional<KbFormat> kb_format_from_string(std::string_view s);
std::string_view to_string(KbFormat f);

struct FileKbOptions {
    std::string kb_tag = "KB";
    /// Tail delimiters; nullopt means the format default ({"|", "、"} for
    /// nlpcc_tsv, none for triples_tsv).
    std::optional<std::vector<std::string>> tail_split_delimiters;
    bool kbqa_mode = false;
    /// Optional "entity\tdescription" and "entity\talias" sidecar files.
    std::optional<std::filesystem::path> descriptions_path;
    std::optional<std::filesystem::path> aliases_path;
};

/// Name used for alias matching: the head with a trailing parenthetical
/// qualifier removed ("Li Bai (song)" -> "Li Bai").
std::string linking_name(std::string_view head);

/// Triples, descriptions and aliases loaded from UTF-8 TSV files. Read-only
/// after construction.
class FileKb final : public KbBackend {
  public:
    const std::string& kb_tag() const override { return options_.kb_tag; }
    KbCapabilities capabilities() const override;
    std::vector<EntityCandidate> find_candidates(const Query& query, const AliasList& aliases) override;
    std::vector<Triple> get_entity_triples(const EntityId& entity) override;
    EntityInfo get_entity_info(const EntityId& entity, const std::optional<AliasList>& relation_hint) override;
    std::string display_name(const EntityId& entity) override;

    std::size_t triple_count() const noexcept { return triple_count_; }
    std::size_t entity_count() const noexcept { return entities_.size(); }
    std::size_t malformed_count() const noexcept { return malformed_; }

    /// All triples in load order (after splitting).
    std::vector<Triple> all_triples() const;
    /// Entity heads in first-appearance order.
    std::vector<std::string> heads() const;

    friend FileKb load_file_kb(const std::filesystem::path& path, KbFormat format, FileKbOptions options);

  private:
    struct Entity {
        std::string head;
        std::vector<std::string> aliases;
        std::optional<std::string> description;
        std::vector<Triple> triples;
    };

    std::size_t ensure_entity(const std::string& head);
    void index_alias(std::size_t idx, const std::string& alias);
    const Entity* find(const EntityId& id) const;

    FileKbOptions options_;
    std::vector<Entity> entities_;
    std::unordered_map<std::string, std::size_t> by_head_;
    std::unordered_map<std::string, std::vector<std::size_t>> exact_;
    std::unordered_map<std::string, std::vector<std::size_t>> folded_;
    std::size_t triple_count_ = 0;
    std::size_t malformed_ = 0;
};

/// Throws IoError when the file cannot be read and FormatError when no line
/// parses. Malformed lines are skipped and counted.
FileKb load_file_kb(const std::filesystem::path& path, KbFormat format, FileKbOptions options = {});

// ---------------------------------------------------------------------------
// Remote KB

/// Sends one JSON request to an endpoint URL and returns the JSON reply.
/// Throws ProviderError.
class Transport {
  public:
    virtual ~Transport() = default;
    virtual nlohmann::json send(const std::string& url, const nlohmann::json& request) = 0;
};

class HttpTransport final : public Transport {
  public:
    explicit HttpTransport(int timeout_seconds = 30) : timeout_(timeout_seconds) {}
    nlohmann::json send(const std::string& url, const nlohmann::json& request) override;

  private:
    int timeout_;
};

/// Canned replies read from *.json files in a directory. Each file holds an
/// object (or an array of objects) {"url": ..., "request": {...},
/// "response": ...}. Unknown requests raise ProviderError.
class MockTransport final : public Transport {
  public:
    MockTransport() = default;
    explicit MockTransport(const std::filesystem::path& fixtures_dir);

    void add(const std::string& url, const nlohmann::json& request, nlohmann::json response);
    nlohmann::json send(const std::string& url, const nlohmann::json& request) override;
    std::size_t calls() const;

  private:
    mutable std::mutex mu_;
    std::map<std::string, nlohmann::json> replies_;
    std::size_t calls_ = 0;
};

/// Thread-safe least-recently-used map from request keys to replies.
class LruCache {
  public:
    explicit LruCache(std::size_t capacity) : capacity_(capacity) {}
    std::optional<nlohmann::json> get(const std::string& key);
    void put(const std::string& key, nlohmann::json value);
    std::size_t size() const;

  private:
    using Entry = std::pair<std::string, nlohmann::json>;
    mutable std::mutex mu_;
    std::size_t capacity_;
    std::list<Entry> order_;
    std::unordered_map<std::string, std::list<Entry>::iterator> index_;
};

struct RemoteKbConfig {
    std::string kb_tag = "REMOTE";
    std::string search_url;
    std::string linking_url;
    std::string entity_url;
    std::size_t max_candidates = 8;
    std::size_t cache_capacity = 4096;
    bool has_descriptions = true;
};

/// Client for an entity-linking + search + entity-lookup service.
///
///   linking: {"text": query, "mention": alias} -> {"entities": [Item]}
///   search:  {"query": alias}                  -> {"entities": [Item]}
///   entity:  {"id": id}                        -> {"name", "description"?,
///                                                  "triples": [{"relation", "tail"}]}
///   Item = {"id", "name", "aliases"?, "description"?}
class RemoteKb final : public KbBackend {
  public:
    RemoteKb(RemoteKbConfig config, std::shared_ptr<Transport> transport);

    const std::string& kb_tag() const override { return config_.kb_tag; }
    KbCapabilities capabilities() const override;
    std::vector<EntityCandidate> find_candidates(const Query& query, const AliasList& aliases) override;
    std::vector<Triple> get_entity_triples(const EntityId& entity) override;
    EntityInfo get_entity_info(const EntityId& entity, const std::optional<AliasList>& relation_hint) override;
    std::string display_name(const EntityId& entity) override;

  private:
    nlohmann::json request(const std::string& url, const nlohmann::json& body);
    nlohmann::json entity_record(const EntityId& entity);

    RemoteKbConfig config_;
    std::shared_ptr<Transport> transport_;
    LruCache cache_;
};

}  // namespace kbridge
