#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "kbridge/embedding.hpp"
#include "kbridge/gateway.hpp"
#include "kbridge/kb.hpp"

namespace kbridge {

struct PkbOptions {
    std::string kb_tag = "PKB";
    /// Minimum name-embedding cosine for an entity-search match.
    double match_threshold = 0.80;
};

struct PkbEntity {
    std::string id;
    std::vector<std::string> aliases;
    bool operator==(const PkbEntity&) const = default;
};

struct PkbRecord {
    std::string id;
    KnowledgeRecord record;
    bool operator==(const PkbRecord&) const = default;
};

/// Everything that is persisted; two stores with equal data are
/// structurally equal.
struct PkbData {
    std::vector<PkbEntity> entities;
    std::vector<PkbRecord> records;
    bool operator==(const PkbData&) const = default;
};

/// Writable personal KB. Entities extracted from different documents are
/// never merged. One writer at a time; reads may run concurrently.
class PkbStore final : public KbBackend {
  public:
    explicit PkbStore(EmbeddingProvider& embedder, PkbOptions options = {});

    /// Throws IoError when the file cannot be read and CorruptStore (with the
    /// 1-based line number) on a schema violation.
    static PkbStore load(const std::filesystem::path& path, EmbeddingProvider& embedder, PkbOptions options = {});

    /// Atomic: writes "<path>.tmp" and renames it over `path`. `after_line`
    /// is called after each line is written (used to simulate crashes).
    void save(const std::filesystem::path& path,
              const std::function<void(std::size_t)>& after_line = {}) const;

    /// Where store_document() persists; unset means memory only.
    void set_path(std::optional<std::filesystem::path> path);
    const std::optional<std::filesystem::path>& path() const noexcept { return path_; }

    /// Registers extracted knowledge as new entities (records sharing an
    /// identical alias list within one call share an entity), persists if a
    /// path is set, and returns the new record ids. On failure the store is
    /// unchanged.
    std::vector<std::string> add_extracted(const std::vector<ExtractedRecord>& extracted,
                                           std::optional<std::string> source_doc = std::nullopt);

    /// Exact or case-folded alias matches first (registry order), then
    /// entities whose alias embeddings reach match_threshold against any
    /// query alias, best score first.
    std::vector<EntityCandidate> entity_search(const AliasList& aliases) const;

    PkbData data() const;
    std::size_t entity_count() const;
    std::size_t record_count() const;

    const std::string& kb_tag() const override { return options_.kb_tag; }
    KbCapabilities capabilities() const override { return {true, false, true}; }
    std::vector<EntityCandidate> find_candidates(const Query& query, const AliasList& aliases) override;
    std::vector<Triple> get_entity_triples(const EntityId& entity) override;
    EntityInfo get_entity_info(const EntityId& entity, const std::optional<AliasList>& relation_hint) override;
    std::vector<AspectRecord> get_entity_aspects(const EntityId& entity) override;
    std::string display_name(const EntityId& entity) override;

    PkbStore(PkbStore&& other) noexcept;

  private:
    struct IndexEntry {
        std::size_t entity;
        Vector vector;
    };

    void index_entity(std::size_t idx);
    void rebuild_counters();
    void write_file(const std::filesystem::path& path, const PkbData& data,
                    const std::function<void(std::size_t)>& after_line) const;
    const PkbEntity* find_entity(const EntityId& id) const;

    EmbeddingProvider* embedder_;
    PkbOptions options_;
    std::optional<std::filesystem::path> path_;
    PkbData data_;
    std::map<std::string, std::size_t> entity_pos_;
    std::vector<IndexEntry> index_;
    std::size_t next_entity_ = 1;
    std::size_t next_record_ = 1;
    std::size_t next_doc_ = 1;
    mutable std::shared_mutex mu_;
};

/// Extracts knowledge from a document and appends it to the store. Throws
/// std::invalid_argument on an empty document and ProviderError when the
/// extraction fails.
std::vector<std::string> store_document(const std::string& doc, PkbStore& store, LlmGateway& gateway);

/// Every stored entity matching the aliases (no disambiguation), each with
/// its stored alias list.
std::vector<EntityCandidate> pkb_entity_linking(const Query& query, const AliasList& aliases, PkbStore& store);

}  // namespace kbridge
