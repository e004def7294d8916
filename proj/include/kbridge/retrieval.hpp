#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "kbridge/dsl.hpp"
#include "kbridge/embedding.hpp"
#include "kbridge/gateway.hpp"
#include "kbridge/kb.hpp"
#include "kbridge/linking.hpp"

namespace kbridge {

struct RetrievalConfig {
    /// PKB mode: every relation scoring at least this is returned.
    double relation_threshold = 0.85;
    /// Below this, the best relation is treated as no match and the
    /// description is searched instead.
    double relation_floor = 0.30;
    /// Characters of concatenated knowledge passed to the answer step.
    std::size_t message_cap = 8000;
    LinkingOptions linking;
};

inline constexpr std::string_view kTruncatedMarker = "[truncated]";

/// The three builtins over one backend. One instance per program execution;
/// it owns the execution's trace and a per-execution embedding cache.
class UnifiedAccessor final : public dsl::BuiltinHost {
  public:
    UnifiedAccessor(KbBackend& backend, EmbeddingProvider& embedder, LlmGateway& gateway, Query query,
                    RetrievalConfig config = {});

    struct InfoResult {
        std::optional<std::string> info;
        std::string message;
    };
    struct ValuesResult {
        std::vector<std::string> values;
        std::string message;
    };

    InfoResult get_entity_info(const AliasList& entity_aliases);
    ValuesResult find_entity_or_value(const AliasList& entity_aliases, const AliasList& relation_aliases);
    /// Values are the connecting relations (or a description sentence when
    /// only the description mentions the other entity).
    ValuesResult find_relationship(const AliasList& entity1_aliases, const AliasList& entity2_aliases);

    dsl::BuiltinResult invoke(dsl::Builtin builtin, const std::vector<AliasList>& args) override;
    const TraceLog* trace() const override { return &trace_; }

    bool pkb_mode() const noexcept { return pkb_mode_; }

  private:
    struct Found {
        std::vector<std::string> values;
        std::string rendering;
    };

    LinkResult link(const AliasList& aliases, const std::optional<AliasList>& relation_hint);
    std::optional<Found> relationship_from(const AliasList& from, const AliasList& to);
    std::optional<std::string> matching_sentence(const std::string& description, const AliasList& aliases) const;
    std::string record(std::string_view fn, const std::string& args, const std::string& result,
                       const std::string& note = {});

    KbBackend& backend_;
    CachingEmbedder embedder_;
    LlmGateway& gateway_;
    Query query_;
    RetrievalConfig config_;
    bool pkb_mode_;
    TraceLog trace_;
};

/// Python-style keyword argument rendering used in messages:
/// "entity_aliases = ['a'], relation_aliases = ['b']".
std::string render_call_args(dsl::Builtin builtin, const std::vector<AliasList>& args);

struct KbExecution {
    std::string kb_tag;
    dsl::ExecOutcome outcome;
};

struct AnswerResult {
    std::string answer;
    bool used_knowledge = false;
    bool needs_kb = false;
    std::string code;
    /// The generated code did not parse and the pattern-scan fallback ran.
    bool used_fallback = false;
    std::optional<std::string> parse_error;
    std::string knowledge;
    std::vector<KbExecution> executions;
};

/// Concatenates per-KB segments in order, stopping at the last whole segment
/// that fits in `cap` characters and appending kTruncatedMarker if anything
/// was dropped.
std::string concat_capped(const std::vector<KbExecution>& executions, std::size_t cap);

/// Code generation, one execution per backend (concurrently), then the
/// answer step. Throws ProviderError when a model step fails after its retry;
/// execution failures never escape.
AnswerResult answer_query(const Query& query, const std::vector<KbBackend*>& backends, LlmGateway& gateway,
                          EmbeddingProvider& embedder, const RetrievalConfig& config = {});

/// Steps two and three only, for already generated code.
AnswerResult answer_with_code(const Query& query, const std::string& code, const std::vector<KbBackend*>& backends,
                              LlmGateway& gateway, EmbeddingProvider& embedder, const RetrievalConfig& config = {});

/// Parse, falling back to extract_calls(). Sets `parse_error` on fallback.
dsl::SearchProgram compile_search_code(const std::string& code, std::optional<std::string>* parse_error = nullptr);

}  // namespace kbridge
