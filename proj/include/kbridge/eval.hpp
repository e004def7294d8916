#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "kbridge/embedding.hpp"
#include "kbridge/gateway.hpp"
#include "kbridge/kb.hpp"
#include "kbridge/retrieval.hpp"

namespace kbridge {

// ---------------------------------------------------------------------------
// Metrics

/// Trim, full-width to half-width, case fold.
std::string normalize_answer(std::string_view s);

/// Fraction of rows whose normalized prediction equals the normalized gold.
/// Throws std::invalid_argument on length mismatch or empty input.
double averaged_f1(const std::vector<std::string>& predictions, const std::vector<std::string>& golds);

/// Bundled stoplists (data/stopwords/{en,zh}.txt).
class Stoplist {
  public:
    static const Stoplist& bundled();
    static Stoplist load(const std::filesystem::path& dir);
    bool contains(const std::string& token) const;

  private:
    std::set<std::string> words_;
};

/// Rule-based English suffix stripping; other tokens are returned as-is.
std::string lemmatize(const std::string& token);

/// Content words: tokens minus stopwords, lemmatized.
std::set<std::string> word_set(std::string_view text, const Stoplist& stoplist = Stoplist::bundled());

/// Text the coverage metric sees for one extracted record: entity aliases,
/// relation or aspect label, and value.
std::string record_text(const ExtractedRecord& r);

/// |W_extracted ∩ W_doc| / |W_doc|. Throws std::invalid_argument for an
/// empty document, or when the document has no content words but the
/// extraction does.
double word_recall(const std::vector<ExtractedRecord>& extracted, std::string_view doc,
                   const Stoplist& stoplist = Stoplist::bundled());

// ---------------------------------------------------------------------------
// Baselines

struct Bm25Params {
    double k1 = 1.5;
    double b = 0.75;
};

/// Okapi BM25 over pre-tokenized documents. Query token duplicates count.
class Bm25Index {
  public:
    Bm25Index(std::vector<std::vector<std::string>> documents, Bm25Params params = {});

    double idf(const std::string& token) const;
    double score(const std::vector<std::string>& query, std::size_t doc) const;
    std::vector<double> scores(const std::vector<std::string>& query) const;
    std::size_t size() const noexcept { return docs_.size(); }
    const Bm25Params& params() const noexcept { return params_; }

  private:
    std::vector<std::vector<std::string>> docs_;
    std::vector<std::map<std::string, std::size_t>> tf_;
    std::map<std::string, std::size_t> df_;
    double avgdl_ = 0.0;
    Bm25Params params_;
};

/// Content tokens (stopwords removed) used by both baselines.
std::vector<std::string> content_tokens(std::string_view text, const Stoplist& stoplist = Stoplist::bundled());

/// "head relation tail"
std::string render_triple(const Triple& t);

struct BaselineResult {
    std::string answer;
    /// Every score of the final retrieval was zero.
    bool low_confidence = false;
    /// Triples of the final retrieved document (BM25) or the final triple
    /// (embedding), for document-level scoring.
    std::vector<Triple> final_triples;
    Triple chosen;
};

/// One document per entity: all its triples grouped together.
class Bm25Baseline {
  public:
    explicit Bm25Baseline(const FileKb& kb, Bm25Params params = {});
    BaselineResult answer(const std::string& question, int hops) const;
    const Bm25Index& index() const noexcept { return index_; }
    const std::vector<std::vector<Triple>>& documents() const noexcept { return docs_; }

  private:
    std::vector<std::vector<Triple>> docs_;
    Bm25Index index_;
};

/// One document per triple, ranked by embedding cosine.
class EmbeddingBaseline {
  public:
    EmbeddingBaseline(const FileKb& kb, EmbeddingProvider& embedder);
    BaselineResult answer(const std::string& question, int hops) const;
    std::vector<double> scores(const std::string& query) const;
    const std::vector<Triple>& triples() const noexcept { return triples_; }

  private:
    std::vector<Triple> triples_;
    std::vector<Vector> vectors_;
    EmbeddingProvider& embedder_;
};

std::string bm25_baseline(const std::string& question, const FileKb& kb, int hops);
std::string embedding_baseline(const std::string& question, const FileKb& kb, EmbeddingProvider& embedder, int hops);

// ---------------------------------------------------------------------------
// Datasets and runs

struct QaExample {
    std::string question;
    std::string gold_answer;
    int hops = 1;
};

/// UTF-8 TSV "question\tanswer\thops". Throws IoError / FormatError (with the
/// line number).
std::vector<QaExample> load_qa_tsv(const std::filesystem::path& path);

struct Document {
    std::string title;
    std::string text;
};

struct MultiDocExample {
    std::string id;
    std::string question;
    std::string answer;
    std::string type;  // "bridge" or "comparison" when given
    std::vector<Document> documents;
};

/// One example per JSON file; a directory loads every *.json in name order.
std::vector<MultiDocExample> load_multidoc(const std::filesystem::path& path);

enum class EvalSystem { Knowledgpt, Bm25, Embedding };

std::optional<EvalSystem> eval_system_from_string(std::string_view s);
std::string_view to_string(EvalSystem s);

struct EvalContext {
    const FileKb* kb = nullptr;
    std::vector<KbBackend*> backends;  // knowledgpt; defaults to {kb}
    LlmGateway* gateway = nullptr;
    EmbeddingProvider* embedder = nullptr;
    RetrievalConfig retrieval;
    Bm25Params bm25;
    std::size_t parallelism = 4;
};

struct EvalRow {
    std::size_t index = 0;
    std::string question;
    std::string gold;
    std::string prediction;
    int hops = 1;
    bool correct = false;
    /// Baselines: the final retrieved document contains the gold answer.
    std::optional<bool> document_hit;
    bool low_confidence = false;
    /// knowledgpt: some KB execution stopped early.
    bool halted_early = false;
    bool used_fallback = false;
    std::string error;
};

struct EvalReport {
    std::string system;
    std::vector<EvalRow> rows;
    double averaged_f1 = 0.0;
    std::optional<double> document_accuracy;
    nlohmann::json config;

    std::size_t halted_count() const;
    /// Deterministic JSON (no timestamps).
    nlohmann::json to_json() const;
    std::string to_table() const;
};

/// Throws std::invalid_argument on an empty dataset or missing context.
EvalReport run_eval(const std::vector<QaExample>& dataset, EvalSystem system, const EvalContext& ctx);

}  // namespace kbridge
