#include <fstream>
#include <future>
#include <sstream>

#include <fmt/format.h>

#include "kbridge/errors.hpp"
#include "kbridge/eval.hpp"
#include "kbridge/text.hpp"

namespace kbridge {

using nlohmann::json;

std::vector<QaExample> load_qa_tsv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::vector<QaExample> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (text::trim(line).empty() || line[0] == '#') continue;
        auto fields = text::split(line, '\t');
        auto where = path.string() + ":" + std::to_string(lineno);
        if (fields.size() != 3) throw FormatError(where + ": expected question, answer and hops");
        QaExample ex{text::trim(fields[0]), text::trim(fields[1]), 0};
        auto hops = text::trim(fields[2]);
        if (hops == "1") {
            ex.hops = 1;
        } else if (hops == "2") {
            ex.hops = 2;
        } else {
            throw FormatError(where + ": hops must be 1 or 2");
        }
        if (ex.question.empty() || ex.gold_answer.empty()) throw FormatError(where + ": empty question or answer");
        out.push_back(std::move(ex));
    }
    return out;
}

namespace {

MultiDocExample parse_multidoc(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot read " + file.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw FormatError(file.string() + ": " + e.what());
    }
    try {
        MultiDocExample ex;
        ex.id = j.value("id", file.stem().string());
        ex.question = j.at("question").get<std::string>();
        ex.answer = j.at("answer").get<std::string>();
        ex.type = j.value("type", std::string());
        for (const auto& d : j.at("documents")) {
            ex.documents.push_back({d.value("title", std::string()), d.at("text").get<std::string>()});
        }
        if (ex.documents.empty()) throw FormatError(file.string() + ": no documents");
        return ex;
    } catch (const json::exception& e) {
        throw FormatError(file.string() + ": " + e.what());
    }
}

}  // namespace

std::vector<MultiDocExample> load_multidoc(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::is_directory(path, ec)) return {parse_multidoc(path)};
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(path)) {
        if (entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<MultiDocExample> out;
    for (const auto& f : files) out.push_back(parse_multidoc(f));
    return out;
}

std::optional<EvalSystem> eval_system_from_string(std::string_view s) {
    if (s == "knowledgpt") return EvalSystem::Knowledgpt;
    if (s == "bm25") return EvalSystem::Bm25;
    if (s == "embedding") return EvalSystem::Embedding;
    return std::nullopt;
}

std::string_view to_string(EvalSystem s) {
    switch (s) {
        case EvalSystem::Knowledgpt:
            return "knowledgpt";
        case EvalSystem::Bm25:
            return "bm25";
        case EvalSystem::Embedding:
            break;
    }
    return "embedding";
}

std::size_t EvalReport::halted_count() const {
    return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const EvalRow& r) { return r.halted_early; }));
}

json EvalReport::to_json() const {
    json j;
    j["system"] = system;
    j["config"] = config;
    j["averaged_f1"] = averaged_f1;
    if (document_accuracy) j["document_accuracy"] = *document_accuracy;
    j["halted_early"] = halted_count();
    j["rows"] = json::array();
    for (const auto& r : rows) {
        json row{{"index", r.index},         {"question", r.question}, {"gold", r.gold},
                 {"prediction", r.prediction}, {"hops", r.hops},       {"correct", r.correct},
                 {"low_confidence", r.low_confidence}};
        if (r.document_hit) row["document_hit"] = *r.document_hit;
        if (system == "knowledgpt") {
            row["halted_early"] = r.halted_early;
            row["used_fallback"] = r.used_fallback;
        }
        if (!r.error.empty()) row["error"] = r.error;
        j["rows"].push_back(std::move(row));
    }
    return j;
}

std::string EvalReport::to_table() const {
    std::ostringstream out;
    out << fmt::format("{:>4}  {:>4}  {:<7}  {:<30}  {}\n", "#", "hops", "correct", "gold", "prediction");
    for (const auto& r : rows) {
        out << fmt::format("{:>4}  {:>4}  {:<7}  {:<30}  {}\n", r.index, r.hops, r.correct ? "yes" : "no",
                           text::truncate(r.gold, 30), text::truncate(r.prediction, 60));
    }
    out << fmt::format("system: {}  examples: {}  averaged F1: {:.4f}", system, rows.size(), averaged_f1);
    if (document_accuracy) out << fmt::format("  document accuracy: {:.4f}", *document_accuracy);
    if (system == "knowledgpt") out << fmt::format("  halted early: {}", halted_count());
    out << "\n";
    return out.str();
}

namespace {

template <typename Fn>
std::vector<EvalRow> run_rows(const std::vector<QaExample>& dataset, std::size_t parallelism, Fn&& fn) {
    std::vector<EvalRow> rows(dataset.size());
    std::size_t width = std::max<std::size_t>(1, parallelism);
    for (std::size_t start = 0; start < dataset.size(); start += width) {
        std::vector<std::future<EvalRow>> batch;
        for (std::size_t i = start; i < std::min(dataset.size(), start + width); ++i) {
            batch.push_back(std::async(std::launch::async, [&, i] { return fn(i, dataset[i]); }));
        }
        for (std::size_t k = 0; k < batch.size(); ++k) rows[start + k] = batch[k].get();
    }
    return rows;
}

EvalRow base_row(std::size_t i, const QaExample& ex) {
    EvalRow r;
    r.index = i;
    r.question = ex.question;
    r.gold = ex.gold_answer;
    r.hops = ex.hops;
    return r;
}

bool document_contains(const std::vector<Triple>& triples, const std::string& gold) {
    auto g = normalize_answer(gold);
    return std::any_of(triples.begin(), triples.end(), [&](const Triple& t) { return normalize_answer(t.tail_text()) == g; });
}

}  // namespace

EvalReport run_eval(const std::vector<QaExample>& dataset, EvalSystem system, const EvalContext& ctx) {
    if (dataset.empty()) throw std::invalid_argument("dataset is empty");
    EvalReport report;
    report.system = std::string(to_string(system));
    report.config = {{"system", report.system},
                     {"bm25", {{"k1", ctx.bm25.k1}, {"b", ctx.bm25.b}}},
                     {"relation_threshold", ctx.retrieval.relation_threshold},
                     {"relation_floor", ctx.retrieval.relation_floor},
                     {"message_cap", ctx.retrieval.message_cap},
                     {"embedding_dimension", ctx.embedder ? ctx.embedder->dimension() : 0},
                     {"examples", dataset.size()}};

    switch (system) {
        case EvalSystem::Knowledgpt: {
            if (!ctx.gateway || !ctx.embedder) throw std::invalid_argument("knowledgpt needs a model and an embedder");
            auto backends = ctx.backends;
            if (backends.empty() && ctx.kb) backends.push_back(const_cast<FileKb*>(ctx.kb));
            report.rows = run_rows(dataset, ctx.parallelism, [&](std::size_t i, const QaExample& ex) {
                auto row = base_row(i, ex);
                auto result = answer_query(Query::from_text(ex.question), backends, *ctx.gateway, *ctx.embedder,
                                           ctx.retrieval);
                row.prediction = result.answer;
                row.used_fallback = result.used_fallback;
                for (const auto& e : result.executions) row.halted_early = row.halted_early || e.outcome.halted_early;
                return row;
            });
            break;
        }
        case EvalSystem::Bm25: {
            if (!ctx.kb) throw std::invalid_argument("bm25 needs a KB");
            Bm25Baseline baseline(*ctx.kb, ctx.bm25);
            report.rows = run_rows(dataset, ctx.parallelism, [&](std::size_t i, const QaExample& ex) {
                auto row = base_row(i, ex);
                auto r = baseline.answer(ex.question, ex.hops);
                row.prediction = r.answer;
                row.low_confidence = r.low_confidence;
                row.document_hit = document_contains(r.final_triples, ex.gold_answer);
                return row;
            });
            break;
        }
        case EvalSystem::Embedding: {
            if (!ctx.kb || !ctx.embedder) throw std::invalid_argument("embedding baseline needs a KB and an embedder");
            EmbeddingBaseline baseline(*ctx.kb, *ctx.embedder);
            report.rows = run_rows(dataset, ctx.parallelism, [&](std::size_t i, const QaExample& ex) {
                auto row = base_row(i, ex);
                auto r = baseline.answer(ex.question, ex.hops);
                row.prediction = r.answer;
                row.low_confidence = r.low_confidence;
                row.document_hit = document_contains(r.final_triples, ex.gold_answer);
                return row;
            });
            break;
        }
    }

    std::vector<std::string> preds;
    std::vector<std::string> golds;
    std::size_t doc_hits = 0;
    bool any_doc = false;
    for (auto& r : report.rows) {
        r.correct = normalize_answer(r.prediction) == normalize_answer(r.gold);
        preds.push_back(r.prediction);
        golds.push_back(r.gold);
        if (r.document_hit) {
            any_doc = true;
            doc_hits += *r.document_hit ? 1 : 0;
        }
    }
    report.averaged_f1 = averaged_f1(preds, golds);
    if (any_doc) report.document_accuracy = static_cast<double>(doc_hits) / static_cast<double>(report.rows.size());
    return report;
}

}  // namespace kbridge
