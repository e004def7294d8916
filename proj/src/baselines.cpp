#include <cmath>
#include <limits>

#include "kbridge/eval.hpp"
#include "kbridge/similarity.hpp"
#include "kbridge/text.hpp"

namespace kbridge {

Bm25Index::Bm25Index(std::vector<std::vector<std::string>> documents, Bm25Params params)
    : docs_(std::move(documents)), params_(params) {
    std::size_t total = 0;
    for (const auto& d : docs_) {
        std::map<std::string, std::size_t> tf;
        for (const auto& t : d) ++tf[t];
        for (const auto& [t, n] : tf) ++df_[t];
        tf_.push_back(std::move(tf));
        total += d.size();
    }
    avgdl_ = docs_.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(docs_.size());
}

double Bm25Index::idf(const std::string& token) const {
    auto it = df_.find(token);
    double df = it == df_.end() ? 0.0 : static_cast<double>(it->second);
    double n = static_cast<double>(docs_.size());
    return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

double Bm25Index::score(const std::vector<std::string>& query, std::size_t doc) const {
    const auto& tf = tf_.at(doc);
    double dl = static_cast<double>(docs_[doc].size());
    double norm = avgdl_ > 0.0 ? dl / avgdl_ : 0.0;
    double s = 0.0;
    for (const auto& q : query) {
        auto it = tf.find(q);
        if (it == tf.end()) continue;
        double f = static_cast<double>(it->second);
        s += idf(q) * f * (params_.k1 + 1.0) / (f + params_.k1 * (1.0 - params_.b + params_.b * norm));
    }
    return s;
}

std::vector<double> Bm25Index::scores(const std::vector<std::string>& query) const {
    std::vector<double> out;
    out.reserve(docs_.size());
    for (std::size_t i = 0; i < docs_.size(); ++i) out.push_back(score(query, i));
    return out;
}

std::vector<std::string> content_tokens(std::string_view s, const Stoplist& stoplist) {
    std::vector<std::string> out;
    for (auto& t : text::tokenize(s)) {
        if (!stoplist.contains(t)) out.push_back(std::move(t));
    }
    return out;
}

std::string render_triple(const Triple& t) { return t.head.local_id + " " + t.relation + " " + t.tail_text(); }

namespace {

/// First index of the maximum, skipping `skip`.
std::size_t pick(const std::vector<double>& scores, std::optional<std::size_t> skip) {
    std::size_t best = scores.size();
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (skip && i == *skip) continue;
        if (best == scores.size() || scores[i] > scores[best]) best = i;
    }
    return best;
}

bool all_zero(const std::vector<double>& scores, std::optional<std::size_t> skip) {
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (skip && i == *skip) continue;
        if (scores[i] != 0.0) return false;
    }
    return true;
}

/// Triple whose relation best overlaps the question; first wins ties.
const Triple& best_triple(const std::vector<Triple>& doc, const std::vector<std::string>& question) {
    std::size_t best = 0;
    double best_score = -1.0;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        double s = jaccard(question, content_tokens(doc[i].relation)).value;
        if (s > best_score) {
            best = i;
            best_score = s;
        }
    }
    return doc[best];
}

}  // namespace

Bm25Baseline::Bm25Baseline(const FileKb& kb, Bm25Params params)
    : docs_([&] {
          std::vector<std::vector<Triple>> docs;
          std::map<std::string, std::size_t> pos;
          for (const auto& t : kb.all_triples()) {
              auto [it, inserted] = pos.try_emplace(t.head.local_id, docs.size());
              if (inserted) docs.emplace_back();
              docs[it->second].push_back(t);
          }
          return docs;
      }()),
      index_(
          [&] {
              std::vector<std::vector<std::string>> tokens;
              for (const auto& d : docs_) {
                  std::vector<std::string> doc;
                  for (const auto& t : d) {
                      auto part = content_tokens(render_triple(t));
                      doc.insert(doc.end(), part.begin(), part.end());
                  }
                  tokens.push_back(std::move(doc));
              }
              return tokens;
          }(),
          params) {
    if (docs_.empty()) throw std::invalid_argument("BM25 baseline needs a non-empty KB");
}

BaselineResult Bm25Baseline::answer(const std::string& question, int hops) const {
    auto q = content_tokens(question);
    auto scores = index_.scores(q);
    auto doc = pick(scores, std::nullopt);
    bool low = all_zero(scores, std::nullopt);
    if (hops >= 2 && docs_.size() > 1) {
        const auto& bridge = best_triple(docs_[doc], q);
        auto q2 = q;
        auto extra = content_tokens(render_triple(bridge));
        q2.insert(q2.end(), extra.begin(), extra.end());
        auto scores2 = index_.scores(q2);
        auto first = doc;
        doc = pick(scores2, first);
        low = all_zero(scores2, first);
    }
    BaselineResult r;
    r.final_triples = docs_[doc];
    r.chosen = best_triple(docs_[doc], q);
    r.answer = r.chosen.tail_text();
    r.low_confidence = low;
    return r;
}

EmbeddingBaseline::EmbeddingBaseline(const FileKb& kb, EmbeddingProvider& embedder)
    : triples_(kb.all_triples()), embedder_(embedder) {
    if (triples_.empty()) throw std::invalid_argument("embedding baseline needs a non-empty KB");
    for (const auto& t : triples_) vectors_.push_back(embedder_.embed(render_triple(t)));
}

std::vector<double> EmbeddingBaseline::scores(const std::string& query) const {
    auto qv = embedder_.embed(query);
    std::vector<double> out;
    out.reserve(vectors_.size());
    for (const auto& v : vectors_) out.push_back(cosine(qv, v));
    return out;
}

BaselineResult EmbeddingBaseline::answer(const std::string& question, int hops) const {
    auto s = scores(question);
    auto idx = pick(s, std::nullopt);
    bool low = all_zero(s, std::nullopt);
    if (hops >= 2 && triples_.size() > 1) {
        auto s2 = scores(question + " " + render_triple(triples_[idx]));
        auto first = idx;
        idx = pick(s2, first);
        low = all_zero(s2, first);
    }
    BaselineResult r;
    r.chosen = triples_[idx];
    r.final_triples = {r.chosen};
    r.answer = r.chosen.tail_text();
    r.low_confidence = low;
    return r;
}

std::string bm25_baseline(const std::string& question, const FileKb& kb, int hops) {
    return Bm25Baseline(kb).answer(question, hops).answer;
}

std::string embedding_baseline(const std::string& question, const FileKb& kb, EmbeddingProvider& embedder, int hops) {
    return EmbeddingBaseline(kb, embedder).answer(question, hops).answer;
}

}  // namespace kbridge
