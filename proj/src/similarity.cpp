#include "kbridge/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "kbridge/embedding.hpp"
#include "kbridge/text.hpp"

namespace kbridge {

bool SimilarityScore::in_range() const noexcept {
    switch (scale) {
        case Scale::Cosine:
            return value >= -1.0 - 1e-9 && value <= 1.0 + 1e-9;
        case Scale::EntScore:
            return value == 0.0 || value <= 100.0;
        case Scale::Jaccard:
            return value >= 0.0 && value <= 1.0;
    }
    return false;
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
    auto s = text::decode_utf8(a);
    auto t = text::decode_utf8(b);
    if (s.size() < t.size()) std::swap(s, t);
    std::vector<std::size_t> row(t.size() + 1);
    for (std::size_t j = 0; j <= t.size(); ++j) row[j] = j;
    for (std::size_t i = 1; i <= s.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= t.size(); ++j) {
            std::size_t up = row[j];
            std::size_t sub = diag + (s[i - 1] == t[j - 1] ? 0 : 1);
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, sub});
            diag = up;
        }
    }
    return row[t.size()];
}

SimilarityScore entity_similarity(std::string_view name1, std::string_view name2) {
    auto a = text::token_set(name1);
    auto b = text::token_set(name2);
    std::set<std::string> sa(a.begin(), a.end());
    bool overlap = std::any_of(b.begin(), b.end(), [&](const std::string& t) { return sa.contains(t); });
    SimilarityScore score{0.0, SimilarityScore::Scale::EntScore};
    if (overlap) score.value = 100.0 - static_cast<double>(levenshtein(name1, name2));
    return score;
}

SimilarityScore jaccard(const std::vector<std::string>& tokens_a, const std::vector<std::string>& tokens_b) {
    std::set<std::string> a(tokens_a.begin(), tokens_a.end());
    std::set<std::string> b(tokens_b.begin(), tokens_b.end());
    SimilarityScore score{0.0, SimilarityScore::Scale::Jaccard};
    if (a.empty() && b.empty()) return score;
    std::size_t inter = 0;
    for (const auto& t : a) inter += b.contains(t) ? 1 : 0;
    std::size_t uni = a.size() + b.size() - inter;
    score.value = static_cast<double>(inter) / static_cast<double>(uni);
    return score;
}

SimilarityScore jaccard_text(std::string_view a, std::string_view b) {
    return jaccard(text::token_set(a), text::token_set(b));
}

double cosine(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("cosine: dimension mismatch");
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

SimilarityScore embsim(const std::string& relation, const AliasList& aliases, EmbeddingProvider& embedder) {
    SimilarityScore s{-1.0, SimilarityScore::Scale::Cosine};
    auto r = embedder.embed(relation);
    for (const auto& alias : aliases) {
        double c = cosine(r, embedder.embed(alias));
        if (c > s.value) s.value = c;
    }
    return s;
}

std::optional<std::size_t> argmax_first(std::span<const double> scores) {
    if (scores.empty()) return std::nullopt;
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i) {
        if (scores[i] > scores[best]) best = i;
    }
    return best;
}

std::vector<RelationMatch> score_relations(const std::vector<std::string>& candidate_relations,
                                           const AliasList& aliases, EmbeddingProvider& embedder) {
    std::vector<RelationMatch> out;
    std::set<std::string> seen;
    for (const auto& r : candidate_relations) {
        if (!seen.insert(r).second) continue;
        out.push_back({r, embsim(r, aliases, embedder).value});
    }
    return out;
}

std::optional<RelationMatch> best_relation(const std::vector<std::string>& candidate_relations,
                                           const AliasList& aliases, EmbeddingProvider& embedder) {
    auto scored = score_relations(candidate_relations, aliases, embedder);
    std::vector<double> values;
    values.reserve(scored.size());
    for (const auto& m : scored) values.push_back(m.score);
    auto idx = argmax_first(values);
    if (!idx) return std::nullopt;
    return scored[*idx];
}

}  // namespace kbridge
