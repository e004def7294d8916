#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>

#include "kbridge/errors.hpp"
#include "kbridge/kb.hpp"
#include "kbridge/similarity.hpp"
#include "kbridge/text.hpp"

namespace kbridge {

std::vector<Triple> rank_triples_by_hint(const std::vector<Triple>& triples, const AliasList& hint,
                                         std::size_t limit) {
    std::vector<double> scores;
    scores.reserve(triples.size());
    for (const auto& t : triples) {
        double best = 0.0;
        for (const auto& alias : hint) best = std::max(best, jaccard_text(t.relation, alias).value);
        scores.push_back(best);
    }
    std::vector<std::size_t> order(triples.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    if (order.size() > limit) order.resize(limit);
    std::vector<Triple> out;
    out.reserve(order.size());
    for (auto i : order) out.push_back(triples[i]);
    return out;
}

std::optional<KbFormat> kb_format_from_string(std::string_view s) {
    if (s == "nlpcc_tsv") return KbFormat::NlpccTsv;
    if (s == "triples_tsv") return KbFormat::TriplesTsv;
    return std::nullopt;
}

std::string_view to_string(KbFormat f) { return f == KbFormat::NlpccTsv ? "nlpcc_tsv" : "triples_tsv"; }

std::string linking_name(std::string_view head) {
    auto s = text::trim(head);
    for (auto [open, close] : {std::pair<std::string_view, std::string_view>{"(", ")"}, {"（", "）"}}) {
        if (s.size() > close.size() && s.compare(s.size() - close.size(), close.size(), close) == 0) {
            auto pos = s.rfind(open);
            if (pos != std::string::npos && pos > 0) {
                auto base = text::trim(s.substr(0, pos));
                if (!base.empty()) return base;
            }
        }
    }
    return s;
}

KbCapabilities FileKb::capabilities() const {
    bool any_description = std::any_of(entities_.begin(), entities_.end(),
                                       [](const Entity& e) { return e.description.has_value(); });
    return {any_description, options_.kbqa_mode, false};
}

std::size_t FileKb::ensure_entity(const std::string& head) {
    auto it = by_head_.find(head);
    if (it != by_head_.end()) return it->second;
    auto idx = entities_.size();
    entities_.push_back(Entity{head, {}, std::nullopt, {}});
    by_head_.emplace(head, idx);
    index_alias(idx, head);
    auto short_name = linking_name(head);
    if (short_name != head) index_alias(idx, short_name);
    return idx;
}

void FileKb::index_alias(std::size_t idx, const std::string& alias) {
    auto add = [idx](std::vector<std::size_t>& v) {
        if (std::find(v.begin(), v.end(), idx) == v.end()) v.push_back(idx);
    };
    add(exact_[alias]);
    add(folded_[text::case_fold(alias)]);
}

const FileKb::Entity* FileKb::find(const EntityId& id) const {
    if (id.kb_tag != options_.kb_tag) return nullptr;
    auto it = by_head_.find(id.local_id);
    return it == by_head_.end() ? nullptr : &entities_[it->second];
}

std::vector<EntityCandidate> FileKb::find_candidates(const Query&, const AliasList& aliases) {
    std::vector<std::size_t> hits;
    auto take = [&hits](const std::vector<std::size_t>& v) {
        for (auto i : v) {
            if (std::find(hits.begin(), hits.end(), i) == hits.end()) hits.push_back(i);
        }
    };
    for (const auto& alias : aliases) {
        if (auto it = exact_.find(alias); it != exact_.end()) take(it->second);
        if (auto it = folded_.find(text::case_fold(alias)); it != folded_.end()) take(it->second);
    }
    std::vector<EntityCandidate> out;
    for (auto i : hits) {
        const auto& e = entities_[i];
        EntityCandidate c;
        c.entity = {options_.kb_tag, e.head};
        c.display_name = e.head;
        c.aliases.push_back(e.head);
        for (const auto& a : e.aliases) {
            if (a != e.head) c.aliases.push_back(a);
        }
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<Triple> FileKb::get_entity_triples(const EntityId& entity) {
    const auto* e = find(entity);
    return e ? e->triples : std::vector<Triple>{};
}

EntityInfo FileKb::get_entity_info(const EntityId& entity, const std::optional<AliasList>& relation_hint) {
    const auto* e = find(entity);
    if (!e) return {};
    if (options_.kbqa_mode && relation_hint) return {std::nullopt, rank_triples_by_hint(e->triples, *relation_hint), {}};
    return {e->description, e->triples, {}};
}

std::string FileKb::display_name(const EntityId& entity) {
    const auto* e = find(entity);
    return e ? e->head : entity.local_id;
}

std::vector<Triple> FileKb::all_triples() const {
    std::vector<Triple> out;
    for (const auto& e : entities_) out.insert(out.end(), e.triples.begin(), e.triples.end());
    return out;
}

std::vector<std::string> FileKb::heads() const {
    std::vector<std::string> out;
    for (const auto& e : entities_) out.push_back(e.head);
    return out;
}

namespace {

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
    }
    if (in.bad()) throw IoError("error reading " + path.string());
    return lines;
}

std::vector<std::string> split_tail(const std::string& tail, const std::vector<std::string>& delims) {
    std::vector<std::string> parts{tail};
    for (const auto& d : delims) {
        if (d.empty()) continue;
        std::vector<std::string> next;
        for (const auto& p : parts) {
            std::size_t start = 0;
            while (true) {
                auto pos = p.find(d, start);
                next.push_back(p.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
                if (pos == std::string::npos) break;
                start = pos + d.size();
            }
        }
        parts = std::move(next);
    }
    std::vector<std::string> out;
    for (auto& p : parts) {
        auto t = text::trim(p);
        if (!t.empty()) out.push_back(std::move(t));
    }
    return out;
}

/// Two-column sidecar rows; malformed rows are skipped.
std::vector<std::pair<std::string, std::string>> read_pairs(const std::filesystem::path& path) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& line : read_lines(path)) {
        auto tab = line.find('\t');
        if (tab == std::string::npos) continue;
        auto a = text::trim(line.substr(0, tab));
        auto b = text::trim(line.substr(tab + 1));
        if (!a.empty() && !b.empty()) out.emplace_back(std::move(a), std::move(b));
    }
    return out;
}

}  // namespace

FileKb load_file_kb(const std::filesystem::path& path, KbFormat format, FileKbOptions options) {
    FileKb kb;
    std::vector<std::string> delims;
    if (options.tail_split_delimiters) {
        delims = *options.tail_split_delimiters;
    } else if (format == KbFormat::NlpccTsv) {
        delims = {"|", "、"};
    }
    kb.options_ = std::move(options);
    for (const auto& line : read_lines(path)) {
        if (text::trim(line).empty()) continue;
        auto fields = text::split(line, '\t');
        if (fields.size() != 3) {
            ++kb.malformed_;
            continue;
        }
        auto head = text::trim(fields[0]);
        auto relation = text::trim(fields[1]);
        auto tails = split_tail(fields[2], delims);
        if (head.empty() || relation.empty() || tails.empty()) {
            ++kb.malformed_;
            continue;
        }
        auto idx = kb.ensure_entity(head);
        for (auto& t : tails) {
            kb.entities_[idx].triples.push_back(Triple{{kb.options_.kb_tag, head}, relation, std::move(t)});
            ++kb.triple_count_;
        }
    }
    if (kb.triple_count_ == 0) throw FormatError("no well-formed triples in " + path.string());
    if (kb.options_.descriptions_path) {
        for (auto& [entity, description] : read_pairs(*kb.options_.descriptions_path)) {
            auto idx = kb.ensure_entity(entity);
            kb.entities_[idx].description = std::move(description);
        }
    }
    if (kb.options_.aliases_path) {
        for (auto& [entity, alias] : read_pairs(*kb.options_.aliases_path)) {
            auto idx = kb.ensure_entity(entity);
            auto& aliases = kb.entities_[idx].aliases;
            if (std::find(aliases.begin(), aliases.end(), alias) == aliases.end()) aliases.push_back(alias);
            kb.index_alias(idx, alias);
        }
    }
    return kb;
}

}  // namespace kbridge
