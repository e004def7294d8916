#include "kbridge/pkb.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <mutex>

#include <nlohmann/json.hpp>

#include "kbridge/errors.hpp"
#include "kbridge/similarity.hpp"
#include "kbridge/text.hpp"

namespace kbridge {

using nlohmann::json;

namespace {

std::size_t numeric_suffix(const std::string& id) {
    std::size_t i = 0;
    while (i < id.size() && !std::isdigit(static_cast<unsigned char>(id[i]))) ++i;
    if (i == id.size()) return 0;
    try {
        return static_cast<std::size_t>(std::stoull(id.substr(i)));
    } catch (const std::exception&) {
        return 0;
    }
}

json record_to_json(const PkbRecord& r) {
    json j;
    j["id"] = r.id;
    std::visit(
        [&](const auto& form) {
            using T = std::decay_t<decltype(form)>;
            if constexpr (std::is_same_v<T, Description>) {
                j["kind"] = "description";
                j["entity"] = form.entity.local_id;
                j["text"] = form.text;
            } else if constexpr (std::is_same_v<T, Triple>) {
                j["kind"] = "triple";
                j["entity"] = form.head.local_id;
                j["relation"] = form.relation;
                j["tail"] = form.tail_text();
            } else {
                j["kind"] = "aspect";
                j["entity"] = form.entity.local_id;
                j["aspect"] = form.aspect;
                j["text"] = form.text;
            }
        },
        r.record.form);
    if (r.record.source_doc) j["source"] = *r.record.source_doc;
    return j;
}

std::string required_string(const json& j, const char* key, std::size_t line) {
    if (!j.contains(key) || !j[key].is_string()) throw CorruptStore(line, std::string("missing string field '") + key + "'");
    return j[key].get<std::string>();
}

void write_all(int fd, const std::string& s, const std::filesystem::path& path) {
    std::size_t off = 0;
    while (off < s.size()) {
        auto n = ::write(fd, s.data() + off, s.size() - off);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw IoError("cannot write " + path.string() + ": " + std::strerror(errno));
        }
        off += static_cast<std::size_t>(n);
    }
}

}  // namespace

PkbStore::PkbStore(EmbeddingProvider& embedder, PkbOptions options)
    : embedder_(&embedder), options_(std::move(options)) {}

PkbStore::PkbStore(PkbStore&& other) noexcept
    : embedder_(other.embedder_),
      options_(std::move(other.options_)),
      path_(std::move(other.path_)),
      data_(std::move(other.data_)),
      entity_pos_(std::move(other.entity_pos_)),
      index_(std::move(other.index_)),
      next_entity_(other.next_entity_),
      next_record_(other.next_record_),
      next_doc_(other.next_doc_) {}

void PkbStore::index_entity(std::size_t idx) {
    const auto& e = data_.entities[idx];
    entity_pos_[e.id] = idx;
    for (const auto& alias : e.aliases) index_.push_back({idx, embedder_->embed(alias)});
}

void PkbStore::rebuild_counters() {
    next_entity_ = next_record_ = next_doc_ = 1;
    for (const auto& e : data_.entities) next_entity_ = std::max(next_entity_, numeric_suffix(e.id) + 1);
    for (const auto& r : data_.records) {
        next_record_ = std::max(next_record_, numeric_suffix(r.id) + 1);
        if (r.record.source_doc) next_doc_ = std::max(next_doc_, numeric_suffix(*r.record.source_doc) + 1);
    }
}

PkbStore PkbStore::load(const std::filesystem::path& path, EmbeddingProvider& embedder, PkbOptions options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    PkbStore store(embedder, std::move(options));
    const auto& tag = store.options_.kb_tag;
    std::string line;
    std::size_t lineno = 0;
    std::map<std::string, bool> known;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (text::trim(line).empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw CorruptStore(lineno, std::string("invalid JSON: ") + e.what());
        }
        if (!j.is_object()) throw CorruptStore(lineno, "expected an object");
        auto kind = required_string(j, "kind", lineno);
        auto id = required_string(j, "id", lineno);
        if (kind == "entity") {
            if (!j.contains("aliases") || !j["aliases"].is_array() || j["aliases"].empty()) {
                throw CorruptStore(lineno, "entity needs a non-empty alias list");
            }
            PkbEntity e{id, {}};
            for (const auto& a : j["aliases"]) {
                if (!a.is_string()) throw CorruptStore(lineno, "aliases must be strings");
                e.aliases.push_back(a.get<std::string>());
            }
            if (known.contains(id)) throw CorruptStore(lineno, "duplicate entity id '" + id + "'");
            known[id] = true;
            store.data_.entities.push_back(std::move(e));
            continue;
        }
        auto entity = required_string(j, "entity", lineno);
        if (!known.contains(entity)) throw CorruptStore(lineno, "record refers to unknown entity '" + entity + "'");
        EntityId eid{tag, entity};
        KnowledgeRecord rec;
        if (kind == "description") {
            rec.form = Description{eid, required_string(j, "text", lineno)};
        } else if (kind == "triple") {
            rec.form = Triple{eid, required_string(j, "relation", lineno), required_string(j, "tail", lineno)};
        } else if (kind == "aspect") {
            rec.form = AspectRecord{eid, required_string(j, "aspect", lineno), required_string(j, "text", lineno)};
        } else {
            throw CorruptStore(lineno, "unknown kind '" + kind + "'");
        }
        if (j.contains("source")) {
            if (!j["source"].is_string()) throw CorruptStore(lineno, "source must be a string");
            rec.source_doc = j["source"].get<std::string>();
        }
        store.data_.records.push_back({id, std::move(rec)});
    }
    if (in.bad()) throw IoError("error reading " + path.string());
    for (std::size_t i = 0; i < store.data_.entities.size(); ++i) store.index_entity(i);
    store.rebuild_counters();
    return store;
}

void PkbStore::write_file(const std::filesystem::path& path, const PkbData& data,
                          const std::function<void(std::size_t)>& after_line) const {
    auto tmp = path;
    tmp += ".tmp";
    int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    if (fd < 0) throw IoError("cannot write " + tmp.string() + ": " + std::strerror(errno));
    try {
        std::size_t n = 0;
        for (const auto& e : data.entities) {
            json j{{"kind", "entity"}, {"id", e.id}, {"aliases", e.aliases}};
            write_all(fd, j.dump() + "\n", tmp);
            if (after_line) after_line(++n);
        }
        for (const auto& r : data.records) {
            write_all(fd, record_to_json(r).dump() + "\n", tmp);
            if (after_line) after_line(++n);
        }
        if (::fsync(fd) != 0) throw IoError("cannot sync " + tmp.string() + ": " + std::strerror(errno));
    } catch (...) {
        ::close(fd);
        std::error_code ec;
        std::filesystem::remove(tmp, ec);
        throw;
    }
    ::close(fd);
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot replace " + path.string() + ": " + ec.message());
    }
}

void PkbStore::save(const std::filesystem::path& path, const std::function<void(std::size_t)>& after_line) const {
    std::shared_lock lock(mu_);
    write_file(path, data_, after_line);
}

void PkbStore::set_path(std::optional<std::filesystem::path> path) {
    std::unique_lock lock(mu_);
    path_ = std::move(path);
}

std::vector<std::string> PkbStore::add_extracted(const std::vector<ExtractedRecord>& extracted,
                                                 std::optional<std::string> source_doc) {
    std::unique_lock lock(mu_);
    PkbData next = data_;
    auto entity_counter = next_entity_;
    auto record_counter = next_record_;
    std::vector<std::string> ids;
    std::vector<std::pair<AliasList, std::string>> local;  // alias list -> entity id, this call only
    auto doc_id = source_doc ? std::optional<std::string>("d" + std::to_string(next_doc_)) : std::nullopt;
    for (const auto& x : extracted) {
        if (x.entity.empty()) throw std::invalid_argument("extracted record without entity aliases");
        auto it = std::find_if(local.begin(), local.end(), [&](const auto& p) { return p.first == x.entity; });
        std::string eid;
        if (it == local.end()) {
            eid = "e" + std::to_string(entity_counter++);
            next.entities.push_back({eid, x.entity.items()});
            local.emplace_back(x.entity, eid);
        } else {
            eid = it->second;
        }
        EntityId id{options_.kb_tag, eid};
        KnowledgeRecord rec;
        switch (x.kind) {
            case ExtractedRecord::Kind::Description:
                rec.form = Description{id, x.value};
                break;
            case ExtractedRecord::Kind::Triple:
                rec.form = Triple{id, x.label, x.value};
                break;
            case ExtractedRecord::Kind::Aspect:
                rec.form = AspectRecord{id, x.label, x.value};
                break;
        }
        rec.source_doc = doc_id;
        auto rid = "r" + std::to_string(record_counter++);
        next.records.push_back({rid, std::move(rec)});
        ids.push_back(rid);
    }
    if (path_) write_file(*path_, next, {});
    auto first_new = data_.entities.size();
    data_ = std::move(next);
    for (auto i = first_new; i < data_.entities.size(); ++i) index_entity(i);
    next_entity_ = entity_counter;
    next_record_ = record_counter;
    if (doc_id) ++next_doc_;
    return ids;
}

std::vector<EntityCandidate> PkbStore::entity_search(const AliasList& aliases) const {
    std::shared_lock lock(mu_);
    std::vector<std::size_t> exact;
    for (std::size_t i = 0; i < data_.entities.size(); ++i) {
        const auto& e = data_.entities[i];
        bool hit = std::any_of(aliases.begin(), aliases.end(), [&](const std::string& q) {
            auto fq = text::case_fold(q);
            return std::any_of(e.aliases.begin(), e.aliases.end(),
                               [&](const std::string& a) { return a == q || text::case_fold(a) == fq; });
        });
        if (hit) exact.push_back(i);
    }
    std::vector<Vector> query_vecs;
    for (const auto& q : aliases) query_vecs.push_back(embedder_->embed(q));
    std::map<std::size_t, double> best;
    for (const auto& entry : index_) {
        if (std::find(exact.begin(), exact.end(), entry.entity) != exact.end()) continue;
        for (const auto& qv : query_vecs) {
            double c = cosine(entry.vector, qv);
            if (c >= options_.match_threshold) {
                auto [it, inserted] = best.try_emplace(entry.entity, c);
                if (!inserted) it->second = std::max(it->second, c);
            }
        }
    }
    std::vector<std::pair<std::size_t, double>> fuzzy(best.begin(), best.end());
    std::stable_sort(fuzzy.begin(), fuzzy.end(), [](const auto& a, const auto& b) { return a.second > b.second; });

    std::vector<EntityCandidate> out;
    auto emit = [&](std::size_t i) {
        const auto& e = data_.entities[i];
        out.push_back(EntityCandidate{{options_.kb_tag, e.id}, e.aliases.front(), e.aliases, {}});
    };
    for (auto i : exact) emit(i);
    for (const auto& [i, score] : fuzzy) emit(i);
    return out;
}

PkbData PkbStore::data() const {
    std::shared_lock lock(mu_);
    return data_;
}

std::size_t PkbStore::entity_count() const {
    std::shared_lock lock(mu_);
    return data_.entities.size();
}

std::size_t PkbStore::record_count() const {
    std::shared_lock lock(mu_);
    return data_.records.size();
}

const PkbEntity* PkbStore::find_entity(const EntityId& id) const {
    if (id.kb_tag != options_.kb_tag) return nullptr;
    auto it = entity_pos_.find(id.local_id);
    return it == entity_pos_.end() ? nullptr : &data_.entities[it->second];
}

std::vector<EntityCandidate> PkbStore::find_candidates(const Query&, const AliasList& aliases) {
    return entity_search(aliases);
}

std::vector<Triple> PkbStore::get_entity_triples(const EntityId& entity) {
    std::shared_lock lock(mu_);
    std::vector<Triple> out;
    for (const auto& r : data_.records) {
        if (const auto* t = std::get_if<Triple>(&r.record.form); t && t->head == entity) out.push_back(*t);
    }
    return out;
}

EntityInfo PkbStore::get_entity_info(const EntityId& entity, const std::optional<AliasList>&) {
    std::shared_lock lock(mu_);
    EntityInfo info;
    std::vector<std::string> descriptions;
    for (const auto& r : data_.records) {
        if (r.record.entity() != entity) continue;
        if (const auto* d = std::get_if<Description>(&r.record.form)) descriptions.push_back(d->text);
        if (const auto* t = std::get_if<Triple>(&r.record.form)) info.triples.push_back(*t);
    }
    if (!descriptions.empty()) info.description = text::join(descriptions, " ");
    return info;
}

std::vector<AspectRecord> PkbStore::get_entity_aspects(const EntityId& entity) {
    std::shared_lock lock(mu_);
    std::vector<AspectRecord> out;
    for (const auto& r : data_.records) {
        if (const auto* a = std::get_if<AspectRecord>(&r.record.form); a && a->entity == entity) out.push_back(*a);
    }
    return out;
}

std::string PkbStore::display_name(const EntityId& entity) {
    std::shared_lock lock(mu_);
    const auto* e = find_entity(entity);
    return e ? e->aliases.front() : entity.local_id;
}

std::vector<std::string> store_document(const std::string& doc, PkbStore& store, LlmGateway& gateway) {
    if (text::trim(doc).empty()) throw std::invalid_argument("document is empty");
    std::vector<ExtractedRecord> extracted;
    try {
        extracted = gateway.extract_knowledge(doc);
    } catch (const MalformedOutput& e) {
        throw ProviderError(std::string("extraction: ") + e.what());
    }
    return store.add_extracted(extracted, doc);
}

std::vector<EntityCandidate> pkb_entity_linking(const Query&, const AliasList& aliases, PkbStore& store) {
    return store.entity_search(aliases);
}

}  // namespace kbridge
