#include <fstream>

#include <spdlog/spdlog.h>

#include "kbridge/errors.hpp"
#include "kbridge/http.hpp"
#include "kbridge/kb.hpp"

namespace kbridge {

using nlohmann::json;

namespace {

std::string request_signature(const std::string& url, const json& request) { return url + "\n" + request.dump(); }

}  // namespace

json HttpTransport::send(const std::string& url, const json& request) {
    auto resp = http::post(url, request.dump(), "application/json", {}, timeout_);
    if (resp.status < 200 || resp.status >= 300) {
        throw ProviderError("KB service returned HTTP " + std::to_string(resp.status) + " for " + url);
    }
    try {
        return json::parse(resp.body);
    } catch (const json::exception& e) {
        throw ProviderError("KB service returned invalid JSON: " + std::string(e.what()));
    }
}

MockTransport::MockTransport(const std::filesystem::path& fixtures_dir) {
    std::error_code ec;
    if (!std::filesystem::is_directory(fixtures_dir, ec)) throw IoError("not a directory: " + fixtures_dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(fixtures_dir)) {
        if (entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        std::ifstream in(f);
        json doc;
        try {
            doc = json::parse(in);
        } catch (const json::exception& e) {
            throw FormatError(f.string() + ": " + e.what());
        }
        auto add_one = [&](const json& item) {
            if (!item.is_object() || !item.contains("url") || !item.contains("request") || !item.contains("response")) {
                throw FormatError(f.string() + ": entries need url, request and response");
            }
            add(item["url"].get<std::string>(), item["request"], item["response"]);
        };
        if (doc.is_array()) {
            for (const auto& item : doc) add_one(item);
        } else {
            add_one(doc);
        }
    }
}

void MockTransport::add(const std::string& url, const json& request, json response) {
    std::lock_guard lock(mu_);
    replies_[request_signature(url, request)] = std::move(response);
}

json MockTransport::send(const std::string& url, const json& request) {
    std::lock_guard lock(mu_);
    ++calls_;
    auto it = replies_.find(request_signature(url, request));
    if (it == replies_.end()) throw ProviderError("no canned reply for " + url + " " + request.dump());
    return it->second;
}

std::size_t MockTransport::calls() const {
    std::lock_guard lock(mu_);
    return calls_;
}

std::optional<json> LruCache::get(const std::string& key) {
    std::lock_guard lock(mu_);
    auto it = index_.find(key);
    if (it == index_.end()) return std::nullopt;
    order_.splice(order_.begin(), order_, it->second);
    return it->second->second;
}

void LruCache::put(const std::string& key, json value) {
    std::lock_guard lock(mu_);
    if (capacity_ == 0) return;
    if (auto it = index_.find(key); it != index_.end()) {
        it->second->second = std::move(value);
        order_.splice(order_.begin(), order_, it->second);
        return;
    }
    order_.emplace_front(key, std::move(value));
    index_[key] = order_.begin();
    if (order_.size() > capacity_) {
        index_.erase(order_.back().first);
        order_.pop_back();
    }
}

std::size_t LruCache::size() const {
    std::lock_guard lock(mu_);
    return order_.size();
}

RemoteKb::RemoteKb(RemoteKbConfig config, std::shared_ptr<Transport> transport)
    : config_(std::move(config)), transport_(std::move(transport)), cache_(config_.cache_capacity) {
    if (!transport_) throw std::invalid_argument("RemoteKb needs a transport");
}

KbCapabilities RemoteKb::capabilities() const { return {config_.has_descriptions, false, false}; }

json RemoteKb::request(const std::string& url, const json& body) {
    auto key = request_signature(url, body);
    if (auto hit = cache_.get(key)) return *hit;
    auto reply = transport_->send(url, body);
    cache_.put(key, reply);
    return reply;
}

std::vector<EntityCandidate> RemoteKb::find_candidates(const Query& query, const AliasList& aliases) {
    std::vector<EntityCandidate> out;
    auto collect = [&](const json& reply) {
        if (!reply.is_object() || !reply.contains("entities") || !reply["entities"].is_array()) return;
        for (const auto& item : reply["entities"]) {
            if (out.size() >= config_.max_candidates) return;
            if (!item.is_object() || !item.contains("id")) continue;
            EntityCandidate c;
            c.entity = {config_.kb_tag, item["id"].is_string() ? item["id"].get<std::string>() : item["id"].dump()};
            bool seen = std::any_of(out.begin(), out.end(), [&](const auto& o) { return o.entity == c.entity; });
            if (seen) continue;
            c.display_name = item.value("name", c.entity.local_id);
            c.aliases.push_back(c.display_name);
            if (item.contains("aliases") && item["aliases"].is_array()) {
                for (const auto& a : item["aliases"]) {
                    if (a.is_string() && a.get<std::string>() != c.display_name) c.aliases.push_back(a.get<std::string>());
                }
            }
            c.info_snippet = item.value("description", std::string());
            out.push_back(std::move(c));
        }
    };
    // Linking-API results (name plus context) come first, then name-only search.
    for (const auto& alias : aliases) {
        try {
            collect(request(config_.linking_url, {{"text", query.text}, {"mention", alias}}));
        } catch (const std::exception& e) {
            spdlog::warn("{}: linking request failed: {}", config_.kb_tag, e.what());
        }
    }
    for (const auto& alias : aliases) {
        try {
            collect(request(config_.search_url, {{"query", alias}}));
        } catch (const std::exception& e) {
            spdlog::warn("{}: search request failed: {}", config_.kb_tag, e.what());
        }
    }
    return out;
}

json RemoteKb::entity_record(const EntityId& entity) {
    if (entity.kb_tag != config_.kb_tag) return json::object();
    auto reply = request(config_.entity_url, {{"id", entity.local_id}});
    if (!reply.is_object()) throw ProviderError("entity reply is not an object");
    return reply;
}

std::vector<Triple> RemoteKb::get_entity_triples(const EntityId& entity) {
    auto rec = entity_record(entity);
    std::vector<Triple> out;
    if (!rec.contains("triples") || !rec["triples"].is_array()) return out;
    for (const auto& t : rec["triples"]) {
        if (!t.is_object() || !t.contains("relation") || !t.contains("tail")) continue;
        const auto& tail = t["tail"];
        out.push_back(Triple{entity, t["relation"].get<std::string>(),
                             tail.is_string() ? tail.get<std::string>() : tail.dump()});
    }
    return out;
}

EntityInfo RemoteKb::get_entity_info(const EntityId& entity, const std::optional<AliasList>&) {
    auto rec = entity_record(entity);
    EntityInfo info;
    if (rec.contains("description") && rec["description"].is_string()) info.description = rec["description"].get<std::string>();
    info.triples = get_entity_triples(entity);
    return info;
}

std::string RemoteKb::display_name(const EntityId& entity) {
    try {
        auto rec = entity_record(entity);
        if (rec.contains("name") && rec["name"].is_string()) return rec["name"].get<std::string>();
    } catch (const std::exception&) {
    }
    return entity.local_id;
}

}  // namespace kbridge
