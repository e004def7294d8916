#include "kbridge/embedding.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "kbridge/errors.hpp"
#include "kbridge/http.hpp"
#include "kbridge/text.hpp"

namespace kbridge {

void normalize_in_place(Vector& v) {
    double n = 0.0;
    for (double x : v) n += x * x;
    n = std::sqrt(n);
    if (n == 0.0) return;
    for (double& x : v) x /= n;
}

namespace {

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace

HashEmbedder::HashEmbedder(std::size_t dimension) : dim_(dimension) {
    if (dim_ == 0) throw std::invalid_argument("embedding dimension must be positive");
}

std::vector<std::string> HashEmbedder::grams(const std::string& s) {
    auto cps = text::decode_utf8(text::case_fold(s));
    std::vector<std::string> out;
    if (cps.size() < 3) {
        out.push_back(text::encode_utf8(cps));
        return out;
    }
    for (std::size_t i = 0; i + 3 <= cps.size(); ++i) {
        out.push_back(text::encode_utf8(std::u32string_view(cps).substr(i, 3)));
    }
    return out;
}

std::size_t HashEmbedder::bucket(const std::string& gram, std::size_t dimension) {
    return static_cast<std::size_t>(fnv1a(gram) % dimension);
}

Vector HashEmbedder::embed(const std::string& s) {
    if (s.empty()) throw std::invalid_argument("cannot embed empty text");
    Vector v(dim_, 0.0);
    for (const auto& g : grams(s)) v[bucket(g, dim_)] += 1.0;
    normalize_in_place(v);
    return v;
}

RemoteEmbedder::RemoteEmbedder(RemoteEmbeddingConfig config) : config_(std::move(config)) {}

Vector RemoteEmbedder::embed(const std::string& s) {
    if (s.empty()) throw std::invalid_argument("cannot embed empty text");
    nlohmann::json body = {{"model", config_.model}, {"input", s}};
    http::Headers headers;
    if (!config_.api_key.empty()) headers.emplace_back("Authorization", "Bearer " + config_.api_key);
    auto resp = http::post(http::join_url(config_.base_url, "embeddings"), body.dump(), "application/json",
                           headers, config_.timeout_seconds);
    if (resp.status < 200 || resp.status >= 300) {
        throw ProviderError("embedding endpoint returned HTTP " + std::to_string(resp.status));
    }
    Vector v;
    try {
        auto j = nlohmann::json::parse(resp.body);
        v = j.at("data").at(0).at("embedding").get<Vector>();
    } catch (const nlohmann::json::exception& e) {
        throw ProviderError(std::string("unexpected embedding response: ") + e.what());
    }
    if (v.size() != config_.dimension) {
        throw ProviderError("embedding dimension " + std::to_string(v.size()) + " != configured " +
                            std::to_string(config_.dimension));
    }
    normalize_in_place(v);
    return v;
}

Vector CachingEmbedder::embed(const std::string& s) {
    {
        std::lock_guard lock(mu_);
        if (auto it = cache_.find(s); it != cache_.end()) return it->second;
    }
    auto v = inner_.embed(s);
    std::lock_guard lock(mu_);
    cache_.emplace(s, v);
    return v;
}

std::size_t CachingEmbedder::cached() const {
    std::lock_guard lock(mu_);
    return cache_.size();
}

}  // namespace kbridge
