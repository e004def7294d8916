#include "kbridge/llm.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "kbridge/errors.hpp"
#include "kbridge/http.hpp"
#include "kbridge/text.hpp"

namespace kbridge {

std::string_view to_string(PromptName name) {
    switch (name) {
        case PromptName::SearchCode:
            return "SearchCode";
        case PromptName::EntityLinking:
            return "EntityLinking";
        case PromptName::Answer:
            return "Answer";
        case PromptName::Extraction:
            break;
    }
    return "Extraction";
}

std::optional<PromptName> prompt_name_from_string(std::string_view s) {
    for (auto n : {PromptName::SearchCode, PromptName::EntityLinking, PromptName::Answer, PromptName::Extraction}) {
        if (to_string(n) == s) return n;
    }
    return std::nullopt;
}

namespace {

std::string normalize_slot(std::string_view v) {
    std::string out;
    bool pending_space = false;
    for (char32_t cp : text::decode_utf8(v)) {
        if (text::is_space(cp)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out += ' ';
        pending_space = false;
        text::append_utf8(out, cp);
    }
    return out;
}

std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 1469598103934665603ULL) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

std::string request_key(PromptName name, const Slots& slots, int attempt) {
    std::uint64_t h = 1469598103934665603ULL;
    for (const auto& [k, v] : slots) {
        h = fnv1a(k, h);
        h = fnv1a("\x1f", h);
        h = fnv1a(normalize_slot(v), h);
        h = fnv1a("\x1e", h);
    }
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
    std::string key = std::string(to_string(name)) + ":" + hex;
    if (attempt > 0) key += "#repair";
    return key;
}

ScriptedProvider::ScriptedProvider(const std::vector<std::filesystem::path>& fixture_dirs) {
    for (const auto& d : fixture_dirs) load_dir(d);
}

void ScriptedProvider::load_dir(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw IoError("fixture directory not found: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(read_file(f));
        } catch (const nlohmann::json::exception& e) {
            throw FormatError("bad fixture " + f.string() + ": " + e.what());
        }
        auto entries = j.is_array() ? j : nlohmann::json::array({j});
        for (const auto& e : entries) {
            if (!e.contains("response") || e["response"].is_null()) {
                spdlog::warn("skipping stub fixture without response in {}", f.string());
                continue;
            }
            std::string key;
            Slots slots;
            std::optional<PromptName> name;
            if (e.contains("template")) {
                name = prompt_name_from_string(e["template"].get<std::string>());
                if (!name) throw FormatError("unknown template in " + f.string());
                slots = e.value("slots", nlohmann::json::object()).get<Slots>();
            }
            if (e.contains("request_key")) {
                key = e["request_key"].get<std::string>();
            } else if (name) {
                key = request_key(*name, slots);
            } else {
                throw FormatError("fixture " + f.string() + " has neither request_key nor template");
            }
            responses_[key] = e["response"].get<std::string>();
            if (e.contains("repair_response") && !e["repair_response"].is_null()) {
                responses_[key + "#repair"] = e["repair_response"].get<std::string>();
            }
        }
    }
}

void ScriptedProvider::add(const std::string& key, std::string response) {
    std::lock_guard lock(mu_);
    responses_[key] = std::move(response);
}

void ScriptedProvider::add(PromptName name, const Slots& slots, std::string response,
                           std::optional<std::string> repair_response) {
    std::lock_guard lock(mu_);
    auto key = request_key(name, slots);
    responses_[key] = std::move(response);
    if (repair_response) responses_[key + "#repair"] = std::move(*repair_response);
}

void ScriptedProvider::record_misses_to(std::filesystem::path dir) {
    std::lock_guard lock(mu_);
    record_dir_ = std::move(dir);
}

std::string ScriptedProvider::complete(const LlmRequest& request) {
    auto key = request_key(request.name, request.slots, request.attempt);
    std::lock_guard lock(mu_);
    ++calls_;
    if (auto it = responses_.find(key); it != responses_.end()) return it->second;
    misses_.push_back(key);
    if (record_dir_) {
        std::filesystem::create_directories(*record_dir_);
        nlohmann::json stub = {{"request_key", key},
                               {"template", std::string(to_string(request.name))},
                               {"slots", request.slots},
                               {"response", nullptr}};
        auto fname = key;
        std::replace(fname.begin(), fname.end(), ':', '-');
        std::replace(fname.begin(), fname.end(), '#', '-');
        std::ofstream out(*record_dir_ / (fname + ".json"));
        out << stub.dump(2) << '\n';
    }
    throw ProviderError("no scripted response for request " + key);
}

std::size_t ScriptedProvider::size() const {
    std::lock_guard lock(mu_);
    return responses_.size();
}

std::size_t ScriptedProvider::calls() const {
    std::lock_guard lock(mu_);
    return calls_;
}

std::vector<std::string> ScriptedProvider::misses() const {
    std::lock_guard lock(mu_);
    return misses_;
}

LiveProvider::LiveProvider(LiveProviderConfig config) : config_(std::move(config)) {}

std::string LiveProvider::complete(const LlmRequest& request) {
    nlohmann::json body = {{"model", config_.model},
                           {"temperature", 0},
                           {"messages", nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}})}};
    http::Headers headers;
    if (!config_.api_key.empty()) headers.emplace_back("Authorization", "Bearer " + config_.api_key);
    auto resp = http::post(http::join_url(config_.base_url, "chat/completions"), body.dump(), "application/json",
                           headers, config_.timeout_seconds);
    if (resp.status < 200 || resp.status >= 300) {
        throw ProviderError("chat endpoint returned HTTP " + std::to_string(resp.status));
    }
    try {
        auto j = nlohmann::json::parse(resp.body);
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ProviderError(std::string("unexpected chat response: ") + e.what());
    }
}

}  // namespace kbridge
