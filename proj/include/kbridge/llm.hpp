#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kbridge {

enum class PromptName { SearchCode, EntityLinking, Answer, Extraction };

std::string_view to_string(PromptName name);
std::optional<PromptName> prompt_name_from_string(std::string_view s);

using Slots = std::map<std::string, std::string>;

/// A fully instantiated prompt. `attempt` is 0 for the first dispatch and 1
/// for the format-repair retry.
struct LlmRequest {
    PromptName name = PromptName::SearchCode;
    Slots slots;
    std::string prompt;
    int attempt = 0;
};

/// "<Template>:<16 hex digits>" over whitespace-normalized slot values, with
/// "#repair" appended for the retry. Independent of the template body.
std::string request_key(PromptName name, const Slots& slots, int attempt = 0);

class LlmProvider {
  public:
    virtual ~LlmProvider() = default;
    /// Raw model text. Throws ProviderError.
    virtual std::string complete(const LlmRequest& request) = 0;
};

/// Replays canned responses keyed by request_key(). Fixture files are JSON:
///   {"request_key": "...", "response": "..."}
/// or, for hand authoring, {"template": "...", "slots": {...}, "response": "..."}
/// from which the key is derived. An optional "repair_response" answers the
/// retry request. Later directories override earlier ones.
class ScriptedProvider final : public LlmProvider {
  public:
    ScriptedProvider() = default;
    explicit ScriptedProvider(const std::vector<std::filesystem::path>& fixture_dirs);

    void add(const std::string& key, std::string response);
    void add(PromptName name, const Slots& slots, std::string response,
             std::optional<std::string> repair_response = std::nullopt);

    /// On a miss, write a stub fixture (response null) into `dir` before failing.
    void record_misses_to(std::filesystem::path dir);

    std::string complete(const LlmRequest& request) override;

    std::size_t size() const;
    std::size_t calls() const;
    std::vector<std::string> misses() const;

  private:
    void load_dir(const std::filesystem::path& dir);

    mutable std::mutex mu_;
    std::map<std::string, std::string> responses_;
    std::optional<std::filesystem::path> record_dir_;
    std::vector<std::string> misses_;
    std::size_t calls_ = 0;
};

struct LiveProviderConfig {
    std::string base_url = "https://api.openai.com/v1";
    std::string model = "gpt-4";
    std::string api_key;
    int timeout_seconds = 60;
};

/// OpenAI-compatible chat-completion client.
class LiveProvider final : public LlmProvider {
  public:
    explicit LiveProvider(LiveProviderConfig config);
    std::string complete(const LlmRequest& request) override;

  private:
    LiveProviderConfig config_;
};

}  // namespace kbridge
