#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "kbridge/kb.hpp"

namespace kbridge {

/// Parses the TOML subset used by config files: [table] and [dotted.table]
/// headers, bare or quoted keys, basic and literal strings, integers, floats,
/// booleans and (possibly multi-line) arrays of those. Comments start with #.
/// Throws ConfigError with the line number.
nlohmann::json parse_toml(std::string_view source, const std::string& origin = "<config>");

/// Renders a table of scalars and arrays under `[header]`.
std::string render_toml_table(const std::string& header, const nlohmann::json& table);

/// Replaces (or appends) the `[header]` table in a config file's text.
std::string replace_toml_table(const std::string& source, const std::string& header, const nlohmann::json& table);

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
EnvLookup process_env();

enum class ProviderKind { Scripted, Live };
enum class EmbeddingKind { Hash, Remote };
enum class KbType { File, Remote };

struct KbEntry {
    std::string tag;
    KbType type = KbType::File;
    // file
    std::filesystem::path path;
    KbFormat format = KbFormat::TriplesTsv;
    bool kbqa_mode = false;
    std::optional<std::vector<std::string>> delimiters;
    std::optional<std::filesystem::path> descriptions;
    std::optional<std::filesystem::path> aliases;
    // remote
    std::string search_url;
    std::string linking_url;
    std::string entity_url;
    std::size_t max_candidates = 8;
    /// Replay directory for a mock transport instead of HTTP.
    std::optional<std::filesystem::path> transport_dir;
};

struct AppConfig {
    std::optional<std::filesystem::path> source;  // config file, when one was read

    ProviderKind provider = ProviderKind::Scripted;
    std::vector<std::filesystem::path> fixtures;
    std::optional<std::filesystem::path> record_misses;
    std::string base_url = "https://api.openai.com/v1";
    std::string model = "gpt-4";
    std::string api_key;
    int timeout_seconds = 60;

    EmbeddingKind embedding = EmbeddingKind::Hash;
    std::size_t embedding_dimension = 256;
    std::string embedding_url = "https://api.openai.com/v1";
    std::string embedding_model = "text-embedding-ada-002";

    std::optional<std::filesystem::path> pkb_path;

    double relation_threshold = 0.85;
    double relation_floor = 0.30;
    double embedding_match = 0.80;
    std::size_t message_cap = 8000;

    /// Language key ("en", "zh", "default") to KB tags; "PKB" names the
    /// personal store.
    std::map<std::string, std::vector<std::string>> routing;
    std::vector<KbEntry> kbs;

    const KbEntry* find_kb(const std::string& tag) const;
};

/// Command-line values that override environment and file settings.
struct ConfigOverrides {
    std::optional<std::filesystem::path> config_path;
    std::optional<std::string> provider;
    std::vector<std::filesystem::path> fixtures;
    std::optional<std::filesystem::path> record_misses;
    std::optional<std::filesystem::path> pkb_path;
    std::optional<double> relation_threshold;
    std::optional<double> relation_floor;
    std::optional<double> embedding_match;
    std::optional<std::size_t> message_cap;
};

/// Default location: $XDG_CONFIG_HOME/kbridge/config.toml, else
/// ~/.config/kbridge/config.toml.
std::optional<std::filesystem::path> default_config_path(const EnvLookup& env);

/// Which file would be read: --config, then KBRIDGE_CONFIG, then the default.
std::optional<std::filesystem::path> resolve_config_path(const ConfigOverrides& flags, const EnvLookup& env);

/// Precedence per setting: flag, then environment, then file. An explicitly
/// named config file must exist; the default one may be absent. Relative
/// paths in the file resolve against its directory. Throws ConfigError.
AppConfig load_config(const ConfigOverrides& flags, const EnvLookup& env);

/// Builds an AppConfig from already parsed TOML (no environment, no flags).
AppConfig config_from_toml(const nlohmann::json& doc, const std::filesystem::path& base_dir);

}  // namespace kbridge
