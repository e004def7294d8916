#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "kbridge/config.hpp"
#include "kbridge/embedding.hpp"
#include "kbridge/gateway.hpp"
#include "kbridge/kb.hpp"
#include "kbridge/pkb.hpp"
#include "kbridge/retrieval.hpp"

namespace kbridge::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitProvider = 3;

/// Providers, embedder and KBs built from an AppConfig.
class Runtime {
  public:
    explicit Runtime(AppConfig config);

    const AppConfig& config() const noexcept { return config_; }
    LlmGateway& gateway() { return *gateway_; }
    EmbeddingProvider& embedder() { return *embedder_; }
    RetrievalConfig retrieval() const;

    /// Loads a registered KB on first use. Throws ConfigError for unknown tags.
    KbBackend& kb(const std::string& tag);
    /// FileKb only (baselines). Throws ConfigError otherwise.
    const FileKb& file_kb(const std::string& tag);

    /// Opens the configured store (an absent file is an empty store) or an
    /// in-memory one when no path is set.
    PkbStore& pkb();
    bool has_pkb_path() const { return config_.pkb_path.has_value(); }

    /// Explicit tags, else the routing entry for the query language, else
    /// every registered KB; the PKB joins when a store path is configured.
    std::vector<KbBackend*> backends_for(const Query& query, const std::vector<std::string>& tags,
                                         bool include_session_pkb = false);

  private:
    AppConfig config_;
    std::unique_ptr<LlmProvider> provider_;
    std::unique_ptr<LlmGateway> gateway_;
    std::unique_ptr<EmbeddingProvider> embedder_;
    std::map<std::string, std::unique_ptr<KbBackend>> kbs_;
    std::unique_ptr<PkbStore> pkb_;
};

/// Entry point behind the executable. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err,
        const EnvLookup& env = process_env());

}  // namespace kbridge::cli
