#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace kbridge {

using Vector = std::vector<double>;

class EmbeddingProvider {
  public:
    virtual ~EmbeddingProvider() = default;

    /// Unit-norm vector of dimension(). Throws std::invalid_argument on empty
    /// text and ProviderError on transport failure.
    virtual Vector embed(const std::string& text) = 0;
    virtual std::size_t dimension() const = 0;
};

/// Character 3-gram feature hashing over case-folded code points, L2
/// normalized. Strings shorter than three characters hash as one gram.
class HashEmbedder final : public EmbeddingProvider {
  public:
    static constexpr std::size_t kDefaultDimension = 256;

    explicit HashEmbedder(std::size_t dimension = kDefaultDimension);

    Vector embed(const std::string& text) override;
    std::size_t dimension() const override { return dim_; }

    /// Raw (unnormalized) bucket counts; exposed for oracle tests.
    static std::vector<std::string> grams(const std::string& text);
    static std::size_t bucket(const std::string& gram, std::size_t dimension);

  private:
    std::size_t dim_;
};

struct RemoteEmbeddingConfig {
    std::string base_url;  // e.g. https://api.openai.com/v1
    std::string model = "text-embedding-ada-002";
    std::string api_key;
    std::size_t dimension = 1536;
    int timeout_seconds = 30;
};

/// OpenAI-compatible POST {base_url}/embeddings client.
class RemoteEmbedder final : public EmbeddingProvider {
  public:
    explicit RemoteEmbedder(RemoteEmbeddingConfig config);

    Vector embed(const std::string& text) override;
    std::size_t dimension() const override { return config_.dimension; }

  private:
    RemoteEmbeddingConfig config_;
};

/// Memoizes another provider. Safe for concurrent use.
class CachingEmbedder final : public EmbeddingProvider {
  public:
    explicit CachingEmbedder(EmbeddingProvider& inner) : inner_(inner) {}

    Vector embed(const std::string& text) override;
    std::size_t dimension() const override { return inner_.dimension(); }
    std::size_t cached() const;

  private:
    EmbeddingProvider& inner_;
    mutable std::mutex mu_;
    std::map<std::string, Vector> cache_;
};

void normalize_in_place(Vector& v);

}  // namespace kbridge
