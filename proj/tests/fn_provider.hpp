#pragma once

#include <functional>
#include <string>
#include <vector>

#include "kbridge/llm.hpp"

namespace kbridge::testing {

/// Provider backed by a callback; records every request it sees.
class FnProvider final : public LlmProvider {
  public:
    using Fn = std::function<std::string(const LlmRequest&)>;
    explicit FnProvider(Fn fn) : fn_(std::move(fn)) {}

    std::string complete(const LlmRequest& request) override {
        requests.push_back(request);
        return fn_(request);
    }

    std::size_t count(PromptName name) const {
        std::size_t n = 0;
        for (const auto& r : requests) n += r.name == name ? 1 : 0;
        return n;
    }

    std::vector<LlmRequest> requests;

  private:
    Fn fn_;
};

}  // namespace kbridge::testing
