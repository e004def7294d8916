#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kbridge {

/// Transport, timeout or missing-fixture failure while talking to a model or KB.
class ProviderError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// The model answered, but not with the structured object the template demands.
class MalformedOutput : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class FormatError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class CorruptStore : public std::runtime_error {
  public:
    CorruptStore(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace kbridge
