#pragma once

#include <string>
#include <utility>
#include <vector>

namespace kbridge::http {

struct Response {
    int status = 0;
    std::string body;
};

using Headers = std::vector<std::pair<std::string, std::string>>;

/// `url` is absolute ("http://host:port/path?query"). Throws ProviderError on
/// connection failure or timeout; non-2xx statuses are returned as-is.
Response post(const std::string& url, const std::string& body, const std::string& content_type,
              const Headers& headers, int timeout_seconds);
Response get(const std::string& url, const Headers& headers, int timeout_seconds);

/// Percent-encodes a query component.
std::string url_encode(const std::string& s);

/// Joins a base URL and a path, collapsing the slash between them.
std::string join_url(const std::string& base, const std::string& path);

}  // namespace kbridge::http
