#include "kbridge/http.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "kbridge/errors.hpp"

namespace kbridge::http {
namespace {

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;    // /path?query
};

SplitUrl split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ProviderError("invalid url: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

httplib::Headers to_headers(const Headers& headers) {
    httplib::Headers out;
    for (const auto& [k, v] : headers) out.emplace(k, v);
    return out;
}

template <typename Fn>
Response run(const std::string& url, int timeout_seconds, Fn&& fn) {
    auto parts = split_url(url);
    httplib::Client client(parts.origin);
    client.set_connection_timeout(timeout_seconds, 0);
    client.set_read_timeout(timeout_seconds, 0);
    client.set_write_timeout(timeout_seconds, 0);
    auto result = fn(client, parts.path);
    if (!result) {
        throw ProviderError("request to " + url + " failed: " + httplib::to_string(result.error()));
    }
    return Response{result->status, result->body};
}

}  // namespace

Response post(const std::string& url, const std::string& body, const std::string& content_type,
              const Headers& headers, int timeout_seconds) {
    return run(url, timeout_seconds, [&](httplib::Client& c, const std::string& path) {
        return c.Post(path, to_headers(headers), body, content_type);
    });
}

Response get(const std::string& url, const Headers& headers, int timeout_seconds) {
    return run(url, timeout_seconds,
               [&](httplib::Client& c, const std::string& path) { return c.Get(path, to_headers(headers)); });
}

std::string url_encode(const std::string& s) {
    static constexpr char kHex[] = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : s) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
            out += static_cast<char>(c);
        } else {
            out += '%';
            out += kHex[c >> 4];
            out += kHex[c & 0xF];
        }
    }
    return out;
}

std::string join_url(const std::string& base, const std::string& path) {
    if (base.empty()) return path;
    bool base_slash = base.back() == '/';
    bool path_slash = !path.empty() && path.front() == '/';
    if (base_slash && path_slash) return base + path.substr(1);
    if (!base_slash && !path_slash) return base + "/" + path;
    return base + path;
}

}  // namespace kbridge::http
