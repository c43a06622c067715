#ifndef MCNAV_HTTP_CLIENT_HPP
#define MCNAV_HTTP_CLIENT_HPP

#include <chrono>
#include <cstdlib>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "mcnav/errors.hpp"

namespace mcnav {

struct ParsedUrl {
    std::string base; // scheme://host[:port]
    std::string path; // /v1/...
};

inline ParsedUrl parse_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw TransportError("endpoint URL must include a scheme: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

/// POST a JSON body to an endpoint URL with bearer auth from an environment
/// variable. Retries transport failures with exponential backoff.
inline nlohmann::json post_json_with_retries(const std::string& url,
                                             const nlohmann::json& body,
                                             const std::string& api_key_env_var,
                                             double timeout_seconds, int max_retries) {
    const ParsedUrl parsed = parse_url(url);
    httplib::Headers headers;
    if (!api_key_env_var.empty()) {
        if (const char* key = std::getenv(api_key_env_var.c_str()))
            headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    std::string last_error;
    for (int attempt = 0; attempt <= max_retries; ++attempt) {
        if (attempt > 0)
            std::this_thread::sleep_for(
                std::chrono::milliseconds(100ll << std::min(attempt - 1, 6)));
        httplib::Client client(parsed.base);
        const auto secs = std::chrono::duration<double>(timeout_seconds);
        client.set_connection_timeout(secs);
        client.set_read_timeout(secs);
        client.set_write_timeout(secs);

        auto res = client.Post(parsed.path, headers, body.dump(), "application/json");
        if (!res) {
            last_error = "transport failure: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 500) {
            last_error = "server error HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200)
            throw TransportError("HTTP " + std::to_string(res->status) + " from " + url + ": " +
                                 res->body);
        try {
            return nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::parse_error& e) {
            throw TransportError(std::string("unparseable response body: ") + e.what());
        }
    }
    throw TransportError("request to " + url + " failed after " +
                         std::to_string(max_retries + 1) + " attempts: " + last_error);
}

} // namespace mcnav

#endif
