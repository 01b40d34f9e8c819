#include "swarmsar/remote_planner.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "swarmsar/errors.hpp"

namespace sar {

namespace {

struct SplitUrl {
    std::string base; // scheme://host[:port]
    std::string path; // leading '/'
};

SplitUrl split_url(const std::string& url) {
    std::size_t scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw ConfigError("planner.url: expected scheme://host[:port]/path, got '" + url + "'");
    std::size_t path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

std::string excerpt(const std::string& body) {
    constexpr std::size_t max_len = 200;
    if (body.size() <= max_len) return body;
    return body.substr(0, max_len) + "...";
}

} // namespace

std::string chat_completion(const std::string& system_message, const std::string& user_message,
                            const RemoteEndpointConfig& config, RemoteCallStats* stats) {
    if (config.url.empty())
        throw ConfigError("planner.url is not configured");
    const char* key = std::getenv(config.api_key_env.c_str());
    if (key == nullptr || *key == '\0')
        throw ConfigError("credential environment variable " + config.api_key_env + " is not set");

    SplitUrl url = split_url(config.url);

    httplib::Client client(url.base);
    auto seconds = static_cast<time_t>(config.timeout_s);
    auto microseconds =
        static_cast<time_t>((config.timeout_s - static_cast<double>(seconds)) * 1e6);
    client.set_connection_timeout(seconds, microseconds);
    client.set_read_timeout(seconds, microseconds);
    client.set_write_timeout(seconds, microseconds);

    nlohmann::json body = {
        {"model", config.model},
        {"messages",
         {{{"role", "system"}, {"content", system_message}},
          {{"role", "user"}, {"content", user_message}}}},
        {"temperature", 0},
    };
    const std::string payload = body.dump();
    const httplib::Headers headers = {{"Authorization", std::string("Bearer ") + key}};

    std::string last_transport_error;
    for (int attempt = 0; attempt <= config.max_transport_retries; ++attempt) {
        if (attempt > 0) {
            double backoff = config.backoff_initial_s * static_cast<double>(1 << (attempt - 1));
            std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
            if (stats) ++stats->backoffs;
        }
        if (stats) ++stats->attempts;

        httplib::Result result = client.Post(url.path, headers, payload, "application/json");
        if (!result) {
            last_transport_error = httplib::to_string(result.error());
            continue;
        }
        if (result->status >= 500) {
            // transient server failure; retry like a transport error
            last_transport_error.clear();
            if (attempt == config.max_transport_retries)
                throw ServiceError(result->status,
                                   "planner endpoint returned status " +
                                       std::to_string(result->status) + " after " +
                                       std::to_string(attempt + 1) +
                                       " attempts; body: " + excerpt(result->body));
            continue;
        }
        if (result->status < 200 || result->status >= 300)
            throw ServiceError(result->status, "planner endpoint returned status " +
                                                   std::to_string(result->status) +
                                                   "; body: " + excerpt(result->body));

        try {
            nlohmann::json reply = nlohmann::json::parse(result->body);
            return reply.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw ServiceError(result->status,
                               std::string("planner response missing choices[0].message.content "
                                           "(") +
                                   e.what() + "); body: " + excerpt(result->body));
        }
    }
    throw TransportError("planner endpoint unreachable after " +
                         std::to_string(config.max_transport_retries + 1) +
                         " attempts: " + last_transport_error);
}

} // namespace sar
