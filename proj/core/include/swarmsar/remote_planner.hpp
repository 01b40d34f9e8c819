#pragma once

#include <string>

namespace sar {

/// Chat-completion-compatible endpoint. The bearer token is read from the
/// environment variable named by `api_key_env` at call time.
struct RemoteEndpointConfig {
    std::string url;
    std::string model{"gpt-4.1"};
    double timeout_s{30.0};
    int max_transport_retries{2};
    std::string api_key_env{"PLANNER_API_KEY"};
    double backoff_initial_s{0.25};
};

struct RemoteCallStats {
    int attempts{0};
    int backoffs{0};
};

/// POSTs {model, messages:[{role:system},{role:user}], temperature:0} to the
/// configured URL and returns choices[0].message.content verbatim.
/// Transport failures and 5xx responses are retried with exponential backoff
/// up to max_transport_retries; other non-success statuses raise ServiceError
/// immediately. A missing credential raises ConfigError before any request.
std::string chat_completion(const std::string& system_message, const std::string& user_message,
                            const RemoteEndpointConfig& config, RemoteCallStats* stats = nullptr);

} // namespace sar
