#pragma once

// Real HTTP transport for CompletionClient, kept in its own header so
// only the CLI pulls in cpp-httplib.

#include <cstdlib>
#include <stdexcept>
#include <string>

#include <httplib.h>

#include "cpts/llm_client.hpp"

namespace cpts {

inline Transport http_transport() {
    return [](const std::string& body, const ClientConfig& cfg,
              const ModelParams& params) -> std::pair<int, std::string> {
        if (cfg.base_url.empty()) throw std::runtime_error("no base_url configured");
        httplib::Client client(cfg.base_url);
        client.set_read_timeout(params.timeout_seconds, 0);
        client.set_connection_timeout(params.timeout_seconds, 0);
        httplib::Headers headers;
        if (const char* key = std::getenv(cfg.api_key_env.c_str()); key && *key)
            headers.emplace("Authorization", std::string("Bearer ") + key);
        auto res = client.Post(cfg.path, headers, body, "application/json");
        if (!res) throw std::runtime_error("transport error: " + httplib::to_string(res.error()));
        return {res->status, res->body};
    };
}

}  // namespace cpts
