#pragma once

// Chat-completion client used behind the Renderer interface: response
// cache (memory + optional content-addressed files), retry with
// exponential backoff, a sliding-window rate limiter with injectable
// clock, a JSONL audit log, and a fully offline mock mode.

#include <chrono>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "cpts/model_params.hpp"
#include "cpts/sketch.hpp"

namespace cpts {

class AuthError : public std::runtime_error {
  public:
    explicit AuthError(const std::string& what) : std::runtime_error(what) {}
};
class RateLimited : public std::runtime_error {
  public:
    explicit RateLimited(const std::string& what) : std::runtime_error(what) {}
};
class CompletionTimeout : public std::runtime_error {
  public:
    explicit CompletionTimeout(const std::string& what) : std::runtime_error(what) {}
};
class MalformedResponse : public std::runtime_error {
  public:
    explicit MalformedResponse(const std::string& what) : std::runtime_error(what) {}
};

// Sliding 60-second window; blocks (via the injected sleeper) once the
// per-minute cap is reached.
class RateLimiter {
  public:
    using Clock = std::function<std::chrono::steady_clock::time_point()>;
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    explicit RateLimiter(int requests_per_minute,
                         Clock clock = [] { return std::chrono::steady_clock::now(); },
                         Sleeper sleeper = [](std::chrono::milliseconds d) {
                             std::this_thread::sleep_for(d);
                         })
        : cap_(requests_per_minute), clock_(std::move(clock)), sleeper_(std::move(sleeper)) {}

    void acquire() {
        std::unique_lock lock(mu_);
        for (;;) {
            auto now = clock_();
            while (!issued_.empty() && now - issued_.front() >= std::chrono::seconds(60))
                issued_.pop_front();
            if (static_cast<int>(issued_.size()) < cap_) {
                issued_.push_back(now);
                return;
            }
            auto wait = std::chrono::seconds(60) - (now - issued_.front());
            lock.unlock();
            sleeper_(std::chrono::duration_cast<std::chrono::milliseconds>(wait) +
                     std::chrono::milliseconds(1));
            lock.lock();
        }
    }

  private:
    int cap_;
    Clock clock_;
    Sleeper sleeper_;
    std::deque<std::chrono::steady_clock::time_point> issued_;
    std::mutex mu_;
};

struct ClientConfig {
    std::string base_url;                       // e.g. "http://localhost:8080"
    std::string path = "/v1/chat/completions";  // appended to base_url
    std::string api_key_env = "CPTS_API_KEY";   // credential read from env, never config
    bool mock = false;
    bool single_user_message = false;  // fold instruction into the user message
    std::string cache_dir;             // empty: in-memory cache only
    std::string audit_log_path;        // empty: no audit log
};

inline std::string completion_cache_key(const std::string& instruction,
                                        const std::string& input_block,
                                        const ModelParams& params) {
    std::ostringstream blob;
    blob << instruction << '\x1f' << input_block << '\x1f' << params.model_id << '\x1f'
         << params.temperature << '\x1f' << params.top_p;
    return fnv1a64_hex(blob.str());
}

// Transport hook: (request body json, timeout) -> (http status, response
// body). The default transport does a real HTTP POST; tests substitute a
// fake. Declared as std::function so the header stays httplib-free until
// the CLI links it in.
using Transport = std::function<std::pair<int, std::string>(const std::string& body,
                                                            const ClientConfig& cfg,
                                                            const ModelParams& params)>;

class CompletionClient {
  public:
    CompletionClient(ClientConfig cfg, ModelParams params, Transport transport = nullptr,
                     RateLimiter::Clock clock = [] { return std::chrono::steady_clock::now(); },
                     RateLimiter::Sleeper sleeper =
                         [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); })
        : cfg_(std::move(cfg)),
          params_(std::move(params)),
          transport_(std::move(transport)),
          sleeper_(sleeper),
          limiter_(params_.requests_per_minute, std::move(clock), std::move(sleeper)) {
        if (!cfg_.cache_dir.empty()) std::filesystem::create_directories(cfg_.cache_dir);
    }

    const ModelParams& params() const { return params_; }
    const ClientConfig& config() const { return cfg_; }
    std::size_t network_calls() const { return network_calls_; }
    std::size_t cache_hits() const { return cache_hits_; }

    void set_canned_response(OperatorKind op, std::string response) {
        canned_[op] = std::move(response);
    }

    std::string complete(const PromptRecord& prompt) {
        std::string key = completion_cache_key(prompt.instruction, prompt.input_block, params_);
        if (auto hit = cache_lookup(key)) {
            ++cache_hits_;
            return *hit;
        }
        auto started = std::chrono::steady_clock::now();
        std::string response = cfg_.mock ? mock_complete(prompt) : http_complete(prompt);
        auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::steady_clock::now() - started);
        cache_store(key, response);
        audit(key, prompt, response, elapsed.count());
        return response;
    }

    // Deterministic echo; a canned table keyed by operator kind overrides.
    std::string mock_complete(const PromptRecord& prompt) const {
        if (auto it = canned_.find(prompt.op); it != canned_.end()) return it->second;
        return prompt.input_block;
    }

    static nlohmann::json request_body(const PromptRecord& prompt, const ModelParams& params,
                                       bool single_user_message) {
        nlohmann::json messages = nlohmann::json::array();
        if (single_user_message) {
            messages.push_back(
                {{"role", "user"}, {"content", prompt.instruction + "\n\n" + prompt.input_block}});
        } else {
            messages.push_back({{"role", "system"}, {"content", prompt.instruction}});
            messages.push_back({{"role", "user"}, {"content", prompt.input_block}});
        }
        return {{"model", params.model_id},
                {"messages", messages},
                {"temperature", params.temperature},
                {"top_p", params.top_p},
                {"n", params.n}};
    }

  private:
    ClientConfig cfg_;
    ModelParams params_;
    Transport transport_;
    RateLimiter::Sleeper sleeper_;
    RateLimiter limiter_;
    std::unordered_map<std::string, std::string> cache_;
    std::map<OperatorKind, std::string> canned_;
    std::size_t network_calls_ = 0;
    std::size_t cache_hits_ = 0;
    std::mutex mu_;

    std::optional<std::string> cache_lookup(const std::string& key) {
        std::lock_guard lock(mu_);
        if (auto it = cache_.find(key); it != cache_.end()) return it->second;
        if (!cfg_.cache_dir.empty()) {
            std::filesystem::path p = std::filesystem::path(cfg_.cache_dir) / (key + ".json");
            std::ifstream in(p);
            if (in) {
                nlohmann::json j;
                in >> j;
                std::string response = j.at("response").get<std::string>();
                cache_[key] = response;
                return response;
            }
        }
        return std::nullopt;
    }

    void cache_store(const std::string& key, const std::string& response) {
        std::lock_guard lock(mu_);
        cache_[key] = response;
        if (!cfg_.cache_dir.empty()) {
            std::filesystem::path p = std::filesystem::path(cfg_.cache_dir) / (key + ".json");
            std::ofstream out(p);
            out << nlohmann::json{{"response", response}}.dump() << '\n';
        }
    }

    void audit(const std::string& key, const PromptRecord& prompt, const std::string& response,
               long latency_ms) {
        if (cfg_.audit_log_path.empty()) return;
        std::lock_guard lock(mu_);
        std::ofstream out(cfg_.audit_log_path, std::ios::app);
        out << nlohmann::json{{"ts", std::chrono::duration_cast<std::chrono::milliseconds>(
                                         std::chrono::system_clock::now().time_since_epoch())
                                         .count()},
                              {"cache_key", key},
                              {"request", request_body(prompt, params_, cfg_.single_user_message)},
                              {"response", response},
                              {"latency_ms", latency_ms}}
                   .dump()
            << '\n';
    }

    std::string http_complete(const PromptRecord& prompt) {
        if (!transport_) throw AuthError("no transport configured and mock mode disabled");
        std::string body = request_body(prompt, params_, cfg_.single_user_message).dump();
        int backoff_ms = 250;
        for (int attempt = 0;; ++attempt) {
            limiter_.acquire();
            ++network_calls_;
            int status = 0;
            std::string response_body;
            try {
                std::tie(status, response_body) = transport_(body, cfg_, params_);
            } catch (const std::exception& e) {
                status = -1;
                response_body = e.what();
            }
            if (status == 200) return extract_choice(response_body);
            if (status == 401 || status == 403)
                throw AuthError("endpoint rejected credential (HTTP " + std::to_string(status) +
                                ")");
            bool transient = status == -1 || status == 429 || status >= 500 || status == 408;
            if (!transient || attempt >= params_.max_retries) {
                if (status == 429)
                    throw RateLimited("still rate limited after " +
                                      std::to_string(params_.max_retries) + " retries");
                if (status == -1 || status == 408)
                    throw CompletionTimeout("request failed: " + response_body);
                throw MalformedResponse("HTTP " + std::to_string(status) + ": " + response_body);
            }
            sleeper_(std::chrono::milliseconds(backoff_ms));
            backoff_ms *= 2;
        }
    }

    static std::string extract_choice(const std::string& body) {
        try {
            nlohmann::json j = nlohmann::json::parse(body);
            return j.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw MalformedResponse(std::string("cannot extract first choice: ") + e.what());
        }
    }
};

// Renderer backed by a CompletionClient; also serves as the mock
// renderer when the client is in mock mode.
class LlmRenderer final : public Renderer {
  public:
    LlmRenderer(CompletionClient& client, const TemplateSet& templates = TemplateSet::defaults())
        : client_(client), templates_(templates) {}

    std::string id() const override { return client_.config().mock ? "mock" : "llm"; }
    std::string template_checksum() const override { return templates_.checksum(); }

    std::string render(OperatorKind op, const std::vector<std::string>& subs,
                       const std::optional<std::string>& cond) override {
        PromptRecord rec = construct_prompt(op, subs, cond, templates_);
        rec.model_params = client_.params();
        rec.response = client_.complete(rec);
        std::lock_guard lock(mu_);
        prompts_.push_back(rec);
        return rec.response;
    }

    std::vector<PromptRecord> drain_prompts() override {
        std::lock_guard lock(mu_);
        auto out = std::move(prompts_);
        prompts_.clear();
        return out;
    }

  private:
    CompletionClient& client_;
    TemplateSet templates_;
    std::vector<PromptRecord> prompts_;
    std::mutex mu_;
};

}  // namespace cpts
