#pragma once

#include <string>

namespace cpts {

// Decoding parameters carried on every completion request. Defaults pin
// deterministic decoding (temperature 0, top_p 1, n 1).
struct ModelParams {
    std::string model_id = "gpt-3.5-turbo";
    double temperature = 0.0;
    double top_p = 1.0;
    int n = 1;
    int max_retries = 3;
    int timeout_seconds = 60;
    int requests_per_minute = 60;

    bool is_default_decoding() const { return temperature == 0.0 && top_p == 1.0 && n == 1; }
};

}  // namespace cpts
