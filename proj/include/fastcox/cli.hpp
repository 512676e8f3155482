#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace fastcox::cli {

// Exit codes are a stable contract.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

struct RunReport {
    std::string command;
    nlohmann::ordered_json parameters = nlohmann::ordered_json::object();
    nlohmann::ordered_json results = nlohmann::ordered_json::object();
    std::vector<std::string> warnings;
    double wall_time_ms = 0.0;

    nlohmann::ordered_json to_json() const;
    // Human-readable rendering of the same values (numbers in shortest
    // round-trip form, so text and JSON agree exactly).
    std::string to_text() const;
};

// Entry point shared by the executable and the tests. Results go to out;
// warnings, errors and usage text go to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fastcox::cli
