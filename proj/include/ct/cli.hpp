// SPDX-License-Identifier: Apache-2.0
// Command implementations behind the cusp-torsion executable.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ct/errors.hpp"
#include "ct/parallel.hpp"
#include "ct/reg_trace.hpp"
#include "json.hpp"

namespace ct {

// Malformed command line or input document.
struct InputError : Error {
    using Error::Error;
};

struct TGrid {
    double t_min = 0.01;
    double t_max = 10.0;
    int points = 20;  // geometric spacing
};

struct RunConfig {
    std::string command;
    std::vector<std::string> inputs;  // --config paths, merged left to right
    std::string out;                  // empty writes to stdout
    std::optional<double> tol;        // overrides the command default
    std::optional<TGrid> t_grid;
    std::vector<double> theta;
    std::vector<int> only;  // verify: criterion ids
    bool paper_constants = false;
    bool header = false;
    Exec exec = Exec::serial;
    nlohmann::json config = nlohmann::json::object();
};

inline const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"constants", "psi-check", "kernel",  "trace", "torsion",
                                                "selberg",   "anomaly",   "flatten", "verify"};
    return names;
}

// "a:b:n" with 0 < a < b and n >= 2.
TGrid parse_t_grid(const std::string& spec);
std::vector<double> t_grid_points(const TGrid& g);
// Comma-separated list of numbers.
std::vector<double> parse_number_list(const std::string& text);

// Reads and merges the --config documents, then checks the invariants.
void load_config(RunConfig& cfg);
void validate(const RunConfig& cfg);

// Provider by built-in name (reference_P, triplicate_P, square_torus, round_sphere) or JSON document.
HeatDataProvider resolve_provider(const nlohmann::json& j);

struct CommandOutput {
    std::string text;  // JSON or CSV document
    int exit_code = 0;
    std::vector<std::string> report;  // itemized tolerance failures or diagnostics
};

enum ExitCode { kExitOk = 0, kExitInput = 2, kExitTolerance = 3 };

nlohmann::json cmd_constants(const RunConfig& cfg);
nlohmann::json cmd_psi_check(const RunConfig& cfg);
nlohmann::json cmd_kernel(const RunConfig& cfg);
std::string cmd_trace(const RunConfig& cfg);
nlohmann::json cmd_torsion(const RunConfig& cfg);
nlohmann::json cmd_selberg(const RunConfig& cfg);
nlohmann::json cmd_anomaly(const RunConfig& cfg);
nlohmann::json cmd_flatten(const RunConfig& cfg);
nlohmann::json cmd_verify(const RunConfig& cfg);

// Dispatches cfg.command; maps input problems to exit 2 and failed checks to exit 3.
CommandOutput run_command(const RunConfig& cfg);

// Pretty JSON with floats printed by %.17g and non-finite values as null.
std::string dump17(const nlohmann::json& j, int indent = 2);

}  // namespace ct
