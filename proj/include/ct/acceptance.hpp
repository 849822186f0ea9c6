// SPDX-License-Identifier: Apache-2.0
// Acceptance battery: one pass/fail record per headline criterion.
#pragma once

#include <string>
#include <vector>

#include "ct/parallel.hpp"
#include "json.hpp"

namespace ct {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    double seconds = 0;
    std::vector<std::string> failures;  // itemized failed checks
    nlohmann::json data;                // measured values
};

struct AcceptanceOptions {
    std::vector<int> only;  // empty runs all criteria 1..11
    Exec exec = Exec::serial;
};

inline constexpr int kAcceptanceCriteria = 11;

CriterionResult run_criterion(int id, Exec exec = Exec::serial);
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt = {});

nlohmann::json to_json(const CriterionResult& r);
// "[PASS] 3 exact-kernel sanity (0.12 s)" style line.
std::string summary_line(const CriterionResult& r);

}  // namespace ct
