// SPDX-License-Identifier: Apache-2.0
// Runs the acceptance battery and prints one pass/fail line per criterion.
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "ct/acceptance.hpp"
#include "ct/cli.hpp"

int main(int argc, char** argv) {
    ct::apply_thread_env();
    CLI::App app{"Acceptance battery", "ct_acceptance"};
    std::string only, json_out;
    bool parallel = false;
    app.add_option("--only", only, "comma-separated criterion ids");
    app.add_option("--json", json_out, "write the full report to this path");
    app.add_flag("--parallel", parallel, "use the OpenMP kernels");
    CLI11_PARSE(app, argc, argv);

    ct::AcceptanceOptions opt;
    opt.exec = parallel ? ct::Exec::parallel : ct::Exec::serial;
    try {
        if (!only.empty())
            for (double v : ct::parse_number_list(only)) opt.only.push_back(static_cast<int>(v));
        for (int id : opt.only)
            if (id < 1 || id > ct::kAcceptanceCriteria) throw ct::InputError("criterion id out of range");
    } catch (const ct::Error& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return ct::kExitInput;
    }

    int failed = 0;
    nlohmann::json report = nlohmann::json::array();
    for (int id : opt.only.empty() ? std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11} : opt.only) {
        const ct::CriterionResult r = ct::run_criterion(id, opt.exec);
        std::cout << ct::summary_line(r) << std::endl;
        failed += r.pass ? 0 : 1;
        report.push_back(ct::to_json(r));
    }
    std::cout << (failed ? "FAILED " : "ALL PASSED ") << report.size() - failed << "/" << report.size() << "\n";
    if (!json_out.empty()) std::ofstream(json_out) << ct::dump17(report) << "\n";
    return failed ? ct::kExitTolerance : 0;
}
