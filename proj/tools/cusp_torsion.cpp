// SPDX-License-Identifier: Apache-2.0
// cusp-torsion: command-line front end over the library.
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "ct/cli.hpp"
#include "ct/parallel.hpp"

namespace {

const char* kFooter = R"(Commands:
  constants   zeta'(-1), gamma, c_0..c_4, ln Z'_P(1) (JSON)
  psi-check   cutoff integrals of the smooth steps (JSON)
  kernel      model cusp heat kernel at u1, u2 over t (JSON)
  trace       regularized heat trace Tr^r (CSV)
  torsion     zeta'(0), analytic torsion, optional Quillen norm (JSON)
  selberg     Selberg zeta from a length spectrum (JSON)
  anomaly     anomaly right-hand sides: modes cusp_limit, bgs, cusp, scaling (JSON)
  flatten     flattened metric and norm descriptors (JSON)
  verify      acceptance battery (JSON report)

CSV columns (trace): t, Tr^r[exp(-t Box)] (perp by default, config "perp": false for the full trace).
Values use %.17g. --header prepends the column names "t,trace".

Exit codes: 0 ok, 2 input error, 3 tolerance failure.
Environment: CUSP_TORSION_THREADS caps the OpenMP worker count.)";

}  // namespace

int main(int argc, char** argv) {
    ct::apply_thread_env();
    CLI::App app{"Heat kernels, regularized traces, analytic torsion and anomaly formulas on surfaces with cusps",
                 "cusp-torsion"};
    app.footer(kFooter);
    app.require_subcommand(1, 1);

    ct::RunConfig cfg;
    std::string t_grid, theta, only;
    double tol = 0;
    bool parallel = false;

    for (const auto& name : ct::command_names()) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", cfg.inputs, "JSON input documents, merged left to right")->check(CLI::ExistingFile);
        sub->add_option("--out", cfg.out, "output path (default stdout)");
        sub->add_option("--tol", tol, "tolerance override for the command's checks")->check(CLI::PositiveNumber);
        sub->add_option("--t-grid", t_grid, "geometric t grid a:b:n");
        sub->add_option("--theta", theta, "comma-separated theta list");
        sub->add_flag("--paper-constants", cfg.paper_constants, "echo the literal printed signs alongside the validated ones");
        sub->add_flag("--header", cfg.header, "print CSV column names");
        sub->add_flag("--parallel", parallel, "use the OpenMP kernels");
        if (name == "verify") sub->add_option("--only", only, "comma-separated criterion ids");
        sub->callback([&cfg, name] { cfg.command = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : ct::kExitInput;
    }

    try {
        if (tol > 0) cfg.tol = tol;
        if (!t_grid.empty()) cfg.t_grid = ct::parse_t_grid(t_grid);
        if (!theta.empty()) cfg.theta = ct::parse_number_list(theta);
        if (!only.empty())
            for (double v : ct::parse_number_list(only)) cfg.only.push_back(static_cast<int>(v));
        cfg.exec = parallel ? ct::Exec::parallel : ct::Exec::serial;
        ct::load_config(cfg);
        if (!cfg.tol && cfg.config.contains("tol")) cfg.tol = cfg.config.at("tol").get<double>();
    } catch (const ct::Error& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return ct::kExitInput;
    }

    const ct::CommandOutput res = ct::run_command(cfg);
    if (!res.text.empty()) {
        if (cfg.out.empty()) {
            std::cout << res.text;
        } else {
            std::ofstream f(cfg.out, std::ios::binary);
            if (!f) {
                std::cerr << "input error: cannot write '" << cfg.out << "'\n";
                return ct::kExitInput;
            }
            f << res.text;
        }
    }
    if (res.exit_code == ct::kExitTolerance) std::cerr << "tolerance failures:\n";
    for (const auto& line : res.report) std::cerr << "  - " << line << "\n";
    return res.exit_code;
}
