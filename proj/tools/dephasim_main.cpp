// dephasim — decoherence factor of a central spin coupled to a spin bath
// through phonon modes. Subcommands: eval, compare, limits, sweep.

#include <cstdint>
#include <iostream>
#include <optional>

#include "CLI11.hpp"

#include "dephasim/cli.hpp"

namespace {

void add_common(CLI::App* cmd, dephasim::cli::CommonOptions& opt) {
    cmd->add_option("--config", opt.config_path, "run config file (JSON)")
        ->required();
    cmd->add_option("--seed", opt.seed, "override the ensemble seed");
    cmd->add_option("--threads", opt.threads, "worker threads (default 1)")
        ->envname("DEPHASIM_THREADS");
    cmd->add_option("--oracle-ceiling", opt.oracle_ceiling,
                    "hard cap on the oracle Fock basis (default 4096)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exactly solvable phonon-mediated spin-bath dephasing"};
    app.require_subcommand(1);

    dephasim::cli::EvalOptions eval_opt;
    CLI::App* eval = app.add_subcommand("eval", "evaluate r(t) and write CSV");
    add_common(eval, eval_opt);
    eval->add_option("--method", eval_opt.method,
                     "coherent | thermal-paper | thermal-half | short-time | "
                     "gaussian | spin-only | oracle")
        ->required();
    eval->add_option("--out", eval_opt.out_path, "output CSV path, or -")
        ->required();

    dephasim::cli::CompareOptions compare_opt;
    CLI::App* compare =
        app.add_subcommand("compare", "closed forms vs the Fock oracle");
    add_common(compare, compare_opt);
    compare->add_option("--out", compare_opt.out_path,
                        "optional per-time error CSV");

    dephasim::cli::LimitsOptions limits_opt;
    CLI::App* limits =
        app.add_subcommand("limits", "Zurek, large-frequency and low-T checks");
    add_common(limits, limits_opt);

    dephasim::cli::SweepOptions sweep_opt;
    CLI::App* sweep = app.add_subcommand("sweep", "sweep an axis and write CSV");
    add_common(sweep, sweep_opt);
    sweep->add_option("--axis", sweep_opt.axis, "temperature | n_modes")
        ->required();
    sweep->add_option("--range", sweep_opt.range, "LO:HI:STEPS")->required();
    sweep->add_option("--out", sweep_opt.out_path, "output CSV path, or -")
        ->required();
    sweep->add_option("--probe-time", sweep_opt.probe_time,
                      "probe time for temperature sweeps (default 1/max "
                      "big_omega)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : dephasim::cli::kExitSchema;
    }

    if (eval->parsed()) return dephasim::cli::cmd_eval(eval_opt, std::cerr);
    if (compare->parsed())
        return dephasim::cli::cmd_compare(compare_opt, std::cout, std::cerr);
    if (limits->parsed())
        return dephasim::cli::cmd_limits(limits_opt, std::cout, std::cerr);
    if (sweep->parsed()) return dephasim::cli::cmd_sweep(sweep_opt, std::cerr);
    return dephasim::cli::kExitSchema;
}
