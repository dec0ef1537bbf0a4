#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "shuttle/commands.hpp"
#include "shuttle/config.hpp"
#include "shuttle/errors.hpp"

namespace {

struct Options {
    std::string config;
    std::string json_path;
    std::string csv_path;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<std::size_t> grid;
    std::optional<double> tol;
};

void add_common(CLI::App* cmd, Options& o, bool csv) {
    cmd->add_option("--config", o.config, "problem config (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--json", o.json_path, "write the result document here");
    if (csv) {
        cmd->add_option("--csv", o.csv_path, "write per-replica samples here");
    }
    cmd->add_option("--seed", o.seed, "simulation seed");
    cmd->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--grid", o.grid, "number of grid cells (continuous problems)")->check(CLI::Range(2, 100000000));
    cmd->add_option("--tol", o.tol, "series truncation tolerance")->check(CLI::PositiveNumber);
}

int run(const std::string& command, const Options& o) {
    shuttle::ProblemConfig cfg = shuttle::load_config(o.config);
    if (o.seed) cfg.sim.seed = *o.seed;
    if (o.threads) cfg.sim.threads = *o.threads;
    if (o.grid) cfg.grid_cells = *o.grid;
    if (o.tol) cfg.series.tol = *o.tol;

    std::ofstream csv;
    if (!o.csv_path.empty()) {
        csv.open(o.csv_path);
        if (!csv) {
            throw shuttle::ConfigError(o.csv_path + ": cannot open for writing");
        }
    }
    shuttle::CommandOutput out;
    if (command == "solve") {
        out = shuttle::cmd_solve(cfg);
    } else if (command == "simulate") {
        out = shuttle::cmd_simulate(cfg, csv.is_open() ? &csv : nullptr, &std::cerr);
    } else {
        out = shuttle::cmd_verify(cfg, &std::cerr);
    }
    std::cout << out.text;
    if (!o.json_path.empty()) {
        std::ofstream js(o.json_path);
        if (!js) {
            throw shuttle::ConfigError(o.json_path + ": cannot open for writing");
        }
        js << out.document.dump(2) << '\n';
    }
    return out.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal shuttle control for diffusions and birth-death chains"};
    app.require_subcommand(1);
    Options opts;
    CLI::App* solve = app.add_subcommand("solve", "optimal value and control");
    CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo estimate of the shuttle functional");
    CLI::App* verify = app.add_subcommand("verify", "oracle, dominance and martingale checks");
    add_common(solve, opts, false);
    add_common(simulate, opts, true);
    add_common(verify, opts, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    const std::string command = app.get_subcommands().front()->get_name();
    try {
        return run(command, opts);
    } catch (const shuttle::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return shuttle::exit_code_for(e.category());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
