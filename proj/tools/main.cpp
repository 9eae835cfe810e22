#include "stepgnr/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Quantum transport through step-shaped armchair graphene nanoribbons"};
    app.require_subcommand(1);

    std::string config;
    std::string out_dir;
    bool linear_response = false;
    int threads = 1;

    const char* commands[][2] = {
        {"build", "write geometry.xyz and geometry.json"},
        {"transmission", "write T_vb{mV}.csv for every bias"},
        {"ldos", "write ldos.csv and ldos_sampling.json"},
        {"iv", "write iv.csv"},
        {"sweep", "write sweep.json with I-V curves, D and the sensitivity order"},
    };
    for (const auto& c : commands) {
        auto* sub = app.add_subcommand(c[0], c[1]);
        sub->add_option("--config", config, "config file (key = value)")->required();
        sub->add_option("--out-dir", out_dir, "output directory (overrides out_dir)");
        sub->add_flag("--linear-response", linear_response, "freeze T(E) at zero bias");
        sub->add_option("--threads", threads, "worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    stepgnr::CommandOptions opts;
    opts.out_dir = out_dir;
    opts.linear_response = linear_response;
    opts.threads = threads;
    return stepgnr::run_command(app.get_subcommands().front()->get_name(), config, opts, std::cerr);
}
