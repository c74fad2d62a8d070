#include <cstdlib>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "pathint/errors.hpp"
#include "pathint/experiments.hpp"

namespace {

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("pathint");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char* lvl = std::getenv("PATHINT_LOG")) spdlog::set_level(spdlog::level::from_str(lvl));
}

}  // namespace

int main(int argc, char** argv) {
    setup_logging();
    CLI::App app{"Discrete-time coherent-state path integrals against exact amplitudes"};
    app.require_subcommand(1);
    app.fallthrough();

    // flag name -> config key; values are applied over the config file
    struct Flag {
        std::string flag, key, help;
    };
    const std::vector<Flag> flags = {
        {"--model", "model", "ho or spin"},
        {"--spin-S", "spin-S", "spin S, a positive half-integer (1/2, 3/2 or 1.5 forms)"},
        {"--hbar", "hbar", "Planck constant, default 1"},
        {"--T", "T", "total time"},
        {"--N", "N", "time steps; a list like 11..41 odd or 10,20,40 for sweeps"},
        {"--epsilon", "epsilon", "Klauder regulator; a list for sweeps"},
        {"--xi-i", "xi-i", "initial xi, complex literal such as 0.3+0.1i"},
        {"--xi-f", "xi-f", "final xi"},
        {"--p-i", "p-i", "initial momentum (ho)"},
        {"--q-i", "q-i", "initial position (ho)"},
        {"--p-f", "p-f", "final momentum (ho)"},
        {"--q-f", "q-f", "final position (ho)"},
        {"--theta-i", "theta-i", "initial polar angle (spin)"},
        {"--phi-i", "phi-i", "initial azimuth (spin)"},
        {"--theta-f", "theta-f", "final polar angle (spin)"},
        {"--phi-f", "phi-f", "final azimuth (spin)"},
        {"--provenance", "provenance", "fluctuation form: DTCS-proper, DTCS-semi-eps, KCS-alt, DTSCS-proper, KSCS-discretized"},
        {"--n-max", "n-max", "Fock cutoff for the oscillator oracle"},
        {"--out", "out", "output file (figures: directory); stdout when absent"},
        {"--format", "format", "json or csv"},
        {"--jobs", "jobs", "OpenMP threads, 0 for the default"}};
    std::map<std::string, std::string> values;
    for (auto& f : flags) app.add_option(f.flag, values[f.key], f.help)->allow_extra_args(false);
    std::string config_path, experiment;
    bool ablation = false;
    app.add_option("--config", config_path, "flat key = value config file; flags override it");
    app.add_option("--experiment", experiment, "experiment for run, or what sweep iterates");
    app.add_flag("--ablation", ablation, "ad hoc KSCS form without O(eps) terms except the Hamiltonian one");

    const std::vector<std::pair<std::string, std::string>> subs = {
        {"exact", "closed-form amplitude"},
        {"oracle", "Hilbert-space oracle and composition check"},
        {"stationary", "discrete stationary-action path, action and fluctuation factor"},
        {"klauder", "Klauder epsilon-prescription path and action"},
        {"fluct", "fluctuation quadratic form determinant"},
        {"sweep", "sweep over the N or epsilon list"},
        {"figures", "write the three figure traces"},
        {"acceptance", "run the acceptance suite"},
        {"run", "run the experiment named in the config"}};
    std::map<std::string, CLI::App*> sc;
    for (auto& [name, help] : subs) sc[name] = app.add_subcommand(name, help)->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    pathint::RunConfig c;
    try {
        if (!config_path.empty()) c = pathint::load_config_file(config_path, c);
        for (auto& f : flags)
            if (app.count(f.flag)) c.set(f.key, values[f.key]);
        if (ablation) c.ablation = true;
        std::string chosen;
        for (auto& [name, help] : subs)
            if (sc[name]->parsed()) chosen = name;
        if (chosen == "run") {
            if (!experiment.empty()) c.set("experiment", experiment);
        } else if (chosen == "sweep") {
            c.experiment = pathint::Experiment::sweep;
            if (!experiment.empty()) c.set("sweep", experiment);
        } else {
            c.experiment = pathint::parse_experiment(chosen);
            if (!experiment.empty() && chosen == "fluct" && experiment == "fluct-sweep")
                c.experiment = pathint::Experiment::fluct_sweep;
        }
        c.finalize();
        c.validate();
    } catch (const pathint::Error& e) {
        std::cout << "{\n  \"error\": {\"kind\": \"" << e.kind() << "\", \"message\": " << pathint::json(e.what()).dump()
                  << "}\n}\n";
        spdlog::error("{}", e.what());
        return pathint::is_numerical_failure(e) ? 3 : 2;
    }
    return pathint::run(c);
}
