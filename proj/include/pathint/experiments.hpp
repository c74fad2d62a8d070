#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pathint/io.hpp"

namespace pathint {

enum class Experiment { exact, oracle, stationary, klauder, fluct, fluct_sweep, sweep, figures, acceptance };

const char* experiment_name(Experiment e);
Experiment parse_experiment(const std::string& s);

// Complex literal: "0.3+0.1i", "0.3-0.1j", "(0.3,0.1)", "0.3,0.1", "2i", "-i", "0.5".
cplx parse_complex(const std::string& s);
// "11..31", "11..31:2", "11..31 odd", "10,20,40"; must be strictly increasing.
std::vector<double> parse_list(const std::string& s);

struct RunConfig {
    Model model = Model::ho;
    double S = 0.5;
    double hbar = 1.0;
    double T = 1.0;
    int N = 1000;
    std::vector<int> N_list;
    double epsilon = 1e-3;
    std::vector<double> epsilon_list;
    Experiment experiment = Experiment::exact;
    Experiment sweep_of = Experiment::stationary;  // what a sweep iterates
    Provenance provenance = Provenance::dtcs_proper;
    bool ablation = false;
    int n_max = 60;
    std::string out;
    std::string format = "json";
    int jobs = 0;
    std::map<std::string, double> tolerances;

    // endpoint encodings, exactly one may be set
    std::optional<std::pair<cplx, cplx>> xi;
    std::optional<std::pair<PhasePoint, PhasePoint>> pq;
    std::optional<std::pair<SpherePoint, SpherePoint>> sphere;

    // key names match the long flags without dashes: model, spin-S, T, N, epsilon, xi-i, ...
    void set(const std::string& key, const std::string& value, const std::string& section = "");
    // builds the endpoint encoding from the collected keys; call after the last set()
    void finalize();
    void validate() const;
    bool has_endpoints() const { return xi || pq || sphere; }
    std::pair<cplx, cplx> endpoints() const;  // ValidationError when none were given
    double tolerance(const std::string& key, double fallback) const;
    json echo() const;

private:
    std::map<std::string, std::string> endpoint_keys_;
};

// Flat key = value text with [sections]; '#' and ';' start comments. [tolerances] entries
// become tolerance overrides.
RunConfig parse_config_text(const std::string& text, RunConfig base = {});
RunConfig load_config_file(const std::string& path, RunConfig base = {});

struct RunResult {
    json doc;
    std::vector<Table> tables;
};

RunResult run_experiment(const RunConfig& c);

// Exit code 0 on success, 2 on validation failure, 3 on numerical failure; the error is
// written to the output in the requested format as well.
int run(const RunConfig& c);

// Figure traces with default parameters (T = 1, N = 2000, epsilon = 1e-3); files go to `dir`.
struct FigureDefaults {
    double T = 1.0;
    int N = 2000;
    double epsilon = 1e-3;
    cplx xi_i{0.6, 0.2}, xi_f{-0.3, 0.5};
    double S = 1.0;
};
std::vector<Table> figure_tables(const FigureDefaults& d = {});
std::vector<std::string> reproduce_figures(const std::string& dir, const FigureDefaults& d = {});

// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace pathint
