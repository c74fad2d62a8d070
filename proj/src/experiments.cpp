#include "pathint/experiments.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include <spdlog/spdlog.h>

#include "pathint/acceptance.hpp"
#include "pathint/errors.hpp"
#include "pathint/exact_oracle.hpp"
#include "pathint/kernels.hpp"

namespace pathint {

namespace {

constexpr cplx I{0.0, 1.0};
constexpr const char* kVersion = "pathint 1.0.0";

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

double parse_real(const std::string& raw) {
    const std::string s = trim(raw);
    if (s.empty()) throw ValidationError("empty number");
    auto slash = s.find('/');
    if (slash != std::string::npos) return parse_real(s.substr(0, slash)) / parse_real(s.substr(slash + 1));
    std::size_t pos = 0;
    double v;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw ValidationError("not a number: '" + s + "'");
    }
    if (pos != s.size()) throw ValidationError("not a number: '" + s + "'");
    return v;
}

int parse_int(const std::string& s) {
    double v = parse_real(s);
    if (v != std::floor(v) || std::abs(v) > 1e9) throw ValidationError("not an integer: '" + s + "'");
    return static_cast<int>(v);
}

bool parse_bool(const std::string& s) {
    const std::string l = lower(trim(s));
    if (l == "1" || l == "true" || l == "yes" || l == "on") return true;
    if (l == "0" || l == "false" || l == "no" || l == "off") return false;
    throw ValidationError("not a boolean: '" + s + "'");
}

bool is_list(const std::string& s) {
    return s.find("..") != std::string::npos || s.find(',') != std::string::npos;
}

}  // namespace

const char* experiment_name(Experiment e) {
    switch (e) {
        case Experiment::exact: return "exact";
        case Experiment::oracle: return "oracle";
        case Experiment::stationary: return "stationary";
        case Experiment::klauder: return "klauder";
        case Experiment::fluct: return "fluct";
        case Experiment::fluct_sweep: return "fluct-sweep";
        case Experiment::sweep: return "sweep";
        case Experiment::figures: return "figures";
        case Experiment::acceptance: return "acceptance";
    }
    return "?";
}

Experiment parse_experiment(const std::string& raw) {
    const std::string s = lower(trim(raw));
    for (Experiment e : {Experiment::exact, Experiment::oracle, Experiment::stationary, Experiment::klauder,
                         Experiment::fluct, Experiment::fluct_sweep, Experiment::sweep, Experiment::figures,
                         Experiment::acceptance})
        if (s == experiment_name(e)) return e;
    if (s == "fluct_sweep") return Experiment::fluct_sweep;
    throw ValidationError("unknown experiment '" + raw + "'");
}

cplx parse_complex(const std::string& raw) {
    std::string s;
    for (char c : raw)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    if (s.empty()) throw ValidationError("empty complex literal");
    if (s.front() == '(' && s.back() == ')') s = s.substr(1, s.size() - 2);
    auto comma = s.find(',');
    if (comma != std::string::npos) return {parse_real(s.substr(0, comma)), parse_real(s.substr(comma + 1))};
    const char last = static_cast<char>(std::tolower(static_cast<unsigned char>(s.back())));
    if (last != 'i' && last != 'j') return parse_real(s);
    std::string body = s.substr(0, s.size() - 1);
    std::size_t split = std::string::npos;
    for (std::size_t k = body.size(); k-- > 1;) {
        if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
            split = k;
            break;
        }
    }
    auto imag_of = [](const std::string& t) {
        if (t.empty() || t == "+") return 1.0;
        if (t == "-") return -1.0;
        return parse_real(t);
    };
    if (split == std::string::npos) return {0.0, imag_of(body)};
    return {parse_real(body.substr(0, split)), imag_of(body.substr(split))};
}

std::vector<double> parse_list(const std::string& raw) {
    const std::string s = trim(raw);
    std::vector<double> v;
    auto dots = s.find("..");
    if (dots != std::string::npos) {
        std::string rest = s.substr(dots + 2);
        const double a = parse_real(s.substr(0, dots));
        double step = 1.0;
        std::string parity;
        auto sp = rest.find_first_of(" \t");
        if (sp != std::string::npos) {
            parity = lower(trim(rest.substr(sp)));
            rest = rest.substr(0, sp);
        }
        auto colon = rest.find(':');
        if (colon != std::string::npos) {
            step = parse_real(rest.substr(colon + 1));
            rest = rest.substr(0, colon);
        }
        const double b = parse_real(rest);
        if (!(step > 0.0)) throw ValidationError("list step must be positive");
        for (double x = a; x <= b + 1e-9 * std::abs(b); x += step) {
            if (parity == "odd" && std::fmod(std::abs(std::round(x)), 2.0) != 1.0) continue;
            if (parity == "even" && std::fmod(std::abs(std::round(x)), 2.0) != 0.0) continue;
            if (!parity.empty() && parity != "odd" && parity != "even")
                throw ValidationError("list qualifier must be odd or even");
            v.push_back(x);
        }
    } else {
        std::stringstream ss(s);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!trim(item).empty()) v.push_back(parse_real(item));
    }
    if (v.empty()) throw ValidationError("empty list '" + raw + "'");
    for (std::size_t k = 1; k < v.size(); ++k)
        if (!(v[k] > v[k - 1])) throw ValidationError("sweep lists must be strictly increasing");
    return v;
}

void RunConfig::set(const std::string& key_raw, const std::string& value_raw, const std::string& section) {
    const std::string key = trim(key_raw), value = trim(value_raw);
    if (lower(trim(section)) == "tolerances") {
        tolerances[key] = parse_real(value);
        return;
    }
    if (key == "model") {
        const std::string m = lower(value);
        if (m == "ho") model = Model::ho;
        else if (m == "spin") model = Model::spin;
        else throw ValidationError("model must be ho or spin");
    } else if (key == "spin-S" || key == "S") {
        S = parse_real(value);
    } else if (key == "hbar") {
        hbar = parse_real(value);
    } else if (key == "T") {
        T = parse_real(value);
    } else if (key == "N") {
        if (is_list(value)) {
            N_list.clear();
            for (double x : parse_list(value)) N_list.push_back(parse_int(std::to_string(static_cast<long long>(x))));
        } else {
            N = parse_int(value);
        }
    } else if (key == "epsilon") {
        if (is_list(value)) epsilon_list = parse_list(value);
        else epsilon = parse_real(value);
    } else if (key == "experiment") {
        experiment = parse_experiment(value);
    } else if (key == "sweep") {
        sweep_of = parse_experiment(value);
    } else if (key == "provenance") {
        provenance = parse_provenance(value);
    } else if (key == "ablation") {
        ablation = parse_bool(value);
    } else if (key == "n-max") {
        n_max = parse_int(value);
    } else if (key == "out") {
        out = value;
    } else if (key == "format") {
        format = lower(value);
    } else if (key == "jobs") {
        jobs = parse_int(value);
    } else if (key == "xi-i" || key == "xi-f" || key == "p-i" || key == "q-i" || key == "p-f" || key == "q-f" ||
               key == "theta-i" || key == "phi-i" || key == "theta-f" || key == "phi-f") {
        endpoint_keys_[key] = value;
    } else if (key.rfind("tol.", 0) == 0) {
        tolerances[key.substr(4)] = parse_real(value);
    } else {
        throw ValidationError("unknown configuration key '" + key + "'");
    }
}

void RunConfig::finalize() {
    auto has = [&](std::initializer_list<const char*> ks) {
        for (auto k : ks)
            if (endpoint_keys_.count(k)) return true;
        return false;
    };
    auto real_of = [&](const char* k) { return endpoint_keys_.count(k) ? parse_real(endpoint_keys_.at(k)) : 0.0; };
    auto cplx_of = [&](const char* k) { return endpoint_keys_.count(k) ? parse_complex(endpoint_keys_.at(k)) : cplx(0.0); };
    const bool a = has({"xi-i", "xi-f"}), b = has({"p-i", "q-i", "p-f", "q-f"}),
               c = has({"theta-i", "phi-i", "theta-f", "phi-f"});
    if (int(a) + int(b) + int(c) > 1) throw ValidationError("exactly one endpoint encoding may be supplied");
    xi.reset();
    pq.reset();
    sphere.reset();
    if (a) xi = std::make_pair(cplx_of("xi-i"), cplx_of("xi-f"));
    if (b)
        pq = std::make_pair(PhasePoint{real_of("p-i"), real_of("q-i"), hbar}, PhasePoint{real_of("p-f"), real_of("q-f"), hbar});
    if (c) sphere = std::make_pair(SpherePoint{real_of("theta-i"), real_of("phi-i")}, SpherePoint{real_of("theta-f"), real_of("phi-f")});
}

void RunConfig::validate() const {
    if (!std::isfinite(hbar) || !(hbar > 0.0)) throw ValidationError("hbar must be positive");
    if (!std::isfinite(T) || T < 0.0) throw ValidationError("T must be non-negative");
    if (N < 1) throw ValidationError("N must be at least 1");
    for (int n : N_list)
        if (n < 1) throw ValidationError("N values must be at least 1");
    if (model == Model::spin) twice_spin(S);
    if (!(epsilon > 0.0)) throw ValidationError("epsilon must be positive");
    for (double e : epsilon_list)
        if (!(e > 0.0)) throw ValidationError("epsilon values must be positive");
    if (format != "json" && format != "csv") throw ValidationError("format must be csv or json");
    if (jobs < 0) throw ValidationError("jobs must be non-negative");
    if (n_max < 1) throw ValidationError("n-max must be positive");
    if (int(bool(xi)) + int(bool(pq)) + int(bool(sphere)) > 1)
        throw ValidationError("exactly one endpoint encoding may be supplied");
    if (pq && model != Model::ho) throw ValidationError("(p, q) endpoints need the ho model");
    if (sphere && model != Model::spin) throw ValidationError("(theta, phi) endpoints need the spin model");
}

std::pair<cplx, cplx> RunConfig::endpoints() const {
    if (xi) return *xi;
    if (pq) return {pq->first.xi(), pq->second.xi()};
    if (sphere) return {sphere->first.xi(), sphere->second.xi()};
    throw ValidationError("this experiment needs endpoints (xi, (p,q) or (theta,phi))");
}

double RunConfig::tolerance(const std::string& key, double fallback) const {
    auto it = tolerances.find(key);
    return it == tolerances.end() ? fallback : it->second;
}

json RunConfig::echo() const {
    json j;
    j["model"] = model == Model::ho ? "ho" : "spin";
    if (model == Model::spin) j["S"] = S;
    j["hbar"] = hbar;
    j["T"] = T;
    j["N"] = N;
    if (!N_list.empty()) j["N_list"] = N_list;
    j["epsilon"] = epsilon;
    if (!epsilon_list.empty()) j["epsilon_list"] = epsilon_list;
    j["experiment"] = experiment_name(experiment);
    j["provenance"] = provenance_name(provenance);
    if (ablation) j["ablation"] = true;
    if (has_endpoints()) {
        auto [a, b] = endpoints();
        j["xi_i"] = complex_json(a);
        j["xi_f"] = complex_json(b);
    }
    if (!tolerances.empty()) j["tolerances"] = tolerances;
    return j;
}

RunConfig parse_config_text(const std::string& text, RunConfig base) {
    std::stringstream ss(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        auto cut = line.find_first_of("#;");
        if (cut != std::string::npos) line = line.substr(0, cut);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ValidationError("config line " + std::to_string(lineno) + ": bad section");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ValidationError("config line " + std::to_string(lineno) + ": expected key = value");
        base.set(line.substr(0, eq), line.substr(eq + 1), section);
    }
    return base;
}

RunConfig load_config_file(const std::string& path, RunConfig base) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot read config file " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str(), std::move(base));
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw ShapeError("fit_slope: need two or more points");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
    mx /= x.size(), my /= y.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) sxy += (x[i] - mx) * (y[i] - my), sxx += (x[i] - mx) * (x[i] - mx);
    return sxy / sxx;
}

namespace {

struct StationaryOutcome {
    StationarySolution sol;
    DetResult K;
    cplx exponent, exact_exponent, amplitude, exact_amplitude;
};

StationaryOutcome stationary_outcome(const RunConfig& c, int N) {
    auto [xi_i, xi_f] = c.endpoints();
    TimeGrid g(N, c.T);
    StationaryOutcome o;
    if (c.model == Model::ho) {
        o.sol = solve_ho_dtcs(g, xi_i, xi_f, c.hbar);
        o.K = gaussian_K(expand_dtcs(o.sol));
        o.exact_exponent = exact_cs_exponent(xi_i, xi_f, c.T);
        o.exact_amplitude = exact_cs_amplitude(xi_i, xi_f, c.T, c.hbar);
    } else {
        o.sol = solve_spin_dtscs(g, xi_i, xi_f, c.S, c.hbar);
        o.K = gaussian_K(expand_dtscs(o.sol, c.S));
        o.exact_exponent = exact_scs_exponent(xi_i, xi_f, c.T, c.S);
        o.exact_amplitude = exact_scs_amplitude(xi_i, xi_f, c.T, c.S);
    }
    o.exponent = o.sol.action.total;
    o.amplitude = std::exp(o.exponent + o.K.log_K);
    return o;
}

QuadraticForm fluct_form(const RunConfig& c, int N) {
    TimeGrid g(N, c.T);
    switch (c.provenance) {
        case Provenance::dtcs_proper: {
            auto [a, b] = c.endpoints();
            return expand_dtcs(solve_ho_dtcs(g, a, b, c.hbar));
        }
        case Provenance::dtcs_semi_eps: return build_semi_eps_form(g);
        case Provenance::kcs_alt: return build_kcs_alt_form(g);
        case Provenance::dtscs_proper: {
            auto [a, b] = c.endpoints();
            return expand_dtscs(solve_spin_dtscs(g, a, b, c.S, c.hbar), c.S);
        }
        case Provenance::kscs_discretized: {
            auto [a, b] = c.endpoints();
            return build_kscs_form(g, std::conj(b) * a * std::exp(-I * c.T), c.ablation);
        }
    }
    throw ValidationError("unknown provenance");
}

struct FluctOutcome {
    QuadraticForm form;
    DetResult det;
    bool singular = false;
    bool convergent = false;
};

FluctOutcome fluct_outcome(const RunConfig& c, int N) {
    FluctOutcome o;
    o.form = fluct_form(c, N);
    o.convergent = is_convergent(o.form);
    cplx ld = form_log_det(o.form, &o.singular);
    if (o.singular) {
        o.det.det = 0.0;
        o.det.log_det = ld;
        o.det.K = std::numeric_limits<double>::infinity();
        o.det.log_K = std::numeric_limits<double>::infinity();
        o.det.convergent = o.convergent;
    } else {
        o.det = gaussian_K(o.form);
        o.det.convergent = o.convergent;
    }
    return o;
}

json fluct_json(const FluctOutcome& o) {
    json j;
    j["provenance"] = provenance_name(o.form.provenance);
    j["dim"] = o.form.dim;
    j["singular"] = o.singular;
    j["det"] = tolerant(o.det.det, 1e-12);
    j["log_det"] = tolerant(o.det.log_det, 1e-12);
    j["K"] = tolerant(o.det.K, 1e-12);
    j["log_K"] = tolerant(o.det.log_K, 1e-12);
    j["convergent"] = o.convergent;
    j["growth_rate"] = tolerant(o.det.growth_rate, 1e-10);
    if (o.form.ablation) j["ablation"] = "ad hoc: O(eps) terms dropped except the Hamiltonian one";
    return j;
}

Table fluct_sweep_table(const RunConfig& c, json& summary) {
    if (c.N_list.empty()) throw ValidationError("fluct sweep needs an N list");
    auto rows = parallel_map(static_cast<int>(c.N_list.size()), [&](int k) { return fluct_outcome(c, c.N_list[k]); }, c.jobs);
    Table t;
    t.name = "fluct_sweep";
    t.add_meta("provenance", provenance_name(c.provenance));
    t.add_meta("T", format_double(c.T));
    t.header = {"N", "re_log_det", "im_log_det", "log_abs_K", "arg_K", "convergent", "singular", "growth_rate"};
    std::vector<double> xs, ys;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto& o = rows[k];
        const double lk = o.singular ? std::numeric_limits<double>::infinity() : o.det.log_K.real();
        t.rows.push_back({double(c.N_list[k]), o.det.log_det.real(), o.det.log_det.imag(), lk,
                          o.singular ? 0.0 : o.det.log_K.imag(), double(o.convergent), double(o.singular),
                          o.det.growth_rate});
        if (!o.singular) xs.push_back(c.N_list[k]), ys.push_back(lk);
    }
    summary["points"] = rows.size();
    summary["singular_points"] = rows.size() - xs.size();
    if (xs.size() >= 2) {
        summary["log_abs_K_slope"] = tolerant(fit_slope(xs, ys), 1e-10);
        summary["ln2"] = std::numbers::ln2;
    }
    return t;
}

Table stationary_sweep_table(const RunConfig& c) {
    if (c.N_list.empty()) throw ValidationError("stationary sweep needs an N list");
    auto rows = parallel_map(static_cast<int>(c.N_list.size()), [&](int k) { return stationary_outcome(c, c.N_list[k]); }, c.jobs);
    Table t;
    t.name = "stationary_sweep";
    t.header = {"N", "amplitude_abs_error", "exponent_error", "abs_K", "final_jump", "initial_jump", "residual_inf"};
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto& o = rows[k];
        t.rows.push_back({double(c.N_list[k]), std::abs(o.amplitude - o.exact_amplitude),
                          exponent_distance(o.exponent, o.exact_exponent), std::abs(o.K.K), o.sol.final_jump,
                          o.sol.initial_jump, o.sol.residual_inf});
    }
    return t;
}

KlauderSolution klauder_outcome(const RunConfig& c, double eps) {
    auto [a, b] = c.endpoints();
    KlauderParams p{eps, c.T, a, b, c.hbar};
    return c.model == Model::ho ? solve_kcs_ho(p) : solve_kscs_spin(p, c.S);
}

Table klauder_sweep_table(const RunConfig& c) {
    if (c.epsilon_list.empty()) throw ValidationError("klauder sweep needs an epsilon list");
    ModelParams mp{c.model, c.hbar, c.S};
    auto rows = parallel_map(static_cast<int>(c.epsilon_list.size()), [&](int k) {
        KlauderSolution s = klauder_outcome(c, c.epsilon_list[k]);
        return std::vector<double>{c.epsilon_list[k], s.action_error() * c.hbar, std::abs(epsilon_term_value(s.samples, mp)),
                                   s.ode_residual, s.bc_error, double(s.mesh_cells)};
    }, c.jobs);
    Table t;
    t.name = "klauder_sweep";
    t.header = {"epsilon", "action_error", "abs_eps_term", "ode_residual", "bc_error", "mesh_cells"};
    t.rows = rows;
    return t;
}

json criteria_json(const std::vector<CriterionResult>& rs) {
    json a = json::array();
    for (auto& r : rs) a.push_back({{"id", r.id}, {"title", r.title}, {"pass", r.pass}, {"detail", r.detail}});
    return a;
}

}  // namespace

RunResult run_experiment(const RunConfig& c) {
    c.validate();
    RunResult r;
    json& d = r.doc;
    d["tool"] = kVersion;
    d["experiment"] = experiment_name(c.experiment);
    d["config"] = c.echo();
    json res;
    switch (c.experiment) {
        case Experiment::exact: {
            auto [a, b] = c.endpoints();
            if (c.model == Model::ho) {
                res["amplitude"] = tolerant(exact_cs_amplitude(a, b, c.T, c.hbar), 1e-14);
                res["exponent"] = tolerant(exact_cs_exponent(a, b, c.T), 1e-14);
            } else {
                res["amplitude"] = tolerant(exact_scs_amplitude(a, b, c.T, c.S), 1e-13);
                res["exponent"] = tolerant(exact_scs_exponent(a, b, c.T, c.S), 1e-13);
            }
            break;
        }
        case Experiment::oracle: {
            auto [a, b] = c.endpoints();
            CompositionOptions co;
            co.model = c.model;
            co.S = c.S;
            co.n_max = c.n_max;
            if (c.model == Model::ho) {
                OracleValue o = ho_amplitude_oracle(a, b, c.T, c.n_max, c.tolerance("truncation", 1e-10));
                cplx cf = exact_cs_amplitude(a, b, c.T, c.hbar);
                res["oracle"] = tolerant(o.value, o.truncation_bound);
                res["closed_form"] = tolerant(cf, 1e-14);
                res["abs_difference"] = tolerant(std::abs(o.value - cf), c.tolerance("oracle", 1e-10));
                res["truncation_bound"] = o.truncation_bound;
            } else {
                cplx o = spin_amplitude_oracle(a, b, c.T, c.S);
                cplx cf = exact_scs_amplitude(a, b, c.T, c.S);
                res["oracle"] = tolerant(o, 1e-12);
                res["closed_form"] = tolerant(cf, 1e-13);
                res["abs_difference"] = tolerant(std::abs(o - cf), c.tolerance("oracle", 1e-11));
            }
            res["composition_residual"] =
                tolerant(composition_check(a, b, 0.5 * c.T, 0.5 * c.T, co), c.tolerance("composition", 1e-9));
            break;
        }
        case Experiment::stationary: {
            StationaryOutcome o = stationary_outcome(c, c.N);
            const double tol_n = c.tolerance("newton", 1e-10);
            res["exponent"] = tolerant(o.exponent, tol_n);
            res["exact_exponent"] = tolerant(o.exact_exponent, 1e-13);
            res["exponent_error"] = tolerant(exponent_distance(o.exponent, o.exact_exponent), tol_n);
            res["K"] = tolerant(o.K.K, 1e-12);
            res["amplitude"] = tolerant(o.amplitude, tol_n);
            res["exact_amplitude"] = tolerant(o.exact_amplitude, 1e-13);
            res["amplitude_abs_error"] = tolerant(std::abs(o.amplitude - o.exact_amplitude), tol_n);
            res["residual_inf"] = tolerant(o.sol.residual_inf, tol_n);
            res["final_jump"] = tolerant(o.sol.final_jump, tol_n);
            res["initial_jump"] = tolerant(o.sol.initial_jump, tol_n);
            if (o.sol.conserved) {
                const ConservedPair& cp = *o.sol.conserved;
                res["R"] = tolerant(cp.R, tol_n);
                res["P"] = tolerant(cp.P, tol_n);
                res["R_continuum"] = tolerant(cp.R_continuum, 1e-14);
                res["R_spread"] = tolerant(cp.spread(), tol_n);
            }
            if (c.model == Model::spin) {
                SpinStationaryAction sa = stationary_action_spin(o.sol, c.S, c.hbar);
                res["action_breakdown"] = {{"final_discontinuity", tolerant(sa.final_discontinuity, tol_n)},
                                           {"interior", tolerant(sa.interior, tol_n)},
                                           {"log_term", tolerant(sa.log_term, tol_n)},
                                           {"initial_discontinuity", tolerant(sa.initial_discontinuity, tol_n)},
                                           {"total", tolerant(sa.total, tol_n)}};
            }
            Table t = path_table(o.sol.path, c.hbar);
            t.add_meta("N", std::to_string(c.N));
            t.add_meta("T", format_double(c.T));
            r.tables.push_back(std::move(t));
            break;
        }
        case Experiment::klauder: {
            KlauderSolution s = klauder_outcome(c, c.epsilon);
            ModelParams mp{c.model, c.hbar, c.S};
            const double bound = c.model == Model::ho ? 10.0 * c.epsilon : 20.0 * c.epsilon * c.S;
            res["action"] = tolerant(s.action, bound);
            res["exponent"] = {{"eps_term", complex_json(s.exponent.eps_term)},
                               {"canonical", complex_json(s.exponent.canonical)},
                               {"dynamical", complex_json(s.exponent.dynamical)},
                               {"total", tolerant(s.exponent.total, bound / c.hbar)}};
            res["exact_exponent"] = tolerant(s.exact_exponent, 1e-13);
            res["action_error"] = tolerant(s.action_error() * c.hbar, bound);
            res["epsilon_term_value"] = tolerant(epsilon_term_value(s.samples, mp), bound);
            res["bc_error"] = tolerant(s.bc_error, 1e-12);
            res["ode_residual"] = tolerant(s.ode_residual, 10.0 * c.epsilon);
            res["mesh_cells"] = s.mesh_cells;
            res["rate"] = complex_json(s.chi.rate);
            if (c.model == Model::spin) {
                res["predicted_log_term"] = tolerant(s.predicted_log_term, bound);
                res["predicted_interior"] = tolerant(s.predicted_interior, bound);
            }
            r.tables.push_back(klauder_trace_table(s));
            break;
        }
        case Experiment::fluct: {
            res = fluct_json(fluct_outcome(c, c.N));
            break;
        }
        case Experiment::fluct_sweep: {
            r.tables.push_back(fluct_sweep_table(c, res));
            break;
        }
        case Experiment::sweep: {
            if (c.sweep_of == Experiment::fluct || c.sweep_of == Experiment::fluct_sweep)
                r.tables.push_back(fluct_sweep_table(c, res));
            else if (c.sweep_of == Experiment::klauder)
                r.tables.push_back(klauder_sweep_table(c));
            else if (c.sweep_of == Experiment::stationary)
                r.tables.push_back(stationary_sweep_table(c));
            else
                throw ValidationError("sweep supports stationary, klauder and fluct");
            res["sweep_of"] = experiment_name(c.sweep_of);
            break;
        }
        case Experiment::figures: {
            FigureDefaults fd;
            r.tables = figure_tables(fd);
            break;
        }
        case Experiment::acceptance: {
            auto cr = run_acceptance(c.jobs);
            res["criteria"] = criteria_json(cr);
            res["all_pass"] = std::all_of(cr.begin(), cr.end(), [](auto& x) { return x.pass; });
            break;
        }
    }
    d["results"] = res;
    return r;
}

namespace {

void flatten(const json& j, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out) {
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it) flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
    } else if (j.is_array()) {
        for (std::size_t k = 0; k < j.size(); ++k) flatten(j[k], prefix + "." + std::to_string(k), out);
    } else if (j.is_number_float()) {
        out.emplace_back(prefix, format_double(j.get<double>()));
    } else if (j.is_string()) {
        out.emplace_back(prefix, j.get<std::string>());
    } else {
        out.emplace_back(prefix, j.dump());
    }
}

std::string render(const RunResult& r, const std::string& format) {
    std::ostringstream os;
    if (format == "json") {
        json d = r.doc;
        if (!r.tables.empty()) {
            json ts = json::array();
            for (auto& t : r.tables) ts.push_back(t.to_json());
            d["tables"] = ts;
        }
        os << d.dump(2) << '\n';
        return os.str();
    }
    std::vector<std::pair<std::string, std::string>> kv;
    flatten(r.doc, "", kv);
    if (r.tables.empty()) {
        os << "key,value\n";
        for (auto& [k, v] : kv) os << k << ',' << v << '\n';
        return os.str();
    }
    for (std::size_t k = 0; k < r.tables.size(); ++k) {
        if (k) os << '\n';
        os << "# table: " << r.tables[k].name << '\n';
        for (auto& [a, b] : kv) os << "# " << a << ": " << b << '\n';
        r.tables[k].write_csv(os);
    }
    return os.str();
}

void emit(const std::string& text, const std::string& out) {
    if (out.empty() || out == "-") std::cout << text;
    else write_text_file(out, text);
}

}  // namespace

int run(const RunConfig& c) {
    RunResult r;
    int code = 0;
    try {
        c.validate();
        if (c.experiment == Experiment::figures) {
            const std::string dir = c.out.empty() ? "figures" : c.out;
            auto files = reproduce_figures(dir);
            r.doc["tool"] = kVersion;
            r.doc["experiment"] = "figures";
            r.doc["files"] = files;
            emit(r.doc.dump(2) + "\n", "");
            return 0;
        }
        if (c.experiment == Experiment::acceptance) {
            auto cr = run_acceptance(c.jobs);
            bool all = true;
            for (auto& x : cr) {
                std::cout << format_criterion(x) << '\n';
                all = all && x.pass;
            }
            if (!c.out.empty()) {
                r.doc["tool"] = kVersion;
                r.doc["criteria"] = criteria_json(cr);
                r.doc["all_pass"] = all;
                emit(render(r, c.format), c.out);
            }
            return all ? 0 : 1;
        }
        r = run_experiment(c);
    } catch (const Error& e) {
        code = is_numerical_failure(e) ? 3 : 2;
        r = RunResult{};
        r.doc["tool"] = kVersion;
        r.doc["error"] = {{"kind", e.kind()}, {"message", e.what()}};
        if (auto* ce = dynamic_cast<const ConvergenceError*>(&e)) {
            r.doc["error"]["best_residual"] = ce->best_residual();
            r.doc["error"]["iterations"] = ce->iterations();
        }
        spdlog::error("{}: {}", e.kind(), e.what());
    } catch (const std::exception& e) {
        code = 3;
        r = RunResult{};
        r.doc["tool"] = kVersion;
        r.doc["error"] = {{"kind", "InternalError"}, {"message", e.what()}};
        spdlog::error("internal: {}", e.what());
    }
    try {
        emit(render(r, c.format == "csv" ? "csv" : "json"), c.out);
    } catch (const Error& e) {
        spdlog::error("{}", e.what());
        return 2;
    }
    return code;
}

namespace {

std::pair<cplx, cplx> phase_of(cplx x, cplx xb, double hbar) {
    const double c = std::sqrt(hbar / 2.0);
    return {-I * c * (x - xb), c * (x + xb)};  // (p, q)
}

double pq_jump(const std::pair<cplx, cplx>& a, const std::pair<cplx, cplx>& b) {
    return std::max(std::abs(a.first - b.first), std::abs(a.second - b.second));
}

}  // namespace

std::vector<Table> figure_tables(const FigureDefaults& d) {
    std::vector<Table> out;
    const double hbar = 1.0;
    // Klauder HO trace, refined until adjacent samples move by at most epsilon
    {
        KlauderParams p{d.epsilon, d.T, d.xi_i, d.xi_f, hbar};
        std::vector<double> ts = layer_mesh(d.T, d.epsilon / 40.0, 1.1, d.T / d.N);
        PathSamples s = sample_kcs_ho(p, ts);
        for (int round = 0; round < 40; ++round) {
            std::vector<double> next{ts[0]};
            bool refined = false;
            for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
                if (pq_jump(phase_of(s.x[i], s.xb[i], hbar), phase_of(s.x[i + 1], s.xb[i + 1], hbar)) > d.epsilon) {
                    next.push_back(0.5 * (ts[i] + ts[i + 1]));
                    refined = true;
                }
                next.push_back(ts[i + 1]);
            }
            if (!refined) break;
            ts = std::move(next);
            s = sample_kcs_ho(p, ts);
        }
        Table t;
        t.name = "fig1_klauder_ho";
        t.add_meta("caption", "Klauder stationary-action path of the oscillator in phase space; re_* solid, im_* dashed");
        t.add_meta("T", format_double(d.T));
        t.add_meta("epsilon", format_double(d.epsilon));
        t.add_meta("xi_i", format_double(d.xi_i.real()) + "," + format_double(d.xi_i.imag()));
        t.add_meta("xi_f", format_double(d.xi_f.real()) + "," + format_double(d.xi_f.imag()));
        t.add_meta("samples", std::to_string(ts.size()));
        t.header = {"t", "re_p", "re_q", "im_p", "im_q"};
        for (std::size_t i = 0; i < ts.size(); ++i) {
            auto [pp, qq] = phase_of(s.x[i], s.xb[i], hbar);
            t.rows.push_back({ts[i], pp.real(), qq.real(), pp.imag(), qq.imag()});
        }
        out.push_back(std::move(t));
    }
    // DTCS stationary path with the endpoint rows n = 0 and n = N
    {
        StationarySolution sol = solve_ho_dtcs(TimeGrid(d.N, d.T), d.xi_i, d.xi_f, hbar);
        const DiscretePath& path = sol.path;
        Table t;
        t.name = "fig2_dtcs_ho";
        t.add_meta("caption", "discrete-time stationary-action path of the oscillator; rows n=0 and n=N hold the endpoint data");
        t.add_meta("T", format_double(d.T));
        t.add_meta("N", std::to_string(d.N));
        std::vector<std::pair<cplx, cplx>> pq;
        for (int n = 0; n <= d.N; ++n) {
            cplx x = path.fwd[n], xb = path.bwd[n];
            if (n == 0) xb = std::conj(x);
            if (n == d.N) xb = std::conj(x);
            pq.push_back(phase_of(x, xb, hbar));
        }
        t.add_meta("initial_jump", format_double(pq_jump(pq[0], pq[1])));
        t.add_meta("final_jump", format_double(pq_jump(pq[d.N - 1], pq[d.N])));
        t.header = {"n", "t", "re_p", "re_q", "im_p", "im_q"};
        for (int n = 0; n <= d.N; ++n)
            t.rows.push_back({double(n), path.grid.t(n), pq[n].first.real(), pq[n].second.real(), pq[n].first.imag(),
                              pq[n].second.imag()});
        out.push_back(std::move(t));
    }
    // DTSCS stationary path as the bilinear continuation of the unit vector n
    {
        StationarySolution sol = solve_spin_dtscs(TimeGrid(d.N, d.T), d.xi_i, d.xi_f, d.S, hbar);
        const DiscretePath& path = sol.path;
        Table t;
        t.name = "fig3_dtscs_spin";
        t.add_meta("caption", "discrete-time stationary-action path of the spin as n^S; re_* solid, im_* dashed");
        t.add_meta("T", format_double(d.T));
        t.add_meta("N", std::to_string(d.N));
        t.add_meta("S", format_double(d.S));
        t.header = {"n", "t", "re_nx", "re_ny", "re_nz", "im_nx", "im_ny", "im_nz"};
        for (int n = 0; n <= d.N; ++n) {
            cplx x = path.fwd[n], xb = path.bwd[n];
            if (n == 0 || n == d.N) xb = std::conj(x);
            const cplx g = 1.0 + xb * x;
            const cplx nx = (x + xb) / g, ny = -I * (x - xb) / g, nz = (1.0 - xb * x) / g;
            t.rows.push_back({double(n), path.grid.t(n), nx.real(), ny.real(), nz.real(), nx.imag(), ny.imag(), nz.imag()});
        }
        out.push_back(std::move(t));
    }
    return out;
}

std::vector<std::string> reproduce_figures(const std::string& dir, const FigureDefaults& d) {
    std::filesystem::create_directories(dir);
    std::vector<std::string> files;
    for (const Table& t : figure_tables(d)) {
        std::ostringstream os;
        t.write_csv(os);
        const std::string path = (std::filesystem::path(dir) / (t.name + ".csv")).string();
        write_text_file(path, os.str());
        files.push_back(path);
    }
    return files;
}

}  // namespace pathint
