#include "pathint/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "pathint/errors.hpp"

namespace pathint {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void Table::write_csv(std::ostream& os) const {
    for (auto& [k, v] : meta) os << "# " << k << ": " << v << '\n';
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << '\n';
    for (auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_double(r[i]);
        os << '\n';
    }
}

namespace {
json number(double v) {
    if (std::isfinite(v)) return v;
    return format_double(v);
}
}  // namespace

json Table::to_json() const {
    json j;
    j["name"] = name;
    json m = json::object();
    for (auto& [k, v] : meta) m[k] = v;
    j["meta"] = m;
    j["header"] = header;
    json rs = json::array();
    for (auto& r : rows) {
        json row = json::array();
        for (double v : r) row.push_back(number(v));
        rs.push_back(row);
    }
    j["rows"] = rs;
    return j;
}

json tolerant(double v, double tol) { return {{"value", number(v)}, {"tolerance", tol}}; }

json tolerant(cplx v, double tol) { return {{"re", number(v.real())}, {"im", number(v.imag())}, {"tolerance", tol}}; }

json complex_json(cplx v) { return {{"re", number(v.real())}, {"im", number(v.imag())}}; }

Table path_table(const DiscretePath& path, double hbar) {
    Table t;
    t.name = "path";
    t.header = {"n", "t", "re_xi", "im_xi", "re_xibar", "im_xibar", "re_p", "im_p", "re_q", "im_q"};
    const double c = std::sqrt(hbar / 2.0);
    const cplx I{0.0, 1.0};
    for (int n = 0; n <= path.grid.N; ++n) {
        cplx x = path.fwd[n], xb = path.bwd[n];
        if (n == 0) xb = std::conj(x);
        cplx q = c * (x + xb), p = -I * c * (x - xb);
        t.rows.push_back({double(n), path.grid.t(n), x.real(), x.imag(), xb.real(), xb.imag(), p.real(), p.imag(),
                          q.real(), q.imag()});
    }
    return t;
}

Table klauder_trace_table(const KlauderSolution& sol) {
    Table t;
    t.name = "klauder_trace";
    t.header = {"t", "re_xi", "im_xi", "re_xibar", "im_xibar", "abs_chi_minus_1", "abs_chibar_minus_1"};
    const PathSamples& s = sol.samples;
    for (std::size_t i = 0; i < s.size(); ++i)
        t.rows.push_back({s.t[i], s.x[i].real(), s.x[i].imag(), s.xb[i].real(), s.xb[i].imag(),
                          std::abs(sol.chi.chi[i] - 1.0), std::abs(sol.chi.chi_bar[i] - 1.0)});
    return t;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ValidationError("cannot open output file " + path);
    f << content;
    if (!f) throw ValidationError("write failed for " + path);
}

}  // namespace pathint
