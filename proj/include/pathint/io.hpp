#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pathint/klauder.hpp"

namespace pathint {

using json = nlohmann::ordered_json;

// Header row, '#' metadata lines first, 17 significant digits.
struct Table {
    std::string name;
    std::vector<std::pair<std::string, std::string>> meta;
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    void add_meta(const std::string& k, const std::string& v) { meta.emplace_back(k, v); }
    void write_csv(std::ostream& os) const;
    json to_json() const;
};

std::string format_double(double v);

// Every number in the JSON output travels with the tolerance that certifies it.
json tolerant(double v, double tol);
json tolerant(cplx v, double tol);
json complex_json(cplx v);

Table path_table(const DiscretePath& path, double hbar = 1.0);
// t, Re/Im xi, Re/Im xibar, |chi - 1|, |chibar - 1|
Table klauder_trace_table(const KlauderSolution& sol);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace pathint
