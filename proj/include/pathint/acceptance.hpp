#pragma once

#include <string>
#include <vector>

namespace pathint {

struct CriterionResult {
    int id = 0;
    std::string title;
    bool pass = false;
    std::string detail;  // measured values against the pinned bounds
};

CriterionResult acceptance_ho_exactness();
CriterionResult acceptance_spin_closed_form();
CriterionResult acceptance_oracle_equivalence();
CriterionResult acceptance_divergences();
CriterionResult acceptance_tridiagonal_closed_form();
CriterionResult acceptance_klauder_ho();
CriterionResult acceptance_klauder_spin();
CriterionResult acceptance_conservation();
CriterionResult acceptance_gaussian_oracle(int jobs = 0);

// All nine, in order; `only` restricts to one id when nonzero.
std::vector<CriterionResult> run_acceptance(int jobs = 0, int only = 0);
std::string format_criterion(const CriterionResult& r);

}  // namespace pathint
