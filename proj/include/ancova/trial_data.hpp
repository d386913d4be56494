// trial_data.hpp — trial data model, CSV ingestion, design-matrix construction.
#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "ancova/linalg.hpp"

namespace ancova {

// One two-arm trial: outcome Y, arm indicator A (1 experimental, 0 control),
// and k baseline covariate columns. Immutable after construction; safe to
// share across threads.
struct TrialDataset {
    std::vector<double> outcomes;
    std::vector<int> arms;
    Matrix covariates;  // n x k, column-major
    std::vector<std::string> covariate_names;

    std::size_t n() const { return outcomes.size(); }
    std::size_t k() const { return covariates.cols(); }
    std::size_t arm_count(int arm) const;
    double pi_hat() const;

    // Checks sizes, finiteness, 0/1 arms, and that both arms are present.
    void validate() const;
};

// CSV: UTF-8, comma separated, mandatory header. Required columns Y and A;
// all remaining columns are covariates in file order. Decimal point only.
TrialDataset load_csv(const std::filesystem::path& path);
void write_csv(const TrialDataset& data, const std::filesystem::path& path);

struct DesignMatrix {
    Matrix values;  // n x (k+2), columns [intercept, A, W1..Wk]
    std::vector<std::string> column_labels;
};

// Columns ordered [1, A, W]; no centering or scaling. Row order preserved.
DesignMatrix design_matrix(const TrialDataset& data);

}  // namespace ancova
