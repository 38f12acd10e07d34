#pragma once

#include <string>
#include <vector>

#include "gampi/dataset.hpp"
#include "gampi/model_select.hpp"
#include "gampi/tlp.hpp"

namespace gampi {

/// Estimated q x p coefficient matrix linking instruments to primaries, one
/// TLP-constrained nodewise GLM regression per column.
struct FidelityMatrix {
    Matrix V;                         // q x p, original X scale
    std::vector<IndexSet> supports;   // nonzeros of column j
    std::vector<Candidate> chosen;    // selected (tau, gamma, k) per column
    std::vector<SelectionResult> selections;  // full score table per column
    std::vector<std::string> column_errors;  // empty string = column fitted
    std::vector<std::string> warnings;

    bool ok() const {
        for (const auto& e : column_errors)
            if (!e.empty()) return false;
        return true;
    }
};

struct FidelityOptions {
    int threads = 1;  // 1 is the serial reference path
    int k_max = 0;    // 0 resolves to min(q, 20)
    int max_dc_iter = 50;
};

/// Default geometric tau grid, 8 points spanning [0.01, 1.0] on the
/// unit-variance scale of the internally standardized X.
std::vector<double> default_tau_grid();

/// Default gamma multipliers applied to the tau^-1 sqrt((log d + log n)/n)
/// anchor.
std::vector<double> default_gamma_grid();

/// Builds the (tau, gamma, k) grid for a nodewise fit with d candidate
/// regressors and budgets from k_grid.
std::vector<Candidate> tuning_grid(const TuningPolicy& policy, int n, int d,
                                   const std::vector<int>& k_grid);

/// Fits the p nodewise regressions of Y_j on all instruments; columns are
/// independent and run in parallel when threads > 1 with identical output.
FidelityMatrix fit_fidelity(const Dataset& data, const TuningPolicy& tuning,
                            const FidelityOptions& opts = {});

/// Refits a single column at a fixed hyperparameter point (peel-stall
/// recovery path): returns the original-scale coefficient column.
Vector refit_fidelity_column(const Dataset& data, int column, const Candidate& cand,
                             const FidelityOptions& opts = {});

}  // namespace gampi
