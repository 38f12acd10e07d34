#pragma once

#include <functional>

#include "gampi/model_select.hpp"
#include "gampi/tlp.hpp"

namespace gampi {

/// Shared driver for the tuned nodewise fits: one DC solve per (tau, gamma),
/// then a cheap projection + refit per budget candidate.
struct TunedFit {
    ConstrainedFit fit;
    Candidate chosen;
    SelectionResult selection;
};

using ConfigBuilder = std::function<TlpConfig(const Candidate&)>;

/// EBIC: groups candidates by (tau, gamma) so the DC iteration runs once per
/// group and only the L0 projection varies with the budgets. CV: solves the
/// full path per candidate per fold. d_candidates is the regressor count used
/// in the EBIC dimension penalty.
TunedFit tune_constrained(const DesignProblem& problem,
                          const std::vector<Candidate>& grid,
                          const ConfigBuilder& make_config, const TuningPolicy& policy,
                          int d_candidates);

DesignProblem subset_rows(const DesignProblem& problem, const std::vector<int>& rows);

}  // namespace gampi
