#pragma once

#include <functional>
#include <vector>

#include "gampi/glm.hpp"

namespace gampi {

enum class TuningMethod { EBIC, CV };

struct TuningPolicy {
    TuningMethod method = TuningMethod::EBIC;
    double ebic_gamma = 0.5;
    int folds = 5;
    std::vector<double> tau_grid;    // empty: module default
    std::vector<double> gamma_grid;  // multipliers on the sqrt(log d / n) anchor
    std::vector<int> k_grid;         // empty: module default
    int k_max = 20;
    unsigned long long seed = 0;
};

/// One point of the hyperparameter grid. kprime is ignored by single-budget
/// fits and carries the confounder-block budget for the deconfounding fits.
struct Candidate {
    double tau = 0.0;
    double gamma = 0.0;
    int k = 0;
    int kprime = -1;
};

struct ScoreRow {
    Candidate candidate;
    double score = 0.0;  // EBIC value, or CV mean held-out nll
    double se = 0.0;     // CV only
    bool failed = false;
};

struct SelectionResult {
    Candidate chosen;
    int chosen_index = -1;
    std::vector<ScoreRow> table;
};

/// 2*n*nll + k*(log n + 2*gamma*log d).
double ebic_score(double nll_mean, int k_nonzero, int n, int d_candidates, double gamma);

struct EbicEval {
    double nll_mean = 0.0;
    int k_nonzero = 0;
    bool failed = false;
};

/// Argmin EBIC over the grid. Ties resolve to smaller k, then larger tau,
/// then smaller gamma. Throws SelectionFailed if every candidate failed.
SelectionResult select_ebic(const std::vector<Candidate>& candidates,
                            const std::function<EbicEval(const Candidate&)>& evaluate,
                            int n, int d_candidates, double ebic_gamma);

/// Deterministic fold assignment: fold id per observation, a pure function of
/// (n, folds, seed).
std::vector<int> cv_folds(int n, int folds, unsigned long long seed);

struct CvEval {
    double heldout_nll = 0.0;
    bool failed = false;
};

/// 5-fold CV with the one-standard-error rule: among candidates whose mean
/// held-out nll is within one SE of the minimizer's, the most parsimonious
/// (smallest k, then largest tau) wins.
SelectionResult select_cv(
    const std::vector<Candidate>& candidates, int n, const TuningPolicy& policy,
    const std::function<CvEval(const Candidate&, const std::vector<int>& train_idx,
                               const std::vector<int>& test_idx)>& evaluate);

}  // namespace gampi
