#include "gampi/model_select.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "gampi/errors.hpp"

namespace gampi {

double ebic_score(double nll_mean, int k_nonzero, int n, int d_candidates, double gamma) {
    double penalty = k_nonzero * std::log(static_cast<double>(n));
    if (d_candidates > 0)
        penalty += k_nonzero * 2.0 * gamma * std::log(static_cast<double>(d_candidates));
    return 2.0 * n * nll_mean + penalty;
}

namespace {

// Parsimony order shared by both selectors: smaller k, then larger tau, then
// smaller gamma, then smaller kprime.
bool more_parsimonious(const Candidate& a, const Candidate& b) {
    if (a.k != b.k) return a.k < b.k;
    if (a.tau != b.tau) return a.tau > b.tau;
    if (a.gamma != b.gamma) return a.gamma < b.gamma;
    return a.kprime < b.kprime;
}

}  // namespace

SelectionResult select_ebic(const std::vector<Candidate>& candidates,
                            const std::function<EbicEval(const Candidate&)>& evaluate,
                            int n, int d_candidates, double ebic_gamma) {
    if (candidates.empty()) throw SelectionFailed("empty candidate grid");
    SelectionResult out;
    out.table.reserve(candidates.size());

    for (size_t i = 0; i < candidates.size(); ++i) {
        ScoreRow row;
        row.candidate = candidates[i];
        const EbicEval eval = evaluate(candidates[i]);
        row.failed = eval.failed;
        if (!eval.failed)
            row.score = ebic_score(eval.nll_mean, eval.k_nonzero, n, d_candidates, ebic_gamma);
        out.table.push_back(row);

        if (row.failed) continue;
        if (out.chosen_index < 0 || row.score < out.table[out.chosen_index].score ||
            (row.score == out.table[out.chosen_index].score &&
             more_parsimonious(row.candidate, out.table[out.chosen_index].candidate)))
            out.chosen_index = static_cast<int>(i);
    }

    if (out.chosen_index < 0) throw SelectionFailed("all EBIC candidates failed");
    out.chosen = out.table[out.chosen_index].candidate;
    return out;
}

std::vector<int> cv_folds(int n, int folds, unsigned long long seed) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> fold_of(n);
    for (int i = 0; i < n; ++i) fold_of[order[i]] = i % folds;
    return fold_of;
}

SelectionResult select_cv(
    const std::vector<Candidate>& candidates, int n, const TuningPolicy& policy,
    const std::function<CvEval(const Candidate&, const std::vector<int>&,
                               const std::vector<int>&)>& evaluate) {
    if (candidates.empty()) throw SelectionFailed("empty candidate grid");
    const int folds = policy.folds;
    const std::vector<int> fold_of = cv_folds(n, folds, policy.seed);

    std::vector<std::vector<int>> train(folds), test(folds);
    for (int i = 0; i < n; ++i) {
        for (int f = 0; f < folds; ++f)
            (fold_of[i] == f ? test[f] : train[f]).push_back(i);
    }

    SelectionResult out;
    out.table.reserve(candidates.size());
    for (const Candidate& cand : candidates) {
        ScoreRow row;
        row.candidate = cand;
        std::vector<double> losses;
        for (int f = 0; f < folds; ++f) {
            const CvEval eval = evaluate(cand, train[f], test[f]);
            if (eval.failed) {
                row.failed = true;
                break;
            }
            losses.push_back(eval.heldout_nll);
        }
        if (!row.failed) {
            const double mean =
                std::accumulate(losses.begin(), losses.end(), 0.0) / folds;
            double var = 0.0;
            for (double loss : losses) var += (loss - mean) * (loss - mean);
            var /= (folds - 1);
            row.score = mean;
            row.se = std::sqrt(var / folds);
        }
        out.table.push_back(std::move(row));
    }

    int best = -1;
    for (size_t i = 0; i < out.table.size(); ++i) {
        if (out.table[i].failed) continue;
        if (best < 0 || out.table[i].score < out.table[best].score) best = static_cast<int>(i);
    }
    if (best < 0) throw SelectionFailed("all CV candidates failed");

    // One-standard-error rule.
    const double threshold = out.table[best].score + out.table[best].se;
    out.chosen_index = best;
    for (size_t i = 0; i < out.table.size(); ++i) {
        if (out.table[i].failed || out.table[i].score > threshold) continue;
        if (more_parsimonious(out.table[i].candidate,
                              out.table[out.chosen_index].candidate))
            out.chosen_index = static_cast<int>(i);
    }
    out.chosen = out.table[out.chosen_index].candidate;
    return out;
}

}  // namespace gampi
