#include "gampi/fidelity.hpp"

#include <cmath>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "gampi/errors.hpp"
#include "gampi/nodewise_tuning.hpp"

namespace gampi {

std::vector<double> default_tau_grid() {
    // 8 geometric points spanning [0.01, 1.0].
    std::vector<double> grid;
    const double ratio = std::pow(100.0, 1.0 / 7.0);
    double tau = 0.01;
    for (int i = 0; i < 8; ++i, tau *= ratio) grid.push_back(tau);
    grid.back() = 1.0;
    return grid;
}

std::vector<double> default_gamma_grid() { return {0.01, 0.05, 0.1, 0.5}; }

std::vector<Candidate> tuning_grid(const TuningPolicy& policy, int n, int d,
                                   const std::vector<int>& k_grid) {
    const std::vector<double> taus =
        policy.tau_grid.empty() ? default_tau_grid() : policy.tau_grid;
    const std::vector<double> mults =
        policy.gamma_grid.empty() ? default_gamma_grid() : policy.gamma_grid;
    const double anchor = std::sqrt((std::log(std::max(d, 2)) + std::log(n)) / n);

    std::vector<Candidate> grid;
    for (double tau : taus)
        for (double mult : mults)
            for (int k : k_grid) {
                Candidate cand;
                cand.tau = tau;
                cand.gamma = mult * anchor / tau;
                cand.k = k;
                grid.push_back(cand);
            }
    return grid;
}

FidelityMatrix fit_fidelity(const Dataset& data, const TuningPolicy& tuning,
                            const FidelityOptions& opts) {
    const int n = data.n();
    const int p = data.p();
    const int q = data.q();
    const int k_max = opts.k_max > 0 ? opts.k_max : std::min(q, 20);

    // Scale X to unit variance so the penalty is comparable across IVs;
    // coefficients are mapped back to the original scale afterwards. The
    // model is interceptless, so columns are scaled without centering.
    Vector scale(q);
    Matrix Xs(n, q);
    for (int l = 0; l < q; ++l) {
        const double sd = std::sqrt(data.X.col(l).cwiseAbs2().mean());
        scale[l] = sd > 0 ? sd : 1.0;
        Xs.col(l) = data.X.col(l) / scale[l];
    }

    std::vector<int> k_grid;
    if (tuning.k_grid.empty()) {
        for (int k = 1; k <= std::min(k_max, q); ++k) k_grid.push_back(k);
    } else {
        k_grid = tuning.k_grid;
    }

    FidelityMatrix out;
    out.V = Matrix::Zero(q, p);
    out.supports.resize(p);
    out.chosen.resize(p);
    out.selections.resize(p);
    out.column_errors.assign(p, "");

    auto fit_column = [&](int j) {
        DesignProblem problem{Xs, data.Y.col(j), data.families[j], {}};
        const std::vector<Candidate> grid = tuning_grid(tuning, n, q, k_grid);
        auto make_config = [&](const Candidate& cand) {
            TlpConfig cfg = single_block_config(q, cand.tau, cand.k, cand.gamma);
            cfg.max_dc_iter = opts.max_dc_iter;
            return cfg;
        };
        try {
            TunedFit tuned = tune_constrained(problem, grid, make_config, tuning, q);
            for (int l = 0; l < q; ++l) out.V(l, j) = tuned.fit.fit.coef[l] / scale[l];
            for (int l = 0; l < q; ++l)
                if (out.V(l, j) != 0.0) out.supports[j].push_back(l);
            out.chosen[j] = tuned.chosen;
            out.selections[j] = std::move(tuned.selection);
        } catch (const std::exception& e) {
            out.column_errors[j] = e.what();
        }
    };

#ifdef _OPENMP
    if (opts.threads > 1) {
#pragma omp parallel for schedule(dynamic) num_threads(opts.threads)
        for (int j = 0; j < p; ++j) fit_column(j);
    } else {
        for (int j = 0; j < p; ++j) fit_column(j);
    }
#else
    for (int j = 0; j < p; ++j) fit_column(j);
#endif

    // Majority-rule check for linear links: a Gaussian node whose exclusive
    // IVs are not a majority of its fitted IVs cannot satisfy the rule.
    for (int j = 0; j < p; ++j) {
        if (data.families[j] != Family::Gaussian || out.supports[j].empty()) continue;
        int exclusive = 0;
        for (int l : out.supports[j]) {
            bool shared = false;
            for (int other = 0; other < p && !shared; ++other)
                if (other != j && out.V(l, other) != 0.0) shared = true;
            if (!shared) ++exclusive;
        }
        if (2 * exclusive <= static_cast<int>(out.supports[j].size())) {
            std::ostringstream msg;
            msg << "node " << (j + 1) << " (gaussian): only " << exclusive << " of "
                << out.supports[j].size()
                << " fitted IVs are exclusive; the majority rule cannot hold";
            out.warnings.push_back(msg.str());
        }
    }

    return out;
}

Vector refit_fidelity_column(const Dataset& data, int column, const Candidate& cand,
                             const FidelityOptions& opts) {
    const int n = data.n();
    const int q = data.q();
    Vector scale(q);
    Matrix Xs(n, q);
    for (int l = 0; l < q; ++l) {
        const double sd = std::sqrt(data.X.col(l).cwiseAbs2().mean());
        scale[l] = sd > 0 ? sd : 1.0;
        Xs.col(l) = data.X.col(l) / scale[l];
    }
    DesignProblem problem{Xs, data.Y.col(column), data.families[column], {}};
    TlpConfig cfg = single_block_config(q, cand.tau, cand.k, cand.gamma);
    cfg.max_dc_iter = opts.max_dc_iter;
    const ConstrainedFit fit = solve_constrained(problem, cfg);
    Vector col(q);
    for (int l = 0; l < q; ++l) col[l] = fit.fit.coef[l] / scale[l];
    return col;
}

}  // namespace gampi
