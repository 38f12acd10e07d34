#include "gampi/nodewise_tuning.hpp"

#include <cmath>
#include <map>

#include "gampi/errors.hpp"

namespace gampi {

DesignProblem subset_rows(const DesignProblem& problem, const std::vector<int>& rows) {
    DesignProblem out;
    out.family = problem.family;
    out.Z.resize(rows.size(), problem.d());
    out.y.resize(rows.size());
    if (problem.offset.size() > 0) out.offset.resize(rows.size());
    for (size_t i = 0; i < rows.size(); ++i) {
        out.Z.row(i) = problem.Z.row(rows[i]);
        out.y[i] = problem.y[rows[i]];
        if (problem.offset.size() > 0) out.offset[i] = problem.offset[rows[i]];
    }
    return out;
}

namespace {

TunedFit tune_ebic(const DesignProblem& problem, const std::vector<Candidate>& grid,
                   const ConfigBuilder& make_config, const TuningPolicy& policy,
                   int d_candidates) {
    // Group candidate indices by (tau, gamma); the DC path is budget-free.
    std::map<std::pair<double, double>, std::vector<int>> groups;
    for (size_t i = 0; i < grid.size(); ++i)
        groups[{grid[i].tau, grid[i].gamma}].push_back(static_cast<int>(i));

    std::vector<ConstrainedFit> fits(grid.size());
    std::vector<bool> failed(grid.size(), false);

    for (const auto& [key, members] : groups) {
        Vector dc_candidate;
        bool dc_ok = true;
        DcTrace trace;
        try {
            const TlpConfig base = make_config(grid[members.front()]);
            const IndexSet penalized = [&] {
                IndexSet all;
                for (const auto& b : base.blocks)
                    all.insert(all.end(), b.coords.begin(), b.coords.end());
                return all;
            }();
            std::vector<bool> is_pen(problem.d(), false);
            for (int l : penalized) is_pen[l] = true;
            IndexSet free_set;
            for (int l = 0; l < problem.d(); ++l)
                if (!is_pen[l]) free_set.push_back(l);
            Vector init = free_set.empty()
                              ? Vector::Zero(problem.d())
                              : fit_subset(problem, free_set, base.glm).coef;
            auto [cand, tr] = dc_fit(problem, base, init);
            dc_candidate = cand;
            trace = std::move(tr);
        } catch (const std::exception&) {
            dc_ok = false;
        }

        for (int idx : members) {
            if (!dc_ok) {
                failed[idx] = true;
                continue;
            }
            try {
                const TlpConfig cfg = make_config(grid[idx]);
                ConstrainedFit cf;
                cf.fit.coef = project_l0(problem, dc_candidate, cfg, &cf.penalized_support);
                cf.trace = trace;
                cf.trace.projected_support = cf.penalized_support;
                std::vector<bool> is_pen(problem.d(), false);
                for (const auto& b : cfg.blocks)
                    for (int l : b.coords) is_pen[l] = true;
                for (int l = 0; l < problem.d(); ++l)
                    if (!is_pen[l]) cf.support.push_back(l);
                cf.support.insert(cf.support.end(), cf.penalized_support.begin(),
                                  cf.penalized_support.end());
                std::sort(cf.support.begin(), cf.support.end());
                cf.fit.nll = nll(problem, cf.fit.coef);
                cf.fit.iterations =
                    std::max<int>(1, static_cast<int>(cf.trace.iterations.size()));
                cf.fit.converged = cf.trace.inner_converged;
                fits[idx] = std::move(cf);
            } catch (const std::exception&) {
                failed[idx] = true;
            }
        }
    }

    // select_ebic walks the grid in order exactly once.
    size_t next = 0;
    auto evaluate = [&](const Candidate&) -> EbicEval {
        const size_t i = next++;
        if (failed[i]) return {0.0, 0, true};
        int k_nonzero = 0;
        for (int l : fits[i].penalized_support)
            if (fits[i].fit.coef[l] != 0.0) ++k_nonzero;
        return {fits[i].fit.nll, k_nonzero, false};
    };

    TunedFit out;
    out.selection = select_ebic(grid, evaluate, problem.n(), d_candidates,
                                policy.ebic_gamma);
    out.chosen = out.selection.chosen;
    out.fit = fits[out.selection.chosen_index];
    return out;
}

TunedFit tune_cv(const DesignProblem& problem, const std::vector<Candidate>& grid,
                 const ConfigBuilder& make_config, const TuningPolicy& policy) {
    auto evaluate = [&](const Candidate& cand, const std::vector<int>& train_idx,
                        const std::vector<int>& test_idx) -> CvEval {
        try {
            const DesignProblem train = subset_rows(problem, train_idx);
            const ConstrainedFit cf = solve_constrained(train, make_config(cand));
            const DesignProblem test = subset_rows(problem, test_idx);
            return {nll(test, cf.fit.coef), false};
        } catch (const std::exception&) {
            return {0.0, true};
        }
    };

    TunedFit out;
    out.selection = select_cv(grid, problem.n(), policy, evaluate);
    out.chosen = out.selection.chosen;
    out.fit = solve_constrained(problem, make_config(out.chosen));
    return out;
}

}  // namespace

TunedFit tune_constrained(const DesignProblem& problem,
                          const std::vector<Candidate>& grid,
                          const ConfigBuilder& make_config, const TuningPolicy& policy,
                          int d_candidates) {
    if (policy.method == TuningMethod::CV)
        return tune_cv(problem, grid, make_config, policy);
    return tune_ebic(problem, grid, make_config, policy, d_candidates);
}

}  // namespace gampi
