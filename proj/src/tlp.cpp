#include "gampi/tlp.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "gampi/errors.hpp"

namespace gampi {

double tlp(double z, double tau) { return std::min(std::abs(z) / tau, 1.0); }

TlpConfig single_block_config(int d, double tau, int k, double gamma,
                              const IndexSet& free_set) {
    TlpConfig cfg;
    cfg.tau = tau;
    cfg.gamma = gamma;
    PenalizedBlock block;
    block.budget = k;
    std::vector<bool> is_free(d, false);
    for (int l : free_set) is_free[l] = true;
    for (int l = 0; l < d; ++l)
        if (!is_free[l]) block.coords.push_back(l);
    cfg.blocks.push_back(std::move(block));
    return cfg;
}

namespace {

IndexSet penalized_coords(const TlpConfig& cfg) {
    IndexSet all;
    for (const auto& block : cfg.blocks)
        all.insert(all.end(), block.coords.begin(), block.coords.end());
    std::sort(all.begin(), all.end());
    return all;
}

IndexSet free_coords(int d, const TlpConfig& cfg) {
    std::vector<bool> penalized(d, false);
    for (const auto& block : cfg.blocks)
        for (int l : block.coords) penalized[l] = true;
    IndexSet free_set;
    for (int l = 0; l < d; ++l)
        if (!penalized[l]) free_set.push_back(l);
    return free_set;
}

double tlp_objective(const DesignProblem& problem, const Vector& v, const TlpConfig& cfg,
                     const IndexSet& penalized) {
    double obj = nll(problem, v);
    for (int l : penalized) obj += cfg.gamma * cfg.tau * cfg.tau * tlp(v[l], cfg.tau);
    return obj;
}

}  // namespace

std::pair<Vector, DcTrace> dc_fit(const DesignProblem& problem, const TlpConfig& cfg,
                                  const Vector& init) {
    const int d = problem.d();
    const IndexSet penalized = penalized_coords(cfg);

    Vector current = init;
    DcTrace trace;
    std::set<std::vector<bool>> seen;

    Vector best = init;
    double best_nll = nll(problem, init);

    for (int t = 0; t < cfg.max_dc_iter; ++t) {
        std::vector<bool> active(d, false);
        Vector weights = Vector::Zero(d);
        for (int l : penalized) {
            if (std::abs(current[l]) <= cfg.tau) {
                weights[l] = cfg.gamma * cfg.tau;
                active[l] = true;
            }
        }
        if (!seen.insert(active).second) break;  // weight set repeated

        const FitResult inner = fit_weighted_l1(problem, weights, current, cfg.glm);
        if (!inner.converged) trace.inner_converged = false;
        current = inner.coef;

        DcIterationRecord rec;
        rec.active_weights = std::move(active);
        rec.nll_value = inner.nll;
        rec.weighted_objective = inner.nll;
        for (int l = 0; l < d; ++l)
            rec.weighted_objective += weights[l] * std::abs(current[l]);
        rec.tlp_objective = tlp_objective(problem, current, cfg, penalized);
        trace.iterations.push_back(std::move(rec));

        if (inner.nll < best_nll) {
            best_nll = inner.nll;
            best = current;
        }
    }

    return {best, std::move(trace)};
}

Vector project_l0(const DesignProblem& problem, const Vector& candidate,
                  const TlpConfig& cfg, IndexSet* kept_penalized) {
    IndexSet support = free_coords(problem.d(), cfg);
    IndexSet kept;

    for (const auto& block : cfg.blocks) {
        const int k = std::min<int>(block.budget, static_cast<int>(block.coords.size()));
        if (k <= 0) continue;

        std::vector<std::pair<double, int>> ranked;
        ranked.reserve(block.coords.size());
        for (int l : block.coords) ranked.emplace_back(std::abs(candidate[l]), l);
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });

        // Strictly above the (k+1)-th order statistic; ties fill by lowest index.
        const double threshold =
            static_cast<int>(ranked.size()) > k ? ranked[k].first : -1.0;
        IndexSet chosen;
        for (const auto& [mag, l] : ranked) {
            if (static_cast<int>(chosen.size()) >= k) break;
            if (mag > threshold) chosen.push_back(l);
        }
        if (static_cast<int>(chosen.size()) < k) {
            IndexSet tied;
            for (const auto& [mag, l] : ranked)
                if (mag <= threshold &&
                    std::find(chosen.begin(), chosen.end(), l) == chosen.end())
                    tied.push_back(l);
            std::sort(tied.begin(), tied.end());
            for (int l : tied) {
                if (static_cast<int>(chosen.size()) >= k) break;
                chosen.push_back(l);
            }
        }
        kept.insert(kept.end(), chosen.begin(), chosen.end());
    }

    std::sort(kept.begin(), kept.end());
    if (kept_penalized) *kept_penalized = kept;

    support.insert(support.end(), kept.begin(), kept.end());
    std::sort(support.begin(), support.end());
    return fit_subset(problem, support, cfg.glm).coef;
}

ConstrainedFit solve_constrained(const DesignProblem& problem, const TlpConfig& cfg) {
    const IndexSet free_set = free_coords(problem.d(), cfg);
    Vector init = free_set.empty() ? Vector::Zero(problem.d())
                                   : fit_subset(problem, free_set, cfg.glm).coef;

    auto [candidate, trace] = dc_fit(problem, cfg, init);

    ConstrainedFit out;
    out.fit.coef = project_l0(problem, candidate, cfg, &out.penalized_support);
    trace.projected_support = out.penalized_support;
    out.trace = std::move(trace);

    out.support = free_set;
    out.support.insert(out.support.end(), out.penalized_support.begin(),
                       out.penalized_support.end());
    std::sort(out.support.begin(), out.support.end());

    out.fit.nll = nll(problem, out.fit.coef);
    out.fit.iterations = static_cast<int>(out.trace.iterations.size());
    out.fit.converged = out.trace.inner_converged;
    return out;
}

}  // namespace gampi
