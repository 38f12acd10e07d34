#pragma once

#include <vector>

#include "gampi/glm.hpp"

namespace gampi {

/// Truncated-L1 surrogate for the L0 indicator: min(|z|/tau, 1).
double tlp(double z, double tau);

/// A group of coordinates sharing one L0 budget. Coordinates outside every
/// block are free: never penalized and always kept in the refit support.
struct PenalizedBlock {
    IndexSet coords;
    int budget = 1;
};

struct TlpConfig {
    double tau = 0.5;
    double gamma = 0.1;  // gamma = lambda / tau^2
    std::vector<PenalizedBlock> blocks;
    int max_dc_iter = 50;
    double tol = 1e-7;
    GlmOptions glm;
};

/// Single budget over all coordinates except free_set.
TlpConfig single_block_config(int d, double tau, int k, double gamma,
                              const IndexSet& free_set = {});

struct DcIterationRecord {
    std::vector<bool> active_weights;  // which coordinates carried an L1 weight
    double weighted_objective;         // nll + weighted-L1 penalty of this solve
    double tlp_objective;              // nll + gamma*tau^2 * sum of TLP terms
    double nll_value;
};

struct DcTrace {
    std::vector<DcIterationRecord> iterations;
    IndexSet projected_support;  // penalized coordinates kept by the projection
    bool inner_converged = true;
};

/// Difference-of-convex loop: repeatedly solves the weighted-lasso surrogate
/// with weights gamma*tau on coordinates whose previous iterate is within tau
/// of zero, warm-started at the previous iterate. Stops when the active weight
/// set repeats or max_dc_iter is hit; returns the iterate with the lowest nll.
std::pair<Vector, DcTrace> dc_fit(const DesignProblem& problem, const TlpConfig& cfg,
                                  const Vector& init);

/// Projects onto the L0 constraint set: per block, keeps the budget-many
/// largest-magnitude coordinates (strictly above the (budget+1)-th order
/// statistic, ties filled by lowest index), plus all free coordinates, then
/// refits unpenalized on the retained support.
Vector project_l0(const DesignProblem& problem, const Vector& candidate,
                  const TlpConfig& cfg, IndexSet* kept_penalized = nullptr);

struct ConstrainedFit {
    FitResult fit;
    IndexSet support;            // all nonzero-eligible coordinates after projection
    IndexSet penalized_support;  // projected penalized coordinates only
    DcTrace trace;
};

/// dc_fit followed by project_l0, starting from the free-coordinate refit.
ConstrainedFit solve_constrained(const DesignProblem& problem, const TlpConfig& cfg);

}  // namespace gampi
