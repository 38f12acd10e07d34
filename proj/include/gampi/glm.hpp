#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "gampi/family.hpp"

namespace gampi {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using IndexSet = std::vector<int>;

/// One GLM regression instance: response y on regressor matrix Z with an
/// optional fixed offset added to the linear predictor. No implicit intercept;
/// append a constant column if one is wanted.
struct DesignProblem {
    Matrix Z;
    Vector y;
    Family family = Family::Gaussian;
    Vector offset;  // empty means zero

    int n() const { return static_cast<int>(Z.rows()); }
    int d() const { return static_cast<int>(Z.cols()); }
};

struct FitResult {
    Vector coef;
    double nll = 0.0;  // mean negative log-likelihood at coef
    int iterations = 1;
    bool converged = true;
};

struct GlmOptions {
    double cd_tol = 1e-7;      // max coefficient change, coordinate descent
    double newton_tol = 1e-8;  // gradient sup-norm, subset Newton
    int max_outer_iter = 200;
    double weight_floor = 1e-6;  // IRLS working-weight floor
};

/// Mean negative log-likelihood n^-1 sum_i [-y_i theta_i + A(theta_i)] with
/// theta = Z coef + offset. Density constants free of the data (Poisson
/// log y!) are dropped. Throws NumericalOverflow if the result is not finite.
double nll(const DesignProblem& problem, const Vector& coef);

/// Gradient n^-1 Z^T (phi(theta) - y).
Vector nll_grad(const DesignProblem& problem, const Vector& coef);

/// Minimizes nll(coef) + sum_l l1_weights[l] * |coef[l]| by IRLS with cyclic
/// coordinate descent on the quadratic surrogate. A zero weight leaves the
/// coordinate unpenalized. converged=false after max_outer_iter.
FitResult fit_weighted_l1(const DesignProblem& problem, const Vector& l1_weights,
                          const std::optional<Vector>& warm_start = std::nullopt,
                          const GlmOptions& opts = {});

/// Unpenalized MLE with coordinates outside `support` fixed at zero
/// (Newton/IRLS with step halving). Empty support returns the zero vector.
/// Throws SingularFit on a collinear restricted design.
FitResult fit_subset(const DesignProblem& problem, const IndexSet& support,
                     const GlmOptions& opts = {});

}  // namespace gampi
