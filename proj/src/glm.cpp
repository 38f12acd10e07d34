#include "gampi/glm.hpp"

#include <algorithm>
#include <cmath>

#include "gampi/errors.hpp"

namespace gampi {

namespace {

Vector linear_predictor(const DesignProblem& problem, const Vector& coef) {
    Vector eta = problem.Z * coef;
    if (problem.offset.size() > 0) eta += problem.offset;
    for (int i = 0; i < eta.size(); ++i) eta[i] = clamp_eta(problem.family, eta[i]);
    return eta;
}

double soft_threshold(double z, double lambda) {
    if (z > lambda) return z - lambda;
    if (z < -lambda) return z + lambda;
    return 0.0;
}

double penalized_objective(const DesignProblem& problem, const Vector& coef,
                           const Vector& l1_weights) {
    double obj = nll(problem, coef);
    for (int l = 0; l < coef.size(); ++l) obj += l1_weights[l] * std::abs(coef[l]);
    return obj;
}

}  // namespace

double nll(const DesignProblem& problem, const Vector& coef) {
    const Vector eta = linear_predictor(problem, coef);
    double acc = 0.0;
    for (int i = 0; i < problem.n(); ++i)
        acc += -problem.y[i] * eta[i] + cumulant(problem.family, eta[i]);
    const double value = acc / problem.n();
    if (!std::isfinite(value))
        throw NumericalOverflow("nll is not finite; inputs are ill-scaled");
    return value;
}

Vector nll_grad(const DesignProblem& problem, const Vector& coef) {
    const Vector eta = linear_predictor(problem, coef);
    Vector resid(problem.n());
    for (int i = 0; i < problem.n(); ++i)
        resid[i] = inv_link(problem.family, eta[i]) - problem.y[i];
    Vector g = problem.Z.transpose() * resid / problem.n();
    if (!g.allFinite())
        throw NumericalOverflow("nll gradient is not finite; inputs are ill-scaled");
    return g;
}

FitResult fit_weighted_l1(const DesignProblem& problem, const Vector& l1_weights,
                          const std::optional<Vector>& warm_start,
                          const GlmOptions& opts) {
    const int n = problem.n();
    const int d = problem.d();
    Vector beta = warm_start ? *warm_start : Vector::Zero(d);

    double obj = penalized_objective(problem, beta, l1_weights);
    FitResult out;
    out.converged = false;

    int outer = 0;
    for (; outer < opts.max_outer_iter; ++outer) {
        const Vector beta_prev = beta;
        const double obj_prev = obj;

        // Quadratic surrogate at the current iterate.
        Vector eta = linear_predictor(problem, beta);
        Vector w(n), z(n);
        for (int i = 0; i < n; ++i) {
            w[i] = std::max(curvature(problem.family, eta[i]), opts.weight_floor);
            const double off = problem.offset.size() > 0 ? problem.offset[i] : 0.0;
            z[i] = eta[i] - off + (problem.y[i] - inv_link(problem.family, eta[i])) / w[i];
        }

        Vector col_curv(d);
        for (int l = 0; l < d; ++l)
            col_curv[l] = problem.Z.col(l).cwiseAbs2().dot(w) / n;

        // r tracks z - Z beta.
        Vector r = z - problem.Z * beta;
        for (int pass = 0; pass < 1000; ++pass) {
            double max_delta = 0.0;
            for (int l = 0; l < d; ++l) {
                if (col_curv[l] <= 0.0) continue;
                const double old = beta[l];
                const double rho =
                    col_curv[l] * old + problem.Z.col(l).cwiseProduct(w).dot(r) / n;
                const double updated = soft_threshold(rho, l1_weights[l]) / col_curv[l];
                if (updated != old) {
                    beta[l] = updated;
                    r -= (updated - old) * problem.Z.col(l);
                    max_delta = std::max(max_delta, std::abs(updated - old));
                }
            }
            if (max_delta < opts.cd_tol) break;
        }

        // Step halving keeps the outer objective non-increasing even when the
        // quadratic surrogate oversteps.
        obj = penalized_objective(problem, beta, l1_weights);
        for (int halving = 0; obj > obj_prev + 1e-12 && halving < 40; ++halving) {
            beta = 0.5 * (beta + beta_prev);
            obj = penalized_objective(problem, beta, l1_weights);
        }
        if (obj > obj_prev) {
            beta = beta_prev;
            obj = obj_prev;
        }

        if ((beta - beta_prev).cwiseAbs().maxCoeff() < opts.cd_tol) {
            out.converged = true;
            ++outer;
            break;
        }
    }

    out.coef = beta;
    out.nll = nll(problem, beta);
    out.iterations = std::max(outer, 1);
    return out;
}

FitResult fit_subset(const DesignProblem& problem, const IndexSet& support,
                     const GlmOptions& opts) {
    const int n = problem.n();
    const int d = problem.d();
    const int s = static_cast<int>(support.size());

    FitResult out;
    if (s == 0) {
        out.coef = Vector::Zero(d);
        out.nll = nll(problem, out.coef);
        out.iterations = 1;
        return out;
    }

    Matrix Zs(n, s);
    for (int j = 0; j < s; ++j) Zs.col(j) = problem.Z.col(support[j]);

    DesignProblem restricted{Zs, problem.y, problem.family, problem.offset};
    Vector b = Vector::Zero(s);
    double cur = nll(restricted, b);
    out.converged = false;

    int iter = 0;
    for (; iter < opts.max_outer_iter; ++iter) {
        const Vector g = nll_grad(restricted, b);
        if (g.cwiseAbs().maxCoeff() < opts.newton_tol) {
            out.converged = true;
            break;
        }

        Vector eta = Zs * b;
        if (problem.offset.size() > 0) eta += problem.offset;
        Vector w(n);
        for (int i = 0; i < n; ++i)
            w[i] = std::max(curvature(problem.family, clamp_eta(problem.family, eta[i])),
                            opts.weight_floor);
        Matrix H = Zs.transpose() * w.asDiagonal() * Zs / n;

        Eigen::LDLT<Matrix> ldlt(H);
        const double dmax = ldlt.vectorD().cwiseAbs().maxCoeff();
        const double dmin = ldlt.vectorD().minCoeff();
        if (ldlt.info() != Eigen::Success || dmin <= dmax * 1e-12)
            throw SingularFit("restricted information matrix is singular");
        const Vector step = ldlt.solve(-g);
        if (!step.allFinite())
            throw SingularFit("Newton step is not finite");

        double t = 1.0;
        Vector trial = b + step;
        double trial_nll = nll(restricted, trial);
        for (int halving = 0; trial_nll > cur + 1e-14 && halving < 40; ++halving) {
            t *= 0.5;
            trial = b + t * step;
            trial_nll = nll(restricted, trial);
        }
        if (trial_nll > cur) break;  // no further progress
        b = trial;
        cur = trial_nll;
    }

    out.coef = Vector::Zero(d);
    for (int j = 0; j < s; ++j) out.coef[support[j]] = b[j];
    out.nll = cur;
    out.iterations = std::max(iter, 1);
    return out;
}

}  // namespace gampi
