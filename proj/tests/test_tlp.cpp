#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "gampi/glm.hpp"
#include "gampi/tlp.hpp"

using namespace gampi;

namespace {

DesignProblem gaussian_problem(int n, int d, const Vector& beta, std::uint32_t seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    DesignProblem pb;
    pb.family = Family::Gaussian;
    pb.Z = Matrix(n, d);
    for (int i = 0; i < n; ++i)
        for (int l = 0; l < d; ++l) pb.Z(i, l) = gauss(rng);
    pb.y = Vector(n);
    for (int i = 0; i < n; ++i) pb.y[i] = pb.Z.row(i).dot(beta) + gauss(rng);
    return pb;
}

double exhaustive_best_nll(const DesignProblem& pb, int k) {
    const int d = pb.d();
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> idx(d);
    // Enumerate all subsets of size <= k.
    for (unsigned mask = 0; mask < (1u << d); ++mask) {
        if (__builtin_popcount(mask) > k) continue;
        IndexSet sub;
        for (int l = 0; l < d; ++l)
            if (mask & (1u << l)) sub.push_back(l);
        try {
            best = std::min(best, fit_subset(pb, sub).nll);
        } catch (...) {
        }
    }
    return best;
}

}  // namespace

TEST_CASE("tlp surrogate values") {
    CHECK(tlp(0.25, 0.5) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(tlp(2.0, 0.5) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(tlp(-0.3, 0.6) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(tlp(0.0, 0.1) == 0.0);
    CHECK(tlp(-5.0, 0.1) == 1.0);
}

TEST_CASE("project_l0 keeps top-k and resolves ties by lowest index") {
    DesignProblem pb = gaussian_problem(80, 3, Vector::Zero(3), 5);
    TlpConfig cfg = single_block_config(3, 0.5, 2, 0.1);

    Vector cand(3);
    cand << 1.0, 1.0, 1.0;  // three-way tie, budget 2 -> keep {0, 1}
    IndexSet kept;
    project_l0(pb, cand, cfg, &kept);
    REQUIRE(kept.size() == 2);
    CHECK(kept[0] == 0);
    CHECK(kept[1] == 1);

    cand << 0.1, -3.0, 2.0;  // clear magnitudes -> keep {1, 2}
    project_l0(pb, cand, cfg, &kept);
    REQUIRE(kept.size() == 2);
    CHECK(kept[0] == 1);
    CHECK(kept[1] == 2);
}

TEST_CASE("project_l0 always keeps free coordinates") {
    DesignProblem pb = gaussian_problem(80, 4, Vector::Zero(4), 6);
    TlpConfig cfg = single_block_config(4, 0.5, 1, 0.1, IndexSet{0});
    Vector cand(4);
    cand << 0.0, 0.5, 2.0, 1.0;
    IndexSet kept;
    Vector out = project_l0(pb, cand, cfg, &kept);
    REQUIRE(kept.size() == 1);
    CHECK(kept[0] == 2);
    // Free coordinate 0 is refit even though its candidate value was zero.
    CHECK(out.size() == 4);
    CHECK(out[1] == 0.0);
    CHECK(out[3] == 0.0);
}

TEST_CASE("projection refit is an unpenalized MLE on the retained support") {
    Vector beta(5);
    beta << 2.0, 0.0, -1.5, 0.0, 0.0;
    DesignProblem pb = gaussian_problem(200, 5, beta, 9);
    TlpConfig cfg = single_block_config(5, 0.5, 2, 0.1);
    ConstrainedFit fit = solve_constrained(pb, cfg);
    FitResult refit = fit_subset(pb, fit.support);
    CHECK((fit.fit.coef - refit.coef).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("dc iterations never increase the TLP objective") {
    for (std::uint32_t seed = 1; seed <= 10; ++seed) {
        Vector beta = Vector::Zero(6);
        beta[0] = 1.2;
        beta[3] = -0.8;
        DesignProblem pb = gaussian_problem(150, 6, beta, seed);
        TlpConfig cfg = single_block_config(6, 0.3, 2, 0.5);
        auto [coef, trace] = dc_fit(pb, cfg, Vector::Zero(6));
        REQUIRE(!trace.iterations.empty());
        for (std::size_t t = 1; t < trace.iterations.size(); ++t) {
            CHECK(trace.iterations[t].tlp_objective <=
                  trace.iterations[t - 1].tlp_objective + 1e-8);
        }
        // Returned iterate is the best-nll one among those visited.
        double best = std::numeric_limits<double>::infinity();
        for (const auto& rec : trace.iterations) best = std::min(best, rec.nll_value);
        CHECK(nll(pb, coef) <= best + 1e-9);
    }
}

TEST_CASE("solve_constrained matches exhaustive best subset on separated designs") {
    int nll_hits = 0, support_hits = 0;
    const int trials = 20;
    for (std::uint32_t seed = 1; seed <= trials; ++seed) {
        Vector beta = Vector::Zero(6);
        beta[1] = 2.5;
        beta[4] = -2.0;
        DesignProblem pb = gaussian_problem(300, 6, beta, seed);
        TlpConfig cfg = single_block_config(6, 0.3, 2, 0.5);
        ConstrainedFit fit = solve_constrained(pb, cfg);
        double best = exhaustive_best_nll(pb, 2);
        if (fit.fit.nll <= best + 1e-6) ++nll_hits;
        if (fit.penalized_support == IndexSet{1, 4}) ++support_hits;
    }
    CHECK(nll_hits >= trials - 1);
    CHECK(support_hits >= trials - 1);
}

TEST_CASE("two blocks receive independent budgets") {
    Vector beta(6);
    beta << 2.0, 1.5, 0.0, -2.0, 0.0, 0.0;
    DesignProblem pb = gaussian_problem(400, 6, beta, 31);
    TlpConfig cfg;
    cfg.tau = 0.3;
    cfg.gamma = 0.5;
    cfg.blocks.push_back({IndexSet{0, 1, 2}, 2});
    cfg.blocks.push_back({IndexSet{3, 4, 5}, 1});
    ConstrainedFit fit = solve_constrained(pb, cfg);
    int first = 0, second = 0;
    for (int l : fit.penalized_support) (l < 3 ? first : second)++;
    CHECK(first <= 2);
    CHECK(second <= 1);
    // The strong signals fill the budgets.
    CHECK(std::find(fit.penalized_support.begin(), fit.penalized_support.end(), 0) !=
          fit.penalized_support.end());
    CHECK(std::find(fit.penalized_support.begin(), fit.penalized_support.end(), 3) !=
          fit.penalized_support.end());
}

TEST_CASE("bernoulli constrained fit recovers a separated support") {
    std::mt19937 rng(77);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const int n = 500, d = 6;
    DesignProblem pb;
    pb.family = Family::Bernoulli;
    pb.Z = Matrix(n, d);
    for (int i = 0; i < n; ++i)
        for (int l = 0; l < d; ++l) pb.Z(i, l) = gauss(rng);
    Vector beta = Vector::Zero(d);
    beta[0] = 2.5;
    beta[2] = -2.5;
    pb.y = Vector(n);
    for (int i = 0; i < n; ++i) {
        std::bernoulli_distribution b(inv_link(Family::Bernoulli, pb.Z.row(i).dot(beta)));
        pb.y[i] = b(rng) ? 1.0 : 0.0;
    }
    TlpConfig cfg = single_block_config(d, 0.3, 2, 0.5);
    ConstrainedFit fit = solve_constrained(pb, cfg);
    CHECK(fit.penalized_support == IndexSet{0, 2});
    CHECK(fit.fit.coef[0] > 1.0);
    CHECK(fit.fit.coef[2] < -1.0);
}
