#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "gampi/fidelity.hpp"
#include "gampi/peeling.hpp"
#include "gampi/simgen.hpp"

using namespace gampi;

namespace {

bool support_equals(const FidelityMatrix& V, int col, const IndexSet& expected) {
    return V.supports[col] == expected;
}

}  // namespace

TEST_CASE("single-instrument Gaussian node is recovered exactly") {
    // One primary, three instruments; only X0 matters.
    std::mt19937 rng(13);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const int n = 400;
    Dataset data;
    data.X = Matrix(n, 3);
    for (int i = 0; i < n; ++i)
        for (int l = 0; l < 3; ++l) data.X(i, l) = gauss(rng);
    data.Y = Matrix(n, 1);
    for (int i = 0; i < n; ++i) data.Y(i, 0) = 2.0 * data.X(i, 0) + 0.5 * gauss(rng);
    data.families = {Family::Gaussian};

    FidelityMatrix V = fit_fidelity(data, TuningPolicy{});
    REQUIRE(V.ok());
    CHECK(support_equals(V, 0, IndexSet{0}));
    CHECK(V.V(0, 0) == doctest::Approx(2.0).epsilon(0.05));
    CHECK(V.V(1, 0) == 0.0);
    CHECK(V.V(2, 0) == 0.0);
}

TEST_CASE("hub binary fidelity supports match the ancestral pattern") {
    // Hub graph: X_0 intervenes on the root, which is an ancestor of every
    // node, so column j > 0 must contain instruments {0, j}; column 0 only {0}.
    SimConfig cfg;
    cfg.p = cfg.q = 6;
    cfg.n = 800;
    cfg.graph = GraphKind::Hub;
    cfg.outcome = OutcomeKind::Binary;
    cfg.confounded = false;
    int good_cols = 0, total_cols = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        cfg.seed = seed;
        auto [data, truth] = simulate(cfg);
        FidelityMatrix V = fit_fidelity(data, TuningPolicy{});
        REQUIRE(V.ok());
        for (int j = 0; j < 6; ++j) {
            ++total_cols;
            IndexSet expected = j == 0 ? IndexSet{0} : IndexSet{0, j};
            if (support_equals(V, j, expected)) ++good_cols;
        }
    }
    // Allow a small number of misses across seeds.
    CHECK(good_cols >= total_cols - 3);
}

TEST_CASE("chain binary fidelity reflects within-segment ancestry") {
    SimConfig cfg;
    cfg.p = cfg.q = 8;
    cfg.n = 1000;
    cfg.graph = GraphKind::Chain;
    cfg.outcome = OutcomeKind::Binary;
    cfg.confounded = false;
    cfg.seed = 3;
    auto [data, truth] = simulate(cfg);
    FidelityMatrix V = fit_fidelity(data, TuningPolicy{});
    REQUIRE(V.ok());
    // The head of the second segment (node 4) depends only on X4.
    CHECK(V.V(4, 4) != 0.0);
    for (int l = 0; l < 8; ++l)
        if (l != 4) CHECK(V.V(l, 4) == 0.0);
    // No cross-segment support: X0..X3 never explain nodes 4..7.
    for (int l = 0; l < 4; ++l)
        for (int j = 4; j < 8; ++j) CHECK(V.V(l, j) == 0.0);
}

TEST_CASE("confounders do not perturb fidelity supports materially") {
    SimConfig cfg;
    cfg.p = cfg.q = 5;
    cfg.n = 800;
    cfg.graph = GraphKind::Hub;
    cfg.outcome = OutcomeKind::Binary;
    int agree = 0;
    const int trials = 10;
    for (std::uint64_t seed = 1; seed <= trials; ++seed) {
        cfg.seed = seed;
        cfg.confounded = false;
        auto [clean, t1] = simulate(cfg);
        cfg.confounded = true;
        auto [conf, t2] = simulate(cfg);
        FidelityMatrix Vc = fit_fidelity(clean, TuningPolicy{});
        FidelityMatrix Vh = fit_fidelity(conf, TuningPolicy{});
        if (!Vc.ok() || !Vh.ok()) continue;
        bool same = true;
        for (int j = 0; j < 5; ++j)
            if (Vc.supports[j] != Vh.supports[j]) same = false;
        if (same) ++agree;
    }
    // Instruments are independent of the confounders, so supports should agree
    // on a clear majority of seeds.
    CHECK(agree >= trials - 3);
}

TEST_CASE("parallel fidelity equals the serial reference bit for bit") {
    SimConfig cfg;
    cfg.p = cfg.q = 12;
    cfg.n = 400;
    cfg.outcome = OutcomeKind::Binary;
    cfg.seed = 17;
    auto [data, truth] = simulate(cfg);

    FidelityOptions serial;
    serial.threads = 1;
    FidelityOptions parallel;
    parallel.threads = 8;
    FidelityMatrix a = fit_fidelity(data, TuningPolicy{}, serial);
    FidelityMatrix b = fit_fidelity(data, TuningPolicy{}, parallel);
    CHECK(a.V == b.V);  // exact equality, not approximate
    for (int j = 0; j < 12; ++j) {
        CHECK(a.supports[j] == b.supports[j]);
        CHECK(a.chosen[j].k == b.chosen[j].k);
        CHECK(a.chosen[j].tau == b.chosen[j].tau);
    }
}

TEST_CASE("refit at the chosen candidate reproduces the column") {
    SimConfig cfg;
    cfg.p = cfg.q = 6;
    cfg.n = 500;
    cfg.outcome = OutcomeKind::Binary;
    cfg.seed = 23;
    auto [data, truth] = simulate(cfg);
    FidelityMatrix V = fit_fidelity(data, TuningPolicy{});
    REQUIRE(V.ok());
    for (int j : {0, 3}) {
        Vector col = refit_fidelity_column(data, j, V.chosen[j]);
        CHECK((col - V.V.col(j)).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("default grids have the documented shape") {
    auto taus = default_tau_grid();
    REQUIRE(taus.size() == 8);
    CHECK(taus.front() == doctest::Approx(0.01));
    CHECK(taus.back() == doctest::Approx(1.0));
    CHECK(std::is_sorted(taus.begin(), taus.end()));
    // Geometric: constant ratio between neighbors.
    double ratio = taus[1] / taus[0];
    for (std::size_t i = 2; i < taus.size(); ++i)
        CHECK(taus[i] / taus[i - 1] == doctest::Approx(ratio).epsilon(1e-9));
    CHECK(default_gamma_grid().size() == 4);
}

TEST_CASE("fidelity output feeds peeling on a clean hub") {
    SimConfig cfg;
    cfg.p = cfg.q = 6;
    cfg.n = 800;
    cfg.graph = GraphKind::Hub;
    cfg.outcome = OutcomeKind::Binary;
    cfg.confounded = false;
    cfg.seed = 29;
    auto [data, truth] = simulate(cfg);
    FidelityMatrix V = fit_fidelity(data, TuningPolicy{});
    REQUIRE(V.ok());
    SuperGraph sg = peel(V);
    // The recovered ancestral relation must contain the true edges.
    for (auto e : truth.edges0) CHECK(sg.ancestral_pairs.count(e) == 1);
}
