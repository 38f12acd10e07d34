#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "gampi/errors.hpp"
#include "gampi/peeling.hpp"

using namespace gampi;

namespace {

// The worked 5-node example: Y1 -> Y2 -> Y3 -> Y4, Y1 -> Y4, Y5 isolated.
Matrix worked_example() {
    Matrix V(5, 5);
    V << 2.06, 0.35, 0.00, -0.35, 0.00,  //
        0.00, 1.84, 0.46, 0.00, 0.00,    //
        0.00, 0.00, 1.77, 0.39, 0.00,    //
        0.00, 0.00, 0.00, 1.76, 0.00,    //
        0.00, 0.00, 0.00, 0.00, 1.96;
    return V;
}

PairSet reachability(const PairSet& edges, int p) {
    std::vector<std::vector<bool>> r(p, std::vector<bool>(p, false));
    for (auto [a, b] : edges) r[a][b] = true;
    for (int k = 0; k < p; ++k)
        for (int a = 0; a < p; ++a)
            for (int b = 0; b < p; ++b)
                if (r[a][k] && r[k][b]) r[a][b] = true;
    PairSet out;
    for (int a = 0; a < p; ++a)
        for (int b = 0; b < p; ++b)
            if (r[a][b]) out.insert({a, b});
    return out;
}

bool order_consistent(const SuperGraph& sg) {
    std::vector<int> pos(sg.p, -1);
    for (int i = 0; i < sg.p; ++i) pos[sg.order[i]] = i;
    for (auto [a, b] : sg.ancestral_pairs)
        if (pos[a] >= pos[b]) return false;
    return true;
}

}  // namespace

TEST_CASE("worked example peels exactly as published") {
    SuperGraph sg = peel(worked_example());
    // Leaf-IV pairs per iteration, 0-based: {(3,3),(4,4)}, {(2,2)}, {(1,1)},
    // {(0,0)}.
    REQUIRE(sg.leaf_iv_pairs.size() == 4);
    CHECK(sg.leaf_iv_pairs[0] == std::vector<Pair>{{3, 3}, {4, 4}});
    CHECK(sg.leaf_iv_pairs[1] == std::vector<Pair>{{2, 2}});
    CHECK(sg.leaf_iv_pairs[2] == std::vector<Pair>{{1, 1}});
    CHECK(sg.leaf_iv_pairs[3] == std::vector<Pair>{{0, 0}});

    PairSet expected{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
    CHECK(sg.ancestral_pairs == expected);

    // Per-node closures: an(3) = {0,1,2}; in(j) includes the node's own IV.
    CHECK(sg.ancestors[3] == IndexSet{0, 1, 2});
    CHECK(sg.ancestors[4].empty());
    for (int j = 0; j < 5; ++j)
        CHECK(std::find(sg.instruments[j].begin(), sg.instruments[j].end(), j) !=
              sg.instruments[j].end());
    CHECK(order_consistent(sg));
}

TEST_CASE("transitive_closure closes chains and rejects cycles") {
    PairSet chain{{0, 1}, {1, 2}};
    PairSet closed = transitive_closure(chain, 3);
    CHECK(closed == PairSet{{0, 1}, {0, 2}, {1, 2}});
    CHECK_THROWS_AS(transitive_closure(PairSet{{0, 1}, {1, 0}}, 2), CyclicAncestry);
    CHECK_THROWS_AS(transitive_closure(PairSet{{0, 1}, {1, 2}, {2, 0}}, 3),
                    CyclicAncestry);
    CHECK(transitive_closure({}, 4).empty());
}

TEST_CASE("peeling recovers every DAG on up to four nodes") {
    // Enumerate all upper-triangular edge patterns on 4 nodes (64 DAGs) and a
    // few relabelings of each; build the exact ancestral-pattern V matrix with
    // the diagonal dominant and check the recovered relation equals
    // reachability.
    std::mt19937 rng(5);
    for (unsigned mask = 0; mask < 64; ++mask) {
        PairSet edges;
        int bit = 0;
        for (int a = 0; a < 4; ++a)
            for (int b = a + 1; b < 4; ++b, ++bit)
                if (mask & (1u << bit)) edges.insert({a, b});
        for (int rep = 0; rep < 3; ++rep) {
            std::vector<int> relabel{0, 1, 2, 3};
            std::shuffle(relabel.begin(), relabel.end(), rng);
            PairSet perm_edges;
            for (auto [a, b] : edges) perm_edges.insert({relabel[a], relabel[b]});
            PairSet anc = reachability(perm_edges, 4);

            Matrix V = Matrix::Zero(4, 4);
            std::uniform_real_distribution<double> mag(0.2, 0.8);
            for (int j = 0; j < 4; ++j) V(j, j) = 1.5 + mag(rng);
            for (auto [a, b] : anc) V(a, b) = mag(rng);

            SuperGraph sg = peel(V);
            CHECK(sg.ancestral_pairs == anc);
            CHECK(order_consistent(sg));
        }
    }
}

TEST_CASE("ancestral relation is transitively closed and acyclic") {
    SuperGraph sg = peel(worked_example());
    CHECK(sg.ancestral_pairs == transitive_closure(sg.ancestral_pairs, sg.p));
    for (auto [a, b] : sg.ancestral_pairs) CHECK(sg.ancestral_pairs.count({b, a}) == 0);
}

TEST_CASE("peel stalls on a matrix with no usable rows") {
    Matrix V = Matrix::Zero(3, 3);
    try {
        peel(V);
        FAIL("expected PeelStalled");
    } catch (const PeelStalled& e) {
        CHECK(e.stuck_cols.size() == 3);
    }

    // A dense matrix does not stall: rows with the smallest positive L0-norm
    // are taken even when that norm exceeds one.
    Matrix W(2, 2);
    W << 1.0, 0.5, 0.8, 1.2;
    SuperGraph sg = peel(W);
    CHECK(sg.p == 2);
}

TEST_CASE("supergraph json round-trip") {
    SuperGraph sg = peel(worked_example());
    std::string js = supergraph_to_json(sg);
    SuperGraph back = supergraph_from_json(js);
    CHECK(back.p == sg.p);
    CHECK(back.ancestral_pairs == sg.ancestral_pairs);
    CHECK(back.order == sg.order);
    CHECK(back.ancestors == sg.ancestors);
    CHECK(back.instruments == sg.instruments);
}
