#pragma once

#include <set>
#include <utility>
#include <vector>

#include "gampi/fidelity.hpp"

namespace gampi {

using Pair = std::pair<int, int>;  // (k, j): Y_k is an ancestor of Y_j, 0-based
using PairSet = std::set<Pair>;

/// Ancestral relation set, causal order, and per-node (ancestor, instrument)
/// index sets recovered by bottom-up peeling.
struct SuperGraph {
    int p = 0;
    PairSet ancestral_pairs;  // transitively closed, irreflexive
    std::vector<int> order;   // ancestors first
    std::vector<IndexSet> ancestors;    // per node
    std::vector<IndexSet> instruments;  // per node
    std::vector<std::vector<Pair>> leaf_iv_pairs;  // (iv, node) per peel iteration
};

/// Smallest transitively closed superset. Throws CyclicAncestry on a cycle.
PairSet transitive_closure(const PairSet& pairs, int p);

/// Bottom-up peeling: repeatedly removes the rows with smallest positive
/// L0-norm together with the leaf columns they point at, recording leaf-IV
/// pairs and ancestral relations along the way. Throws PeelStalled when no
/// remaining row has a nonzero entry.
SuperGraph peel(const FidelityMatrix& V);
SuperGraph peel(const Matrix& V);

/// {"order":[...], "ancestral":[[k,j],...], "instruments":{"node":[ivs]}},
/// 1-based indices.
std::string supergraph_to_json(const SuperGraph& sg);
SuperGraph supergraph_from_json(const std::string& text);

}  // namespace gampi
