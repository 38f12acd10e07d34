#include "gampi/peeling.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <json.hpp>

#include "gampi/errors.hpp"

namespace gampi {

PairSet transitive_closure(const PairSet& pairs, int p) {
    std::vector<std::vector<bool>> reach(p, std::vector<bool>(p, false));
    for (const auto& [k, j] : pairs) reach[k][j] = true;
    for (int m = 0; m < p; ++m)
        for (int i = 0; i < p; ++i) {
            if (!reach[i][m]) continue;
            for (int j = 0; j < p; ++j)
                if (reach[m][j]) reach[i][j] = true;
        }
    for (int i = 0; i < p; ++i)
        if (reach[i][i])
            throw CyclicAncestry("ancestral relation contains a cycle through node " +
                                 std::to_string(i + 1));
    PairSet closed;
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j)
            if (reach[i][j]) closed.insert({i, j});
    return closed;
}

SuperGraph peel(const FidelityMatrix& V) { return peel(V.V); }

SuperGraph peel(const Matrix& V) {
    const int q = static_cast<int>(V.rows());
    const int p = static_cast<int>(V.cols());

    SuperGraph sg;
    sg.p = p;
    sg.ancestors.resize(p);
    sg.instruments.resize(p);

    std::vector<bool> row_active(q, true), col_active(p, true);
    std::vector<int> removed_at(p, -1);
    PairSet direct;

    for (int h = 0; true; ++h) {
        int remaining = 0;
        for (int j = 0; j < p; ++j) remaining += col_active[j];
        if (remaining == 0) break;

        // Rows with the smallest positive L0-norm over the active submatrix.
        int min_norm = p + 1;
        for (int l = 0; l < q; ++l) {
            if (!row_active[l]) continue;
            int norm = 0;
            for (int j = 0; j < p; ++j)
                if (col_active[j] && V(l, j) != 0.0) ++norm;
            if (norm >= 1 && norm < min_norm) min_norm = norm;
        }
        if (min_norm > p) {
            std::vector<int> rows, cols;
            for (int l = 0; l < q; ++l)
                if (row_active[l]) rows.push_back(l);
            for (int j = 0; j < p; ++j)
                if (col_active[j]) cols.push_back(j);
            throw PeelStalled("peeling stalled: every remaining instrument row is zero",
                              rows, cols);
        }

        std::vector<Pair> pairs_this_iter;
        std::map<int, std::vector<int>> node_to_ivs;
        for (int l = 0; l < q; ++l) {
            if (!row_active[l]) continue;
            int norm = 0;
            for (int j = 0; j < p; ++j)
                if (col_active[j] && V(l, j) != 0.0) ++norm;
            if (norm != min_norm) continue;

            // Largest-magnitude column; ties break to the lowest index.
            int leaf = -1;
            double best = -1.0;
            for (int j = 0; j < p; ++j) {
                if (!col_active[j]) continue;
                const double mag = std::abs(V(l, j));
                if (mag > best) {
                    best = mag;
                    leaf = j;
                }
            }
            pairs_this_iter.emplace_back(l, leaf);
            node_to_ivs[leaf].push_back(l);
        }

        for (const auto& [l, leaf] : pairs_this_iter) {
            // Previously removed columns hit by this IV are offspring.
            for (int j = 0; j < p; ++j)
                if (removed_at[j] >= 0 && removed_at[j] < h && V(l, j) != 0.0 && j != leaf)
                    direct.insert({leaf, j});
            row_active[l] = false;
        }
        for (const auto& [leaf, ivs] : node_to_ivs) {
            sg.instruments[leaf] = ivs;
            col_active[leaf] = false;
            removed_at[leaf] = h;
        }
        sg.leaf_iv_pairs.push_back(std::move(pairs_this_iter));
    }

    sg.ancestral_pairs = transitive_closure(direct, p);
    for (const auto& [k, j] : sg.ancestral_pairs) sg.ancestors[j].push_back(k);
    for (auto& an : sg.ancestors) std::sort(an.begin(), an.end());

    // Causal order: stable topological sort by (ancestor-chain depth, index).
    std::vector<int> depth(p, 0);
    std::vector<int> nodes(p);
    for (int j = 0; j < p; ++j) nodes[j] = j;
    std::sort(nodes.begin(), nodes.end(), [&](int a, int b) {
        return sg.ancestors[a].size() < sg.ancestors[b].size();
    });
    for (int j : nodes)
        for (int k : sg.ancestors[j]) depth[j] = std::max(depth[j], depth[k] + 1);
    sg.order.resize(p);
    for (int j = 0; j < p; ++j) sg.order[j] = j;
    std::stable_sort(sg.order.begin(), sg.order.end(), [&](int a, int b) {
        if (depth[a] != depth[b]) return depth[a] < depth[b];
        return a < b;
    });

    return sg;
}

std::string supergraph_to_json(const SuperGraph& sg) {
    nlohmann::json out;
    out["order"] = nlohmann::json::array();
    for (int j : sg.order) out["order"].push_back(j + 1);
    out["ancestral"] = nlohmann::json::array();
    for (const auto& [k, j] : sg.ancestral_pairs)
        out["ancestral"].push_back({k + 1, j + 1});
    out["instruments"] = nlohmann::json::object();
    for (int j = 0; j < sg.p; ++j) {
        nlohmann::json ivs = nlohmann::json::array();
        for (int l : sg.instruments[j]) ivs.push_back(l + 1);
        out["instruments"][std::to_string(j + 1)] = ivs;
    }
    return out.dump(2);
}

SuperGraph supergraph_from_json(const std::string& text) {
    const nlohmann::json in = nlohmann::json::parse(text);
    SuperGraph sg;
    sg.p = static_cast<int>(in.at("order").size());
    for (const auto& j : in.at("order")) sg.order.push_back(j.get<int>() - 1);
    sg.ancestors.resize(sg.p);
    sg.instruments.resize(sg.p);
    for (const auto& pair : in.at("ancestral")) {
        const int k = pair.at(0).get<int>() - 1;
        const int j = pair.at(1).get<int>() - 1;
        sg.ancestral_pairs.insert({k, j});
        sg.ancestors[j].push_back(k);
    }
    for (auto& an : sg.ancestors) std::sort(an.begin(), an.end());
    for (const auto& [key, ivs] : in.at("instruments").items()) {
        const int j = std::stoi(key) - 1;
        for (const auto& l : ivs) sg.instruments[j].push_back(l.get<int>() - 1);
    }
    return sg;
}

}  // namespace gampi
