#pragma once

#include <string>

#include "gampi/dataset.hpp"
#include "gampi/model_select.hpp"
#include "gampi/peeling.hpp"

namespace gampi {

enum class DeconfMethod { DRI, DPS, NoDeconf };

std::string method_name(DeconfMethod m);

/// Estimated DAG: adjacency U (U(k,j) = effect Y_k -> Y_j), interventions W,
/// confounder loadings alpha, and per-node residual columns.
struct DagEstimate {
    DeconfMethod method = DeconfMethod::DRI;
    Matrix U;          // p x p
    Matrix W;          // q x p
    Matrix alpha;      // p x p (zero for DPS / NoDeconf)
    Matrix residuals;  // n x p
    PairSet edges;     // nonzeros of U
    std::vector<Candidate> chosen;      // per node
    std::vector<std::string> node_errors;  // empty string = node fitted

    int p() const { return static_cast<int>(U.rows()); }
    bool ok() const {
        for (const auto& e : node_errors)
            if (!e.empty()) return false;
        return true;
    }
};

struct DeconfOptions {
    int kprime_max = 5;  // cap on the confounder-block budget grid
    int max_dc_iter = 50;
    int threads = 1;  // nodes at the same depth fit in parallel
};

struct NodeFit {
    Vector w_col;      // length q
    Vector u_col;      // length p
    Vector alpha_col;  // length p
    Vector residual;   // length n
    Candidate chosen;
};

/// Unpenalized GLM fit of a root node on its instruments; residuals are
/// Y - phi(fitted linear predictor).
NodeFit fit_root(const Dataset& data, int node, const IndexSet& instruments);

/// TLP-constrained fit of a child on [X_in, Y_an, resid_an] with separate
/// budgets on the ancestor block (k) and the residual block (kprime); the
/// instrument block is unpenalized.
NodeFit fit_child_dri(const Dataset& data, int node, const IndexSet& ancestors,
                      const IndexSet& instruments, const Matrix& residuals,
                      const TuningPolicy& tuning, const DeconfOptions& opts = {});

DagEstimate run_dri(const Dataset& data, const SuperGraph& sg,
                    const TuningPolicy& tuning, const DeconfOptions& opts = {});
DagEstimate run_dps(const Dataset& data, const SuperGraph& sg,
                    const TuningPolicy& tuning, const DeconfOptions& opts = {});
DagEstimate run_no_deconf(const Dataset& data, const SuperGraph& sg,
                          const TuningPolicy& tuning, const DeconfOptions& opts = {});

/// {"method":..., "p":p, "q":q, "edges":[[k,j,w],...],
/// "interventions":[[l,j,w],...], "alpha":[[k,j,w],...]}; 1-based indices.
std::string dag_to_json(const DagEstimate& dag, int q);
DagEstimate dag_from_json(const std::string& text);

}  // namespace gampi
