#include "gampi/deconfound.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <json.hpp>

#include "gampi/errors.hpp"
#include "gampi/fidelity.hpp"
#include "gampi/nodewise_tuning.hpp"

namespace gampi {

std::string method_name(DeconfMethod m) {
    switch (m) {
        case DeconfMethod::DRI: return "dri";
        case DeconfMethod::DPS: return "dps";
        case DeconfMethod::NoDeconf: return "none";
    }
    return "?";
}

namespace {

Vector glm_residual(const Dataset& data, int node, const Matrix& Z, const Vector& coef) {
    Vector eta = Z * coef;
    Vector r(data.n());
    for (int i = 0; i < data.n(); ++i)
        r[i] = data.Y(i, node) -
               inv_link(data.families[node], clamp_eta(data.families[node], eta[i]));
    return r;
}

std::vector<Candidate> child_grid(const TuningPolicy& tuning, int n, int d, int an_size,
                                  bool with_alpha, int kprime_max) {
    const std::vector<double> taus =
        tuning.tau_grid.empty() ? default_tau_grid() : tuning.tau_grid;
    const std::vector<double> mults =
        tuning.gamma_grid.empty() ? default_gamma_grid() : tuning.gamma_grid;
    const double anchor = std::sqrt((std::log(std::max(d, 2)) + std::log(n)) / n);

    std::vector<int> kprimes{-1};
    if (with_alpha) {
        kprimes.clear();
        for (int kp = 0; kp <= std::min(an_size, kprime_max); ++kp) kprimes.push_back(kp);
    }

    std::vector<Candidate> grid;
    for (double tau : taus)
        for (double mult : mults)
            for (int k = 0; k <= an_size; ++k)
                for (int kp : kprimes) {
                    Candidate cand;
                    cand.tau = tau;
                    cand.gamma = mult * anchor / tau;
                    cand.k = k;
                    cand.kprime = kp;
                    grid.push_back(cand);
                }
    return grid;
}

/// Shared child fit: design [X_in | ancestor block | optional residual block].
NodeFit fit_child(const Dataset& data, int node, const IndexSet& ancestors,
                  const IndexSet& instruments, const Matrix& ancestor_block,
                  const Matrix* residual_block, const TuningPolicy& tuning,
                  const DeconfOptions& opts) {
    const int n = data.n();
    const int n_in = static_cast<int>(instruments.size());
    const int n_an = static_cast<int>(ancestors.size());
    const bool with_alpha = residual_block != nullptr;
    const int d = n_in + n_an + (with_alpha ? n_an : 0);

    Matrix Z(n, d);
    for (int c = 0; c < n_in; ++c) Z.col(c) = data.X.col(instruments[c]);
    for (int c = 0; c < n_an; ++c) Z.col(n_in + c) = ancestor_block.col(c);
    if (with_alpha)
        for (int c = 0; c < n_an; ++c) Z.col(n_in + n_an + c) = residual_block->col(c);

    DesignProblem problem{Z, data.Y.col(node), data.families[node], {}};

    const std::vector<Candidate> grid =
        child_grid(tuning, n, d, n_an, with_alpha, opts.kprime_max);
    auto make_config = [&](const Candidate& cand) {
        TlpConfig cfg;
        cfg.tau = cand.tau;
        cfg.gamma = cand.gamma;
        cfg.max_dc_iter = opts.max_dc_iter;
        PenalizedBlock ancestor_budget;
        for (int c = 0; c < n_an; ++c) ancestor_budget.coords.push_back(n_in + c);
        ancestor_budget.budget = cand.k;
        cfg.blocks.push_back(std::move(ancestor_budget));
        if (with_alpha) {
            PenalizedBlock resid_budget;
            for (int c = 0; c < n_an; ++c) resid_budget.coords.push_back(n_in + n_an + c);
            resid_budget.budget = cand.kprime;
            cfg.blocks.push_back(std::move(resid_budget));
        }
        return cfg;
    };

    const TunedFit tuned = tune_constrained(problem, grid, make_config, tuning, d);

    NodeFit out;
    out.w_col = Vector::Zero(data.q());
    out.u_col = Vector::Zero(data.p());
    out.alpha_col = Vector::Zero(data.p());
    for (int c = 0; c < n_in; ++c) out.w_col[instruments[c]] = tuned.fit.fit.coef[c];
    for (int c = 0; c < n_an; ++c) out.u_col[ancestors[c]] = tuned.fit.fit.coef[n_in + c];
    if (with_alpha)
        for (int c = 0; c < n_an; ++c)
            out.alpha_col[ancestors[c]] = tuned.fit.fit.coef[n_in + n_an + c];
    out.residual = glm_residual(data, node, Z, tuned.fit.fit.coef);
    out.chosen = tuned.chosen;
    return out;
}

DagEstimate run_method(const Dataset& data, const SuperGraph& sg,
                       const TuningPolicy& tuning, const DeconfOptions& opts,
                       DeconfMethod method) {
    const int n = data.n();
    const int p = data.p();
    const int q = data.q();

    DagEstimate dag;
    dag.method = method;
    dag.U = Matrix::Zero(p, p);
    dag.W = Matrix::Zero(q, p);
    dag.alpha = Matrix::Zero(p, p);
    dag.residuals = Matrix::Zero(n, p);
    dag.chosen.resize(p);
    dag.node_errors.assign(p, "");

    // DPS feeds predicted ancestor values into child designs.
    Matrix predicted = Matrix::Zero(n, p);
    std::vector<char> failed(p, 0);  // char: written concurrently per node

    // Group the causal order into depth levels; nodes within a level share no
    // ancestral relation and can be fitted concurrently.
    std::vector<int> depth(p, 0);
    for (int j : sg.order)
        for (int k : sg.ancestors[j]) depth[j] = std::max(depth[j], depth[k] + 1);
    const int max_depth = p ? *std::max_element(depth.begin(), depth.end()) : 0;

    auto fit_node = [&](int j) {
        for (int k : sg.ancestors[j]) {
            if (failed[k]) {
                failed[j] = 1;
                dag.node_errors[j] =
                    "ancestor " + std::to_string(k + 1) + " failed; node aborted";
                return;
            }
        }
        try {
            NodeFit fit;
            if (sg.ancestors[j].empty()) {
                fit = fit_root(data, j, sg.instruments[j]);
            } else {
                Matrix an_block(n, sg.ancestors[j].size());
                const auto& an = sg.ancestors[j];
                for (size_t c = 0; c < an.size(); ++c)
                    if (method == DeconfMethod::DPS)
                        an_block.col(c) = predicted.col(an[c]);
                    else
                        an_block.col(c) = data.Y.col(an[c]);
                if (method == DeconfMethod::DRI) {
                    Matrix resid_block(n, an.size());
                    for (size_t c = 0; c < an.size(); ++c)
                        resid_block.col(c) = dag.residuals.col(an[c]);
                    fit = fit_child(data, j, an, sg.instruments[j], an_block,
                                    &resid_block, tuning, opts);
                } else {
                    fit = fit_child(data, j, an, sg.instruments[j], an_block, nullptr,
                                    tuning, opts);
                }
            }
            dag.W.col(j) = fit.w_col;
            dag.U.col(j) = fit.u_col;
            dag.alpha.col(j) = fit.alpha_col;
            dag.residuals.col(j) = fit.residual;
            dag.chosen[j] = fit.chosen;
            predicted.col(j) = data.Y.col(j) - fit.residual;  // phi(eta)
        } catch (const std::exception& e) {
            failed[j] = 1;
            dag.node_errors[j] = e.what();
        }
    };

    for (int level = 0; level <= max_depth; ++level) {
        std::vector<int> nodes;
        for (int j : sg.order)
            if (depth[j] == level) nodes.push_back(j);
#ifdef _OPENMP
        if (opts.threads > 1) {
#pragma omp parallel for schedule(dynamic) num_threads(opts.threads)
            for (size_t i = 0; i < nodes.size(); ++i) fit_node(nodes[i]);
        } else {
            for (int j : nodes) fit_node(j);
        }
#else
        for (int j : nodes) fit_node(j);
#endif
    }

    for (int j = 0; j < p; ++j)
        for (int k = 0; k < p; ++k)
            if (dag.U(k, j) != 0.0) dag.edges.insert({k, j});
    return dag;
}

}  // namespace

NodeFit fit_root(const Dataset& data, int node, const IndexSet& instruments) {
    const int n = data.n();
    Matrix Z(n, instruments.size());
    for (size_t c = 0; c < instruments.size(); ++c) Z.col(c) = data.X.col(instruments[c]);

    DesignProblem problem{Z, data.Y.col(node), data.families[node], {}};
    IndexSet full(instruments.size());
    for (size_t c = 0; c < instruments.size(); ++c) full[c] = static_cast<int>(c);

    FitResult fit;
    try {
        fit = fit_subset(problem, full);
    } catch (const SingularFit& e) {
        throw SingularFit("root node " + std::to_string(node + 1) + ": " + e.what());
    }

    NodeFit out;
    out.w_col = Vector::Zero(data.q());
    out.u_col = Vector::Zero(data.p());
    out.alpha_col = Vector::Zero(data.p());
    for (size_t c = 0; c < instruments.size(); ++c)
        out.w_col[instruments[c]] = fit.coef[c];
    out.residual = glm_residual(data, node, Z, fit.coef);
    return out;
}

NodeFit fit_child_dri(const Dataset& data, int node, const IndexSet& ancestors,
                      const IndexSet& instruments, const Matrix& residuals,
                      const TuningPolicy& tuning, const DeconfOptions& opts) {
    if (ancestors.empty()) return fit_root(data, node, instruments);
    Matrix an_block(data.n(), ancestors.size());
    Matrix resid_block(data.n(), ancestors.size());
    for (size_t c = 0; c < ancestors.size(); ++c) {
        an_block.col(c) = data.Y.col(ancestors[c]);
        resid_block.col(c) = residuals.col(ancestors[c]);
    }
    return fit_child(data, node, ancestors, instruments, an_block, &resid_block, tuning,
                     opts);
}

DagEstimate run_dri(const Dataset& data, const SuperGraph& sg, const TuningPolicy& tuning,
                    const DeconfOptions& opts) {
    return run_method(data, sg, tuning, opts, DeconfMethod::DRI);
}

DagEstimate run_dps(const Dataset& data, const SuperGraph& sg, const TuningPolicy& tuning,
                    const DeconfOptions& opts) {
    return run_method(data, sg, tuning, opts, DeconfMethod::DPS);
}

DagEstimate run_no_deconf(const Dataset& data, const SuperGraph& sg,
                          const TuningPolicy& tuning, const DeconfOptions& opts) {
    return run_method(data, sg, tuning, opts, DeconfMethod::NoDeconf);
}

std::string dag_to_json(const DagEstimate& dag, int q) {
    nlohmann::json out;
    out["method"] = method_name(dag.method);
    out["p"] = dag.p();
    out["q"] = q;
    out["edges"] = nlohmann::json::array();
    for (const auto& [k, j] : dag.edges)
        out["edges"].push_back({k + 1, j + 1, dag.U(k, j)});
    out["interventions"] = nlohmann::json::array();
    for (int j = 0; j < dag.p(); ++j)
        for (int l = 0; l < q; ++l)
            if (dag.W(l, j) != 0.0)
                out["interventions"].push_back({l + 1, j + 1, dag.W(l, j)});
    out["alpha"] = nlohmann::json::array();
    for (int j = 0; j < dag.p(); ++j)
        for (int k = 0; k < dag.p(); ++k)
            if (dag.alpha(k, j) != 0.0)
                out["alpha"].push_back({k + 1, j + 1, dag.alpha(k, j)});
    return out.dump(2);
}

DagEstimate dag_from_json(const std::string& text) {
    const nlohmann::json in = nlohmann::json::parse(text);
    DagEstimate dag;
    const int p = in.at("p").get<int>();
    const int q = in.at("q").get<int>();
    const std::string method = in.value("method", "dri");
    if (method == "dps")
        dag.method = DeconfMethod::DPS;
    else if (method == "none")
        dag.method = DeconfMethod::NoDeconf;
    else
        dag.method = DeconfMethod::DRI;
    dag.U = Matrix::Zero(p, p);
    dag.W = Matrix::Zero(q, p);
    dag.alpha = Matrix::Zero(p, p);
    dag.node_errors.assign(p, "");
    for (const auto& e : in.at("edges")) {
        const int k = e.at(0).get<int>() - 1;
        const int j = e.at(1).get<int>() - 1;
        dag.U(k, j) = e.at(2).get<double>();
        dag.edges.insert({k, j});
    }
    for (const auto& e : in.value("interventions", nlohmann::json::array()))
        dag.W(e.at(0).get<int>() - 1, e.at(1).get<int>() - 1) = e.at(2).get<double>();
    for (const auto& e : in.value("alpha", nlohmann::json::array()))
        dag.alpha(e.at(0).get<int>() - 1, e.at(1).get<int>() - 1) = e.at(2).get<double>();
    return dag;
}

}  // namespace gampi
