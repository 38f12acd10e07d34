#include "gampi/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <json.hpp>

#include "gampi/errors.hpp"

namespace gampi {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Per-column stream seed: a pure function of (master, purpose, column), so
/// thread count can never change the generated data.
std::mt19937_64 stream(std::uint64_t master, std::uint64_t purpose, std::uint64_t idx) {
    return std::mt19937_64(splitmix64(splitmix64(master ^ (purpose << 56)) + idx));
}

constexpr std::uint64_t kStreamGraph = 1;
constexpr std::uint64_t kStreamX = 2;
constexpr std::uint64_t kStreamConfounder = 3;
constexpr std::uint64_t kStreamOutcome = 4;
constexpr std::uint64_t kStreamNoise = 5;

std::vector<int> topological_order(const GroundTruth& truth) {
    const int p = static_cast<int>(truth.U0.rows());
    std::vector<int> depth(p, 0), order(p);
    std::iota(order.begin(), order.end(), 0);
    // edges0 always points from lower depth to higher; iterate to fixpoint.
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& [k, j] : truth.edges0)
            if (depth[j] < depth[k] + 1) {
                depth[j] = depth[k] + 1;
                changed = true;
            }
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return depth[a] < depth[b]; });
    return order;
}

int poisson_quantile(double u, double rate) {
    double pmf = std::exp(-rate);
    double cdf = pmf;
    int m = 0;
    while (cdf < u && m < 100000) {
        ++m;
        pmf *= rate / m;
        cdf += pmf;
    }
    return m;
}

/// Midranks divided by n+1; ties share their average rank.
Vector uniform_ranks(const Vector& v) {
    const int n = static_cast<int>(v.size());
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return v[a] < v[b]; });
    Vector u(n);
    int i = 0;
    while (i < n) {
        int j = i;
        while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double midrank = (i + j) / 2.0 + 1.0;
        for (int t = i; t <= j; ++t) u[idx[t]] = midrank / (n + 1);
        i = j + 1;
    }
    return u;
}

}  // namespace

void validate(const SimConfig& cfg) {
    if (cfg.p < 2) throw std::invalid_argument("p must be >= 2");
    if (cfg.n < 1) throw std::invalid_argument("n must be >= 1");
    if (cfg.q < cfg.p)
        throw std::invalid_argument(
            "q >= p is required: every primary variable needs its own instrument "
            "(diagonal intervention pattern)");
    if (cfg.confounded &&
        (cfg.confounder_corr >= 1.0 || cfg.confounder_corr <= -1.0 / (cfg.p - 1)))
        throw InvalidCovariance("confounder_corr must lie in (-1/(p-1), 1)");
    if (cfg.poisson_rate <= 0) throw std::invalid_argument("poisson_rate must be > 0");
    if (cfg.chain_segment < 2)
        throw std::invalid_argument("chain_segment must be >= 2");
}

GroundTruth gen_graph(const SimConfig& cfg) {
    GroundTruth truth;
    truth.U0 = Matrix::Zero(cfg.p, cfg.p);
    truth.W0 = Matrix::Zero(cfg.q, cfg.p);
    for (int j = 0; j < cfg.p; ++j) truth.W0(j, j) = 1.0;

    switch (cfg.graph) {
        case GraphKind::Hub:
            for (int j = 1; j < cfg.p; ++j) truth.U0(0, j) = 1.0;
            break;
        case GraphKind::Chain:
            for (int start = 0; start < cfg.p; start += cfg.chain_segment)
                for (int i = start; i + 1 < std::min(cfg.p, start + cfg.chain_segment);
                     ++i)
                    truth.U0(i, i + 1) = 1.0;
            break;
        case GraphKind::Random: {
            const double expected =
                cfg.expected_edges > 0 ? cfg.expected_edges : 0.73 * cfg.p;
            const double prob =
                std::min(1.0, 2.0 * expected / (cfg.p * (cfg.p - 1.0)));
            auto rng = stream(cfg.seed, kStreamGraph, 0);
            std::vector<int> perm(cfg.p);
            std::iota(perm.begin(), perm.end(), 0);
            std::shuffle(perm.begin(), perm.end(), rng);
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            for (int a = 0; a < cfg.p; ++a)
                for (int b = a + 1; b < cfg.p; ++b)
                    if (unif(rng) < prob) truth.U0(perm[a], perm[b]) = 1.0;
            break;
        }
    }

    for (int k = 0; k < cfg.p; ++k)
        for (int j = 0; j < cfg.p; ++j)
            if (truth.U0(k, j) != 0.0) truth.edges0.insert({k, j});
    truth.ancestral0 = transitive_closure(truth.edges0, cfg.p);
    return truth;
}

std::pair<Matrix, Matrix> gen_exogenous(const SimConfig& cfg) {
    validate(cfg);
    Matrix X(cfg.n, cfg.q);
    for (int l = 0; l < cfg.q; ++l) {
        auto rng = stream(cfg.seed, kStreamX, l);
        std::normal_distribution<double> normal(0.0, 1.0);
        for (int i = 0; i < cfg.n; ++i) X(i, l) = normal(rng);
    }

    Matrix h = Matrix::Zero(cfg.n, cfg.p);
    if (cfg.confounded) {
        Matrix sigma = Matrix::Constant(cfg.p, cfg.p, cfg.confounder_corr);
        sigma.diagonal().setOnes();
        Eigen::LLT<Matrix> llt(sigma);
        if (llt.info() != Eigen::Success)
            throw InvalidCovariance("equicorrelation matrix is not positive definite");
        Matrix G(cfg.n, cfg.p);
        for (int j = 0; j < cfg.p; ++j) {
            auto rng = stream(cfg.seed, kStreamConfounder, j);
            std::normal_distribution<double> normal(0.0, 1.0);
            for (int i = 0; i < cfg.n; ++i) G(i, j) = normal(rng);
        }
        h = cfg.confounder_sd * (G * Matrix(llt.matrixL()).transpose());
    }
    return {X, h};
}

Matrix sample_binary(const SimConfig& cfg, const GroundTruth& truth, const Matrix& X,
                     const Matrix& h) {
    Matrix Y(cfg.n, cfg.p);
    for (int j : topological_order(truth)) {
        const bool root = std::none_of(truth.edges0.begin(), truth.edges0.end(),
                                       [&](const Pair& e) { return e.second == j; });
        auto rng = stream(cfg.seed, kStreamOutcome, j);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (int i = 0; i < cfg.n; ++i) {
            double eta = (root ? cfg.alpha0 : cfg.alpha1) * X(i, j) + h(i, j);
            for (const auto& [k, target] : truth.edges0)
                if (target == j) eta += cfg.beta1 * truth.U0(k, j) * Y(i, k);
            const double prob = 1.0 / (1.0 + std::exp(-eta));
            Y(i, j) = unif(rng) < prob ? 1.0 : 0.0;
        }
    }
    return Y;
}

Matrix sample_count_copula(const SimConfig& cfg, const GroundTruth& truth,
                           const Matrix& X, const Matrix& h) {
    Matrix Y(cfg.n, cfg.p);
    for (int j : topological_order(truth)) {
        const bool root = std::none_of(truth.edges0.begin(), truth.edges0.end(),
                                       [&](const Pair& e) { return e.second == j; });
        auto rng = stream(cfg.seed, kStreamNoise, j);
        std::normal_distribution<double> noise(0.0, cfg.count_noise_sd);
        Vector latent(cfg.n);
        for (int i = 0; i < cfg.n; ++i) {
            double eta = (root ? cfg.alpha0 : cfg.alpha1) * X(i, j) + h(i, j);
            // Parents enter as the already-transformed counts.
            for (const auto& [k, target] : truth.edges0)
                if (target == j) eta += cfg.beta1 * truth.U0(k, j) * Y(i, k);
            latent[i] = eta + noise(rng);
        }
        const Vector u = uniform_ranks(latent);
        for (int i = 0; i < cfg.n; ++i)
            Y(i, j) = poisson_quantile(u[i], cfg.poisson_rate);
    }
    return Y;
}

Matrix sample_gaussian(const SimConfig& cfg, const GroundTruth& truth, const Matrix& X,
                       const Matrix& h) {
    Matrix Y(cfg.n, cfg.p);
    for (int j : topological_order(truth)) {
        const bool root = std::none_of(truth.edges0.begin(), truth.edges0.end(),
                                       [&](const Pair& e) { return e.second == j; });
        auto rng = stream(cfg.seed, kStreamOutcome, j);
        std::normal_distribution<double> noise(0.0, 1.0);
        for (int i = 0; i < cfg.n; ++i) {
            double eta = (root ? cfg.alpha0 : cfg.alpha1) * X(i, j) + h(i, j);
            for (const auto& [k, target] : truth.edges0)
                if (target == j) eta += cfg.beta1 * truth.U0(k, j) * Y(i, k);
            Y(i, j) = eta + noise(rng);
        }
    }
    return Y;
}

std::pair<Dataset, GroundTruth> simulate(const SimConfig& cfg) {
    validate(cfg);
    GroundTruth truth = gen_graph(cfg);
    auto [X, h] = gen_exogenous(cfg);

    Dataset data;
    data.X = X;
    switch (cfg.outcome) {
        case OutcomeKind::Binary:
            data.Y = sample_binary(cfg, truth, X, h);
            data.families.assign(cfg.p, Family::Bernoulli);
            break;
        case OutcomeKind::Count:
            data.Y = sample_count_copula(cfg, truth, X, h);
            data.families.assign(cfg.p, Family::Poisson);
            break;
        case OutcomeKind::Gaussian:
            data.Y = sample_gaussian(cfg, truth, X, h);
            data.families.assign(cfg.p, Family::Gaussian);
            break;
    }
    return {std::move(data), std::move(truth)};
}

std::uint64_t replicate_seed(std::uint64_t master_seed, int replicate) {
    return splitmix64(master_seed + 0x9E3779B97F4A7C15ULL * (replicate + 1));
}

namespace {

GraphKind parse_graph(const std::string& s) {
    if (s == "hub") return GraphKind::Hub;
    if (s == "chain") return GraphKind::Chain;
    if (s == "random") return GraphKind::Random;
    throw std::invalid_argument("graph must be hub|chain|random, got '" + s + "'");
}

OutcomeKind parse_outcome(const std::string& s) {
    if (s == "binary") return OutcomeKind::Binary;
    if (s == "count") return OutcomeKind::Count;
    if (s == "gaussian") return OutcomeKind::Gaussian;
    throw std::invalid_argument("outcome must be binary|count|gaussian, got '" + s + "'");
}

/// Per-graph coefficient defaults matching the benchmark protocol.
void apply_default_coefficients(SimConfig& cfg) {
    if (cfg.outcome == OutcomeKind::Count) {
        switch (cfg.graph) {
            case GraphKind::Hub: cfg.alpha0 = 5; cfg.beta1 = 0.5; cfg.alpha1 = 2; break;
            case GraphKind::Chain: cfg.alpha0 = 5; cfg.beta1 = 0.5; cfg.alpha1 = 3; break;
            case GraphKind::Random: cfg.alpha0 = 4; cfg.beta1 = 1; cfg.alpha1 = 2; break;
        }
    } else {
        switch (cfg.graph) {
            case GraphKind::Hub: cfg.alpha0 = 5; cfg.beta1 = 2.5; cfg.alpha1 = 2; break;
            case GraphKind::Chain: cfg.alpha0 = 5; cfg.beta1 = 2.5; cfg.alpha1 = 3; break;
            case GraphKind::Random: cfg.alpha0 = 5; cfg.beta1 = 3; cfg.alpha1 = 3; break;
        }
    }
}

}  // namespace

SimConfig sim_config_from_json(const std::string& text) {
    const nlohmann::json in = nlohmann::json::parse(text);
    static const std::set<std::string> known{
        "p",          "q",          "n",           "graph",        "outcome",
        "alpha0",     "beta1",      "alpha1",      "confounded",   "confounder_corr",
        "poisson_rate", "seed",     "chain_segment", "expected_edges",
        "count_noise_sd", "confounder_sd", "replicates"};
    for (const auto& [key, value] : in.items())
        if (!known.count(key))
            throw std::invalid_argument("unknown config field '" + key + "'");

    SimConfig cfg;
    cfg.p = in.value("p", cfg.p);
    cfg.q = in.value("q", cfg.q);
    cfg.n = in.value("n", cfg.n);
    cfg.graph = parse_graph(in.value("graph", std::string("hub")));
    cfg.outcome = parse_outcome(in.value("outcome", std::string("binary")));
    apply_default_coefficients(cfg);
    cfg.alpha0 = in.value("alpha0", cfg.alpha0);
    cfg.beta1 = in.value("beta1", cfg.beta1);
    cfg.alpha1 = in.value("alpha1", cfg.alpha1);
    cfg.confounded = in.value("confounded", cfg.confounded);
    cfg.confounder_corr = in.value("confounder_corr", cfg.confounder_corr);
    cfg.confounder_sd = in.value("confounder_sd", cfg.confounder_sd);
    cfg.poisson_rate = in.value("poisson_rate", cfg.poisson_rate);
    cfg.chain_segment = in.value("chain_segment", cfg.chain_segment);
    cfg.expected_edges = in.value("expected_edges", cfg.expected_edges);
    cfg.count_noise_sd = in.value("count_noise_sd", cfg.count_noise_sd);
    cfg.seed = in.value("seed", cfg.seed);
    validate(cfg);
    return cfg;
}

std::string sim_config_to_json(const SimConfig& cfg) {
    nlohmann::json out;
    out["p"] = cfg.p;
    out["q"] = cfg.q;
    out["n"] = cfg.n;
    out["graph"] = cfg.graph == GraphKind::Hub     ? "hub"
                   : cfg.graph == GraphKind::Chain ? "chain"
                                                   : "random";
    out["outcome"] = cfg.outcome == OutcomeKind::Binary  ? "binary"
                     : cfg.outcome == OutcomeKind::Count ? "count"
                                                         : "gaussian";
    out["alpha0"] = cfg.alpha0;
    out["beta1"] = cfg.beta1;
    out["alpha1"] = cfg.alpha1;
    out["confounded"] = cfg.confounded;
    out["confounder_corr"] = cfg.confounder_corr;
    out["confounder_sd"] = cfg.confounder_sd;
    out["poisson_rate"] = cfg.poisson_rate;
    out["chain_segment"] = cfg.chain_segment;
    out["expected_edges"] = cfg.expected_edges;
    out["count_noise_sd"] = cfg.count_noise_sd;
    out["seed"] = cfg.seed;
    return out.dump(2);
}

std::string truth_to_json(const GroundTruth& truth, int q) {
    nlohmann::json out;
    out["method"] = "truth";
    out["p"] = static_cast<int>(truth.U0.rows());
    out["q"] = q;
    out["edges"] = nlohmann::json::array();
    for (const auto& [k, j] : truth.edges0)
        out["edges"].push_back({k + 1, j + 1, truth.U0(k, j)});
    out["interventions"] = nlohmann::json::array();
    for (int j = 0; j < truth.U0.rows(); ++j)
        for (int l = 0; l < q; ++l)
            if (truth.W0(l, j) != 0.0)
                out["interventions"].push_back({l + 1, j + 1, truth.W0(l, j)});
    out["alpha"] = nlohmann::json::array();
    return out.dump(2);
}

}  // namespace gampi
