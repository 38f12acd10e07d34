#pragma once

#include <cstdint>
#include <string>

#include "gampi/dataset.hpp"
#include "gampi/peeling.hpp"

namespace gampi {

enum class GraphKind { Hub, Chain, Random };
enum class OutcomeKind { Binary, Count, Gaussian };

struct SimConfig {
    int p = 20;
    int q = 20;
    int n = 500;
    GraphKind graph = GraphKind::Hub;
    OutcomeKind outcome = OutcomeKind::Binary;
    int chain_segment = 4;        // chain graphs split into segments this long
    double expected_edges = 0.0;  // random graphs; 0 resolves to 0.73 * p
    double alpha0 = 5.0;          // root IV strength
    double beta1 = 2.5;           // parent effect
    double alpha1 = 2.0;          // child IV strength
    bool confounded = true;
    double confounder_corr = 0.95;
    double confounder_sd = 1.0;  // marginal sd of each h_j
    double poisson_rate = 5.0;    // copula target marginal mean
    double count_noise_sd = 1.0;  // latent-equation error sd for count outcomes
    std::uint64_t seed = 1;
};

struct GroundTruth {
    Matrix U0;  // p x p
    Matrix W0;  // q x p, diagonal pattern
    PairSet edges0;
    PairSet ancestral0;  // transitive closure of edges0
};

/// Throws std::invalid_argument when the config is inconsistent (q < p,
/// out-of-range correlation, non-positive sizes).
void validate(const SimConfig& cfg);

GroundTruth gen_graph(const SimConfig& cfg);

/// X iid N(0,1); h rows iid N(0, equicorrelation(confounder_corr)) when
/// confounded, zero otherwise. Throws InvalidCovariance outside the PSD range.
std::pair<Matrix, Matrix> gen_exogenous(const SimConfig& cfg);

Matrix sample_binary(const SimConfig& cfg, const GroundTruth& truth, const Matrix& X,
                     const Matrix& h);
Matrix sample_count_copula(const SimConfig& cfg, const GroundTruth& truth,
                           const Matrix& X, const Matrix& h);
Matrix sample_gaussian(const SimConfig& cfg, const GroundTruth& truth, const Matrix& X,
                       const Matrix& h);

std::pair<Dataset, GroundTruth> simulate(const SimConfig& cfg);

/// Derived seed for replicate r of a benchmark run (splitmix64 mixing).
std::uint64_t replicate_seed(std::uint64_t master_seed, int replicate);

SimConfig sim_config_from_json(const std::string& text);
std::string sim_config_to_json(const SimConfig& cfg);

/// Ground truth in the estimate JSON schema with method "truth".
std::string truth_to_json(const GroundTruth& truth, int q);

}  // namespace gampi
