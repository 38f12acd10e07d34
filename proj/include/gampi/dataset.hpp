#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "gampi/family.hpp"

namespace gampi {

/// Observation matrices: n x p primary variables Y with per-column families,
/// and n x q instruments X.
struct Dataset {
    Eigen::MatrixXd Y;
    Eigen::MatrixXd X;
    std::vector<Family> families;  // one per Y column

    int n() const { return static_cast<int>(Y.rows()); }
    int p() const { return static_cast<int>(Y.cols()); }
    int q() const { return static_cast<int>(X.cols()); }
};

/// Header row y1..yp,x1..xq; one observation per line, 17 significant digits.
void write_dataset_csv(const Dataset& data, const std::string& path);

/// Families are not stored in the CSV; the caller supplies them.
Dataset read_dataset_csv(const std::string& path, const std::vector<Family>& families);

/// Parses a family spec: a single name applied to all p columns, or a
/// comma-separated list of p names ("bernoulli", "gaussian", "poisson").
std::vector<Family> parse_families(const std::string& spec, int p);

}  // namespace gampi
