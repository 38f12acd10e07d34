#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace gampi {

struct NumericalOverflow : std::runtime_error {
    explicit NumericalOverflow(const std::string& what) : std::runtime_error(what) {}
};

struct SingularFit : std::runtime_error {
    explicit SingularFit(const std::string& what) : std::runtime_error(what) {}
};

struct PeelStalled : std::runtime_error {
    PeelStalled(const std::string& what, std::vector<int> rows, std::vector<int> cols)
        : std::runtime_error(what), stuck_rows(std::move(rows)), stuck_cols(std::move(cols)) {}
    std::vector<int> stuck_rows;  // remaining instrument rows (0-based)
    std::vector<int> stuck_cols;  // remaining node columns (0-based)
};

struct CyclicAncestry : std::runtime_error {
    explicit CyclicAncestry(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidCovariance : std::runtime_error {
    explicit InvalidCovariance(const std::string& what) : std::runtime_error(what) {}
};

struct SelectionFailed : std::runtime_error {
    explicit SelectionFailed(const std::string& what) : std::runtime_error(what) {}
};

struct AncestorFailed : std::runtime_error {
    AncestorFailed(const std::string& what, int node_id)
        : std::runtime_error(what), node(node_id) {}
    int node;  // 0-based index of the descendant that was aborted
};

}  // namespace gampi
