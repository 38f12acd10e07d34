#pragma once

#include <optional>
#include <string>

#include "gampi/peeling.hpp"

namespace gampi {

/// Edge-set confusion counts over ordered pairs plus derived rates; a metric
/// with a zero denominator is reported as nullopt ("NA").
struct EvalReport {
    long long tp = 0, fp = 0, tn = 0, fn = 0;
    std::optional<double> fpr, fdr, fscore, mcc;
    long long shd_value = 0;

    std::string to_csv_row() const;  // NA for undefined metrics
    std::string to_json() const;
    static std::string csv_header();
};

EvalReport evaluate(const PairSet& estimated, const PairSet& truth, int p);

/// Unordered-pair edit distance: an edge present in exactly one graph costs 1,
/// opposite orientations on the same pair cost 1 (a flip).
long long shd(const PairSet& g1, const PairSet& g2, int p);

}  // namespace gampi
