#include "gampi/dataset.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gampi {

void write_dataset_csv(const Dataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);

    for (int j = 0; j < data.p(); ++j) out << (j ? "," : "") << "y" << (j + 1);
    for (int l = 0; l < data.q(); ++l) out << ",x" << (l + 1);
    out << "\n";

    char buf[64];
    for (int i = 0; i < data.n(); ++i) {
        for (int j = 0; j < data.p() + data.q(); ++j) {
            const double v = j < data.p() ? data.Y(i, j) : data.X(i, j - data.p());
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            if (j) out << ",";
            out << buf;
        }
        out << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

Dataset read_dataset_csv(const std::string& path, const std::vector<Family>& families) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);

    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("empty CSV: " + path);

    int p = 0, q = 0;
    {
        std::stringstream ss(header);
        std::string col;
        while (std::getline(ss, col, ',')) {
            if (col.rfind("y", 0) == 0)
                ++p;
            else if (col.rfind("x", 0) == 0)
                ++q;
            else
                throw std::runtime_error("unexpected column name '" + col + "' in " + path);
        }
    }
    if (static_cast<int>(families.size()) != p)
        throw std::runtime_error("family spec covers " + std::to_string(families.size()) +
                                 " columns but CSV has " + std::to_string(p) +
                                 " primary variables");

    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        row.reserve(p + q);
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (static_cast<int>(row.size()) != p + q)
            throw std::runtime_error("ragged CSV row in " + path);
        rows.push_back(std::move(row));
    }

    Dataset data;
    data.families = families;
    const int n = static_cast<int>(rows.size());
    data.Y.resize(n, p);
    data.X.resize(n, q);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) data.Y(i, j) = rows[i][j];
        for (int l = 0; l < q; ++l) data.X(i, l) = rows[i][p + l];
    }
    return data;
}

std::vector<Family> parse_families(const std::string& spec, int p) {
    auto parse_one = [](const std::string& name) {
        if (name == "gaussian") return Family::Gaussian;
        if (name == "bernoulli" || name == "binary") return Family::Bernoulli;
        if (name == "poisson" || name == "count") return Family::Poisson;
        throw std::runtime_error("unknown family '" + name + "'");
    };

    std::vector<std::string> parts;
    std::stringstream ss(spec);
    std::string part;
    while (std::getline(ss, part, ',')) parts.push_back(part);

    if (parts.size() == 1) return std::vector<Family>(p, parse_one(parts[0]));
    if (static_cast<int>(parts.size()) != p)
        throw std::runtime_error("family spec lists " + std::to_string(parts.size()) +
                                 " entries for " + std::to_string(p) + " columns");
    std::vector<Family> families;
    families.reserve(p);
    for (const auto& name : parts) families.push_back(parse_one(name));
    return families;
}

}  // namespace gampi
