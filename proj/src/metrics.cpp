#include "gampi/metrics.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

namespace gampi {

namespace {

std::string render(const std::optional<double>& v) {
    if (!v) return "NA";
    std::ostringstream out;
    out << *v;
    return out.str();
}

}  // namespace

EvalReport evaluate(const PairSet& estimated, const PairSet& truth, int p) {
    EvalReport r;
    for (const auto& e : estimated)
        (truth.count(e) ? r.tp : r.fp)++;
    r.fn = static_cast<long long>(truth.size()) - r.tp;
    r.tn = static_cast<long long>(p) * (p - 1) - r.tp - r.fp - r.fn;

    if (r.fp + r.tn > 0) r.fpr = static_cast<double>(r.fp) / (r.fp + r.tn);
    if (r.tp + r.fp > 0) r.fdr = static_cast<double>(r.fp) / (r.tp + r.fp);
    if (2 * r.tp + r.fp + r.fn > 0)
        r.fscore = 2.0 * r.tp / (2.0 * r.tp + r.fp + r.fn);
    const double denom = std::sqrt(static_cast<double>(r.tp + r.fp)) *
                         std::sqrt(static_cast<double>(r.tp + r.fn)) *
                         std::sqrt(static_cast<double>(r.tn + r.fp)) *
                         std::sqrt(static_cast<double>(r.tn + r.fn));
    if (denom > 0)
        r.mcc = (static_cast<double>(r.tp) * r.tn - static_cast<double>(r.fp) * r.fn) /
                denom;

    r.shd_value = shd(estimated, truth, p);
    return r;
}

long long shd(const PairSet& g1, const PairSet& g2, int p) {
    long long dist = 0;
    for (int k = 0; k < p; ++k)
        for (int j = k + 1; j < p; ++j) {
            const int a = (g1.count({k, j}) ? 1 : 0) | (g1.count({j, k}) ? 2 : 0);
            const int b = (g2.count({k, j}) ? 1 : 0) | (g2.count({j, k}) ? 2 : 0);
            if (a != b) ++dist;  // insert, delete, or flip: all cost 1
        }
    return dist;
}

std::string EvalReport::csv_header() { return "tp,fp,tn,fn,fpr,fdr,fscore,mcc,shd"; }

std::string EvalReport::to_csv_row() const {
    std::ostringstream out;
    out << tp << "," << fp << "," << tn << "," << fn << "," << render(fpr) << ","
        << render(fdr) << "," << render(fscore) << "," << render(mcc) << ","
        << shd_value;
    return out.str();
}

std::string EvalReport::to_json() const {
    nlohmann::json out;
    out["tp"] = tp;
    out["fp"] = fp;
    out["tn"] = tn;
    out["fn"] = fn;
    auto put = [&](const char* key, const std::optional<double>& v) {
        if (v)
            out[key] = *v;
        else
            out[key] = nullptr;
    };
    put("fpr", fpr);
    put("fdr", fdr);
    put("fscore", fscore);
    put("mcc", mcc);
    out["shd"] = shd_value;
    return out.dump(2);
}

}  // namespace gampi
