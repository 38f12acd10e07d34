#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "gampi/dataset.hpp"
#include "gampi/deconfound.hpp"
#include "gampi/errors.hpp"
#include "gampi/fidelity.hpp"
#include "gampi/metrics.hpp"
#include "gampi/peeling.hpp"
#include "gampi/simgen.hpp"

namespace fs = std::filesystem;
using namespace gampi;

namespace {

constexpr const char* kVersion = "0.1.0";

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitPeel = 4;
constexpr int kExitFit = 5;

struct StageClock {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    nlohmann::json timings = nlohmann::json::object();

    void lap(const std::string& stage) {
        const auto now = std::chrono::steady_clock::now();
        timings[stage] =
            std::chrono::duration_cast<std::chrono::milliseconds>(now - start).count();
        start = now;
    }
};

std::string read_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path);
}

/// Manifest goes last, via atomic rename, so its presence implies a complete run.
void write_manifest(const std::string& dir, const nlohmann::json& config_snapshot,
                    std::uint64_t seed, StageClock& clock,
                    const std::vector<std::string>& artifacts,
                    const nlohmann::json& extra = nlohmann::json::object()) {
    nlohmann::json manifest;
    manifest["version"] = kVersion;
    manifest["config"] = config_snapshot;
    manifest["seed"] = seed;
    manifest["timings_ms"] = clock.timings;
    manifest["artifacts"] = artifacts;
    for (const auto& [key, value] : extra.items()) manifest[key] = value;

    const std::string tmp = dir + "/manifest.json.tmp";
    write_text(tmp, manifest.dump(2));
    fs::rename(tmp, dir + "/manifest.json");
}

int resolve_threads(int threads_flag) {
    if (threads_flag > 0) return threads_flag;
    if (const char* env = std::getenv("GAMPI_THREADS")) {
        const int t = std::atoi(env);
        if (t > 0) return t;
    }
    return 1;
}

std::string fidelity_to_json(const FidelityMatrix& V) {
    nlohmann::json out;
    out["V"] = nlohmann::json::array();
    for (int l = 0; l < V.V.rows(); ++l) {
        nlohmann::json row = nlohmann::json::array();
        for (int j = 0; j < V.V.cols(); ++j) row.push_back(V.V(l, j));
        out["V"].push_back(row);
    }
    out["supports"] = nlohmann::json::object();
    out["chosen"] = nlohmann::json::object();
    for (int j = 0; j < V.V.cols(); ++j) {
        nlohmann::json ivs = nlohmann::json::array();
        for (int l : V.supports[j]) ivs.push_back(l + 1);
        out["supports"][std::to_string(j + 1)] = ivs;
        out["chosen"][std::to_string(j + 1)] = {{"tau", V.chosen[j].tau},
                                                {"gamma", V.chosen[j].gamma},
                                                {"k", V.chosen[j].k}};
    }
    out["warnings"] = V.warnings;
    return out.dump(2);
}

struct PipelineResult {
    FidelityMatrix fidelity;
    std::optional<SuperGraph> supergraph;
    std::optional<DagEstimate> estimate;
};

/// fidelity -> peel (with per-column retry on stalls) -> deconfound.
PipelineResult run_pipeline(const Dataset& data, const std::string& stage,
                            const std::string& method, const TuningPolicy& tuning,
                            int threads) {
    PipelineResult result;
    FidelityOptions fopts;
    fopts.threads = threads;
    result.fidelity = fit_fidelity(data, tuning, fopts);
    if (!result.fidelity.ok())
        throw std::runtime_error("fidelity fitting failed for one or more columns");
    if (stage == "fidelity") return result;

    // Peel; on a stall, retry the stuck columns at their next-best EBIC
    // candidate.
    Matrix V = result.fidelity.V;
    std::vector<int> retry_rank(data.p(), 0);
    for (int attempt = 0;; ++attempt) {
        try {
            result.supergraph = peel(V);
            break;
        } catch (const PeelStalled& stall) {
            if (attempt >= 4) throw;
            bool advanced = false;
            for (int c : stall.stuck_cols) {
                const auto& table = result.fidelity.selections[c].table;
                std::vector<int> order;
                for (size_t i = 0; i < table.size(); ++i)
                    if (!table[i].failed) order.push_back(static_cast<int>(i));
                std::sort(order.begin(), order.end(),
                          [&](int a, int b) { return table[a].score < table[b].score; });
                const int next = ++retry_rank[c];
                if (next >= static_cast<int>(order.size())) continue;
                V.col(c) = refit_fidelity_column(data, c, table[order[next]].candidate);
                advanced = true;
            }
            if (!advanced) throw;
        }
    }
    if (stage == "peel") return result;

    DeconfOptions dopts;
    dopts.threads = threads;
    if (method == "dps")
        result.estimate = run_dps(data, *result.supergraph, tuning, dopts);
    else if (method == "none")
        result.estimate = run_no_deconf(data, *result.supergraph, tuning, dopts);
    else
        result.estimate = run_dri(data, *result.supergraph, tuning, dopts);
    return result;
}

void print_report(const EvalReport& report) {
    auto cell = [](const std::optional<double>& v) {
        if (!v) return std::string("NA");
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.4f", *v);
        return std::string(buf);
    };
    std::cout << "metric   value\n"
              << "FPR      " << cell(report.fpr) << "\n"
              << "FDR      " << cell(report.fdr) << "\n"
              << "F-score  " << cell(report.fscore) << "\n"
              << "MCC      " << cell(report.mcc) << "\n"
              << "SHD      " << report.shd_value << "\n";
}

int cmd_simulate(const std::string& config_path, const std::string& outdir) {
    SimConfig cfg;
    try {
        cfg = sim_config_from_json(read_text(config_path));
    } catch (const std::exception& e) {
        std::cerr << "config error in " << config_path << ": " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        fs::create_directories(outdir);
        StageClock clock;
        auto [data, truth] = simulate(cfg);
        clock.lap("simulate");
        write_dataset_csv(data, outdir + "/dataset.csv");
        write_text(outdir + "/truth.json", truth_to_json(truth, cfg.q));
        clock.lap("write");
        write_manifest(outdir, nlohmann::json::parse(sim_config_to_json(cfg)), cfg.seed,
                       clock, {"dataset.csv", "truth.json"});
    } catch (const std::exception& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIo;
    }
    return 0;
}

int cmd_fit(const std::string& dataset_path, const std::string& families_spec,
            const std::string& method, const std::string& tuning_name,
            const std::string& stage, int threads, std::uint64_t seed,
            const std::string& outdir) {
    Dataset data;
    if (!fs::exists(dataset_path)) {
        std::cerr << "i/o error: no such file: " << dataset_path << "\n";
        return kExitIo;
    }
    try {
        std::ifstream probe(dataset_path);
        std::string header;
        std::getline(probe, header);
        int p = 0;
        std::stringstream ss(header);
        std::string col;
        while (std::getline(ss, col, ','))
            if (col.rfind("y", 0) == 0) ++p;
        data = read_dataset_csv(dataset_path, parse_families(families_spec, p));
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    if (data.p() > data.q())
        std::cerr << "warning: p > q; the peeling guarantees assume p <= q\n";

    TuningPolicy tuning;
    tuning.method = tuning_name == "cv" ? TuningMethod::CV : TuningMethod::EBIC;
    tuning.seed = seed;

    PipelineResult result;
    StageClock clock;
    try {
        result = run_pipeline(data, stage, method, tuning, resolve_threads(threads));
    } catch (const PeelStalled& stall) {
        std::cerr << "peeling stalled; stuck columns:";
        for (int c : stall.stuck_cols) std::cerr << " " << (c + 1);
        std::cerr << "\n";
        return kExitPeel;
    } catch (const std::exception& e) {
        std::cerr << "fit error: " << e.what() << "\n";
        return kExitFit;
    }
    clock.lap("fit");

    try {
        fs::create_directories(outdir);
        std::vector<std::string> artifacts{"fidelity.json"};
        write_text(outdir + "/fidelity.json", fidelity_to_json(result.fidelity));
        if (result.supergraph) {
            write_text(outdir + "/supergraph.json", supergraph_to_json(*result.supergraph));
            artifacts.push_back("supergraph.json");
        }
        nlohmann::json extra = nlohmann::json::object();
        if (result.estimate) {
            write_text(outdir + "/estimate.json", dag_to_json(*result.estimate, data.q()));
            artifacts.push_back("estimate.json");
            nlohmann::json failures = nlohmann::json::array();
            for (int j = 0; j < result.estimate->p(); ++j)
                if (!result.estimate->node_errors[j].empty())
                    failures.push_back({{"node", j + 1},
                                        {"error", result.estimate->node_errors[j]}});
            extra["node_failures"] = failures;
        }
        clock.lap("write");
        nlohmann::json config_snapshot{{"dataset", dataset_path},
                                       {"families", families_spec},
                                       {"method", method},
                                       {"tuning", tuning_name},
                                       {"stage", stage}};
        write_manifest(outdir, config_snapshot, seed, clock, artifacts, extra);
        if (result.estimate && !result.estimate->ok()) {
            std::cerr << "per-node fit failures recorded in manifest\n";
            return kExitFit;
        }
    } catch (const std::exception& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIo;
    }
    return 0;
}

int cmd_eval(const std::string& estimate_path, const std::string& truth_path,
             const std::string& outdir) {
    DagEstimate estimate, truth;
    try {
        estimate = dag_from_json(read_text(estimate_path));
        truth = dag_from_json(read_text(truth_path));
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    if (estimate.p() != truth.p()) {
        std::cerr << "config error: estimate has p=" << estimate.p() << " but truth has p="
                  << truth.p() << "\n";
        return kExitConfig;
    }

    const EvalReport report = evaluate(estimate.edges, truth.edges, estimate.p());
    print_report(report);

    try {
        fs::create_directories(outdir);
        write_text(outdir + "/metrics.csv",
                   EvalReport::csv_header() + "\n" + report.to_csv_row() + "\n");
        write_text(outdir + "/metrics.json", report.to_json());
    } catch (const std::exception& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIo;
    }
    return 0;
}

struct Aggregate {
    std::vector<double> values;
    int missing = 0;

    void add(const std::optional<double>& v) {
        if (v)
            values.push_back(*v);
        else
            ++missing;
    }
    double mean() const {
        double acc = 0;
        for (double v : values) acc += v;
        return values.empty() ? 0.0 : acc / values.size();
    }
    double se() const {
        if (values.size() < 2) return 0.0;
        const double m = mean();
        double var = 0;
        for (double v : values) var += (v - m) * (v - m);
        var /= (values.size() - 1);
        return std::sqrt(var / values.size());
    }
    std::string cell() const {
        if (values.empty()) return "NA (NA)";
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.4f (%.4f)", mean(), se());
        return std::string(buf);
    }
};

int cmd_bench(const std::string& config_path, int replicates, const std::string& method,
              const std::string& tuning_name, int threads, const std::string& outdir) {
    SimConfig base;
    int reps = replicates;
    try {
        nlohmann::json raw = nlohmann::json::parse(read_text(config_path));
        if (reps <= 0) reps = raw.value("replicates", 10);
        raw.erase("replicates");
        base = sim_config_from_json(raw.dump());
        if (reps < 1) throw std::invalid_argument("replicates must be >= 1");
    } catch (const std::exception& e) {
        std::cerr << "config error in " << config_path << ": " << e.what() << "\n";
        return kExitConfig;
    }

    TuningPolicy tuning;
    tuning.method = tuning_name == "cv" ? TuningMethod::CV : TuningMethod::EBIC;

    Aggregate fpr, fdr, fscore, mcc, shd_agg;
    std::vector<int> failed_reps;
    StageClock clock;

    for (int r = 0; r < reps; ++r) {
        SimConfig cfg = base;
        cfg.seed = replicate_seed(base.seed, r);
        tuning.seed = cfg.seed;
        try {
            auto [data, truth] = simulate(cfg);
            PipelineResult result =
                run_pipeline(data, "full", method, tuning, resolve_threads(threads));
            if (!result.estimate->ok())
                throw std::runtime_error("per-node fit failures");
            const EvalReport report =
                evaluate(result.estimate->edges, truth.edges0, cfg.p);
            fpr.add(report.fpr);
            fdr.add(report.fdr);
            fscore.add(report.fscore);
            mcc.add(report.mcc);
            shd_agg.add(static_cast<double>(report.shd_value));
        } catch (const std::exception& e) {
            std::cerr << "replicate " << (r + 1) << " failed: " << e.what() << "\n";
            failed_reps.push_back(r + 1);
        }
    }
    clock.lap("bench");

    std::cout << "metric   mean (SE)\n"
              << "FPR      " << fpr.cell() << "\n"
              << "FDR      " << fdr.cell() << "\n"
              << "F-score  " << fscore.cell() << "\n"
              << "MCC      " << mcc.cell() << "\n"
              << "SHD      " << shd_agg.cell() << "\n";
    if (!failed_reps.empty()) {
        std::cout << "failed replicates:";
        for (int r : failed_reps) std::cout << " " << r;
        std::cout << "\n";
    }

    try {
        fs::create_directories(outdir);
        std::ostringstream csv;
        csv << "metric,mean,se,n_ok,n_failed\n";
        auto row = [&](const char* name, const Aggregate& a) {
            csv << name << ",";
            if (a.values.empty())
                csv << "NA,NA";
            else
                csv << a.mean() << "," << a.se();
            csv << "," << a.values.size() << "," << (a.missing + failed_reps.size())
                << "\n";
        };
        row("fpr", fpr);
        row("fdr", fdr);
        row("fscore", fscore);
        row("mcc", mcc);
        row("shd", shd_agg);
        write_text(outdir + "/bench.csv", csv.str());
        nlohmann::json snapshot = nlohmann::json::parse(sim_config_to_json(base));
        snapshot["replicates"] = reps;
        snapshot["method"] = method;
        snapshot["tuning"] = tuning_name;
        write_manifest(outdir, snapshot, base.seed, clock, {"bench.csv"});
    } catch (const std::exception& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIo;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"GAMPI: causal discovery for generalized SEMs with instruments"};
    app.require_subcommand(1);

    std::string config_path, outdir = ".", dataset_path, families = "gaussian";
    std::string method = "dri", tuning = "ebic", stage = "full";
    std::string estimate_path, truth_path;
    int threads = 0, replicates = 0;
    std::uint64_t seed = 0;

    auto* sim = app.add_subcommand("simulate", "generate a synthetic dataset");
    sim->add_option("-c,--config", config_path, "simulation config JSON")->required();
    sim->add_option("-o,--out", outdir, "output directory");

    auto* fit = app.add_subcommand("fit", "run the discovery pipeline on a dataset CSV");
    fit->add_option("dataset", dataset_path, "dataset CSV")->required();
    fit->add_option("--families", families,
                    "family per Y column (one name or comma list)");
    fit->add_option("--method", method, "dri|dps|none")
        ->check(CLI::IsMember({"dri", "dps", "none"}));
    fit->add_option("--tuning", tuning, "ebic|cv")->check(CLI::IsMember({"ebic", "cv"}));
    fit->add_option("--stage", stage, "fidelity|peel|full")
        ->check(CLI::IsMember({"fidelity", "peel", "full"}));
    fit->add_option("--threads", threads, "worker count (GAMPI_THREADS fallback)");
    fit->add_option("--seed", seed, "seed for CV fold assignment");
    fit->add_option("-o,--out", outdir, "output directory");

    auto* eval = app.add_subcommand("eval", "score an estimate against ground truth");
    eval->add_option("estimate", estimate_path, "estimate JSON")->required();
    eval->add_option("truth", truth_path, "truth JSON")->required();
    eval->add_option("-o,--out", outdir, "output directory");

    auto* bench = app.add_subcommand("bench", "replicated simulate-fit-eval table");
    bench->add_option("-c,--config", config_path, "simulation config JSON")->required();
    bench->add_option("--replicates", replicates, "replication count");
    bench->add_option("--method", method, "dri|dps|none")
        ->check(CLI::IsMember({"dri", "dps", "none"}));
    bench->add_option("--tuning", tuning, "ebic|cv")
        ->check(CLI::IsMember({"ebic", "cv"}));
    bench->add_option("--threads", threads, "worker count (GAMPI_THREADS fallback)");
    bench->add_option("-o,--out", outdir, "output directory");

    CLI11_PARSE(app, argc, argv);

    if (sim->parsed()) return cmd_simulate(config_path, outdir);
    if (fit->parsed())
        return cmd_fit(dataset_path, families, method, tuning, stage, threads, seed,
                       outdir);
    if (eval->parsed()) return cmd_eval(estimate_path, truth_path, outdir);
    if (bench->parsed())
        return cmd_bench(config_path, replicates, method, tuning, threads, outdir);
    return 0;
}
