// Batch command-line front end: simulate sequence evolution, estimate or
// export distance matrices, reconstruct trees, evaluate reconstructions
// against the ground truth, benchmark, and size sequence lengths.
//
// Exit codes: 0 success, 2 validation error, 3 reconstruction failure,
// 4 I/O error.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fasthgt/fasthgt.hpp"

using json = nlohmann::ordered_json;
using namespace fasthgt;

namespace {

struct Opts {
    int n = 0;
    int m = 4;
    double f = 0.05;
    double g = 0.1;
    std::uint64_t ell = 1000;
    double delta = 0.1;
    double deltaMin = 0.0;  // 0 = unset
    double c = 0.0;         // 0 = unset
    int d = -1;             // -1 = unset
    std::string shape = "yule_harding";
    std::uint64_t seed = 1;
    int trials = 0;
    int reps = 2;
    bool exact = false;
    std::string in;
    std::string truth;
    std::string out;
    std::vector<int> sizes;
};

std::string read_text(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path + " for writing");
    os << text;
    if (!os) throw IoError("failed writing " + path);
}

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (const unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// Reports repeat their configuration and carry a hash of it so runs can be
// matched to configs at a glance.
json start_report(const char* command, const json& cfg) {
    json report;
    report["command"] = command;
    report["config"] = cfg;
    report["config_hash"] = hex64(fnv1a64(cfg.dump()));
    return report;
}

void emit_report(const json& report, const std::string& outPath) {
    const std::string text = report.dump(2) + "\n";
    if (outPath.empty())
        std::cout << text;
    else
        write_text(outPath, text);
}

WeightedTopology load_weighted(const std::string& path) {
    ParsedTree parsed = parse_newick(read_text(path));
    if (std::holds_alternative<RootedEvoTree>(parsed))
        return suppress_root(std::get<RootedEvoTree>(parsed));
    return std::get<WeightedTopology>(std::move(parsed));
}

double resolve_delta_min(const Opts& o) {
    if (o.deltaMin > 0.0) {
        validate_delta_min(o.deltaMin, o.m, o.f);
        return o.deltaMin;
    }
    if (o.c > 0.0) {
        if (o.c >= 1.0) throw ValidationError("--c must be a closeness in (0, 1)");
        return -std::log(o.c) / 4.0;
    }
    return default_delta_min(o.m, o.f);
}

int thread_cap(int trials) {
    unsigned cap = std::thread::hardware_concurrency();
    if (cap == 0) cap = 1;
    if (const char* env = std::getenv("HGT_THREADS")) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (end == env || *end != '\0' || v == 0)
            throw ValidationError("HGT_THREADS must be a positive integer");
        cap = std::min<unsigned long>(cap, v);
    }
    return static_cast<int>(std::min<unsigned long>(cap, static_cast<unsigned long>(trials)));
}

// Wilson 95% score interval for a binomial proportion.
std::pair<double, double> wilson95(int successes, int total) {
    if (total == 0) return {0.0, 1.0};
    const double z = 1.959963984540054;
    const double nT = total, p = static_cast<double>(successes) / nT;
    const double denom = 1.0 + z * z / nT;
    const double center = p + z * z / (2.0 * nT);
    const double half = z * std::sqrt(p * (1.0 - p) / nT + z * z / (4.0 * nT * nT));
    return {std::max(0.0, (center - half) / denom), std::min(1.0, (center + half) / denom)};
}

double loglog_slope(const std::vector<std::pair<double, double>>& pts) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [x, y] : pts) {
        const double lx = std::log(x), ly = std::log(y);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double k = static_cast<double>(pts.size());
    return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

const char* stage_name(FastHgtFailure::Stage s) {
    switch (s) {
        case FastHgtFailure::Stage::NoPositiveSeedTriplet: return "no-positive-seed-triplet";
        case FastHgtFailure::Stage::NoSplittingCandidates: return "no-splitting-candidates";
    }
    return "?";
}

json stats_json(const RunStats& s) {
    return json{{"split_edge_calls", s.splitEdgeCalls},
                {"candidate_updates", s.candidateUpdates},
                {"iterations", s.iterations},
                {"peak_candidates", s.peakCandidates},
                {"peak_nodes", s.peakNodes}};
}

int cmd_simulate(const Opts& o) {
    const EvoModel model{o.m, o.f, o.g};
    const TreeShape shape = tree_shape_from_string(o.shape);
    const RootedEvoTree t = gen_tree(o.n, shape, model, o.seed);
    const SequenceSet s = evolve_sequences(t, o.ell, substream_seed(o.seed, 3));

    const std::string treePath = o.out + ".nwk";
    const std::string seqPath = o.out + ".fasta";
    write_text(treePath, serialize_newick(t));
    save_fasta(seqPath, s);

    json cfg{{"n", o.n},     {"m", o.m},       {"f", o.f},     {"g", o.g},
             {"ell", o.ell}, {"shape", to_string(shape)}, {"seed", o.seed}};
    json report = start_report("simulate", cfg);
    report["outputs"] = json{{"tree", treePath}, {"sequences", seqPath}};
    emit_report(report, o.out + ".json");
    return 0;
}

int cmd_distances(const Opts& o) {
    DistanceMatrix d;
    if (o.exact) {
        ParsedTree parsed = parse_newick(read_text(o.in));
        if (!std::holds_alternative<RootedEvoTree>(parsed))
            throw ValidationError("exact distances need a model tree with mutation probabilities");
        d = exact_distance_matrix(std::get<RootedEvoTree>(parsed));
    } else {
        d = distance_matrix_from_sequences(load_fasta(o.in, o.m));
    }
    save_phylip(o.out, d);
    return 0;
}

DistanceMatrix load_matrix_or_sequences(const std::string& path, int m) {
    const std::string text = read_text(path);
    const std::size_t i = text.find_first_not_of(" \t\r\n");
    if (i != std::string::npos && text[i] == '>') {
        std::istringstream is(text);
        return distance_matrix_from_sequences(read_fasta(is, m));
    }
    std::istringstream is(text);
    return read_phylip(is);
}

int cmd_reconstruct(const Opts& o) {
    const DistanceMatrix d = load_matrix_or_sequences(o.in, o.m);
    const double deltaMin = resolve_delta_min(o);

    FastHgtOptions opts;
    opts.deltaMin = deltaMin;
    const auto t0 = std::chrono::steady_clock::now();
    const FastHgtResult res = fast_hgt(d, opts);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json cfg{{"in", o.in}, {"n", d.size()}, {"delta_min", deltaMin}};
    json report = start_report("reconstruct", cfg);
    report["ok"] = res.ok();
    report["stats"] = stats_json(res.stats);
    report["seconds"] = seconds;

    if (!res.ok()) {
        const FastHgtFailure& f = *res.failure;
        report["failure"] = json{{"stage", stage_name(f.stage)},
                                 {"tree_leaves", f.treeLeaves},
                                 {"iteration", f.iteration},
                                 {"message", f.message}};
        emit_report(report, o.out + ".json");
        std::cerr << "reconstruction failed at " << stage_name(f.stage) << ": " << f.message << "\n";
        return 3;
    }

    const WeightedTopology topo = res.tree->to_topology(d.names());
    topo.validate(false);  // estimated lengths may be non-positive; structure must hold
    const std::string treePath = o.out + ".nwk";
    write_text(treePath, serialize_newick(topo));
    report["outputs"] = json{{"tree", treePath}};
    emit_report(report, o.out + ".json");
    return 0;
}

json evaluate_pair(const WeightedTopology& recon, const WeightedTopology& truth, double budget) {
    const bool match = topology_matches(truth, recon);
    json out;
    out["topology_matches"] = match;
    out["rf_distance"] = rf_distance(truth, recon);
    out["max_length_error"] = max_edge_length_error(truth, recon);
    out["length_budget"] = budget;
    out["within_budget"] = match && max_edge_length_error(truth, recon) < budget;
    return out;
}

int cmd_evaluate_pair(const Opts& o) {
    const WeightedTopology recon = load_weighted(o.in);
    const WeightedTopology truth = load_weighted(o.truth);
    const double budget = 2.0 * resolve_delta_min(o);

    json cfg{{"in", o.in}, {"truth", o.truth}, {"length_budget", budget}};
    json report = start_report("evaluate", cfg);
    report["mode"] = "pair";
    report.update(evaluate_pair(recon, truth, budget));
    emit_report(report, o.out);
    return 0;
}

// One Monte Carlo trial: draw a tree, derive a matrix (exact or estimated
// from simulated sequences), reconstruct, compare against the truth.
json run_trial(const Opts& o, int trial, double budget) {
    const std::uint64_t trialSeed = substream_seed(o.seed, static_cast<std::uint64_t>(trial));
    const EvoModel model{o.m, o.f, o.g};
    const RootedEvoTree t = gen_tree(o.n, tree_shape_from_string(o.shape), model, trialSeed);
    const WeightedTopology truth = suppress_root(t);

    DistanceMatrix d;
    if (o.exact)
        d = exact_distance_matrix(t);
    else
        d = distance_matrix_from_sequences(evolve_sequences(t, o.ell, substream_seed(trialSeed, 3)));

    FastHgtOptions opts;
    opts.deltaMin = resolve_delta_min(o);
    const FastHgtResult res = fast_hgt(d, opts);

    json row;
    row["trial"] = trial;
    row["seed"] = trialSeed;
    row["ok"] = res.ok();
    if (res.ok()) {
        const WeightedTopology recon = res.tree->to_topology(d.names());
        row.update(evaluate_pair(recon, truth, budget));
        row["failure"] = nullptr;
    } else {
        row["topology_matches"] = false;
        row["rf_distance"] = nullptr;
        row["max_length_error"] = nullptr;
        row["length_budget"] = budget;
        row["within_budget"] = false;
        row["failure"] = stage_name(res.failure->stage);
    }
    return row;
}

int cmd_evaluate_trials(const Opts& o) {
    if (o.out.empty()) throw ValidationError("trial evaluation needs --out for the report");
    const double budget = 2.0 * resolve_delta_min(o);

    std::vector<json> rows(static_cast<std::size_t>(o.trials));
    std::atomic<int> next{0};
    std::exception_ptr firstError;
    std::mutex errorLock;

    const auto t0 = std::chrono::steady_clock::now();
    auto worker = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= o.trials) return;
            try {
                rows[static_cast<std::size_t>(i)] = run_trial(o, i, budget);
            } catch (...) {
                const std::lock_guard<std::mutex> lock(errorLock);
                if (!firstError) firstError = std::current_exception();
                return;
            }
        }
    };
    const int workers = thread_cap(o.trials);
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
        for (std::thread& th : pool) th.join();
    }
    if (firstError) std::rethrow_exception(firstError);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    int matched = 0, failures = 0;
    for (const json& row : rows) {
        matched += row.at("topology_matches").get<bool>() ? 1 : 0;
        failures += row.at("failure").is_null() ? 0 : 1;
    }
    const auto [lo, hi] = wilson95(matched, o.trials);

    std::string rowsPath = o.out;
    const std::string suffix = ".json";
    if (rowsPath.size() >= suffix.size() && rowsPath.compare(rowsPath.size() - suffix.size(), suffix.size(), suffix) == 0)
        rowsPath.resize(rowsPath.size() - suffix.size());
    rowsPath += ".trials.ndjson";
    std::string rowText;
    for (const json& row : rows) rowText += row.dump() + "\n";
    write_text(rowsPath, rowText);

    json cfg{{"n", o.n},         {"m", o.m},
             {"f", o.f},         {"g", o.g},
             {"shape", to_string(tree_shape_from_string(o.shape))},
             {"seed", o.seed},   {"trials", o.trials},
             {"exact", o.exact}, {"ell", o.exact ? json(nullptr) : json(o.ell)},
             {"length_budget", budget}};
    json report = start_report("evaluate", cfg);
    report["mode"] = "trials";
    report["trials_file"] = rowsPath;
    report["trials"] = o.trials;
    report["recovered"] = matched;
    report["failures"] = failures;
    report["recovery_rate"] = static_cast<double>(matched) / o.trials;
    report["ci95_low"] = lo;
    report["ci95_high"] = hi;
    report["seconds"] = seconds;
    emit_report(report, o.out);
    return 0;
}

int cmd_evaluate(const Opts& o) {
    if (o.trials > 0) return cmd_evaluate_trials(o);
    if (o.in.empty() || o.truth.empty())
        throw ValidationError("evaluate needs either --trials or both --in and --truth");
    return cmd_evaluate_pair(o);
}

int cmd_bench(const Opts& o) {
    std::vector<int> sizes = o.sizes;
    if (sizes.empty()) sizes = {200, 400, 800, 1600, 3200};
    std::sort(sizes.begin(), sizes.end());
    const EvoModel model{o.m, o.f, o.g};
    const TreeShape shape = tree_shape_from_string(o.shape);

    FastHgtOptions opts;
    opts.deltaMin = resolve_delta_min(o);

    json rows = json::array();
    std::vector<std::pair<double, double>> callPts, timePts;
    bool tupleBoundsOk = true, nodeBoundsOk = true;
    for (const int n : sizes) {
        const RootedEvoTree t = gen_tree(n, shape, model, substream_seed(o.seed, static_cast<std::uint64_t>(n)));
        const DistanceMatrix d = exact_distance_matrix(t);

        (void)fast_hgt(d, opts);  // warm-up, excluded from the fit
        double best = std::numeric_limits<double>::infinity();
        RunStats stats;
        for (int r = 0; r < std::max(1, o.reps); ++r) {
            const auto t0 = std::chrono::steady_clock::now();
            const FastHgtResult res = fast_hgt(d, opts);
            const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            if (!res.ok()) throw ValidationError("benchmark reconstruction failed at n=" + std::to_string(n));
            best = std::min(best, s);
            stats = res.stats;
        }
        tupleBoundsOk = tupleBoundsOk && stats.peakCandidates <= n;
        nodeBoundsOk = nodeBoundsOk && stats.peakNodes <= 2 * n;
        callPts.emplace_back(n, static_cast<double>(stats.splitEdgeCalls));
        timePts.emplace_back(n, best);
        json row = stats_json(stats);
        row["n"] = n;
        row["seconds"] = best;
        rows.push_back(std::move(row));
    }

    json cfg{{"sizes", sizes}, {"m", o.m},       {"f", o.f},
             {"g", o.g},       {"shape", to_string(shape)}, {"seed", o.seed},
             {"reps", o.reps}, {"delta_min", opts.deltaMin}};
    json report = start_report("bench", cfg);
    report["rows"] = std::move(rows);
    report["split_call_slope"] = loglog_slope(callPts);
    report["time_slope"] = loglog_slope(timePts);
    report["all_tuple_bounds_ok"] = tupleBoundsOk;
    report["all_node_bounds_ok"] = nodeBoundsOk;
    emit_report(report, o.out);
    return 0;
}

int cmd_sample_size(const Opts& o) {
    int n = o.n;
    int d = o.d;
    if (!o.in.empty()) {
        const WeightedTopology t = load_weighted(o.in);
        n = t.leaf_count();
        if (d < 0) d = g_depth(t);
    }
    if (n < 3) throw ValidationError("sample sizing needs --n >= 3 or an --in tree");
    if (d < 0) d = 1 + static_cast<int>(std::floor(std::log2(n - 1)));  // worst-case g-depth

    const double deltaMin = resolve_delta_min(o);
    const Thresholds th = closeness_thresholds(o.m, o.g, d);
    const SampleLength len = sample_length(n, o.delta, o.m, o.f, o.g, d, deltaMin);

    json cfg{{"n", n},         {"m", o.m},   {"f", o.f},
             {"g", o.g},       {"delta", o.delta}, {"d", d},
             {"delta_min", deltaMin}};
    json report = start_report("sample-size", cfg);
    report["d"] = d;
    report["delta_min"] = deltaMin;
    report["c_lg"] = th.large;
    report["ell_g"] = len.forGreedy;
    report["ell_c"] = len.forCenters;
    report["ell"] = len.length;
    emit_report(report, o.out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    Opts o;
    CLI::App app{"Distance-based evolutionary tree toolkit"};
    app.require_subcommand(1);

    CLI::App* sim = app.add_subcommand("simulate", "Draw a random model tree and evolve sequences down it");
    sim->add_option("--n", o.n, "number of leaves (>= 3)")->required();
    sim->add_option("--m", o.m, "alphabet size");
    sim->add_option("--f", o.f, "lower mutation probability bound");
    sim->add_option("--g", o.g, "upper mutation probability bound");
    sim->add_option("--ell", o.ell, "sequence length");
    sim->add_option("--shape", o.shape, "tree shape: uniform|yule_harding|caterpillar|balanced");
    sim->add_option("--seed", o.seed, "random seed");
    sim->add_option("--out", o.out, "output prefix (.nwk, .fasta, .json)")->required();

    CLI::App* dist = app.add_subcommand("distances", "Write the pairwise distance matrix of sequences or a tree");
    dist->add_option("--in", o.in, "FASTA sequences, or a model tree with --exact")->required();
    dist->add_option("--m", o.m, "alphabet size for FASTA input");
    dist->add_flag("--exact", o.exact, "compute exact model distances from a tree");
    dist->add_option("--out", o.out, "output matrix path")->required();

    CLI::App* rec = app.add_subcommand("reconstruct", "Reconstruct a tree from a matrix or sequences");
    rec->add_option("--in", o.in, "distance matrix, or FASTA sequences")->required();
    rec->add_option("--m", o.m, "alphabet size (FASTA input and default tolerance)");
    rec->add_option("--f", o.f, "lower mutation bound (default tolerance)");
    rec->add_option("--delta-min", o.deltaMin, "split tolerance");
    rec->add_option("--c", o.c, "derive the tolerance from a minimum edge closeness");
    rec->add_option("--out", o.out, "output prefix (.nwk, .json)")->required();

    CLI::App* ev = app.add_subcommand("evaluate", "Compare a reconstruction to the truth, or run seeded trials");
    ev->add_option("--in", o.in, "reconstructed tree");
    ev->add_option("--truth", o.truth, "ground-truth tree");
    ev->add_option("--trials", o.trials, "Monte Carlo trial count");
    ev->add_option("--n", o.n, "leaves per trial");
    ev->add_option("--m", o.m, "alphabet size");
    ev->add_option("--f", o.f, "lower mutation bound");
    ev->add_option("--g", o.g, "upper mutation bound");
    ev->add_option("--ell", o.ell, "sequence length per trial");
    ev->add_flag("--exact", o.exact, "use exact model distances instead of sequences");
    ev->add_option("--shape", o.shape, "tree shape per trial");
    ev->add_option("--seed", o.seed, "base seed; trial i uses a substream of it");
    ev->add_option("--delta-min", o.deltaMin, "split tolerance");
    ev->add_option("--c", o.c, "derive the tolerance from a minimum edge closeness");
    ev->add_option("--out", o.out, "report path (stdout if omitted; required with --trials)");

    CLI::App* bench = app.add_subcommand("bench", "Time reconstruction over a size schedule and fit slopes");
    bench->add_option("--n", o.sizes, "size schedule (default 200 400 800 1600 3200)");
    bench->add_option("--m", o.m, "alphabet size");
    bench->add_option("--f", o.f, "lower mutation bound");
    bench->add_option("--g", o.g, "upper mutation bound");
    bench->add_option("--shape", o.shape, "tree shape");
    bench->add_option("--seed", o.seed, "random seed");
    bench->add_option("--reps", o.reps, "timed repetitions per size (min is reported)");
    bench->add_option("--delta-min", o.deltaMin, "split tolerance");
    bench->add_option("--out", o.out, "report path (stdout if omitted)");

    CLI::App* size = app.add_subcommand("sample-size", "Sequence length sufficient for confident recovery");
    size->add_option("--n", o.n, "number of leaves");
    size->add_option("--m", o.m, "alphabet size");
    size->add_option("--f", o.f, "lower mutation bound");
    size->add_option("--g", o.g, "upper mutation bound");
    size->add_option("--delta", o.delta, "failure probability");
    size->add_option("--d", o.d, "tree depth parameter (default: worst case for n, or the --in tree's)");
    size->add_option("--delta-min", o.deltaMin, "split tolerance");
    size->add_option("--c", o.c, "derive the tolerance from a minimum edge closeness");
    size->add_option("--in", o.in, "tree whose leaf count and depth to use");
    size->add_option("--out", o.out, "report path (stdout if omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (sim->parsed()) return cmd_simulate(o);
        if (dist->parsed()) return cmd_distances(o);
        if (rec->parsed()) return cmd_reconstruct(o);
        if (ev->parsed()) return cmd_evaluate(o);
        if (bench->parsed()) return cmd_bench(o);
        if (size->parsed()) return cmd_sample_size(o);
        throw ValidationError("no subcommand selected");
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}
