#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "fasthgt/fasthgt.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace fasthgt;

namespace {

fs::path make_temp_dir() {
    static int counter = 0;
    const fs::path dir = fs::temp_directory_path() /
                         ("hgt-cli-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::create_directories(dir);
    return dir;
}

int run_cli(const std::string& args, const fs::path& stdoutFile = {}) {
    std::string cmd = std::string(HGT_CLI_PATH) + " " + args;
    if (!stdoutFile.empty()) cmd += " > " + stdoutFile.string();
    cmd += " 2>/dev/null";
    const int rc = std::system(cmd.c_str());
    REQUIRE(rc != -1);
    REQUIRE(WIFEXITED(rc));
    return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    REQUIRE(is.good());
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

void spit(const fs::path& p, const std::string& text) {
    std::ofstream os(p, std::ios::binary);
    os << text;
    REQUIRE(os.good());
}

json slurp_json(const fs::path& p) { return json::parse(slurp(p)); }

}  // namespace

TEST_CASE("simulate writes three deterministic files") {
    const fs::path dir = make_temp_dir();
    const std::string prefix = (dir / "sim").string();
    REQUIRE(run_cli("simulate --n 8 --ell 1000 --seed 1 --out " + prefix) == 0);
    for (const char* ext : {".nwk", ".fasta", ".json"}) CHECK(fs::exists(prefix + ext));

    const std::string tree1 = slurp(prefix + ".nwk");
    const std::string seqs1 = slurp(prefix + ".fasta");
    const std::string side1 = slurp(prefix + ".json");
    REQUIRE(run_cli("simulate --n 8 --ell 1000 --seed 1 --out " + prefix) == 0);
    CHECK(slurp(prefix + ".nwk") == tree1);
    CHECK(slurp(prefix + ".fasta") == seqs1);
    CHECK(slurp(prefix + ".json") == side1);

    const json side = json::parse(side1);
    CHECK(side.at("command") == "simulate");
    CHECK(side.at("config").at("n") == 8);
    CHECK(side.at("config_hash").get<std::string>().size() == 16);
}

TEST_CASE("simulate validates its parameters") {
    const fs::path dir = make_temp_dir();
    const std::string prefix = (dir / "x").string();
    CHECK(run_cli("simulate --n 2 --out " + prefix) == 2);
    CHECK(run_cli("simulate --n 5 --f 0.2 --g 0.1 --out " + prefix) == 2);
    CHECK(run_cli("simulate --n 5") == 2);  // missing --out
}

TEST_CASE("distances of identical sequences are zero") {
    const fs::path dir = make_temp_dir();
    spit(dir / "same.fasta", ">a\nACGT\n>b\nACGT\n>c\nACGT\n");
    const fs::path out = dir / "same.dist";
    REQUIRE(run_cli("distances --in " + (dir / "same.fasta").string() + " --out " + out.string()) == 0);
    const DistanceMatrix d = load_phylip(out.string());
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(d.distance(i, j) == 0.0);
}

TEST_CASE("exact distances equal the model path sums") {
    const fs::path dir = make_temp_dir();
    const std::string prefix = (dir / "sim").string();
    REQUIRE(run_cli("simulate --n 9 --seed 4 --out " + prefix) == 0);
    const fs::path out = dir / "exact.dist";
    REQUIRE(run_cli("distances --exact --in " + prefix + ".nwk --out " + out.string()) == 0);

    const ParsedTree parsed = parse_newick(slurp(prefix + ".nwk"));
    const DistanceMatrix expected = exact_distance_matrix(std::get<RootedEvoTree>(parsed));
    const DistanceMatrix got = load_phylip(out.string());
    REQUIRE(got.size() == expected.size());
    for (int i = 0; i < got.size(); ++i)
        for (int j = 0; j < got.size(); ++j)
            CHECK(got.distance(i, j) == Catch::Approx(expected.distance(i, j)).margin(1e-12));
}

TEST_CASE("a fully disagreeing pair serializes as Inf") {
    const fs::path dir = make_temp_dir();
    spit(dir / "far.fasta", ">a\nAAAA\n>b\nCCCC\n>c\nAAAA\n");
    const fs::path out = dir / "far.dist";
    REQUIRE(run_cli("distances --in " + (dir / "far.fasta").string() + " --out " + out.string()) == 0);
    CHECK(slurp(out).find("Inf") != std::string::npos);
    const DistanceMatrix d = load_phylip(out.string());
    CHECK_FALSE(d.finite(0, 1));
    CHECK(d.finite(0, 2));
}

TEST_CASE("simulate, exact distances, reconstruct, evaluate round trip") {
    const fs::path dir = make_temp_dir();
    const std::string sim = (dir / "sim").string();
    const std::string rec = (dir / "rec").string();
    const fs::path mat = dir / "d.dist";
    const fs::path ev = dir / "eval.json";

    REQUIRE(run_cli("simulate --n 50 --seed 11 --out " + sim) == 0);
    REQUIRE(run_cli("distances --exact --in " + sim + ".nwk --out " + mat.string()) == 0);
    REQUIRE(run_cli("reconstruct --in " + mat.string() + " --out " + rec) == 0);
    REQUIRE(run_cli("evaluate --in " + rec + ".nwk --truth " + sim + ".nwk --out " + ev.string()) == 0);

    const json report = slurp_json(ev);
    CHECK(report.at("topology_matches") == true);
    CHECK(report.at("rf_distance") == 0);
    CHECK(report.at("max_length_error").get<double>() < report.at("length_budget").get<double>());
    CHECK(report.at("within_budget") == true);

    const json recReport = slurp_json(rec + ".json");
    CHECK(recReport.at("ok") == true);
    CHECK(recReport.at("stats").at("iterations") == 47);
    CHECK(recReport.at("stats").at("peak_candidates").get<int>() <= 50);
}

TEST_CASE("reconstruct accepts sequence input directly") {
    const fs::path dir = make_temp_dir();
    const std::string sim = (dir / "sim").string();
    const std::string rec = (dir / "rec").string();
    REQUIRE(run_cli("simulate --n 8 --ell 20000 --seed 3 --out " + sim) == 0);
    REQUIRE(run_cli("reconstruct --in " + sim + ".fasta --out " + rec) == 0);
    const WeightedTopology t = std::get<WeightedTopology>(parse_newick(slurp(rec + ".nwk")));
    CHECK(t.leaf_count() == 8);
}

TEST_CASE("an all-Inf matrix fails reconstruction with the failure exit code") {
    const fs::path dir = make_temp_dir();
    spit(dir / "inf.dist",
         "4\nt0 0 Inf Inf Inf\nt1 Inf 0 Inf Inf\nt2 Inf Inf 0 Inf\nt3 Inf Inf Inf 0\n");
    const std::string rec = (dir / "rec").string();
    CHECK(run_cli("reconstruct --in " + (dir / "inf.dist").string() + " --out " + rec) == 3);
    CHECK_FALSE(fs::exists(rec + ".nwk"));
    const json report = slurp_json(rec + ".json");
    CHECK(report.at("ok") == false);
    CHECK(report.at("failure").at("stage") == "no-positive-seed-triplet");
}

TEST_CASE("a 3-taxon matrix reconstructs to a star") {
    const fs::path dir = make_temp_dir();
    spit(dir / "t3.dist", "3\nA 0 0.2 0.2\nB 0.2 0 0.2\nC 0.2 0.2 0\n");
    const std::string rec = (dir / "rec3").string();
    REQUIRE(run_cli("reconstruct --in " + (dir / "t3.dist").string() + " --out " + rec) == 0);
    const WeightedTopology t = std::get<WeightedTopology>(parse_newick(slurp(rec + ".nwk")));
    CHECK(t.leaf_count() == 3);
    CHECK(t.edges.size() == 3);
    CHECK(t.node_count() == 4);
}

TEST_CASE("evaluating a tree against itself and against a different shape") {
    const fs::path dir = make_temp_dir();
    const RootedEvoTree balanced = gen_tree(8, TreeShape::Balanced, EvoModel{4, 0.05, 0.1}, 6);
    const RootedEvoTree caterpillar = gen_tree(8, TreeShape::Caterpillar, EvoModel{4, 0.05, 0.1}, 6);
    spit(dir / "truth.nwk", serialize_newick(balanced));
    spit(dir / "other.nwk", serialize_newick(suppress_root(caterpillar)));

    const fs::path self = dir / "self.json";
    REQUIRE(run_cli("evaluate --in " + (dir / "truth.nwk").string() + " --truth " +
                    (dir / "truth.nwk").string() + " --out " + self.string()) == 0);
    const json selfReport = slurp_json(self);
    CHECK(selfReport.at("topology_matches") == true);
    CHECK(selfReport.at("max_length_error") == 0.0);

    const fs::path cross = dir / "cross.json";
    REQUIRE(run_cli("evaluate --in " + (dir / "other.nwk").string() + " --truth " +
                    (dir / "truth.nwk").string() + " --out " + cross.string()) == 0);
    const json crossReport = slurp_json(cross);
    CHECK(crossReport.at("topology_matches") == false);
    CHECK(crossReport.at("rf_distance").get<int>() >= 2);
}

TEST_CASE("evaluate with leaf-set mismatch is a validation error") {
    const fs::path dir = make_temp_dir();
    const RootedEvoTree a = gen_tree(6, TreeShape::Balanced, EvoModel{4, 0.05, 0.1}, 1);
    RootedEvoTree b = gen_tree(6, TreeShape::Balanced, EvoModel{4, 0.05, 0.1}, 1);
    b.leaf_names[0] = "other";
    spit(dir / "a.nwk", serialize_newick(a));
    spit(dir / "b.nwk", serialize_newick(b));
    CHECK(run_cli("evaluate --in " + (dir / "a.nwk").string() + " --truth " +
                  (dir / "b.nwk").string()) == 2);
}

TEST_CASE("trial evaluation aggregates match its own rows") {
    const fs::path dir = make_temp_dir();
    const fs::path out = dir / "mc.json";
    REQUIRE(run_cli("evaluate --trials 8 --n 8 --exact --seed 5 --out " + out.string()) == 0);
    const json report = slurp_json(out);
    CHECK(report.at("mode") == "trials");
    CHECK(report.at("trials") == 8);
    CHECK(report.at("recovery_rate") == 1.0);
    CHECK(report.at("failures") == 0);
    CHECK(report.at("ci95_high").get<double>() <= 1.0);

    // recompute the aggregates from the per-trial rows
    const fs::path rows = dir / "mc.trials.ndjson";
    REQUIRE(fs::exists(rows));
    std::istringstream is(slurp(rows));
    std::string line;
    int count = 0, matched = 0, failures = 0;
    while (std::getline(is, line)) {
        const json row = json::parse(line);
        ++count;
        matched += row.at("topology_matches").get<bool>() ? 1 : 0;
        failures += row.at("failure").is_null() ? 0 : 1;
    }
    CHECK(count == report.at("trials").get<int>());
    CHECK(matched == report.at("recovered").get<int>());
    CHECK(failures == report.at("failures").get<int>());
    CHECK(report.at("recovery_rate").get<double>() ==
          Catch::Approx(static_cast<double>(matched) / count).margin(1e-15));
}

TEST_CASE("trial rows are identical under capped parallelism") {
    const fs::path dir = make_temp_dir();
    const fs::path a = dir / "a.json";
    const fs::path b = dir / "b.json";
    REQUIRE(setenv("HGT_THREADS", "1", 1) == 0);
    REQUIRE(run_cli("evaluate --trials 6 --n 7 --ell 2000 --seed 9 --out " + a.string()) == 0);
    REQUIRE(setenv("HGT_THREADS", "3", 1) == 0);
    REQUIRE(run_cli("evaluate --trials 6 --n 7 --ell 2000 --seed 9 --out " + b.string()) == 0);
    REQUIRE(unsetenv("HGT_THREADS") == 0);
    CHECK(slurp(dir / "a.trials.ndjson") == slurp(dir / "b.trials.ndjson"));
    CHECK(slurp_json(a).at("recovery_rate") == slurp_json(b).at("recovery_rate"));
}

TEST_CASE("benchmark reports per-size counters and slope fits") {
    const fs::path dir = make_temp_dir();
    const fs::path out = dir / "bench.json";
    REQUIRE(run_cli("bench --n 30 --n 60 --n 120 --reps 1 --seed 2 --out " + out.string()) == 0);
    const json report = slurp_json(out);
    REQUIRE(report.at("rows").size() == 3);
    CHECK(report.at("rows")[0].at("n") == 30);
    CHECK(report.at("all_tuple_bounds_ok") == true);
    CHECK(report.at("all_node_bounds_ok") == true);
    const double slope = report.at("split_call_slope").get<double>();
    CHECK(slope > 1.5);
    CHECK(slope < 2.5);
    CHECK(report.at("time_slope").is_number());
}

TEST_CASE("sample sizing prints the length decomposition") {
    const fs::path dir = make_temp_dir();
    const fs::path out = dir / "size.json";
    REQUIRE(run_cli("sample-size --n 8 --f 0.05 --g 0.05 --delta 0.2 --d 2", out) == 0);
    const json report = slurp_json(out);
    CHECK(report.at("d") == 2);
    CHECK(report.at("c_lg").get<double>() == Catch::Approx(0.035958182188586436).epsilon(1e-12));
    CHECK(report.at("ell_g").get<double>() == Catch::Approx(2583142.713630274).epsilon(1e-12));
    CHECK(report.at("ell_c").get<double>() == Catch::Approx(3926586067.22816).epsilon(1e-12));
    CHECK(report.at("ell").get<std::uint64_t>() == 3926586068ull);

    // without --d the worst-case depth for n leaves applies
    const fs::path out2 = dir / "size2.json";
    REQUIRE(run_cli("sample-size --n 8 --f 0.05 --g 0.05 --delta 0.2", out2) == 0);
    CHECK(slurp_json(out2).at("d") == 3);
}

TEST_CASE("missing files and bad flags use the documented exit codes") {
    const fs::path dir = make_temp_dir();
    CHECK(run_cli("reconstruct --in /nonexistent/m.dist --out " + (dir / "r").string()) == 4);
    CHECK(run_cli("distances --in /nonexistent/s.fasta --out " + (dir / "d").string()) == 4);
    CHECK(run_cli("reconstruct --out " + (dir / "r").string()) == 2);  // missing --in
    CHECK(run_cli("frobnicate") == 2);
    CHECK(run_cli("--help", dir / "help.txt") == 0);
    CHECK(run_cli("reconstruct --in " + (dir / "r").string() + " --delta-min -1 --out x") != 0);
}
