#define DOCTEST_CONFIG_IMPLEMENT
#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

namespace {

std::string g_binary;

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("l2v_cli_test_" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

int run(const std::string& args) {
    const int rc = std::system((g_binary + " " + args + " 2>/dev/null").c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("synth is byte-deterministic under a fixed seed") {
    TempDir dir;
    const std::string args = " --regions 3 --cells-per-region 9 --trajectories 50 --seed 7";
    REQUIRE(run("synth --out " + dir.file("a.csv") + " --regions-out " + dir.file("ra.csv") +
                args) == 0);
    REQUIRE(run("synth --out " + dir.file("b.csv") + " --regions-out " + dir.file("rb.csv") +
                args) == 0);
    CHECK(slurp(dir.file("a.csv")) == slurp(dir.file("b.csv")));
    CHECK(slurp(dir.file("ra.csv")) == slurp(dir.file("rb.csv")));
}

TEST_CASE("full pipeline: all stages exit 0 and produce their files") {
    TempDir dir;
    REQUIRE(run("synth --out " + dir.file("records.csv") + " --regions-out " +
                dir.file("regions.csv") +
                " --regions 3 --cells-per-region 9 --trajectories 120 --seed 5") == 0);
    REQUIRE(run("ingest --input " + dir.file("records.csv") + " --output " +
                dir.file("traj.tsv")) == 0);
    REQUIRE(run("build-graphs --trajectories " + dir.file("traj.tsv") + " --flow-out " +
                dir.file("flow.graph") + " --spatial-out " + dir.file("spatial.graph")) == 0);
    REQUIRE(run("train --trajectories " + dir.file("traj.tsv") + " --flow " +
                dir.file("flow.graph") + " --spatial " + dir.file("spatial.graph") +
                " --output " + dir.file("emb.txt") + " --features-out " +
                dir.file("features.csv") + " --dim 8 --epochs 3 --deterministic --seed 5") == 0);

    // pick a cell id out of the embedding file for the query stage
    std::ifstream emb(dir.file("emb.txt"));
    std::string header, cell;
    std::getline(emb, header);
    emb >> cell;
    REQUIRE(run("query --embeddings " + dir.file("emb.txt") + " --cell " + cell +
                " --k 3 --output " + dir.file("nn.csv")) == 0);
    REQUIRE(run("eval --embeddings " + dir.file("emb.txt") + " --regions " +
                dir.file("regions.csv") + " --k 3 > " + dir.file("acc.txt")) == 0);

    for (const char* f : {"records.csv", "traj.tsv", "flow.graph", "spatial.graph",
                          "emb.txt", "features.csv", "nn.csv", "acc.txt"})
        CHECK(std::filesystem::exists(dir.file(f)));
    for (const char* f : {"records.csv", "traj.tsv", "flow.graph", "spatial.graph", "emb.txt",
                          "nn.csv"})
        CHECK(std::filesystem::exists(dir.file(f) + ".manifest.json"));
    CHECK(slurp(dir.file("nn.csv")).rfind("rank,cell_id,similarity", 0) == 0);
    CHECK(slurp(dir.file("acc.txt")).rfind("accuracy@3", 0) == 0);
}

TEST_CASE("missing input files and bad flags exit 1") {
    TempDir dir;
    CHECK(run("train --trajectories " + dir.file("nope.tsv") + " --flow " +
              dir.file("nope.graph") + " --spatial " + dir.file("nope2.graph") +
              " --output " + dir.file("x.txt")) == 1);
    CHECK(run("no-such-subcommand") == 1);
    CHECK(run("synth --no-such-flag") == 1);
}

TEST_CASE("a stage refuses inputs whose manifest digest mismatches") {
    TempDir dir;
    REQUIRE(run("synth --out " + dir.file("records.csv") + " --regions-out " +
                dir.file("regions.csv") + " --regions 2 --cells-per-region 4"
                " --trajectories 20 --seed 2") == 0);
    REQUIRE(run("ingest --input " + dir.file("records.csv") + " --output " +
                dir.file("traj.tsv")) == 0);
    // tamper with the trajectory file behind its manifest
    std::ofstream(dir.file("traj.tsv"), std::ios::app) << "zzz\tbad\tline\n";
    CHECK(run("build-graphs --trajectories " + dir.file("traj.tsv") + " --flow-out " +
              dir.file("f.graph") + " --spatial-out " + dir.file("s.graph")) == 1);
}

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: test_cli <l2v-binary>\n");
        return 1;
    }
    g_binary = argv[1];
    doctest::Context context;
    context.applyCommandLine(argc - 1, argv + 1);
    return context.run();
}
