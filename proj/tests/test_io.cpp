#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <zlib.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "l2v/io.hpp"

using namespace l2v;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("l2v_io_test_" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("trajectory file round trip") {
    TempDir dir;
    std::vector<Trajectory> trajs(2);
    trajs[0].user_id = "alice";
    trajs[0].cells = {CellId{18, 123456789}, CellId{18, 123456790}};
    trajs[0].timestamps = {100, 200};
    trajs[1].user_id = "bob";
    trajs[1].cells = {CellId{18, 42}};
    trajs[1].timestamps = {5};
    const auto path = dir.file("t.tsv");
    write_trajectories(path, trajs);
    const auto back = read_trajectories(path);
    REQUIRE(back.size() == 2);
    CHECK(back[0].user_id == "alice");
    CHECK(back[0].cells == trajs[0].cells);
    CHECK(back[0].timestamps == trajs[0].timestamps);
    CHECK(back[1].cells == trajs[1].cells);
}

TEST_CASE("graph file round trip preserves CSR exactly") {
    TempDir dir;
    const auto g = graph_from_edges(5, {0, 1, 2}, {3, 2, 4}, {2.0, 0.125, 1e-7},
                                    WeightedGraph::Kind::spatial);
    const auto path = dir.file("g.graph");
    write_graph(path, g);
    const auto back = read_graph(path);
    CHECK(back.n == g.n);
    CHECK(back.row_ptr == g.row_ptr);
    CHECK(back.col == g.col);
    CHECK(back.weight == g.weight);
    CHECK(back.kind == WeightedGraph::Kind::spatial);
}

TEST_CASE("embedding file round trip is lossless") {
    TempDir dir;
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> v(-10.0, 10.0);
    Matrix emb(7, 5);
    for (double& x : emb.data) x = v(rng);
    std::vector<CellId> cells;
    for (std::uint64_t i = 0; i < 7; ++i) cells.push_back(CellId{18, 1000 + i});
    const auto path = dir.file("emb.txt");
    write_embeddings(path, emb, cells);
    const auto back = read_embeddings(path);
    CHECK(back.cells == cells);
    CHECK(back.embeddings == emb);  // 17 significant digits round-trip doubles
}

TEST_CASE("feature export round trip and subset order") {
    TempDir dir;
    Matrix emb(4, 3);
    for (std::size_t i = 0; i < emb.data.size(); ++i)
        emb.data[i] = 0.1 * static_cast<double>(i) + 1.0 / 3.0;
    std::vector<CellId> cells{CellId{10, 1}, CellId{10, 2}, CellId{10, 3}, CellId{10, 4}};
    const auto path = dir.file("f.csv");
    export_features(path, emb, cells, {3, 1});
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "cell_id,v1,v2,v3");
    std::getline(in, line);
    CHECK(line.rfind("10:4,", 0) == 0);
    std::getline(in, line);
    CHECK(line.rfind("10:2,", 0) == 0);
    // value round-trips bit-exactly through the %.17g text
    const auto comma = line.find(',');
    const double v = std::stod(line.substr(comma + 1, line.find(',', comma + 1) - comma - 1));
    CHECK(v == emb.at(1, 0));
    // empty id list -> header only
    export_features(dir.file("empty.csv"), emb, cells, {});
    std::ifstream e(dir.file("empty.csv"));
    std::getline(e, line);
    CHECK(line == "cell_id,v1,v2,v3");
    CHECK(!std::getline(e, line));
}

TEST_CASE("region file round trip") {
    TempDir dir;
    std::vector<std::pair<CellId, std::uint32_t>> labels{{CellId{18, 5}, 0},
                                                         {CellId{18, 6}, 2}};
    const auto path = dir.file("r.csv");
    write_regions(path, labels);
    CHECK(read_regions(path) == labels);
}

TEST_CASE("gzip-compressed input is read transparently") {
    TempDir dir;
    const std::string payload = "u1,100,23.1,113.2\nu1,160,23.2,113.3\n";
    const auto path = dir.file("records.csv.gz");
    gzFile gz = gzopen(path.c_str(), "wb");
    REQUIRE(gz != nullptr);
    gzwrite(gz, payload.data(), static_cast<unsigned>(payload.size()));
    gzclose(gz);
    CHECK(read_file_maybe_gzip(path) == payload);
    // plain file passes through untouched
    const auto plain = dir.file("plain.csv");
    std::ofstream(plain) << payload;
    CHECK(read_file_maybe_gzip(plain) == payload);
    CHECK_THROWS(read_file_maybe_gzip(dir.file("missing.csv")));
}

TEST_CASE("digests are content-stable and order-sensitive") {
    CHECK(content_digest("abc") == content_digest("abc"));
    CHECK(content_digest("abc") != content_digest("acb"));
    CHECK(content_digest("").size() == 16);
}

TEST_CASE("manifest verification catches tampering") {
    TempDir dir;
    const auto out = dir.file("stage.out");
    std::ofstream(out) << "payload v1\n";
    PipelineManifest m;
    m.stage = "test";
    m.tool_version = "0.0";
    m.output_digests[out] = file_digest(out);
    write_manifest(out, m);
    CHECK_NOTHROW(verify_against_manifest(out));
    std::ofstream(out) << "tampered\n";
    CHECK_THROWS(verify_against_manifest(out));
    // no manifest -> nothing to verify
    const auto other = dir.file("loose.txt");
    std::ofstream(other) << "x";
    CHECK_NOTHROW(verify_against_manifest(other));
}
