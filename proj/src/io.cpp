#include "l2v/io.hpp"

#include <zlib.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace l2v {

namespace {

std::string read_file_raw(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

std::string gunzip(const std::string& bytes) {
    z_stream zs{};
    if (inflateInit2(&zs, 15 + 32) != Z_OK)
        throw std::runtime_error("zlib init failed");
    std::string out;
    out.reserve(bytes.size() * 4);
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(bytes.data()));
    zs.avail_in = static_cast<uInt>(bytes.size());
    char buf[1 << 16];
    int ret = Z_OK;
    do {
        zs.next_out = reinterpret_cast<Bytef*>(buf);
        zs.avail_out = sizeof(buf);
        ret = inflate(&zs, Z_NO_FLUSH);
        if (ret != Z_OK && ret != Z_STREAM_END) {
            inflateEnd(&zs);
            throw std::runtime_error("gzip inflate failed");
        }
        out.append(buf, sizeof(buf) - zs.avail_out);
    } while (ret != Z_STREAM_END);
    inflateEnd(&zs);
    return out;
}

void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << bytes;
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(s.substr(start));
            break;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

}  // namespace

std::string read_file_maybe_gzip(const std::string& path) {
    std::string bytes = read_file_raw(path);
    if (bytes.size() >= 2 && static_cast<unsigned char>(bytes[0]) == 0x1f &&
        static_cast<unsigned char>(bytes[1]) == 0x8b)
        return gunzip(bytes);
    return bytes;
}

std::string content_digest(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string file_digest(const std::string& path) {
    return content_digest(read_file_raw(path));
}

std::string format_double_17g(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_trajectories(const std::string& path, const std::vector<Trajectory>& trajectories) {
    std::ostringstream out;
    for (const auto& t : trajectories) {
        out << t.user_id << '\t';
        for (std::size_t i = 0; i < t.cells.size(); ++i)
            out << (i ? "," : "") << cell_to_string(t.cells[i]);
        out << '\t';
        for (std::size_t i = 0; i < t.timestamps.size(); ++i)
            out << (i ? "," : "") << t.timestamps[i];
        out << '\n';
    }
    write_file(path, std::move(out).str());
}

std::vector<Trajectory> read_trajectories(const std::string& path) {
    std::istringstream in(read_file_maybe_gzip(path));
    std::vector<Trajectory> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto fields = split(line, '\t');
        if (fields.size() != 3)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected 3 tab-separated fields");
        Trajectory t;
        t.user_id = fields[0];
        for (const auto& c : split(fields[1], ','))
            t.cells.push_back(cell_from_string(c));
        for (const auto& s : split(fields[2], ','))
            t.timestamps.push_back(std::stoll(s));
        if (t.cells.empty() || t.cells.size() != t.timestamps.size())
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": cell/timestamp count mismatch");
        out.push_back(std::move(t));
    }
    return out;
}

void write_graph(const std::string& path, const WeightedGraph& g) {
    std::ostringstream out;
    out << g.n << ' ' << g.edge_count() << ' '
        << (g.kind == WeightedGraph::Kind::flow ? "flow" : "spatial") << '\n';
    for (std::size_t i = 0; i < g.n; ++i)
        for (std::size_t k = g.row_ptr[i]; k < g.row_ptr[i + 1]; ++k)
            if (i < g.col[k])
                out << i << ' ' << g.col[k] << ' ' << format_double_17g(g.weight[k]) << '\n';
    write_file(path, std::move(out).str());
}

WeightedGraph read_graph(const std::string& path) {
    std::istringstream in(read_file_maybe_gzip(path));
    std::size_t n = 0, e = 0;
    std::string kind;
    if (!(in >> n >> e >> kind) || (kind != "flow" && kind != "spatial"))
        throw std::runtime_error(path + ": bad graph header");
    std::vector<std::uint32_t> src(e), dst(e);
    std::vector<double> w(e);
    for (std::size_t k = 0; k < e; ++k) {
        if (!(in >> src[k] >> dst[k] >> w[k]))
            throw std::runtime_error(path + ": truncated edge list");
        if (src[k] >= dst[k]) throw std::runtime_error(path + ": edges must have i < j");
        if (w[k] <= 0.0) throw std::runtime_error(path + ": non-positive edge weight");
    }
    return graph_from_edges(n, src, dst, w,
                            kind == "flow" ? WeightedGraph::Kind::flow
                                           : WeightedGraph::Kind::spatial);
}

void write_embeddings(const std::string& path, const Matrix& embeddings,
                      const std::vector<CellId>& cells) {
    if (cells.size() != embeddings.rows)
        throw std::invalid_argument("write_embeddings: cell list / row count mismatch");
    std::ostringstream out;
    out << embeddings.rows << ' ' << embeddings.cols << '\n';
    for (std::size_t i = 0; i < embeddings.rows; ++i) {
        out << cell_to_string(cells[i]);
        for (std::size_t j = 0; j < embeddings.cols; ++j)
            out << ' ' << format_double_17g(embeddings.at(i, j));
        out << '\n';
    }
    write_file(path, std::move(out).str());
}

EmbeddingFile read_embeddings(const std::string& path) {
    std::istringstream in(read_file_maybe_gzip(path));
    std::size_t n = 0, d = 0;
    if (!(in >> n >> d)) throw std::runtime_error(path + ": bad embedding header");
    EmbeddingFile f;
    f.embeddings = Matrix(n, d);
    f.cells.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::string cell;
        if (!(in >> cell)) throw std::runtime_error(path + ": truncated embedding file");
        f.cells[i] = cell_from_string(cell);
        for (std::size_t j = 0; j < d; ++j)
            if (!(in >> f.embeddings.at(i, j)))
                throw std::runtime_error(path + ": truncated embedding row");
    }
    return f;
}

void write_regions(const std::string& path,
                   const std::vector<std::pair<CellId, std::uint32_t>>& labels) {
    std::ostringstream out;
    out << "cell_id,region_id\n";
    for (const auto& [cell, region] : labels)
        out << cell_to_string(cell) << ',' << region << '\n';
    write_file(path, std::move(out).str());
}

std::vector<std::pair<CellId, std::uint32_t>> read_regions(const std::string& path) {
    std::istringstream in(read_file_maybe_gzip(path));
    std::vector<std::pair<CellId, std::uint32_t>> out;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first && line.rfind("cell_id", 0) == 0) {
            first = false;
            continue;
        }
        first = false;
        const auto fields = split(line, ',');
        if (fields.size() != 2) throw std::runtime_error(path + ": bad region line: " + line);
        out.emplace_back(cell_from_string(fields[0]),
                         static_cast<std::uint32_t>(std::stoul(fields[1])));
    }
    return out;
}

void write_records_csv(const std::string& path, const std::vector<LbsRecord>& records) {
    std::ostringstream out;
    out << "user_id,timestamp,lat,lng\n";
    for (const auto& r : records)
        out << r.user_id << ',' << r.timestamp << ',' << format_double_17g(r.point.lat)
            << ',' << format_double_17g(r.point.lng) << '\n';
    write_file(path, std::move(out).str());
}

void export_features(const std::string& path, const Matrix& embeddings,
                     const std::vector<CellId>& cells,
                     const std::vector<std::uint32_t>& ids) {
    std::ostringstream out;
    out << "cell_id";
    for (std::size_t j = 0; j < embeddings.cols; ++j) out << ",v" << (j + 1);
    out << '\n';
    for (std::uint32_t id : ids) {
        if (id >= embeddings.rows)
            throw std::out_of_range("export_features: id out of range");
        out << cell_to_string(cells[id]);
        for (std::size_t j = 0; j < embeddings.cols; ++j)
            out << ',' << format_double_17g(embeddings.at(id, j));
        out << '\n';
    }
    write_file(path, std::move(out).str());
}

void write_manifest(const std::string& output_path, const PipelineManifest& m) {
    nlohmann::json j;
    j["stage"] = m.stage;
    j["tool_version"] = m.tool_version;
    j["seed"] = m.seed;
    j["wall_time_s"] = m.wall_time_s;
    j["config"] = m.config;
    j["inputs"] = m.input_digests;
    j["outputs"] = m.output_digests;
    write_file(output_path + ".manifest.json", j.dump(2) + "\n");
}

void verify_against_manifest(const std::string& path) {
    const std::string manifest_path = path + ".manifest.json";
    std::ifstream in(manifest_path);
    if (!in) return;  // no manifest, nothing to verify
    nlohmann::json j;
    in >> j;
    if (!j.contains("outputs")) return;
    const auto& outputs = j["outputs"];
    if (!outputs.contains(path)) return;
    const std::string recorded = outputs[path].get<std::string>();
    const std::string actual = file_digest(path);
    if (recorded != actual)
        throw std::runtime_error("digest mismatch for " + path + ": manifest records " +
                                 recorded + " but file hashes to " + actual);
}

}  // namespace l2v
