#include "l2v/trajectory.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <stdexcept>

namespace l2v {

namespace {

bool parse_double(const std::string& s, double& out) {
    const char* b = s.data();
    const char* e = b + s.size();
    while (b < e && (*b == ' ' || *b == '\t')) ++b;
    auto [p, ec] = std::from_chars(b, e, out);
    return ec == std::errc{} && p == e;
}

bool parse_int64(const std::string& s, std::int64_t& out) {
    const char* b = s.data();
    const char* e = b + s.size();
    while (b < e && (*b == ' ' || *b == '\t')) ++b;
    auto [p, ec] = std::from_chars(b, e, out);
    return ec == std::errc{} && p == e;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

}  // namespace

ParseResult parse_records(std::istream& in) {
    ParseResult result;
    std::string line;
    bool first = true;
    auto reject = [&](const std::string& why, const std::string& l) {
        ++result.rejected;
        if (result.rejection_samples.size() < 10)
            result.rejection_samples.push_back(why + ": " + l);
    };
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_csv(line);
        if (first) {
            first = false;
            std::int64_t probe;
            if (fields.size() >= 2 && !parse_int64(fields[1], probe)) continue;  // header
        }
        if (fields.size() != 4) {
            reject("expected 4 fields", line);
            continue;
        }
        LbsRecord rec;
        rec.user_id = fields[0];
        double lat, lng;
        if (rec.user_id.empty()) {
            reject("empty user id", line);
        } else if (!parse_int64(fields[1], rec.timestamp) || rec.timestamp < 0) {
            reject("bad timestamp", line);
        } else if (!parse_double(fields[2], lat) || !parse_double(fields[3], lng)) {
            reject("bad coordinate", line);
        } else if (!std::isfinite(lat) || !std::isfinite(lng) || lat < -90.0 || lat > 90.0 ||
                   lng < -180.0 || lng > 180.0) {
            reject("coordinate out of range", line);
        } else {
            rec.point = make_geo_point(lat, lng);
            result.records.push_back(std::move(rec));
        }
    }
    return result;
}

std::vector<Trajectory> sessionize(const std::vector<LbsRecord>& records,
                                   std::int64_t max_gap, int level) {
    if (max_gap <= 0) throw std::invalid_argument("max_gap must be positive");

    // Group per user preserving first-appearance order of users so the
    // output is independent of input permutation after the per-user sort.
    std::map<std::string, std::vector<const LbsRecord*>> by_user;
    for (const auto& r : records) by_user[r.user_id].push_back(&r);

    std::vector<Trajectory> out;
    for (auto& [user, recs] : by_user) {
        std::stable_sort(recs.begin(), recs.end(),
                         [](const LbsRecord* a, const LbsRecord* b) {
                             return a->timestamp < b->timestamp;
                         });
        Trajectory cur;
        auto flush = [&] {
            if (!cur.cells.empty()) out.push_back(std::move(cur));
            cur = Trajectory{};
            cur.user_id = user;
        };
        cur.user_id = user;
        std::int64_t prev_ts = 0;
        for (const LbsRecord* r : recs) {
            if (!cur.cells.empty() && r->timestamp - prev_ts > max_gap) flush();
            const CellId cell = cell_from_point(r->point, level);
            if (cur.cells.empty() || cur.cells.back() != cell) {
                cur.cells.push_back(cell);
                cur.timestamps.push_back(r->timestamp);
            }
            prev_ts = r->timestamp;
        }
        flush();
    }
    return out;
}

std::uint32_t LocationIndex::id_of(const CellId& c) const {
    const auto it = ids.find(c);
    if (it == ids.end())
        throw std::out_of_range("unknown cell: " + cell_to_string(c));
    return it->second;
}

std::uint32_t LocationIndex::add_cell(const CellId& c) {
    const auto it = ids.find(c);
    if (it != ids.end()) return it->second;
    const auto id = static_cast<std::uint32_t>(cells.size());
    cells.push_back(c);
    visit_count.push_back(0);
    ids.emplace(c, id);
    return id;
}

LocationIndex build_location_index(const std::vector<Trajectory>& trajectories) {
    if (trajectories.empty())
        throw std::invalid_argument("cannot index an empty trajectory set");
    LocationIndex index;
    for (const auto& t : trajectories) {
        for (const auto& c : t.cells) {
            const auto id = index.add_cell(c);
            ++index.visit_count[id];
        }
    }
    return index;
}

void densify_bounding_box(LocationIndex& index, int level) {
    std::uint32_t min_x = UINT32_MAX, min_y = UINT32_MAX, max_x = 0, max_y = 0;
    for (const auto& c : index.cells) {
        if (c.level != level)
            throw std::invalid_argument("densify: mixed cell levels");
        std::uint32_t x, y;
        hilbert_decode(c.index, level, x, y);
        min_x = std::min(min_x, x); max_x = std::max(max_x, x);
        min_y = std::min(min_y, y); max_y = std::max(max_y, y);
    }
    const std::uint64_t area = static_cast<std::uint64_t>(max_x - min_x + 1) *
                               static_cast<std::uint64_t>(max_y - min_y + 1);
    if (area > 10'000'000ull)
        throw std::invalid_argument("densify: bounding box too large (" +
                                    std::to_string(area) + " cells)");
    for (std::uint32_t y = min_y; y <= max_y; ++y)
        for (std::uint32_t x = min_x; x <= max_x; ++x)
            index.add_cell(CellId{level, hilbert_encode(x, y, level)});
}

std::vector<std::vector<std::uint32_t>> trajectories_to_ids(
    const std::vector<Trajectory>& trajectories, const LocationIndex& index) {
    std::vector<std::vector<std::uint32_t>> out;
    out.reserve(trajectories.size());
    for (const auto& t : trajectories) {
        std::vector<std::uint32_t> ids;
        ids.reserve(t.cells.size());
        for (const auto& c : t.cells) ids.push_back(index.id_of(c));
        out.push_back(std::move(ids));
    }
    return out;
}

}  // namespace l2v
