#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <unordered_map>
#include <vector>

#include "l2v/geo.hpp"

namespace l2v {

struct LbsRecord {
    std::string user_id;
    std::int64_t timestamp = 0;  // seconds since epoch
    GeoPoint point;
};

struct ParseResult {
    std::vector<LbsRecord> records;
    std::size_t rejected = 0;
    std::vector<std::string> rejection_samples;  // first few, for reporting
};

// CSV lines `user_id,timestamp,lat,lng`. A header is detected by a
// non-numeric second field and skipped. Malformed lines are counted,
// never fatal.
ParseResult parse_records(std::istream& in);

struct Trajectory {
    std::string user_id;
    std::vector<CellId> cells;
    std::vector<std::int64_t> timestamps;  // parallel to cells

    std::size_t size() const { return cells.size(); }
};

// Per user: sort by timestamp (stable), cut whenever the gap between
// consecutive records exceeds max_gap, map points to cells at `level`,
// collapse consecutive duplicate cells keeping the first timestamp.
std::vector<Trajectory> sessionize(const std::vector<LbsRecord>& records,
                                   std::int64_t max_gap, int level);

// Dense ids for observed cells, assigned in first-appearance order over
// the trajectory list. visit_count counts trajectory positions per cell.
struct LocationIndex {
    std::vector<CellId> cells;                                   // id -> cell
    std::unordered_map<CellId, std::uint32_t, CellIdHash> ids;   // cell -> id
    std::vector<std::uint64_t> visit_count;                      // id -> count

    std::size_t size() const { return cells.size(); }

    std::uint32_t id_of(const CellId& c) const;  // throws if unknown
    bool contains(const CellId& c) const { return ids.count(c) != 0; }

    // Appends a cell with visit_count 0 if not present; returns its id.
    std::uint32_t add_cell(const CellId& c);
};

LocationIndex build_location_index(const std::vector<Trajectory>& trajectories);

// Adds every grid cell inside the bounding box of the observed cells
// (visit_count 0 for the new ones). All observed cells must share `level`.
void densify_bounding_box(LocationIndex& index, int level);

// Trajectories with cells replaced by dense ids; the corpus the trainer consumes.
std::vector<std::vector<std::uint32_t>> trajectories_to_ids(
    const std::vector<Trajectory>& trajectories, const LocationIndex& index);

}  // namespace l2v
