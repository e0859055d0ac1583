#pragma once

// First-order analytic latency/energy model of the in-storage architecture,
// driven by the query engine's instrumentation counters. Pages are
// accounted fractionally (cells / page size) so costs are exactly linear
// in rows scanned; per-plane parallelism divides read latency. The model
// deliberately does not attempt cycle accuracy or host-engine comparisons;
// it supports scaling-trend studies only.

#include <cstdint>
#include <string>
#include <vector>

#include "hddb/common.hpp"
#include "hddb/query.hpp"

#include "json.hpp"

namespace hddb {

struct DeviceConstants {
    double page_read_latency_us = 75.0;     // midpoint of the 50-100 us/page range
    double page_program_latency_ms = 0.5;   // midpoint of 0.2-0.8 ms/page
    double read_energy_pj_per_bit = 2.28;
    double write_energy_pj_per_bit = 34.2;
    double etc_nsp_power_mw = 39.791;
    double lud_nsp_power_mw = 42.924;
    double nsp_clock_ghz = 1.0;
    uint32_t wl_count = 128;
    uint32_t bl_count = 16384;
    uint32_t blocks = 128;
    uint32_t xor_lanes = 42;  // parallel XOR width in the table-core NSP
    uint32_t alu_units = 2;   // aggregation ALUs in the dictionary-core NSP
    // Planes the table spreads across; 0 derives ceil(table cells / plane
    // cells) from the table geometry.
    uint32_t planes = 0;

    void validate() const;
    uint64_t cells_per_page() const { return bl_count; }
    uint64_t cells_per_plane() const {
        return uint64_t(wl_count) * bl_count * blocks;
    }
    uint32_t effective_planes(double table_cells) const;

    nlohmann::json to_json() const;
    static DeviceConstants from_json(const nlohmann::json& j);
};

struct CostStep {
    int step = 0;  // dataflow step number, 1-13
    std::string name;
    double pages_read = 0;
    uint64_t sensing_cycles = 0;
    double nsp_cycles = 0;  // fractional, like pages: keeps costs exactly linear
    double latency_us = 0;
    double energy_uj = 0;
};

struct CostReport {
    std::string label;
    double pages_read = 0;
    uint64_t sensing_cycles = 0;
    double nsp_cycles = 0;
    double latency_us = 0;
    double energy_uj = 0;
    uint32_t planes = 1;
    std::vector<CostStep> breakdown;
    std::vector<std::string> assumptions;

    nlohmann::json to_json() const;
};

// table_cells: total TLC cells of the scanned table (rows x cells per row),
// used to derive the plane count when constants.planes == 0.
CostReport estimate(const QueryCounters& counters, double table_cells,
                    const DeviceConstants& constants, const std::string& label = "");

// Stable sort by (latency, energy); equal reports keep their input order.
std::vector<CostReport> compare_scenarios(std::vector<CostReport> reports);

nlohmann::json scenarios_to_json(const std::vector<CostReport>& ranked);
std::string scenarios_to_csv(const std::vector<CostReport>& ranked);

}  // namespace hddb
