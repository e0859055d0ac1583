#include "hddb/cost.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hddb {

using nlohmann::json;

void DeviceConstants::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0)) throw DomainError(std::string("device constant ") + name + " must be positive");
    };
    positive(page_read_latency_us, "page_read_latency_us");
    positive(page_program_latency_ms, "page_program_latency_ms");
    positive(read_energy_pj_per_bit, "read_energy_pj_per_bit");
    positive(write_energy_pj_per_bit, "write_energy_pj_per_bit");
    positive(etc_nsp_power_mw, "etc_nsp_power_mw");
    positive(lud_nsp_power_mw, "lud_nsp_power_mw");
    positive(nsp_clock_ghz, "nsp_clock_ghz");
    if (!wl_count || !bl_count || !blocks || !xor_lanes || !alu_units)
        throw DomainError("device geometry constants must be positive");
}

uint32_t DeviceConstants::effective_planes(double table_cells) const {
    if (planes) return planes;
    double derived = std::ceil(table_cells / double(cells_per_plane()));
    return uint32_t(std::max(1.0, derived));
}

json DeviceConstants::to_json() const {
    return json{{"page_read_latency_us", page_read_latency_us},
                {"page_program_latency_ms", page_program_latency_ms},
                {"read_energy_pj_per_bit", read_energy_pj_per_bit},
                {"write_energy_pj_per_bit", write_energy_pj_per_bit},
                {"etc_nsp_power_mw", etc_nsp_power_mw},
                {"lud_nsp_power_mw", lud_nsp_power_mw},
                {"nsp_clock_ghz", nsp_clock_ghz},
                {"wl_count", wl_count},
                {"bl_count", bl_count},
                {"blocks", blocks},
                {"xor_lanes", xor_lanes},
                {"alu_units", alu_units},
                {"planes", planes}};
}

DeviceConstants DeviceConstants::from_json(const json& j) {
    DeviceConstants c;
    c.page_read_latency_us = j.value("page_read_latency_us", c.page_read_latency_us);
    c.page_program_latency_ms = j.value("page_program_latency_ms", c.page_program_latency_ms);
    c.read_energy_pj_per_bit = j.value("read_energy_pj_per_bit", c.read_energy_pj_per_bit);
    c.write_energy_pj_per_bit = j.value("write_energy_pj_per_bit", c.write_energy_pj_per_bit);
    c.etc_nsp_power_mw = j.value("etc_nsp_power_mw", c.etc_nsp_power_mw);
    c.lud_nsp_power_mw = j.value("lud_nsp_power_mw", c.lud_nsp_power_mw);
    c.nsp_clock_ghz = j.value("nsp_clock_ghz", c.nsp_clock_ghz);
    c.wl_count = j.value("wl_count", c.wl_count);
    c.bl_count = j.value("bl_count", c.bl_count);
    c.blocks = j.value("blocks", c.blocks);
    c.xor_lanes = j.value("xor_lanes", c.xor_lanes);
    c.alu_units = j.value("alu_units", c.alu_units);
    c.planes = j.value("planes", c.planes);
    c.validate();
    return c;
}

json CostReport::to_json() const {
    json steps = json::array();
    for (const auto& s : breakdown) {
        steps.push_back({{"step", s.step},
                         {"name", s.name},
                         {"pages_read", s.pages_read},
                         {"sensing_cycles", s.sensing_cycles},
                         {"nsp_cycles", s.nsp_cycles},
                         {"latency_us", s.latency_us},
                         {"energy_uj", s.energy_uj}});
    }
    return json{{"label", label},
                {"pages_read", pages_read},
                {"sensing_cycles", sensing_cycles},
                {"nsp_cycles", nsp_cycles},
                {"latency_us", latency_us},
                {"energy_uj", energy_uj},
                {"planes", planes},
                {"breakdown", std::move(steps)},
                {"assumptions", assumptions}};
}

CostReport estimate(const QueryCounters& counters, double table_cells,
                    const DeviceConstants& constants, const std::string& label) {
    constants.validate();
    CostReport report;
    report.label = label;
    report.planes = constants.effective_planes(table_cells);
    report.assumptions = {
        "query broadcast over the interconnect tree is treated as zero-latency",
        "pages are accounted fractionally; reads spread evenly across planes",
        "scratchpad buffering (steps 5, 11) is overlapped with neighboring stages"};

    double page_cells = double(constants.cells_per_page());
    double cycle_us = 1e-3 / constants.nsp_clock_ghz;  // one NSP cycle in us

    // Per-stage NSP cycle counts. Parallel-unit stages divide fractionally,
    // like pages, so costs stay exactly linear in the operation counts.
    double etc_accum = double(counters.etc_accum_ops);
    double etc_compare = double(counters.etc_compare_ops);
    double etc_unbind = double(counters.etc_unbind_word_ops) / double(constants.xor_lanes);
    double lud_accum = double(counters.lud_accum_ops);
    double lud_alu = double(counters.lud_alu_ops) / double(constants.alu_units);

    auto read_latency = [&](double cell_reads, uint32_t planes) {
        return cell_reads / page_cells / double(planes) * constants.page_read_latency_us;
    };
    auto read_energy = [&](double cell_reads) {
        // 3 bits sensed per cell-read event; pJ -> uJ.
        return cell_reads * 3.0 * constants.read_energy_pj_per_bit * 1e-6;
    };

    // mW * us = nJ; -> uJ.
    auto nsp_energy = [&](double cycles, double power_mw) {
        return power_mw * (cycles * cycle_us) * 1e-3;
    };

    std::vector<CostStep> steps(13);
    const char* names[13] = {"query_broadcast",      "table_search",
                             "etc_score_accumulate", "selection_compare",
                             "select_scratchpad",    "unbind_xor",
                             "forward_to_lud",       "lud_search",
                             "lud_score_accumulate", "result_select",
                             "lud_scratchpad",       "aggregate_alu",
                             "return_to_host"};
    for (int i = 0; i < 13; ++i) {
        steps[size_t(i)].step = i + 1;
        steps[size_t(i)].name = names[i];
    }

    // Step 2: in-situ search on the table cores.
    steps[1].pages_read = counters.etc_cell_reads / page_cells;
    steps[1].sensing_cycles = counters.etc_sensing_passes;
    steps[1].latency_us = read_latency(counters.etc_cell_reads, report.planes);
    steps[1].energy_uj = read_energy(counters.etc_cell_reads);
    // Step 3: score accumulation in the table-core NSP.
    steps[2].nsp_cycles = etc_accum;
    steps[2].latency_us = etc_accum * cycle_us;
    steps[2].energy_uj = nsp_energy(etc_accum, constants.etc_nsp_power_mw);
    // Step 4: selection comparisons (bin indices / thresholds).
    steps[3].nsp_cycles = etc_compare;
    steps[3].latency_us = etc_compare * cycle_us;
    steps[3].energy_uj = nsp_energy(etc_compare, constants.etc_nsp_power_mw);
    // Step 6: unbinding in the parallel XOR array.
    steps[5].nsp_cycles = etc_unbind;
    steps[5].latency_us = etc_unbind * cycle_us;
    steps[5].energy_uj = nsp_energy(etc_unbind, constants.etc_nsp_power_mw);
    // Step 8: dictionary search on the lookup cores (single dedicated core).
    steps[7].pages_read = counters.lud_cell_reads / page_cells;
    steps[7].sensing_cycles = counters.lud_sensing_passes;
    steps[7].latency_us = read_latency(counters.lud_cell_reads, 1);
    steps[7].energy_uj = read_energy(counters.lud_cell_reads);
    // Step 9: dictionary score accumulation.
    steps[8].nsp_cycles = lud_accum;
    steps[8].latency_us = lud_accum * cycle_us;
    steps[8].energy_uj = nsp_energy(lud_accum, constants.lud_nsp_power_mw);
    // Step 12: aggregation ALU.
    steps[11].nsp_cycles = lud_alu;
    steps[11].latency_us = lud_alu * cycle_us;
    steps[11].energy_uj = nsp_energy(lud_alu, constants.lud_nsp_power_mw);

    for (const auto& s : steps) {
        report.pages_read += s.pages_read;
        report.sensing_cycles += s.sensing_cycles;
        report.nsp_cycles += s.nsp_cycles;
        report.latency_us += s.latency_us;
        report.energy_uj += s.energy_uj;
    }
    report.breakdown = std::move(steps);
    return report;
}

std::vector<CostReport> compare_scenarios(std::vector<CostReport> reports) {
    std::stable_sort(reports.begin(), reports.end(), [](const CostReport& a, const CostReport& b) {
        if (a.latency_us != b.latency_us) return a.latency_us < b.latency_us;
        return a.energy_uj < b.energy_uj;
    });
    return reports;
}

json scenarios_to_json(const std::vector<CostReport>& ranked) {
    json arr = json::array();
    for (size_t i = 0; i < ranked.size(); ++i) {
        json r = ranked[i].to_json();
        r["rank"] = i + 1;
        arr.push_back(std::move(r));
    }
    return arr;
}

std::string scenarios_to_csv(const std::vector<CostReport>& ranked) {
    std::ostringstream out;
    out << "rank,label,planes,pages_read,sensing_cycles,nsp_cycles,latency_us,energy_uj\n";
    for (size_t i = 0; i < ranked.size(); ++i) {
        const auto& r = ranked[i];
        out << (i + 1) << ',' << r.label << ',' << r.planes << ',' << r.pages_read << ','
            << r.sensing_cycles << ',' << r.nsp_cycles << ',' << r.latency_us << ','
            << r.energy_uj << '\n';
    }
    return out.str();
}

}  // namespace hddb
