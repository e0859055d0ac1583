#pragma once

// Dimension x noise sweeps: encode the table at each row dimension, inject
// each noise level, calibrate, run the query suites, and record two
// per-point metrics against the plaintext reference engine:
//   predicate accuracy - fraction of queries whose selection mask matches
//                        the reference exactly;
//   decode accuracy    - fraction of queries whose full result (mask plus
//                        decoded projection, or aggregate value) matches
//                        exactly. A query with a correct mask but any
//                        mis-decoded selected cell counts as a decode miss,
//                        so decode accuracy never exceeds predicate
//                        accuracy.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hddb/dbam.hpp"
#include "hddb/gen.hpp"
#include "hddb/table.hpp"

#include "json.hpp"

namespace hddb {

struct ExperimentSpec {
    std::string preset = "store_sales_like";
    // When csv_path is set, rows come from that file instead of the
    // generator; schema (defaulting to the preset's) must describe its
    // columns.
    std::string csv_path;
    std::vector<ColumnSpec> schema;
    uint64_t rows = 10000;
    std::vector<uint32_t> dims;    // per-row dimension grid
    std::vector<double> noises;    // cell-corruption fraction grid
    uint32_t queries_per_family = 200;
    uint64_t seed = 1;
    Backend backend = Backend::ExactHamming;
    DbamConfig dbam;

    void validate() const;
};

struct SweepPoint {
    uint32_t dim = 0;
    double noise = 0.0;
    uint32_t queries = 0;
    uint32_t predicate_exact = 0;
    uint32_t result_exact = 0;
    bool calibration_ok = false;
    double threshold = 0.0;
    std::string error;

    double predicate_accuracy() const {
        return queries ? double(predicate_exact) / double(queries) : 0.0;
    }
    double decode_accuracy() const {
        return queries ? double(result_exact) / double(queries) : 0.0;
    }
};

struct SweepOutcome {
    ExperimentSpec spec;
    std::string plan_hash;  // of the plan at the first grid dimension
    std::vector<SweepPoint> points;

    std::string to_csv() const;
    nlohmann::json summary_json() const;
};

SweepOutcome run_sweep(const ExperimentSpec& spec, std::ostream* progress = nullptr);

}  // namespace hddb
