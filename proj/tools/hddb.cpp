// hddb: encode CSV tables into simulated TLC flash images of binary
// hypervectors, evaluate predicates and aggregations over them, and run
// noise/dimension sweep experiments.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 calibration failure.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "hddb/common.hpp"
#include "hddb/cost.hpp"
#include "hddb/csv.hpp"
#include "hddb/dbam.hpp"
#include "hddb/gen.hpp"
#include "hddb/plainscan.hpp"
#include "hddb/query.hpp"
#include "hddb/sweep.hpp"
#include "hddb/table.hpp"

using nlohmann::json;
using namespace hddb;

namespace {

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << content;
    if (!out) throw IoError("failed writing: " + path);
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    return json::parse(in);
}

void emit(const json& j, const std::string& path) {
    if (path.empty())
        std::cout << j.dump(2) << "\n";
    else
        write_text_file(path, j.dump(2) + "\n");
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

struct LoadedImage {
    EncodingPlan plan;
    uint64_t row_count = 0;
    EncodedTable table;
};

LoadedImage load_image(const std::string& image_path, const std::string& manifest_path) {
    uint64_t rows = 0;
    EncodingPlan plan = read_manifest(manifest_path, &rows);
    LoadedImage li{plan, rows, read_image(image_path, plan)};
    if (li.table.row_count() != rows)
        throw IoError("manifest row_count disagrees with the image");
    return li;
}

DeviceConstants load_constants(const std::string& path) {
    if (path.empty()) return DeviceConstants{};
    return DeviceConstants::from_json(read_json_file(path));
}

// --- encode ------------------------------------------------------------------

int cmd_encode(const std::string& csv_path, const std::string& plan_path,
               const std::string& image_path, const std::string& manifest_path) {
    EncodingPlan plan = EncodingPlan::from_json(read_json_file(plan_path));
    PlainTable table = PlainTable::from_csv(read_csv_file(csv_path));
    EncoderBank bank(plan);
    EncodedTable encoded = encode_table(table, plan, bank);
    write_image(encoded, image_path);
    write_manifest(encoded, manifest_path);
    json summary{{"version", kVersion},
                 {"plan_hash", plan.hash()},
                 {"seed", plan.master_seed},
                 {"row_count", encoded.row_count()},
                 {"row_dim", plan.row_dim()},
                 {"cells_per_row", encoded.cells_per_row()},
                 {"image", image_path},
                 {"manifest", manifest_path},
                 {"warnings", encoded.warnings()}};
    std::cout << summary.dump(2) << "\n";
    return 0;
}

// --- calibrate ---------------------------------------------------------------

int cmd_calibrate(const std::string& image_path, const std::string& manifest_path,
                  const std::string& noise_list, const std::string& backend_sel,
                  uint64_t seed, uint32_t samples, const std::string& out_path) {
    LoadedImage li = load_image(image_path, manifest_path);
    std::vector<double> noises;
    for (const auto& t : split_list(noise_list)) noises.push_back(std::stod(t));
    if (noises.empty()) noises.push_back(0.0);
    bool want_exact = backend_sel == "both" || backend_sel == "exact";
    bool want_dbam = backend_sel == "both" || backend_sel == "dbam";
    if (!want_exact && !want_dbam)
        throw DomainError("backend must be exact, dbam, or both");
    ThresholdProfile profile =
        calibrate_threshold(li.table, noises, DbamConfig{}, seed, samples, want_exact, want_dbam);
    json j = profile.to_json();
    emit(j, out_path);
    return 0;
}

// --- query -------------------------------------------------------------------

struct QueryFlags {
    std::string image, manifest, query_text, backend = "exact";
    std::string thresholds_path, constants_path;
    std::string agg_name, agg_column, project, out_csv, out_json;
    double noise = 0.0;
    uint64_t noise_seed = 0;
};

int cmd_query(const QueryFlags& f) {
    LoadedImage li = load_image(f.image, f.manifest);
    Backend backend = backend_from_name(f.backend);
    EncoderBank bank(li.plan);

    Predicate pred = parse_predicate(f.query_text, li.plan);

    std::optional<ThresholdProfile> thresholds;
    if (!f.thresholds_path.empty())
        thresholds = ThresholdProfile::from_json(read_json_file(f.thresholds_path));

    std::optional<EncodedTable> noisy;
    if (f.noise > 0) noisy = with_noise(li.table, f.noise, f.noise_seed);
    const EncodedTable& active = noisy ? *noisy : li.table;

    QueryEngine engine(active, bank, backend, DbamConfig{}, thresholds);

    std::optional<AggregationSpec> agg;
    if (!f.agg_name.empty()) {
        AggregationSpec spec;
        spec.function = agg_from_name(f.agg_name);
        spec.column = f.agg_column;
        spec.resolve(li.plan);
        agg = spec;
    }

    std::vector<uint32_t> project_cols;
    if (!f.project.empty()) {
        for (const auto& name : split_list(f.project)) {
            auto idx = li.plan.column_index(name);
            if (!idx) throw DomainError("unknown column in --project: " + name);
            project_cols.push_back(*idx);
        }
    }

    QueryResult result = engine.run_query(*pred, agg, project_cols);

    DeviceConstants constants = load_constants(f.constants_path);
    CostReport cost = estimate(result.counters,
                               double(active.row_count()) * double(active.cells_per_row()),
                               constants, "query");

    json leaves = json::array();
    for (const auto& l : result.leaves)
        leaves.push_back({{"column", l.column},
                          {"text", l.text},
                          {"threshold", l.threshold},
                          {"matches", l.matches}});
    json diag{{"leaves", std::move(leaves)}};
    if (result.projection) {
        json failures = json::array();
        for (const auto& fl : result.projection->failures)
            failures.push_back({{"row", fl.row}, {"column", fl.column}, {"reason", fl.reason}});
        diag["decode_failures"] = std::move(failures);
    }
    if (thresholds) {
        if (thresholds->has(backend))
            diag["threshold_used"] = thresholds->for_backend(backend).to_json();
    }

    json out{{"version", kVersion},
             {"plan_hash", li.plan.hash()},
             {"seed", li.plan.master_seed},
             {"backend", backend_name(backend)},
             {"noise", f.noise},
             {"noise_seed", f.noise_seed},
             {"query", f.query_text},
             {"selected", result.mask.count()},
             {"diagnostics", std::move(diag)},
             {"cost", cost.to_json()}};
    if (result.aggregate) {
        out["aggregate"] = {{"function", agg_name(agg->function)},
                            {"column", agg->column},
                            {"value", result.aggregate->to_json()}};
    }

    if (result.projection) {
        std::ostringstream csv;
        std::vector<std::string> header;
        if (project_cols.empty())
            header = [&] {
                std::vector<std::string> h;
                for (const auto& c : li.plan.columns) h.push_back(c.name);
                return h;
            }();
        else
            for (uint32_t c : project_cols) header.push_back(li.plan.columns[c].name);
        write_csv_row(csv, header);
        for (const auto& row : result.projection->rows) write_csv_row(csv, row);
        if (f.out_csv.empty())
            std::cout << csv.str();
        else
            write_text_file(f.out_csv, csv.str());
    }

    if (result.projection && f.out_json.empty()) {
        // Keep stdout machine-parseable: rows went to stdout, the JSON
        // report goes to stderr unless a file was requested.
        std::cerr << out.dump(2) << "\n";
    } else {
        emit(out, f.out_json);
    }
    return 0;
}

// --- sweep -------------------------------------------------------------------

int cmd_sweep(const std::string& preset, uint64_t rows, const std::string& dim_list,
              const std::string& noise_list, uint32_t queries, uint64_t seed,
              const std::string& backend_sel, const std::string& csv_in,
              const std::string& schema_path, const std::string& csv_out,
              const std::string& json_out, bool quiet) {
    ExperimentSpec spec;
    spec.preset = preset;
    spec.rows = rows;
    spec.csv_path = csv_in;
    if (!schema_path.empty()) spec.schema = schema_from_json(read_json_file(schema_path));
    for (const auto& t : split_list(dim_list)) spec.dims.push_back(uint32_t(std::stoul(t)));
    for (const auto& t : split_list(noise_list)) spec.noises.push_back(std::stod(t));
    spec.queries_per_family = queries;
    spec.seed = seed;
    spec.backend = backend_from_name(backend_sel);

    SweepOutcome outcome = run_sweep(spec, quiet ? nullptr : &std::cerr);
    if (!csv_out.empty())
        write_text_file(csv_out, outcome.to_csv());
    else
        std::cout << outcome.to_csv();
    if (!json_out.empty()) write_text_file(json_out, outcome.summary_json().dump(2) + "\n");
    for (const auto& p : outcome.points)
        if (!p.error.empty()) return 3;
    return 0;
}

// --- gen-table ---------------------------------------------------------------

int cmd_gen_table(const std::string& preset, uint64_t rows, uint64_t seed,
                  const std::string& out_path, const std::string& plan_out,
                  const std::string& schema_out, uint32_t row_dim) {
    PlainTable table = gen_table(preset, rows, seed);
    std::ostringstream csv;
    write_csv(csv, table.to_csv());
    json summary{{"version", kVersion}, {"preset", preset}, {"rows", rows}, {"seed", seed}};
    if (out_path.empty())
        std::cout << csv.str();
    else
        write_text_file(out_path, csv.str());
    if (!plan_out.empty()) {
        EncodingPlan plan = plan_for_preset(preset, row_dim, seed);
        write_text_file(plan_out, plan.to_json().dump(2) + "\n");
        summary["plan_hash"] = plan.hash();
        summary["row_dim"] = row_dim;
    }
    if (!schema_out.empty())
        write_text_file(schema_out, schema_to_json(preset_schema(preset)).dump(2) + "\n");
    // The CSV itself is the artifact when streamed; file outputs get the
    // reproducibility summary on stdout instead.
    if (!out_path.empty()) std::cout << summary.dump(2) << "\n";
    return 0;
}

// --- cost --------------------------------------------------------------------

int cmd_cost(const QueryFlags& f, const std::string& planes_list,
             const std::string& csv_out) {
    LoadedImage li = load_image(f.image, f.manifest);
    Backend backend = backend_from_name(f.backend);
    EncoderBank bank(li.plan);
    Predicate pred = parse_predicate(f.query_text, li.plan);

    std::optional<ThresholdProfile> thresholds;
    if (!f.thresholds_path.empty())
        thresholds = ThresholdProfile::from_json(read_json_file(f.thresholds_path));

    QueryEngine engine(li.table, bank, backend, DbamConfig{}, thresholds);
    std::optional<AggregationSpec> agg;
    if (!f.agg_name.empty()) {
        AggregationSpec spec;
        spec.function = agg_from_name(f.agg_name);
        spec.column = f.agg_column;
        spec.resolve(li.plan);
        agg = spec;
    }
    QueryResult result = engine.run_query(*pred, agg);

    DeviceConstants constants = load_constants(f.constants_path);
    double table_cells = double(li.table.row_count()) * double(li.table.cells_per_row());

    std::vector<CostReport> reports;
    if (planes_list.empty()) {
        reports.push_back(estimate(result.counters, table_cells, constants, "derived-planes"));
    } else {
        for (const auto& t : split_list(planes_list)) {
            DeviceConstants c = constants;
            c.planes = uint32_t(std::stoul(t));
            reports.push_back(
                estimate(result.counters, table_cells, c, "planes-" + t));
        }
    }
    auto ranked = compare_scenarios(std::move(reports));
    json out{{"version", kVersion},
             {"plan_hash", li.plan.hash()},
             {"seed", li.plan.master_seed},
             {"backend", backend_name(backend)},
             {"query", f.query_text},
             {"selected", result.mask.count()},
             {"constants", constants.to_json()},
             {"scenarios", scenarios_to_json(ranked)}};
    if (!csv_out.empty()) write_text_file(csv_out, scenarios_to_csv(ranked));
    emit(out, f.out_json);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"simulated in-storage hyperdimensional database engine"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    // encode
    auto* enc = app.add_subcommand("encode", "encode a CSV table into a flash image");
    std::string enc_csv, enc_plan, enc_image, enc_manifest;
    enc->add_option("--csv", enc_csv, "input CSV with header row")->required();
    enc->add_option("--plan", enc_plan, "encoding plan JSON")->required();
    enc->add_option("--image", enc_image, "output flash image path")->required();
    enc->add_option("--manifest", enc_manifest, "output manifest JSON path")->required();

    // calibrate
    auto* cal = app.add_subcommand("calibrate", "calibrate match thresholds from an image");
    std::string cal_image, cal_manifest, cal_noises = "0", cal_backend = "both", cal_out;
    uint64_t cal_seed = 1;
    uint32_t cal_samples = 128;
    cal->add_option("--image", cal_image)->required();
    cal->add_option("--manifest", cal_manifest)->required();
    cal->add_option("--noise", cal_noises, "comma-separated noise levels (default 0)");
    cal->add_option("--backend", cal_backend, "exact | dbam | both");
    cal->add_option("--seed", cal_seed, "calibration sampling seed");
    cal->add_option("--samples", cal_samples, "samples per noise level");
    cal->add_option("--out", cal_out, "output profile JSON (stdout if omitted)");

    // query
    auto* qry = app.add_subcommand("query", "evaluate a predicate over an image");
    QueryFlags qf;
    qry->add_option("--image", qf.image)->required();
    qry->add_option("--manifest", qf.manifest)->required();
    qry->add_option("--query", qf.query_text, "predicate text")->required();
    qry->add_option("--backend", qf.backend, "exact | dbam");
    qry->add_option("--thresholds", qf.thresholds_path, "calibration profile JSON");
    qry->add_option("--constants", qf.constants_path, "device constants JSON");
    qry->add_option("--noise", qf.noise, "cell corruption fraction applied before the query");
    qry->add_option("--seed", qf.noise_seed, "noise seed");
    qry->add_option("--agg", qf.agg_name, "COUNT | SUM | AVG | MIN | MAX");
    qry->add_option("--agg-column", qf.agg_column, "aggregation target column");
    qry->add_option("--project", qf.project, "comma-separated projection columns");
    qry->add_option("--out", qf.out_csv, "write projected rows CSV here instead of stdout");
    qry->add_option("--json", qf.out_json, "write the JSON report here");

    // sweep
    auto* swp = app.add_subcommand("sweep", "dimension x noise accuracy sweep");
    std::string swp_preset = "store_sales_like";
    uint64_t swp_rows = 10000, swp_seed = 1;
    std::string swp_dims = "70000,80000,90000,100000,110000";
    std::string swp_noises = "0,0.05,0.1,0.15";
    uint32_t swp_queries = 200;
    std::string swp_backend = "exact", swp_csv, swp_json, swp_csv_in, swp_schema;
    bool swp_quiet = false;
    swp->add_option("--preset", swp_preset, "schema preset");
    swp->add_option("--rows", swp_rows, "table rows (generator mode)");
    swp->add_option("--csv", swp_csv_in, "sweep an externally generated CSV instead");
    swp->add_option("--schema", swp_schema, "schema JSON describing the external CSV");
    swp->add_option("--dims", swp_dims, "comma-separated per-row dimensions");
    swp->add_option("--noises", swp_noises, "comma-separated noise levels");
    swp->add_option("--queries", swp_queries, "queries per family per grid point");
    swp->add_option("--seed", swp_seed, "master seed");
    swp->add_option("--backend", swp_backend, "exact | dbam");
    swp->add_option("--csv-out", swp_csv, "results CSV path (stdout if omitted)");
    swp->add_option("--json-out", swp_json, "summary JSON path");
    swp->add_flag("--quiet", swp_quiet, "suppress progress lines on stderr");

    // gen-table
    auto* gen = app.add_subcommand("gen-table", "generate a synthetic fact-style table");
    std::string gen_preset = "store_sales_like", gen_out, gen_plan_out, gen_schema_out;
    uint64_t gen_rows = 1000, gen_seed = 1;
    uint32_t gen_row_dim = 110000;
    gen->add_option("--preset", gen_preset, "schema preset");
    gen->add_option("--rows", gen_rows, "row count")->check(CLI::PositiveNumber);
    gen->add_option("--seed", gen_seed, "generator seed");
    gen->add_option("--out", gen_out, "output CSV path (stdout if omitted)");
    gen->add_option("--plan-out", gen_plan_out, "also write a matching plan JSON here");
    gen->add_option("--schema-out", gen_schema_out, "also write the schema JSON here");
    gen->add_option("--row-dim", gen_row_dim, "per-row bit budget for --plan-out");

    // cost
    auto* cst = app.add_subcommand("cost", "estimate query cost, optionally across plane counts");
    QueryFlags cf;
    std::string cst_planes, cst_csv;
    cst->add_option("--image", cf.image)->required();
    cst->add_option("--manifest", cf.manifest)->required();
    cst->add_option("--query", cf.query_text)->required();
    cst->add_option("--backend", cf.backend, "exact | dbam");
    cst->add_option("--thresholds", cf.thresholds_path, "calibration profile JSON");
    cst->add_option("--constants", cf.constants_path, "device constants JSON");
    cst->add_option("--agg", cf.agg_name, "COUNT | SUM | AVG | MIN | MAX");
    cst->add_option("--agg-column", cf.agg_column, "aggregation target column");
    cst->add_option("--planes", cst_planes, "comma-separated plane counts to compare");
    cst->add_option("--csv", cst_csv, "write the ranked scenarios CSV here");
    cst->add_option("--json", cf.out_json, "write the JSON report here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (enc->parsed()) return cmd_encode(enc_csv, enc_plan, enc_image, enc_manifest);
        if (cal->parsed())
            return cmd_calibrate(cal_image, cal_manifest, cal_noises, cal_backend, cal_seed,
                                 cal_samples, cal_out);
        if (qry->parsed()) return cmd_query(qf);
        if (swp->parsed())
            return cmd_sweep(swp_preset, swp_rows, swp_dims, swp_noises, swp_queries, swp_seed,
                             swp_backend, swp_csv_in, swp_schema, swp_csv, swp_json, swp_quiet);
        if (gen->parsed())
            return cmd_gen_table(gen_preset, gen_rows, gen_seed, gen_out, gen_plan_out,
                                 gen_schema_out, gen_row_dim);
        if (cst->parsed()) return cmd_cost(cf, cst_planes, cst_csv);
    } catch (const CalibrationError& e) {
        json err{{"error", e.what()},
                 {"match_min", e.match_min},
                 {"nonmatch_max", e.nonmatch_max}};
        std::cerr << err.dump(2) << "\n";
        return 3;
    } catch (const ParseError& e) {
        json err{{"error", e.what()}, {"offset", e.offset}};
        std::cerr << err.dump(2) << "\n";
        return 2;
    } catch (const Error& e) {
        json err{{"error", e.what()}};
        std::cerr << err.dump(2) << "\n";
        return 2;
    } catch (const std::exception& e) {
        json err{{"error", e.what()}};
        std::cerr << err.dump(2) << "\n";
        return 2;
    }
    return 1;
}
