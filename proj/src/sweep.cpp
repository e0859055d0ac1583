#include "hddb/sweep.hpp"

#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include "hddb/csv.hpp"
#include "hddb/plainscan.hpp"
#include "hddb/query.hpp"

namespace hddb {

using nlohmann::json;

void ExperimentSpec::validate() const {
    if (dims.empty()) throw DomainError("sweep needs at least one dimension grid point");
    if (noises.empty()) throw DomainError("sweep needs at least one noise grid point");
    if (csv_path.empty() && rows < 1) throw DomainError("sweep needs at least one row");
    if (queries_per_family < 1) throw DomainError("sweep needs at least one query per family");
    for (double p : noises)
        if (p < 0 || p > 1) throw DomainError("noise levels must lie in [0, 1]");
    dbam.validate();
}

namespace {

struct PreparsedQuery {
    GeneratedQuery gen;
    Predicate pred;                  // parsed against the current plan
    SelectionMask oracle_mask;
    std::vector<std::vector<std::string>> oracle_rows;  // filter family
    AggregateResult oracle_agg;                          // aggregate family
};

}  // namespace

SweepOutcome run_sweep(const ExperimentSpec& spec, std::ostream* progress) {
    spec.validate();
    SweepOutcome outcome;
    outcome.spec = spec;

    auto schema = spec.schema.empty() ? preset_schema(spec.preset) : spec.schema;
    PlainTable table;
    if (spec.csv_path.empty()) {
        table = gen_table(spec.preset, spec.rows, spec.seed);
    } else {
        table = PlainTable::from_csv(read_csv_file(spec.csv_path));
        if (table.column_names.size() != schema.size())
            throw DomainError("CSV has " + std::to_string(table.column_names.size()) +
                              " columns, schema describes " + std::to_string(schema.size()));
        for (size_t c = 0; c < schema.size(); ++c)
            if (table.column_names[c] != schema[c].name)
                throw DomainError("CSV column '" + table.column_names[c] +
                                  "' does not match schema column '" + schema[c].name + "'");
        outcome.spec.rows = table.row_count();
    }
    auto filter_queries =
        gen_queries(table, schema, QueryFamily::Filter, spec.queries_per_family, spec.seed);
    auto agg_queries = gen_queries(table, schema, QueryFamily::FilterAggregate,
                                   spec.queries_per_family, spec.seed);

    std::vector<uint32_t> all_columns;
    for (uint32_t c = 0; c < schema.size(); ++c) all_columns.push_back(c);

    for (size_t di = 0; di < spec.dims.size(); ++di) {
        uint32_t dim = spec.dims[di];
        EncodingPlan plan = make_plan(schema, dim, spec.seed);
        if (di == 0) outcome.plan_hash = plan.hash();
        EncoderBank bank(plan);
        PlainScanEngine oracle(table, plan);

        // Parse and pre-evaluate the suite once per dimension; query text is
        // dimension-independent but the AST binds to this plan.
        std::vector<PreparsedQuery> suite;
        suite.reserve(filter_queries.size() + agg_queries.size());
        auto prepare = [&](const GeneratedQuery& g) {
            PreparsedQuery pq;
            pq.gen = g;
            pq.pred = parse_predicate(g.text, plan);
            pq.oracle_mask = oracle.eval(*pq.pred);
            if (g.agg)
                pq.oracle_agg = oracle.aggregate(pq.oracle_mask, *g.agg);
            else
                pq.oracle_rows = oracle.project(pq.oracle_mask, all_columns);
            suite.push_back(std::move(pq));
        };
        for (const auto& g : filter_queries) prepare(g);
        for (const auto& g : agg_queries) prepare(g);

        EncodedTable clean = encode_table(table, plan, bank);

        for (size_t ni = 0; ni < spec.noises.size(); ++ni) {
            double noise = spec.noises[ni];
            size_t point_index = di * spec.noises.size() + ni;
            SweepPoint point;
            point.dim = dim;
            point.noise = noise;

            try {
                double levels[1] = {noise};
                ThresholdProfile profile = calibrate_threshold(
                    clean, levels, spec.dbam, derive_seed(spec.seed, 8000 + point_index),
                    /*samples_per_level=*/128,
                    /*want_exact=*/spec.backend == Backend::ExactHamming,
                    /*want_dbam=*/spec.backend == Backend::Dbam);
                point.calibration_ok = true;
                point.threshold = profile.for_backend(spec.backend).threshold;

                std::optional<EncodedTable> noisy;
                if (noise > 0)
                    noisy = with_noise(clean, noise, derive_seed(spec.seed, 7000 + point_index));
                const EncodedTable& active = noisy ? *noisy : clean;
                auto caches = std::make_shared<TableCaches>(active.column_count());
                QueryEngine engine(active, bank, spec.backend, spec.dbam, profile, caches);

                for (const auto& pq : suite) {
                    ++point.queries;
                    bool mask_ok = false;
                    bool result_ok = false;
                    if (pq.gen.agg) {
                        QueryResult qr = engine.run_query(*pq.pred, pq.gen.agg);
                        mask_ok = qr.mask == pq.oracle_mask;
                        result_ok = mask_ok && qr.aggregate && *qr.aggregate == pq.oracle_agg;
                    } else {
                        QueryResult qr = engine.run_query(*pq.pred, std::nullopt, all_columns);
                        mask_ok = qr.mask == pq.oracle_mask;
                        result_ok = mask_ok && qr.projection && qr.projection->failures.empty() &&
                                    qr.projection->rows == pq.oracle_rows;
                    }
                    point.predicate_exact += mask_ok;
                    point.result_exact += result_ok;
                }
            } catch (const Error& e) {
                point.error = e.what();
            }

            if (progress) {
                *progress << "dim=" << dim << " noise=" << noise
                          << " predicate=" << point.predicate_accuracy()
                          << " decode=" << point.decode_accuracy();
                if (!point.error.empty()) *progress << " error=" << point.error;
                *progress << std::endl;
            }
            outcome.points.push_back(std::move(point));
        }
    }
    return outcome;
}

std::string SweepOutcome::to_csv() const {
    std::ostringstream out;
    out << "dim,noise,queries,predicate_exact,result_exact,predicate_accuracy,decode_accuracy,"
           "calibration_ok,error\n";
    char buf[64];
    for (const auto& p : points) {
        std::snprintf(buf, sizeof buf, "%.6f", p.noise);
        out << p.dim << ',' << buf << ',' << p.queries << ',' << p.predicate_exact << ','
            << p.result_exact << ',';
        std::snprintf(buf, sizeof buf, "%.6f", p.predicate_accuracy());
        out << buf << ',';
        std::snprintf(buf, sizeof buf, "%.6f", p.decode_accuracy());
        out << buf << ',' << (p.calibration_ok ? 1 : 0) << ',' << csv_escape(p.error) << '\n';
    }
    return out.str();
}

json SweepOutcome::summary_json() const {
    json pts = json::array();
    for (const auto& p : points) {
        pts.push_back({{"dim", p.dim},
                       {"noise", p.noise},
                       {"queries", p.queries},
                       {"predicate_exact", p.predicate_exact},
                       {"result_exact", p.result_exact},
                       {"predicate_accuracy", p.predicate_accuracy()},
                       {"decode_accuracy", p.decode_accuracy()},
                       {"calibration_ok", p.calibration_ok},
                       {"threshold", p.threshold},
                       {"error", p.error}});
    }
    json out{{"version", kVersion},
             {"preset", spec.preset},
             {"rows", spec.rows},
             {"queries_per_family", spec.queries_per_family},
             {"seed", spec.seed},
             {"backend", backend_name(spec.backend)},
             {"plan_hash", plan_hash},
             {"dims", spec.dims},
             {"noises", spec.noises},
             {"points", std::move(pts)}};
    if (!spec.csv_path.empty()) out["csv"] = spec.csv_path;
    return out;
}

}  // namespace hddb
