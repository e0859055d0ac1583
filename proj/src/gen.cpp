#include "hddb/gen.hpp"

#include <algorithm>

namespace hddb {

namespace {

const std::vector<std::string>& city_pool() {
    static const std::vector<std::string> cities = {
        "SAN DIEGO",   "LA JOLLA",    "SEATTLE",    "PORTLAND",   "DENVER",
        "AUSTIN",      "BOSTON",      "CHICAGO",    "HOUSTON",    "PHOENIX",
        "ATLANTA",     "DETROIT",     "MEMPHIS",    "OAKLAND",    "TUCSON",
        "EL PASO",     "FRESNO",      "MESA",       "OMAHA",      "RALEIGH"};
    return cities;
}

std::vector<std::string> store_pool() {
    std::vector<std::string> stores;
    for (int i = 1; i <= 24; ++i) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "store_%02d", i);
        stores.emplace_back(buf);
    }
    return stores;
}

std::string random_alnum(Rng& rng, size_t min_len, size_t max_len) {
    static const char alphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
    size_t len = min_len + size_t(rng.next_below(max_len - min_len + 1));
    std::string s(len, ' ');
    for (auto& c : s) c = alphabet[rng.next_below(sizeof alphabet - 1)];
    return s;
}

struct GenColumn {
    ColumnSpec spec;
    std::vector<std::string> pool;  // categorical string columns
    bool random_string = false;     // high-cardinality string columns
};

std::vector<GenColumn> preset_columns(const std::string& preset) {
    std::vector<GenColumn> cols;
    auto num = [](std::string name, int64_t lo, int64_t hi) {
        GenColumn g;
        g.spec.name = std::move(name);
        g.spec.kind = ColumnKind::Numeric;
        g.spec.domain_lo = double(lo);
        g.spec.domain_hi = double(hi);
        g.spec.integral = true;
        return g;
    };
    auto cat = [](std::string name, std::vector<std::string> pool) {
        GenColumn g;
        g.spec.name = std::move(name);
        g.spec.kind = ColumnKind::String;
        g.spec.max_len = 16;
        g.pool = std::move(pool);
        return g;
    };
    if (preset == "store_sales_like") {
        cols.push_back(num("ss_item_sk", 1, 18001));
        cols.push_back(num("ss_quantity", 0, 100));
        cols.push_back(num("ss_list_price", 0, 30000));
        cols.push_back(num("ss_net_paid", 0, 3000000));
        cols.push_back(num("ss_net_profit", -50000, 50000));
        cols.push_back(cat("ss_store_id", store_pool()));
        cols.push_back(cat("ss_city", city_pool()));
        GenColumn promo;
        promo.spec.name = "ss_promo";
        promo.spec.kind = ColumnKind::String;
        promo.spec.max_len = 16;
        promo.random_string = true;
        cols.push_back(std::move(promo));
    } else if (preset == "tiny") {
        cols.push_back(num("qty", 0, 1000));
        cols.push_back(num("price", 0, 100000));
        cols.push_back(cat("city", city_pool()));
    } else {
        throw DomainError("unknown schema preset '" + preset + "'");
    }
    return cols;
}

}  // namespace

std::vector<std::string> preset_names() { return {"store_sales_like", "tiny"}; }

std::vector<ColumnSpec> preset_schema(const std::string& preset) {
    std::vector<ColumnSpec> out;
    for (auto& g : preset_columns(preset)) out.push_back(g.spec);
    return out;
}

EncodingPlan plan_for_preset(const std::string& preset, uint32_t row_dim, uint64_t master_seed) {
    return make_plan(preset_schema(preset), row_dim, master_seed);
}

std::vector<ColumnSpec> schema_from_json(const nlohmann::json& j) {
    std::vector<ColumnSpec> out;
    for (const auto& jc : j) {
        ColumnSpec c;
        c.name = jc.at("name").get<std::string>();
        std::string kind = jc.at("kind").get<std::string>();
        if (kind == "string") {
            c.kind = ColumnKind::String;
            c.max_len = jc.value("max_len", 16u);
        } else if (kind == "numeric") {
            c.kind = ColumnKind::Numeric;
            c.domain_lo = jc.at("domain_lo").get<double>();
            c.domain_hi = jc.at("domain_hi").get<double>();
            c.integral = jc.value("integral", true);
            c.bins_per_level = jc.value("bins_per_level", 100u);
            c.levels = jc.value("levels", 4u);
        } else {
            throw DomainError("unknown column kind: " + kind);
        }
        out.push_back(std::move(c));
    }
    if (out.empty()) throw DomainError("schema has no columns");
    return out;
}

nlohmann::json schema_to_json(const std::vector<ColumnSpec>& schema) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& c : schema) {
        if (c.kind == ColumnKind::String) {
            out.push_back({{"name", c.name}, {"kind", "string"}, {"max_len", c.max_len}});
        } else {
            out.push_back({{"name", c.name},
                           {"kind", "numeric"},
                           {"domain_lo", c.domain_lo},
                           {"domain_hi", c.domain_hi},
                           {"integral", c.integral},
                           {"bins_per_level", c.bins_per_level},
                           {"levels", c.levels}});
        }
    }
    return out;
}

PlainTable gen_table(const std::string& preset, uint64_t rows, uint64_t seed) {
    if (rows < 1) throw DomainError("row count must be at least 1");
    auto cols = preset_columns(preset);
    PlainTable table;
    for (const auto& g : cols) table.column_names.push_back(g.spec.name);
    table.rows.reserve(rows);
    Rng rng(derive_seed(seed, 1));
    for (uint64_t r = 0; r < rows; ++r) {
        std::vector<std::string> row;
        row.reserve(cols.size());
        for (const auto& g : cols) {
            if (g.spec.kind == ColumnKind::Numeric) {
                int64_t v = rng.next_in(int64_t(g.spec.domain_lo), int64_t(g.spec.domain_hi));
                row.push_back(std::to_string(v));
            } else if (g.random_string) {
                row.push_back(random_alnum(rng, 4, 12));
            } else {
                row.push_back(g.pool[rng.next_below(g.pool.size())]);
            }
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

namespace {

std::string quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        out.push_back(c);
        if (c == '\'') out.push_back('\'');
    }
    out.push_back('\'');
    return out;
}

std::string gen_leaf(const PlainTable& table, const std::vector<ColumnSpec>& schema, Rng& rng) {
    uint32_t c = uint32_t(rng.next_below(schema.size()));
    const ColumnSpec& spec = schema[c];
    if (spec.kind == ColumnKind::String) {
        // Mostly literals present in the table, occasionally absent ones.
        std::string lit;
        if (rng.next_below(10) < 8) {
            lit = table.rows[rng.next_below(table.row_count())][c];
        } else {
            static const char alphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZ";
            size_t len = 4 + rng.next_below(7);
            lit.resize(len);
            for (auto& ch : lit) ch = alphabet[rng.next_below(sizeof alphabet - 1)];
        }
        return spec.name + " = " + quote(lit);
    }
    int64_t lo = int64_t(spec.domain_lo);
    int64_t hi = int64_t(spec.domain_hi);
    switch (rng.next_below(6)) {
        case 0: {  // equality, usually against a stored value
            int64_t v = (rng.next_below(10) < 8)
                            ? std::stoll(table.rows[rng.next_below(table.row_count())][c])
                            : rng.next_in(lo, hi);
            return spec.name + " = " + std::to_string(v);
        }
        case 1: return spec.name + " < " + std::to_string(rng.next_in(lo, hi + 1));
        case 2: return spec.name + " <= " + std::to_string(rng.next_in(lo, hi + 1));
        case 3: return spec.name + " > " + std::to_string(rng.next_in(lo, hi + 1));
        case 4: return spec.name + " >= " + std::to_string(rng.next_in(lo, hi + 1));
        default: {
            int64_t a = rng.next_in(lo, hi + 1);
            int64_t b = rng.next_in(lo, hi + 1);
            if (a > b) std::swap(a, b);
            return spec.name + " BETWEEN " + std::to_string(a) + " AND " + std::to_string(b);
        }
    }
}

}  // namespace

std::vector<GeneratedQuery> gen_queries(const PlainTable& table,
                                        const std::vector<ColumnSpec>& schema,
                                        QueryFamily family, uint32_t count, uint64_t seed) {
    if (table.row_count() == 0) throw DomainError("query generation needs a non-empty table");
    std::vector<uint32_t> numeric_cols;
    for (uint32_t c = 0; c < schema.size(); ++c)
        if (schema[c].kind == ColumnKind::Numeric) numeric_cols.push_back(c);

    std::vector<GeneratedQuery> out;
    out.reserve(count);
    Rng rng(derive_seed(seed, family == QueryFamily::Filter ? 21 : 22));
    for (uint32_t i = 0; i < count; ++i) {
        GeneratedQuery q;
        q.text = gen_leaf(table, schema, rng);
        if (rng.next_bool()) {
            const char* join = rng.next_bool() ? " AND " : " OR ";
            q.text += join + gen_leaf(table, schema, rng);
        }
        if (family == QueryFamily::FilterAggregate) {
            AggregationSpec spec;
            switch (rng.next_below(5)) {
                case 0: spec.function = AggFunction::Count; break;
                case 1: spec.function = AggFunction::Sum; break;
                case 2: spec.function = AggFunction::Avg; break;
                case 3: spec.function = AggFunction::Min; break;
                default: spec.function = AggFunction::Max; break;
            }
            if (spec.function != AggFunction::Count) {
                if (numeric_cols.empty())
                    spec.function = AggFunction::Count;
                else
                    spec.column =
                        schema[numeric_cols[rng.next_below(numeric_cols.size())]].name;
            }
            q.agg = spec;
        }
        out.push_back(std::move(q));
    }
    return out;
}

}  // namespace hddb
