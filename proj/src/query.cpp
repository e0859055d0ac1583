#include "hddb/query.hpp"

#include <algorithm>
#include <cmath>

namespace hddb {

QueryCounters& QueryCounters::operator+=(const QueryCounters& o) {
    rows_scanned += o.rows_scanned;
    rows_selected += o.rows_selected;
    etc_searches += o.etc_searches;
    etc_sensing_passes += o.etc_sensing_passes;
    etc_cell_reads += o.etc_cell_reads;
    etc_accum_ops += o.etc_accum_ops;
    etc_compare_ops += o.etc_compare_ops;
    etc_unbind_word_ops += o.etc_unbind_word_ops;
    lud_searches += o.lud_searches;
    lud_sensing_passes += o.lud_sensing_passes;
    lud_cell_reads += o.lud_cell_reads;
    lud_accum_ops += o.lud_accum_ops;
    lud_alu_ops += o.lud_alu_ops;
    return *this;
}

TableCaches::TableCaches(size_t columns) {
    slots_.reserve(columns);
    for (size_t i = 0; i < columns; ++i) slots_.push_back(std::make_unique<ColumnSlot>());
}

const TableCaches::StringDecode& TableCaches::string_decode(const EncodedTable& table,
                                                            const EncoderBank& bank,
                                                            uint32_t col) {
    ColumnSlot& slot = *slots_[col];
    std::call_once(slot.string_once, [&] {
        const EncodedColumn& column = table.column(col);
        const StringEncoder& enc = bank.string_encoder(col);
        uint64_t rows = table.row_count();
        StringDecode d;
        d.values.resize(rows);
        d.ok.assign(rows, 0);
        d.probes.assign(rows, 0);
        parallel_for(rows, [&](size_t begin, size_t end) {
            for (size_t r = begin; r < end; ++r) {
                try {
                    d.values[r] = enc.decode(column.row_hv(r));
                    d.ok[r] = 1;
                    d.probes[r] = uint32_t(d.values[r].size() + 1);
                } catch (const DecodeError&) {
                    d.probes[r] = enc.params().max_len + 1;
                }
            }
        });
        slot.decoded = std::move(d);
    });
    return slot.decoded;
}

const std::vector<uint32_t>& TableCaches::hamming_digits(const EncodedTable& table,
                                                         const EncoderBank& bank, uint32_t col) {
    ColumnSlot& slot = *slots_[col];
    std::call_once(slot.hamming_once, [&] {
        const EncodedColumn& column = table.column(col);
        const NumericEncoder& enc = bank.numeric_encoder(col);
        const auto& p = enc.params();
        uint64_t rows = table.row_count();
        std::vector<uint32_t> digits(rows * p.levels);
        parallel_for(rows, [&](size_t begin, size_t end) {
            std::vector<uint64_t> segment((p.last_segment_dim() + 63) / 64);
            for (size_t r = begin; r < end; ++r) {
                auto bits = column.row_bits(r);
                for (uint32_t l = 0; l < p.levels; ++l) {
                    uint32_t seg_dim = p.segment_dim(l);
                    extract_bits(bits.data(), p.segment_offset(l), seg_dim, segment.data());
                    digits[r * p.levels + l] = enc.bins().nearest_prefix(segment, seg_dim).id;
                }
            }
        });
        slot.hamming_digits = std::move(digits);
    });
    return slot.hamming_digits;
}

const std::vector<uint32_t>& TableCaches::dbam_digits(const EncodedTable& table,
                                                      const EncoderBank& bank, uint32_t col,
                                                      const DbamConfig& cfg) {
    ColumnSlot& slot = *slots_[col];
    std::call_once(slot.dbam_once, [&] {
        const EncodedColumn& column = table.column(col);
        const NumericEncoder& enc = bank.numeric_encoder(col);
        const auto& p = enc.params();
        uint64_t rows = table.row_count();
        uint32_t m = p.bins_per_level;

        // Pack each bin vector once at full dictionary width; a segment's
        // cell image is a prefix of it because segment offsets are
        // multiples of 3.
        uint32_t dict_cells = (p.last_segment_dim() + 2) / 3;
        std::vector<std::vector<uint8_t>> bin_cells(m);
        for (uint32_t j = 0; j < m; ++j) {
            bin_cells[j].resize(dict_cells);
            pack_words(enc.bins().entry(j).words().data(), p.last_segment_dim(),
                       bin_cells[j].data());
        }

        std::vector<uint32_t> digits(rows * p.levels);
        parallel_for(rows, [&](size_t begin, size_t end) {
            for (size_t r = begin; r < end; ++r) {
                auto cells = column.row_cells(r);
                for (uint32_t l = 0; l < p.levels; ++l) {
                    size_t cell_off = p.segment_offset(l) / 3;
                    size_t ncells = (l + 1 == p.levels)
                                        ? column.cells_per_value() - cell_off
                                        : size_t(p.segment_dim(l)) / 3;
                    std::span<const uint8_t> seg = cells.subspan(cell_off, ncells);
                    uint64_t best_score = 0;
                    uint32_t best_bin = 0;
                    for (uint32_t j = 0; j < m; ++j) {
                        std::span<const uint8_t> q(bin_cells[j].data(), ncells);
                        DbamScore s = dbam_score(seg, q, cfg);
                        if (j == 0 || s.score > best_score) {
                            best_score = s.score;
                            best_bin = j;
                        }
                    }
                    digits[r * p.levels + l] = best_bin;
                }
            }
        });
        slot.dbam_digits = std::move(digits);
    });
    return slot.dbam_digits;
}

QueryEngine::QueryEngine(const EncodedTable& table, const EncoderBank& bank, Backend backend,
                         DbamConfig cfg, std::optional<ThresholdProfile> thresholds,
                         std::shared_ptr<TableCaches> caches)
    : table_(table),
      bank_(bank),
      backend_(backend),
      cfg_(cfg),
      thresholds_(std::move(thresholds)),
      caches_(std::move(caches)) {
    cfg_.validate();
    if (!caches_) caches_ = std::make_shared<TableCaches>(table.column_count());
    recall_counted_.assign(table.column_count(), 0);
}

void QueryEngine::begin_query() {
    counters_ = QueryCounters{};
    leaves_.clear();
    std::fill(recall_counted_.begin(), recall_counted_.end(), 0);
}

SelectionMask QueryEngine::eval_string_leaf(uint32_t column, const std::string& literal) {
    const EncodedColumn& col = table_.column(column);
    if (col.plan().kind != ColumnKind::String)
        throw DomainError(col.plan().name + " is not a string column");
    if (!thresholds_ || !thresholds_->has(backend_))
        throw DomainError("no calibrated threshold for backend " + backend_name(backend_) +
                          "; run calibrate_threshold first");
    double threshold = thresholds_->for_backend(backend_).threshold;
    const StringEncoder& enc = bank_.string_encoder(column);
    Hypervector query = enc.encode(literal);

    uint64_t rows = table_.row_count();
    SelectionMask mask(rows);
    uint64_t cells = col.cells_per_value();
    uint64_t subsets = (cells + cfg_.k - 1) / cfg_.k;

    // Min/max similarity observed across rows; merged across chunks, so
    // the result is independent of the parallel partitioning.
    std::mutex stats_mu;
    double score_min = 2.0, score_max = -1.0;
    auto merge_stats = [&](double lo, double hi) {
        std::lock_guard<std::mutex> lock(stats_mu);
        score_min = std::min(score_min, lo);
        score_max = std::max(score_max, hi);
    };

    if (backend_ == Backend::ExactHamming) {
        const uint64_t* q = query.words().data();
        uint32_t words = col.words_per_value();
        double dim = double(col.dim());
        parallel_for(rows, [&](size_t begin, size_t end) {
            double lo = 2.0, hi = -1.0;
            for (size_t r = begin; r < end; ++r) {
                uint64_t d = hamming_words(q, col.row_bits(r).data(), words);
                double score = 1.0 - double(d) / dim;
                lo = std::min(lo, score);
                hi = std::max(hi, score);
                mask.set(r, score >= threshold);
            }
            merge_stats(lo, hi);
        });
        counters_.etc_searches += 1;
        counters_.etc_sensing_passes += kExactPassesPerSearch;
        counters_.etc_cell_reads += double(rows) * double(cells) * double(kExactPassesPerSearch);
        counters_.etc_accum_ops += rows * words;
    } else {
        std::vector<uint8_t> qcells(cells);
        pack_words(query.words().data(), col.dim(), qcells.data());
        parallel_for(rows, [&](size_t begin, size_t end) {
            double lo = 2.0, hi = -1.0;
            for (size_t r = begin; r < end; ++r) {
                DbamScore s = dbam_score(col.row_cells(r),
                                         std::span<const uint8_t>(qcells), cfg_);
                double score = s.normalized();
                lo = std::min(lo, score);
                hi = std::max(hi, score);
                mask.set(r, score >= threshold);
            }
            merge_stats(lo, hi);
        });
        counters_.etc_searches += 1;
        counters_.etc_sensing_passes += kDbamPassesPerSearch;
        counters_.etc_cell_reads += double(rows) * double(cells) * double(kDbamPassesPerSearch);
        counters_.etc_accum_ops += rows * subsets;
    }
    counters_.etc_compare_ops += rows;
    counters_.rows_scanned += rows;
    if (rows == 0) score_min = score_max = 0.0;
    leaves_.push_back({col.plan().name, col.plan().name + " = '" + literal + "'", threshold,
                       mask.count(), score_min, score_max});
    return mask;
}

const std::vector<uint32_t>& QueryEngine::leaf_digits(uint32_t column) {
    return backend_ == Backend::ExactHamming
               ? caches_->hamming_digits(table_, bank_, column)
               : caches_->dbam_digits(table_, bank_, column, cfg_);
}

// Books the architectural cost of one per-level dictionary recall over the
// whole column; within a single query the recalled indices are reused
// across leaves, so the cost accrues once per column per query.
void QueryEngine::account_numeric_recall(uint32_t column) {
    if (recall_counted_[column]) return;
    recall_counted_[column] = 1;
    const EncodedColumn& col = table_.column(column);
    const auto& p = col.plan().numeric_params;
    uint64_t rows = table_.row_count();
    uint64_t cells = col.cells_per_value();
    uint64_t m = p.bins_per_level;
    if (backend_ == Backend::ExactHamming) {
        // One conventional full read, then Hamming accumulation in the NSP.
        counters_.etc_searches += 1;
        counters_.etc_sensing_passes += kExactPassesPerSearch;
        counters_.etc_cell_reads += double(rows) * double(cells) * double(kExactPassesPerSearch);
        counters_.etc_accum_ops += rows * m * uint64_t(col.words_per_value());
    } else {
        // One two-pass in-situ search per (level, bin) query vector.
        counters_.etc_searches += uint64_t(p.levels) * m;
        counters_.etc_sensing_passes += kDbamPassesPerSearch * uint64_t(p.levels) * m;
        counters_.etc_cell_reads +=
            double(rows) * double(cells) * double(m) * double(kDbamPassesPerSearch);
        uint64_t subsets_per_row = 0;
        for (uint32_t l = 0; l < p.levels; ++l) {
            uint64_t seg_cells = (l + 1 == p.levels)
                                     ? cells - uint64_t(p.segment_offset(l)) / 3
                                     : uint64_t(p.segment_dim(l)) / 3;
            subsets_per_row += (seg_cells + cfg_.k - 1) / cfg_.k;
        }
        counters_.etc_accum_ops += rows * m * subsets_per_row;
    }
    counters_.etc_compare_ops += rows * p.levels;
    counters_.rows_scanned += rows;
}

SelectionMask QueryEngine::eval_numeric_leaf(uint32_t column, LeafOp op, double lo, double hi) {
    const EncodedColumn& col = table_.column(column);
    if (col.plan().kind != ColumnKind::Numeric)
        throw DomainError(col.plan().name + " is not a numeric column");
    const auto& p = col.plan().numeric_params;

    auto check_bound = [&](double v) {
        if (!(v >= p.domain_lo && v <= p.domain_hi))
            throw DomainError("bound " + std::to_string(v) + " outside domain [" +
                              std::to_string(p.domain_lo) + ", " + std::to_string(p.domain_hi) +
                              "] of column " + col.plan().name);
    };
    check_bound(lo);
    if (op == LeafOp::Between) check_bound(hi);

    account_numeric_recall(column);
    const std::vector<uint32_t>& digits = leaf_digits(column);
    uint64_t rows = table_.row_count();
    uint32_t levels = p.levels;

    BoundDigits blo = bound_to_digits(lo, p);
    BoundDigits bhi = (op == LeafOp::Between) ? bound_to_digits(hi, p) : BoundDigits{};

    auto cmp = [&](uint64_t r, const BoundDigits& b) {
        // <0, 0, >0 like a three-way compare of the row digits vs the bound.
        if (b.above_domain) return -1;  // every in-domain value is below the sentinel
        const uint32_t* d = digits.data() + r * levels;
        for (uint32_t l = 0; l < levels; ++l) {
            if (d[l] != b.digits.digits[l]) return d[l] < b.digits.digits[l] ? -1 : 1;
        }
        return 0;
    };

    SelectionMask mask(rows);
    parallel_for(rows, [&](size_t begin, size_t end) {
        for (size_t r = begin; r < end; ++r) {
            bool sel = false;
            switch (op) {
                case LeafOp::EqNum: sel = cmp(r, blo) == 0; break;
                case LeafOp::Lt: sel = cmp(r, blo) < 0; break;
                case LeafOp::Le: sel = cmp(r, blo) <= 0; break;
                case LeafOp::Gt: sel = cmp(r, blo) > 0; break;
                case LeafOp::Ge: sel = cmp(r, blo) >= 0; break;
                case LeafOp::Between: sel = cmp(r, blo) >= 0 && cmp(r, bhi) <= 0; break;
                case LeafOp::EqStr: break;
            }
            mask.set(r, sel);
        }
    });
    leaves_.push_back(
        {col.plan().name, col.plan().name + " numeric leaf", 0.0, mask.count(), 0.0, 0.0});
    return mask;
}

SelectionMask QueryEngine::eval_predicate(const PredicateNode& pred) {
    switch (pred.kind) {
        case PredicateNode::Kind::And:
            return eval_predicate(*pred.left) & eval_predicate(*pred.right);
        case PredicateNode::Kind::Or:
            return eval_predicate(*pred.left) | eval_predicate(*pred.right);
        case PredicateNode::Kind::Leaf:
            break;
    }
    if (pred.op == LeafOp::EqStr) return eval_string_leaf(pred.column, pred.str_value);
    return eval_numeric_leaf(pred.column, pred.op, pred.num_lo, pred.num_hi);
}

DecodedRows QueryEngine::decode_selected(const SelectionMask& mask,
                                         const std::vector<uint32_t>& columns) {
    if (mask.rows() != table_.row_count())
        throw DimensionError("selection mask does not match table row count");
    DecodedRows out;
    out.row_ids = mask.selected_rows();
    out.rows.reserve(out.row_ids.size());

    struct ColAccess {
        bool is_string;
        const TableCaches::StringDecode* decoded = nullptr;
        const std::vector<uint32_t>* digits = nullptr;
        const NumericEncoderParams* params = nullptr;
    };
    std::vector<ColAccess> access;
    access.reserve(columns.size());
    for (uint32_t c : columns) {
        ColAccess a;
        a.is_string = bank_.is_string(c);
        if (a.is_string) {
            a.decoded = &caches_->string_decode(table_, bank_, c);
        } else {
            a.digits = &caches_->hamming_digits(table_, bank_, c);
            a.params = &bank_.numeric_encoder(c).params();
        }
        access.push_back(a);
    }

    uint64_t selected = out.row_ids.size();
    for (uint64_t r : out.row_ids) {
        std::vector<std::string> row;
        row.reserve(columns.size());
        for (size_t i = 0; i < columns.size(); ++i) {
            const ColAccess& a = access[i];
            const ColumnPlan& cp = table_.column(columns[i]).plan();
            if (a.is_string) {
                if (a.decoded->ok[r]) {
                    row.push_back(a.decoded->values[r]);
                } else {
                    row.emplace_back();
                    out.failures.push_back({r, cp.name, "no terminator recovered"});
                }
            } else {
                DigitSequence d;
                d.digits.assign(a.digits->data() + r * a.params->levels,
                                a.digits->data() + (r + 1) * a.params->levels);
                row.push_back(format_numeric(digits_to_value(d, *a.params), a.params->integral));
            }
        }
        out.rows.push_back(std::move(row));
    }

    // Architectural decode cost: unbind in the table-core NSP, then a
    // dictionary search on the lookup core per probed position / level.
    for (size_t i = 0; i < columns.size(); ++i) {
        if (access[i].is_string) {
            uint64_t probes = 0;
            for (uint64_t r : out.row_ids) probes += access[i].decoded->probes[r];
            account_string_decode(columns[i], probes);
        } else {
            account_numeric_decode(columns[i], selected);
        }
    }
    counters_.rows_selected += selected;
    return out;
}

void QueryEngine::account_string_decode(uint32_t column, uint64_t probes) {
    const EncodedColumn& col = table_.column(column);
    uint64_t cells = col.cells_per_value();
    counters_.etc_unbind_word_ops += probes * col.words_per_value();
    counters_.lud_searches += probes;
    counters_.lud_sensing_passes += probes * kDbamPassesPerSearch;
    counters_.lud_cell_reads +=
        double(probes) * double(kSymbolCount) * double(cells) * double(kDbamPassesPerSearch);
    counters_.lud_accum_ops += probes * kSymbolCount * ((cells + cfg_.k - 1) / cfg_.k);
}

void QueryEngine::account_numeric_decode(uint32_t column, uint64_t selected) {
    const auto& p = bank_.numeric_encoder(column).params();
    uint64_t probes = selected * p.levels;
    uint64_t dict_cells = (uint64_t(p.last_segment_dim()) + 2) / 3;
    counters_.lud_searches += probes;
    counters_.lud_sensing_passes += probes * kDbamPassesPerSearch;
    counters_.lud_cell_reads += double(probes) * double(p.bins_per_level) * double(dict_cells) *
                                double(kDbamPassesPerSearch);
    counters_.lud_accum_ops += probes * p.bins_per_level * ((dict_cells + cfg_.k - 1) / cfg_.k);
}

AggregateResult QueryEngine::aggregate(const SelectionMask& mask, const AggregationSpec& spec) {
    counters_.rows_selected += mask.count();
    if (spec.function == AggFunction::Count) {
        counters_.lud_alu_ops += 1;
        return AggregateResult::of_int(__int128(mask.count()));
    }
    uint32_t c = spec.resolve(table_.plan());
    account_numeric_decode(c, mask.count());
    const auto& p = bank_.numeric_encoder(c).params();
    const auto& digits = caches_->hamming_digits(table_, bank_, c);

    uint64_t n = 0;
    __int128 isum = 0;
    double rsum = 0.0;
    double mn = 0.0, mx = 0.0;
    uint64_t rows = table_.row_count();
    for (uint64_t r = 0; r < rows; ++r) {
        if (!mask.get(r)) continue;
        DigitSequence d;
        d.digits.assign(digits.data() + r * p.levels, digits.data() + (r + 1) * p.levels);
        double v = digits_to_value(d, p);
        if (n == 0) {
            mn = mx = v;
        } else {
            mn = std::min(mn, v);
            mx = std::max(mx, v);
        }
        if (p.integral)
            isum += __int128(int64_t(v));
        else
            rsum += v;
        ++n;
    }
    counters_.lud_alu_ops += n;

    switch (spec.function) {
        case AggFunction::Sum:
            if (n == 0) return AggregateResult::of_int(0);
            return p.integral ? AggregateResult::of_int(isum) : AggregateResult::of_real(rsum);
        case AggFunction::Avg:
            if (n == 0) return AggregateResult::null();
            return AggregateResult::of_real((p.integral ? double(isum) : rsum) / double(n));
        case AggFunction::Min:
            if (n == 0) return AggregateResult::null();
            return p.integral ? AggregateResult::of_int(__int128(int64_t(mn)))
                              : AggregateResult::of_real(mn);
        case AggFunction::Max:
            if (n == 0) return AggregateResult::null();
            return p.integral ? AggregateResult::of_int(__int128(int64_t(mx)))
                              : AggregateResult::of_real(mx);
        case AggFunction::Count:
            break;
    }
    return AggregateResult::null();
}

QueryResult QueryEngine::run_query(const PredicateNode& pred,
                                   const std::optional<AggregationSpec>& agg,
                                   const std::vector<uint32_t>& project_columns) {
    begin_query();
    QueryResult result;
    result.mask = eval_predicate(pred);
    if (agg) {
        result.aggregate = aggregate(result.mask, *agg);
    } else {
        std::vector<uint32_t> cols = project_columns;
        if (cols.empty())
            for (uint32_t c = 0; c < table_.column_count(); ++c) cols.push_back(c);
        result.projection = decode_selected(result.mask, cols);
    }
    result.counters = counters_;
    result.leaves = leaves_;
    return result;
}

}  // namespace hddb
