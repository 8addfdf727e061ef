#pragma once

// Real-data workflows: aligning two summary-statistic tables on a shared key
// with budgeted access to the target statistic, the oracle-recovery
// benchmark, and split-conformal p-values from score files.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <iterator>
#include <fstream>
#include <istream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "activeht/active_core.hpp"
#include "activeht/allocation.hpp"
#include "activeht/common.hpp"
#include "activeht/engine.hpp"
#include "activeht/io.hpp"
#include "activeht/mt_procedures.hpp"

namespace activeht::data {

struct SummaryTable {
    std::vector<std::string> keys;
    std::vector<double> stats;

    std::size_t size() const { return keys.size(); }
    friend bool operator==(const SummaryTable&, const SummaryTable&) = default;
};

struct TableOptions {
    std::string key_col = "rsid";
    std::string stat_col = "pval";
};

inline SummaryTable read_summary_table(std::istream& in, const TableOptions& opts, const std::string& source) {
    char delim = ',';
    std::size_t line_no = 0;
    const auto header = io::read_header(in, delim, line_no);
    const std::size_t kc = io::column_index(header, opts.key_col, source);
    const std::size_t sc = io::column_index(header, opts.stat_col, source);
    const std::size_t need = std::max(kc, sc) + 1;
    SummaryTable t;
    std::string line;
    std::vector<std::string_view> cells;
    while (std::getline(in, line)) {
        ++line_no;
        if (io::is_skippable(line)) continue;
        io::split(line, delim, cells);
        const std::string where = source + ":" + std::to_string(line_no);
        if (cells.size() < need) throw DataError(where + ": expected at least " + std::to_string(need) + " columns");
        const auto v = io::parse_double(cells[sc]);
        if (!v) throw DataError(where + ": malformed number '" + std::string(cells[sc]) + "'");
        if (!(*v >= 0.0 && *v <= 1.0)) throw DataError(where + ": statistic outside [0, 1]");
        if (cells[kc].empty()) throw DataError(where + ": empty key");
        t.keys.emplace_back(cells[kc]);
        t.stats.push_back(*v);
    }
    return t;
}

inline SummaryTable read_summary_table(const std::filesystem::path& path, const TableOptions& opts) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    return read_summary_table(in, opts, path.string());
}

inline std::vector<std::string> duplicate_keys(const SummaryTable& t) {
    std::unordered_set<std::string_view> seen;
    std::vector<std::string> dups;
    seen.reserve(t.size());
    for (const auto& k : t.keys)
        if (!seen.insert(k).second) dups.push_back(k);
    return dups;
}

class TargetReader;

/// Inner join of a target and an auxiliary table, in target order. The target
/// statistic is only reachable through a TargetReader (each read is a query)
/// or the ledger-exempt oracle pass.
class JoinedTable {
public:
    std::vector<std::string> keys;
    std::vector<double> aux;

    std::size_t size() const { return keys.size(); }

    /// Target statistics for the full-information benchmark; not a query.
    std::span<const double> oracle_target() const { return target_; }

    /// Target keys and statistics as a table (structural copy, not a query).
    SummaryTable target_part() const { return {keys, target_}; }

    void push(std::string key, double aux_stat, double target_stat) {
        keys.push_back(std::move(key));
        aux.push_back(aux_stat);
        target_.push_back(target_stat);
    }

    friend bool operator==(const JoinedTable&, const JoinedTable&) = default;

private:
    friend class TargetReader;
    std::vector<double> target_;
};

/// Lazy access to target statistics with a read counter.
class TargetReader {
public:
    explicit TargetReader(const JoinedTable& t) : t_(&t) {}
    TargetReader(const TargetReader&) = delete;

    double operator()(std::size_t i) {
        reads_.fetch_add(1, std::memory_order_relaxed);
        return t_->target_[i];
    }
    std::size_t reads() const { return reads_.load(); }

private:
    const JoinedTable* t_;
    std::atomic<std::size_t> reads_{0};
};

enum class JoinStrategy { Hash, Merge };

namespace detail {

inline void reject_duplicates(const SummaryTable& t, const std::string& name) {
    const auto dups = duplicate_keys(t);
    if (dups.empty()) return;
    std::string msg = name + " table has duplicate keys:";
    for (std::size_t i = 0; i < dups.size() && i < 10; ++i) msg += " " + dups[i];
    if (dups.size() > 10) msg += " ... (" + std::to_string(dups.size()) + " total)";
    throw DataError(msg);
}

inline void require_sorted(const SummaryTable& t, const std::string& name) {
    for (std::size_t i = 1; i < t.size(); ++i)
        if (!(t.keys[i - 1] < t.keys[i]))
            throw DataError(name + " table is not strictly sorted by key at row " + std::to_string(i + 1) +
                            "; use the hash join");
}

} // namespace detail

inline JoinedTable align(const SummaryTable& target, const SummaryTable& aux,
                         JoinStrategy strategy = JoinStrategy::Hash) {
    detail::reject_duplicates(target, "target");
    detail::reject_duplicates(aux, "auxiliary");
    JoinedTable out;
    if (strategy == JoinStrategy::Hash) {
        std::unordered_map<std::string_view, std::size_t> index;
        index.reserve(aux.size());
        for (std::size_t j = 0; j < aux.size(); ++j) index.emplace(aux.keys[j], j);
        for (std::size_t i = 0; i < target.size(); ++i) {
            const auto it = index.find(target.keys[i]);
            if (it != index.end()) out.push(target.keys[i], aux.stats[it->second], target.stats[i]);
        }
    } else {
        detail::require_sorted(target, "target");
        detail::require_sorted(aux, "auxiliary");
        std::size_t j = 0;
        for (std::size_t i = 0; i < target.size(); ++i) {
            while (j < aux.size() && aux.keys[j] < target.keys[i]) ++j;
            if (j < aux.size() && aux.keys[j] == target.keys[i]) out.push(target.keys[i], aux.stats[j], target.stats[i]);
        }
    }
    if (out.size() == 0) throw DataError("target and auxiliary tables share no keys");
    return out;
}

/// Streaming merge join of two key-sorted files; memory is proportional to
/// the join output only.
inline JoinedTable merge_join_files(const std::filesystem::path& target_path, const std::filesystem::path& aux_path,
                                    const TableOptions& target_opts, const TableOptions& aux_opts) {
    struct Cursor {
        std::ifstream in;
        std::string source;
        char delim = ',';
        std::size_t line_no = 0, kc = 0, sc = 0;
        std::string line, key, prev;
        double stat = 0.0;
        bool valid = false;
        std::vector<std::string_view> cells;

        Cursor(const std::filesystem::path& p, const TableOptions& o) : in(p), source(p.string()) {
            if (!in) throw DataError("cannot open " + source);
            const auto header = io::read_header(in, delim, line_no);
            kc = io::column_index(header, o.key_col, source);
            sc = io::column_index(header, o.stat_col, source);
            advance();
        }
        void advance() {
            valid = false;
            while (std::getline(in, line)) {
                ++line_no;
                if (io::is_skippable(line)) continue;
                io::split(line, delim, cells);
                const std::string where = source + ":" + std::to_string(line_no);
                if (cells.size() <= std::max(kc, sc)) throw DataError(where + ": too few columns");
                const auto v = io::parse_double(cells[sc]);
                if (!v) throw DataError(where + ": malformed number '" + std::string(cells[sc]) + "'");
                if (!(*v >= 0.0 && *v <= 1.0)) throw DataError(where + ": statistic outside [0, 1]");
                std::string k(cells[kc]);
                if (!prev.empty() && !(prev < k)) {
                    if (prev == k) throw DataError(where + ": duplicate key " + k);
                    throw DataError(where + ": file is not sorted by key; use the hash join");
                }
                prev = k;
                key = std::move(k);
                stat = *v;
                valid = true;
                return;
            }
        }
    };
    Cursor t(target_path, target_opts);
    Cursor a(aux_path, aux_opts);
    JoinedTable out;
    while (t.valid && a.valid) {
        if (a.key < t.key) {
            a.advance();
        } else if (t.key < a.key) {
            t.advance();
        } else {
            out.push(t.key, a.stat, t.stat);
            t.advance();
            a.advance();
        }
    }
    // Drain the rest so sortedness and format errors are always reported.
    while (t.valid) t.advance();
    while (a.valid) a.advance();
    if (out.size() == 0) throw DataError("target and auxiliary tables share no keys");
    return out;
}

// ---------------------------------------------------------------------------

/// p_i = (1 + #{j : cal_j <= test_i}) / (n + 1).
inline std::vector<double> conformal_p(std::span<const double> calibration, std::span<const double> test) {
    require(!calibration.empty(), "calibration set must be nonempty");
    for (double c : calibration)
        if (std::isnan(c)) throw DataError("calibration score is NaN");
    std::vector<double> cal(calibration.begin(), calibration.end());
    std::sort(cal.begin(), cal.end());
    const double denom = static_cast<double>(cal.size()) + 1.0;
    std::vector<double> out;
    out.reserve(test.size());
    for (double t : test) {
        if (std::isnan(t)) throw DataError("test score is NaN");
        const auto count = std::upper_bound(cal.begin(), cal.end(), t) - cal.begin();
        out.push_back((1.0 + static_cast<double>(count)) / denom);
    }
    return out;
}

// ---------------------------------------------------------------------------

struct RecoveryConfig {
    MethodSpec method = MethodSpec::active_default(UtilitySpec::log_inverse(kDefaultEps));
    StatMode mode = StatMode::p_independent();
    double budget = 1.0;
    double alpha = 0.1;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

struct RecoveryResult {
    std::vector<std::size_t> oracle;
    std::vector<std::size_t> recovered;
    std::size_t recovered_oracle = 0;
    double efficiency = 0.0;
    std::size_t n_queries = 0;
    /// Reads of the target statistic by the budgeted method.
    std::size_t target_reads = 0;
    /// Reads made by the benchmark-only oracle pass.
    std::size_t oracle_reads = 0;
    RunOutput run;
};

/// Oracle set = BY on every target statistic (outside the budget); the chosen
/// method then runs under the budget and BY is applied to its active p-values.
inline RecoveryResult oracle_recovery(const JoinedTable& joined, const RecoveryConfig& cfg) {
    require(joined.size() > 0, "joined table is empty");
    RecoveryResult res;
    const auto oracle_stats = joined.oracle_target();
    res.oracle_reads = oracle_stats.size();
    res.oracle = by(oracle_stats, cfg.alpha).rejected;

    std::vector<std::uint64_t> keys(joined.size());
    for (std::size_t i = 0; i < keys.size(); ++i) keys[i] = key_of(joined.keys[i]);
    const HypothesisView view{joined.aux, keys, joined.keys};
    TargetReader reader(joined);
    res.run = run_method(cfg.method, cfg.mode, cfg.budget, view, reader, cfg.seed, RunContext{0, cfg.threads});
    res.target_reads = reader.reads();
    res.n_queries = res.run.n_queries;

    std::vector<double> active(res.run.outcomes.size());
    for (std::size_t i = 0; i < active.size(); ++i) active[i] = res.run.outcomes[i].value;
    res.recovered = by(active, cfg.alpha).rejected;
    std::vector<std::size_t> both;
    std::set_intersection(res.recovered.begin(), res.recovered.end(), res.oracle.begin(), res.oracle.end(),
                          std::back_inserter(both));
    res.recovered_oracle = both.size();
    res.efficiency = res.n_queries == 0 ? 0.0 : static_cast<double>(res.recovered_oracle) / static_cast<double>(res.n_queries);
    return res;
}

} // namespace activeht::data
