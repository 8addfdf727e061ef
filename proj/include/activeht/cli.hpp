#pragma once

// Command-line front end: simulate / run / gwas / conformal / mt.
//
// Exit codes: 0 success, 1 usage error, 2 data or domain error. Output files
// are written through io::AtomicFile, so failures leave nothing behind. Every
// CSV output starts with '#' comment lines echoing the resolved
// configuration; the thread count is not echoed because results do not
// depend on it.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "activeht/active_core.hpp"
#include "activeht/allocation.hpp"
#include "activeht/common.hpp"
#include "activeht/data_pipeline.hpp"
#include "activeht/engine.hpp"
#include "activeht/io.hpp"
#include "activeht/mt_procedures.hpp"
#include "activeht/sim_lab.hpp"

namespace activeht::cli {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr std::uint64_t kDefaultSeed = 20240917;

inline std::string version_string() {
    std::ostringstream os;
    os << "activeht " << kVersion << " (C++" << __cplusplus / 100 % 100 << ", "
#if defined(__clang__)
       << "clang " << __clang_major__ << "." << __clang_minor__
#elif defined(__GNUC__)
       << "gcc " << __GNUC__ << "." << __GNUC_MINOR__
#else
       << "unknown compiler"
#endif
       << ", built " << __DATE__ << ")";
    return os.str();
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else if (c != ' ') {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

inline StatMode parse_stat_mode(const std::string& name, double sup_h) {
    if (name == "e") return StatMode::e_value();
    if (name == "p-indep") return StatMode::p_independent();
    if (name == "p-general") return StatMode::p_general(sup_h);
    throw UsageError("unknown mode '" + name + "' (expected e, p-indep or p-general)");
}

inline UtilitySpec parse_utility(const std::string& name, double eps) {
    if (name == "identity") return UtilitySpec::identity();
    if (name == "log1p") return UtilitySpec::log1p();
    if (name == "inverse") return UtilitySpec::inverse(eps);
    if (name == "log-inverse") return UtilitySpec::log_inverse(eps);
    throw UsageError("unknown utility '" + name + "' (expected identity, log1p, inverse or log-inverse)");
}

inline MethodSpec make_method(MethodSpec::Kind kind, const UtilitySpec& utility, BetaParam beta) {
    switch (kind) {
    case MethodSpec::Kind::ActiveDefault: return MethodSpec::active_default(utility, beta);
    case MethodSpec::Kind::ActiveXu: return MethodSpec::active_xu(beta);
    case MethodSpec::Kind::Xu: return MethodSpec::xu(beta);
    case MethodSpec::Kind::Random: return MethodSpec::random();
    case MethodSpec::Kind::All: return MethodSpec::all();
    }
    throw UsageError("unknown method");
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateOptions {
    std::string dgp;
    std::string mode;
    std::size_t n = 2000;
    double pi = 0.1;
    double sigma = 1.0;
    double rho = 0.5;
    double budget = 100.0;
    double beta = 0.5;
    double alpha = 0.1;
    std::size_t reps = 100;
    std::uint64_t seed = kDefaultSeed;
    std::string methods = "active-default,active-xu,xu,random,all";
    std::string out;
    unsigned threads = 1;

    /// Resolved configuration as a flag list (excludes --out and --threads).
    std::string echo() const {
        std::ostringstream os;
        os << "--dgp " << dgp << " --mode " << mode << " --n " << n << " --pi " << io::fmt(pi) << " --sigma "
           << io::fmt(sigma) << " --rho " << io::fmt(rho) << " --budget " << io::fmt(budget) << " --beta "
           << io::fmt(beta) << " --alpha " << io::fmt(alpha) << " --reps " << reps << " --seed " << seed
           << " --methods " << methods;
        return os.str();
    }

    bool same_config(const SimulateOptions& o) const { return echo() == o.echo(); }

    sim::DgpSpec dgp_spec() const {
        switch (sim::parse_dgp_kind(dgp)) {
        case sim::DgpKind::AuxSignal: return sim::DgpSpec::aux_signal(n, pi, alpha);
        case sim::DgpKind::NoisyProxy: return sim::DgpSpec::noisy_proxy(n, pi, sigma, alpha);
        case sim::DgpKind::CorrelatedProxy: return sim::DgpSpec::correlated_proxy(n, pi, rho, alpha);
        }
        throw UsageError("unknown dgp");
    }
};

inline void bind_simulate(CLI::App* sub, SimulateOptions& o) {
    sub->add_option("--dgp", o.dgp, "Data-generating process")->required()->check(
        CLI::IsMember({"signal", "noisy", "correlated"}));
    sub->add_option("--mode", o.mode, "Statistic type")->required()->check(CLI::IsMember({"e", "p"}));
    sub->add_option("--n", o.n, "Number of hypotheses")->capture_default_str();
    sub->add_option("--pi", o.pi, "Non-null proportion")->capture_default_str();
    sub->add_option("--sigma", o.sigma, "Proxy noise sd (noisy)")->capture_default_str();
    sub->add_option("--rho", o.rho, "Proxy correlation (correlated)")->capture_default_str();
    sub->add_option("--budget", o.budget, "Expected number of exact evaluations")->capture_default_str();
    sub->add_option("--beta", o.beta, "Split between the no-query and query branches")->capture_default_str();
    sub->add_option("--alpha", o.alpha, "FDR level")->capture_default_str();
    sub->add_option("--reps", o.reps, "Replications")->capture_default_str();
    sub->add_option("--seed", o.seed, "Random seed")->capture_default_str();
    sub->add_option("--methods", o.methods, "Comma-separated methods")->capture_default_str();
    sub->add_option("--out", o.out, "Output directory (runs.csv, summary.csv)");
    sub->add_option("--threads", o.threads, "Worker threads (0 = all cores)")->capture_default_str();
}

/// Parses the flags of a `simulate` invocation (without the subcommand name).
inline SimulateOptions parse_simulate_args(const std::vector<std::string>& args) {
    CLI::App app{"simulate"};
    SimulateOptions o;
    bind_simulate(&app, o);
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
    return o;
}

inline void write_header(std::ostream& os, const std::string& command, const std::string& config,
                         const std::vector<std::string>& derived) {
    os << "# activeht " << command << '\n' << "# config: " << config << '\n';
    for (const auto& d : derived) os << "# " << d << '\n';
}

inline int cmd_simulate(const SimulateOptions& o, std::ostream& out) {
    const sim::DgpSpec spec = o.dgp_spec();
    const sim::StatFamily family = sim::parse_stat_family(o.mode);
    const BetaParam beta(o.beta);
    const auto defaults = sim::utility_defaults(spec.kind, family);
    sim::ExperimentConfig cfg;
    cfg.dgp = spec;
    cfg.family = family;
    cfg.budget = o.budget;
    cfg.reps = o.reps;
    cfg.seed = o.seed;
    cfg.threads = o.threads;
    for (const auto& name : split_list(o.methods))
        cfg.methods.push_back(make_method(parse_method_kind(name), defaults.utility, beta));
    if (cfg.methods.empty()) throw UsageError("--methods is empty");
    const auto result = sim::run_experiment(cfg);

    const std::vector<std::string> derived = {
        "derived: tau_sq=" + io::fmt(spec.tau_sq()) + " lambda=" + io::fmt(spec.lambda()) +
        " utility=" + to_string(defaults.utility) + " construction=" + to_string(defaults.mode.kind) +
        " procedure=" + (family == sim::StatFamily::E ? "ebh" : "by")};
    if (o.out.empty()) {
        write_header(out, "simulate", o.echo(), derived);
        sim::write_summary_csv(out, result.summary);
        return 0;
    }
    const std::filesystem::path dir(o.out);
    std::filesystem::create_directories(dir);
    io::AtomicFile runs(dir / "runs.csv");
    io::AtomicFile summary(dir / "summary.csv");
    write_header(runs.stream(), "simulate", o.echo(), derived);
    sim::write_runs_csv(runs.stream(), result.rows);
    write_header(summary.stream(), "simulate", o.echo(), derived);
    sim::write_summary_csv(summary.stream(), result.summary);
    runs.commit();
    summary.commit();
    return 0;
}

// ---------------------------------------------------------------------------
// run: Algorithm on a user file of (id, aux, exact)

struct RunOptions {
    std::string input;
    std::string id_col = "id";
    std::string aux_col = "aux";
    std::string exact_col = "exact";
    std::string mode = "e";
    double sup_h = 1.0;
    std::string method = "active-default";
    std::string utility;
    double eps = kDefaultEps;
    double budget = 0.0;
    double beta = 0.5;
    std::uint64_t seed = kDefaultSeed;
    std::string procedure;
    double alpha = 0.1;
    std::string out;
    unsigned threads = 1;
};

inline int cmd_run(const RunOptions& o, std::ostream& out) {
    const StatMode mode = parse_stat_mode(o.mode, o.sup_h);
    std::string utility_name = o.utility;
    if (utility_name.empty()) utility_name = mode.is_p() ? "log-inverse" : "identity";
    const UtilitySpec utility = parse_utility(utility_name, o.eps);
    const MethodSpec method = make_method(parse_method_kind(o.method), utility, BetaParam(o.beta));
    const bool needs_budget = method.kind != MethodSpec::Kind::Xu && method.kind != MethodSpec::Kind::All;
    if (needs_budget && !(o.budget > 0.0) && method.kind != MethodSpec::Kind::Random)
        throw UsageError("--budget is required for method " + o.method);

    std::ifstream in(o.input);
    if (!in) throw DataError("cannot open " + o.input);
    char delim = ',';
    std::size_t line_no = 0;
    const auto header = io::read_header(in, delim, line_no);
    const std::size_t ic = io::column_index(header, o.id_col, o.input);
    const std::size_t ac = io::column_index(header, o.aux_col, o.input);
    const std::size_t ec = io::column_index(header, o.exact_col, o.input);
    std::vector<std::string> ids;
    std::vector<double> aux, exact;
    std::string line;
    std::vector<std::string_view> cells;
    while (std::getline(in, line)) {
        ++line_no;
        if (io::is_skippable(line)) continue;
        io::split(line, delim, cells);
        const std::string where = o.input + ":" + std::to_string(line_no);
        if (cells.size() <= std::max({ic, ac, ec})) throw DataError(where + ": too few columns");
        const auto a = io::parse_double(cells[ac]);
        if (!a) throw DataError(where + ": malformed auxiliary statistic");
        ids.emplace_back(cells[ic]);
        aux.push_back(*a);
        // Missing exact values are only an error if the hypothesis is queried.
        const auto e = io::parse_double(cells[ec]);
        exact.push_back(e ? *e : std::nan(""));
    }
    if (ids.empty()) throw DataError(o.input + ": no data rows");
    std::vector<std::uint64_t> keys(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) keys[i] = key_of(ids[i]);
    const HypothesisView view{aux, keys, ids};
    auto reader = [&exact](std::size_t i) { return exact[i]; };
    const RunOutput res = run_method(method, mode, o.budget, view, reader, o.seed, RunContext{0, o.threads});

    std::ostringstream body;
    std::ostringstream cfg;
    cfg << "--input " << o.input << " --id-col " << o.id_col << " --aux-col " << o.aux_col << " --exact-col "
        << o.exact_col << " --mode " << o.mode << " --sup-h " << io::fmt(o.sup_h) << " --method " << o.method
        << " --utility " << utility_name << " --eps " << io::fmt(o.eps) << " --budget " << io::fmt(o.budget)
        << " --beta " << io::fmt(o.beta) << " --seed " << o.seed << " --alpha " << io::fmt(o.alpha);
    if (!o.procedure.empty()) cfg << " --procedure " << o.procedure;
    std::vector<std::string> derived;
    for (const auto& w : res.warnings) derived.push_back("warning: " + w);
    write_header(body, "run", cfg.str(), derived);
    body << "id,value,queried,branch,h\n";
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const auto& oc = res.outcomes[i];
        body << ids[i] << ',' << io::fmt(oc.value) << ',' << (oc.queried ? 1 : 0) << ',' << to_string(oc.branch)
             << ',' << io::fmt(res.control[i]) << '\n';
    }
    body << "# summary: n_queries=" << res.n_queries << '\n';

    if (o.out.empty()) {
        out << body.str();
    } else {
        io::AtomicFile f(o.out);
        f.stream() << body.str();
        f.commit();
    }
    if (!o.procedure.empty()) {
        std::vector<double> values(res.outcomes.size());
        for (std::size_t i = 0; i < values.size(); ++i) values[i] = res.outcomes[i].value;
        const auto rs = apply_procedure(parse_procedure(o.procedure), values, o.alpha);
        for (std::size_t i : rs.rejected) out << ids[i] << '\n';
    }
    return 0;
}

// ---------------------------------------------------------------------------
// gwas

struct GwasOptions {
    std::string target;
    std::string aux;
    std::string key_col = "rsid";
    std::string p_col = "pval";
    std::string aux_key_col;
    std::string aux_p_col;
    double budget = 0.0;
    double beta = 0.5;
    double alpha = 0.1;
    std::uint64_t seed = kDefaultSeed;
    std::string method = "active-default";
    std::string mode = "p-indep";
    std::string utility = "log-inverse";
    double eps = kDefaultEps;
    std::string join = "hash";
    std::string out;
    unsigned threads = 1;
};

struct GwasSummary {
    std::size_t n = 0;
    std::size_t n_queries = 0;
    std::size_t target_reads = 0;
    std::size_t oracle = 0;
    std::size_t recovered = 0;
    std::size_t recovered_oracle = 0;
    double efficiency = 0.0;

    std::string line() const {
        std::ostringstream os;
        os << "n=" << n << " n_queries=" << n_queries << " target_reads=" << target_reads << " oracle=" << oracle
           << " recovered=" << recovered << " recovered_oracle=" << recovered_oracle
           << " efficiency=" << io::fmt(efficiency);
        return os.str();
    }
};

inline int cmd_gwas(const GwasOptions& o, std::ostream& out, GwasSummary* summary_out = nullptr) {
    const StatMode mode = parse_stat_mode(o.mode, 1.0);
    if (!mode.is_p()) throw UsageError("gwas works with p-values; use --mode p-indep or p-general");
    const MethodSpec method =
        make_method(parse_method_kind(o.method), parse_utility(o.utility, o.eps), BetaParam(o.beta));
    const data::TableOptions topts{o.key_col, o.p_col};
    const data::TableOptions aopts{o.aux_key_col.empty() ? o.key_col : o.aux_key_col,
                                   o.aux_p_col.empty() ? o.p_col : o.aux_p_col};
    data::JoinedTable joined;
    if (o.join == "merge") {
        joined = data::merge_join_files(o.target, o.aux, topts, aopts);
    } else if (o.join == "hash") {
        joined = data::align(data::read_summary_table(o.target, topts), data::read_summary_table(o.aux, aopts));
    } else {
        throw UsageError("--join must be hash or merge");
    }
    data::RecoveryConfig rc;
    rc.method = method;
    rc.mode = mode;
    rc.budget = o.budget;
    rc.alpha = o.alpha;
    rc.seed = o.seed;
    rc.threads = o.threads;
    const auto res = data::oracle_recovery(joined, rc);

    GwasSummary s;
    s.n = joined.size();
    s.n_queries = res.n_queries;
    s.target_reads = res.target_reads;
    s.oracle = res.oracle.size();
    s.recovered = res.recovered.size();
    s.recovered_oracle = res.recovered_oracle;
    s.efficiency = res.efficiency;
    if (summary_out) *summary_out = s;

    std::ostringstream cfg;
    cfg << "--target " << o.target << " --aux " << o.aux << " --key-col " << topts.key_col << " --p-col "
        << topts.stat_col << " --aux-key-col " << aopts.key_col << " --aux-p-col " << aopts.stat_col << " --budget "
        << io::fmt(o.budget) << " --beta " << io::fmt(o.beta) << " --alpha " << io::fmt(o.alpha) << " --seed "
        << o.seed << " --method " << o.method << " --mode " << o.mode << " --utility " << o.utility << " --eps "
        << io::fmt(o.eps) << " --join " << o.join;
    std::vector<std::string> derived = {"derived: n_joined=" + std::to_string(joined.size())};
    for (const auto& w : res.run.warnings) derived.push_back("warning: " + w);

    if (!o.out.empty()) {
        io::AtomicFile f(o.out);
        auto& os = f.stream();
        write_header(os, "gwas", cfg.str(), derived);
        os << "key,p_active,queried\n";
        for (std::size_t i = 0; i < joined.size(); ++i)
            os << joined.keys[i] << ',' << io::fmt(res.run.outcomes[i].value) << ','
               << (res.run.outcomes[i].queried ? 1 : 0) << '\n';
        os << "# summary: " << s.line() << '\n';
        f.commit();
    }
    out << s.line() << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// conformal

struct ConformalOptions {
    std::string cal;
    std::string test;
    std::string score_col;
    std::string id_col;
    std::string out;
};

/// Reads one numeric column (by name, or the first column when `col` is
/// empty) and optionally an id column.
inline std::vector<double> read_column(const std::string& path, const std::string& col, const std::string& id_col,
                                       std::vector<std::string>* ids) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    char delim = ',';
    std::size_t line_no = 0;
    const auto header = io::read_header(in, delim, line_no);
    const std::size_t c = col.empty() ? 0 : io::column_index(header, col, path);
    const bool has_id = !id_col.empty();
    const std::size_t ic = has_id ? io::column_index(header, id_col, path) : 0;
    std::vector<double> values;
    std::string line;
    std::vector<std::string_view> cells;
    while (std::getline(in, line)) {
        ++line_no;
        if (io::is_skippable(line)) continue;
        io::split(line, delim, cells);
        const std::string where = path + ":" + std::to_string(line_no);
        if (cells.size() <= std::max(c, ic)) throw DataError(where + ": too few columns");
        const auto v = io::parse_double(cells[c]);
        if (!v) throw DataError(where + ": malformed number '" + std::string(cells[c]) + "'");
        values.push_back(*v);
        if (ids) ids->push_back(has_id ? std::string(cells[ic]) : std::to_string(values.size() - 1));
    }
    return values;
}

inline int cmd_conformal(const ConformalOptions& o, std::ostream& out) {
    const auto cal = read_column(o.cal, o.score_col, "", nullptr);
    std::vector<std::string> ids;
    const auto test = read_column(o.test, o.score_col, o.id_col, &ids);
    const auto p = data::conformal_p(cal, test);
    std::ostringstream body;
    write_header(body, "conformal",
                 "--cal " + o.cal + " --test " + o.test + (o.score_col.empty() ? "" : " --score-col " + o.score_col) +
                     (o.id_col.empty() ? "" : " --id-col " + o.id_col),
                 {"derived: n_cal=" + std::to_string(cal.size()) + " n_test=" + std::to_string(test.size())});
    body << "id,p\n";
    for (std::size_t i = 0; i < p.size(); ++i) body << ids[i] << ',' << io::fmt(p[i]) << '\n';
    if (o.out.empty()) {
        out << body.str();
    } else {
        io::AtomicFile f(o.out);
        f.stream() << body.str();
        f.commit();
    }
    return 0;
}

// ---------------------------------------------------------------------------
// mt

struct MtOptions {
    std::string procedure;
    double alpha = 0.1;
    std::string input;
    std::string stat_col;
    std::string id_col;
    std::string out;
};

/// Reads a statistic column. A file whose first line is numeric is treated as
/// headerless; ids default to the 0-based row index.
inline std::vector<double> read_statistics(const MtOptions& o, std::vector<std::string>& ids) {
    std::ifstream probe(o.input);
    if (!probe) throw DataError("cannot open " + o.input);
    std::string first;
    while (std::getline(probe, first) && io::is_skippable(first)) {}
    if (io::parse_double(first)) {
        if (!o.stat_col.empty() || !o.id_col.empty())
            throw UsageError(o.input + " has no header; --stat-col and --id-col need one");
        std::ifstream in(o.input);
        std::vector<double> v;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (io::is_skippable(line)) continue;
            const auto x = io::parse_double(line);
            if (!x) throw DataError(o.input + ":" + std::to_string(line_no) + ": malformed number");
            ids.push_back(std::to_string(v.size()));
            v.push_back(*x);
        }
        return v;
    }
    return read_column(o.input, o.stat_col, o.id_col, &ids);
}

inline int cmd_mt(const MtOptions& o, std::ostream& out) {
    const Procedure proc = parse_procedure(o.procedure);
    std::vector<std::string> ids;
    const auto stats = read_statistics(o, ids);
    const auto rs = apply_procedure(proc, stats, o.alpha);
    std::ostringstream body;
    for (std::size_t i : rs.rejected) body << ids[i] << '\n';
    if (o.out.empty()) {
        out << body.str();
    } else {
        io::AtomicFile f(o.out);
        write_header(f.stream(), "mt", "--procedure " + o.procedure + " --alpha " + io::fmt(o.alpha) + " --input " + o.input,
                     {"derived: k_hat=" + std::to_string(rs.k_hat)});
        f.stream() << "id\n" << body.str();
        f.commit();
    }
    return 0;
}

// ---------------------------------------------------------------------------

inline int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Budget-constrained active hypothesis testing", "activeht"};
    app.set_version_flag("--version", version_string());
    app.require_subcommand(1);

    SimulateOptions sim_o;
    bind_simulate(app.add_subcommand("simulate", "Replicated simulation study"), sim_o);

    RunOptions run_o;
    auto* run = app.add_subcommand("run", "Run a method on a file of (id, aux, exact) rows");
    run->add_option("--input", run_o.input, "Input CSV/TSV")->required();
    run->add_option("--id-col", run_o.id_col)->capture_default_str();
    run->add_option("--aux-col", run_o.aux_col)->capture_default_str();
    run->add_option("--exact-col", run_o.exact_col)->capture_default_str();
    run->add_option("--mode", run_o.mode, "e, p-indep or p-general")->capture_default_str();
    run->add_option("--sup-h", run_o.sup_h, "Certified bound on sup h (p-general)")->capture_default_str();
    run->add_option("--method", run_o.method)->capture_default_str();
    run->add_option("--utility", run_o.utility, "identity, log1p, inverse, log-inverse");
    run->add_option("--eps", run_o.eps)->capture_default_str();
    run->add_option("--budget", run_o.budget);
    run->add_option("--beta", run_o.beta)->capture_default_str();
    run->add_option("--seed", run_o.seed)->capture_default_str();
    run->add_option("--procedure", run_o.procedure, "Also print rejected ids: bh, by or ebh");
    run->add_option("--alpha", run_o.alpha)->capture_default_str();
    run->add_option("--out", run_o.out);
    run->add_option("--threads", run_o.threads)->capture_default_str();

    GwasOptions gw;
    auto* gwas = app.add_subcommand("gwas", "Budgeted recovery of oracle discoveries from two summary tables");
    gwas->add_option("--target", gw.target, "Target summary statistics")->required();
    gwas->add_option("--aux", gw.aux, "Auxiliary summary statistics")->required();
    gwas->add_option("--key-col", gw.key_col)->capture_default_str();
    gwas->add_option("--p-col", gw.p_col)->capture_default_str();
    gwas->add_option("--aux-key-col", gw.aux_key_col, "Defaults to --key-col");
    gwas->add_option("--aux-p-col", gw.aux_p_col, "Defaults to --p-col");
    gwas->add_option("--budget", gw.budget)->required();
    gwas->add_option("--beta", gw.beta)->capture_default_str();
    gwas->add_option("--alpha", gw.alpha)->capture_default_str();
    gwas->add_option("--seed", gw.seed)->capture_default_str();
    gwas->add_option("--method", gw.method)->capture_default_str();
    gwas->add_option("--mode", gw.mode)->capture_default_str();
    gwas->add_option("--utility", gw.utility)->capture_default_str();
    gwas->add_option("--eps", gw.eps)->capture_default_str();
    gwas->add_option("--join", gw.join, "hash, or merge for key-sorted files")->capture_default_str();
    gwas->add_option("--out", gw.out);
    gwas->add_option("--threads", gw.threads)->capture_default_str();

    ConformalOptions co;
    auto* conf = app.add_subcommand("conformal", "Conformal p-values from calibration and test scores");
    conf->add_option("--cal", co.cal)->required();
    conf->add_option("--test", co.test)->required();
    conf->add_option("--score-col", co.score_col, "Defaults to the first column");
    conf->add_option("--id-col", co.id_col);
    conf->add_option("--out", co.out);

    MtOptions mt_o;
    auto* mt = app.add_subcommand("mt", "Apply BH, BY or e-BH to a statistic file");
    mt->add_option("--procedure", mt_o.procedure)->required();
    mt->add_option("--alpha", mt_o.alpha)->capture_default_str();
    mt->add_option("--input", mt_o.input)->required();
    mt->add_option("--stat-col", mt_o.stat_col);
    mt->add_option("--id-col", mt_o.id_col);
    mt->add_option("--out", mt_o.out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << version_string() << '\n';
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        CLI::App* active = &app;
        for (auto* s : app.get_subcommands()) active = s;
        err << active->help();
        return 1;
    }

    try {
        if (*app.get_subcommand("simulate")) return cmd_simulate(sim_o, out);
        if (*run) return cmd_run(run_o, out);
        if (*gwas) return cmd_gwas(gw, out);
        if (*conf) return cmd_conformal(co, out);
        if (*mt) return cmd_mt(mt_o, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}

inline int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("activeht");
    for (const auto& a : args) argv.push_back(a.c_str());
    return dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
}

} // namespace activeht::cli
