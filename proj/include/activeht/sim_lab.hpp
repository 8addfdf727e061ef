#pragma once

// Simulation studies: three data-generating processes sharing a sparse
// half-normal signal, the evaluation metrics, and a replicated experiment
// runner. Every draw comes from a counter-based stream keyed by
// (seed, rep, hypothesis, purpose), so tables are identical for any thread
// count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "activeht/active_core.hpp"
#include "activeht/allocation.hpp"
#include "activeht/common.hpp"
#include "activeht/distributions.hpp"
#include "activeht/engine.hpp"
#include "activeht/io.hpp"
#include "activeht/mt_procedures.hpp"
#include "activeht/rng.hpp"

namespace activeht::sim {

enum class DgpKind { AuxSignal, NoisyProxy, CorrelatedProxy };

inline std::string to_string(DgpKind k) {
    switch (k) {
    case DgpKind::AuxSignal: return "signal";
    case DgpKind::NoisyProxy: return "noisy";
    case DgpKind::CorrelatedProxy: return "correlated";
    }
    return "?";
}

inline DgpKind parse_dgp_kind(const std::string& name) {
    if (name == "signal") return DgpKind::AuxSignal;
    if (name == "noisy") return DgpKind::NoisyProxy;
    if (name == "correlated") return DgpKind::CorrelatedProxy;
    throw UsageError("unknown data-generating process '" + name + "' (expected signal, noisy or correlated)");
}

/// Whether a pipeline works with e-values or p-values.
enum class StatFamily { E, P };

inline std::string to_string(StatFamily f) { return f == StatFamily::E ? "e" : "p"; }

inline StatFamily parse_stat_family(const std::string& name) {
    if (name == "e") return StatFamily::E;
    if (name == "p") return StatFamily::P;
    throw UsageError("unknown mode '" + name + "' (expected e or p)");
}

struct DgpSpec {
    DgpKind kind = DgpKind::AuxSignal;
    std::size_t n = 2000;
    double pi = 0.1;
    double sigma = 0.0; // NoisyProxy only
    double rho = 0.0;   // CorrelatedProxy only
    double alpha = 0.1;

    static DgpSpec aux_signal(std::size_t n, double pi, double alpha = 0.1) {
        return validated({DgpKind::AuxSignal, n, pi, 0.0, 0.0, alpha});
    }
    static DgpSpec noisy_proxy(std::size_t n, double pi, double sigma, double alpha = 0.1) {
        require(sigma > 0.0, "sigma must be positive");
        return validated({DgpKind::NoisyProxy, n, pi, sigma, 0.0, alpha});
    }
    static DgpSpec correlated_proxy(std::size_t n, double pi, double rho, double alpha = 0.1) {
        require(rho > -1.0 && rho < 1.0, "rho must lie in (-1, 1)");
        return validated({DgpKind::CorrelatedProxy, n, pi, 0.0, rho, alpha});
    }

    /// Variance of the non-null effect distribution, 2 log N.
    double tau_sq() const { return 2.0 * std::log(static_cast<double>(n)); }
    /// Exponent of the likelihood-ratio e-values, sqrt(log(N / alpha)).
    double lambda() const { return std::sqrt(std::log(static_cast<double>(n) / alpha)); }

private:
    static DgpSpec validated(DgpSpec s) {
        require(s.n >= 1, "N must be positive");
        require(s.pi >= 0.0 && s.pi <= 1.0, "pi must lie in [0, 1]");
        require(s.alpha > 0.0 && s.alpha < 1.0, "alpha must lie in (0, 1)");
        return s;
    }
};

struct SignalDraw {
    std::vector<double> mu;
    std::vector<double> z;
    std::vector<Truth> truth;
};

/// mu_i ~ (1 - pi) delta_0 + pi |N(0, tau^2)|, Z_i ~ N(mu_i, 1).
inline SignalDraw gen_signal(const DgpSpec& spec, std::uint32_t rep, std::uint64_t seed) {
    SignalDraw out;
    out.mu.resize(spec.n);
    out.z.resize(spec.n);
    out.truth.resize(spec.n);
    const double tau = std::sqrt(spec.tau_sq());
    for (std::size_t i = 0; i < spec.n; ++i) {
        CounterStream mix = rng_stream(seed, rep, i, Purpose::Mixture);
        const bool non_null = mix.uniform() < spec.pi;
        out.mu[i] = non_null ? half_normal(mix, tau) : 0.0;
        out.truth[i] = non_null ? Truth::NonNull : Truth::Null;
        CounterStream noise = rng_stream(seed, rep, i, Purpose::Primary);
        out.z[i] = out.mu[i] + standard_normal(noise);
    }
    return out;
}

struct StatQuad {
    double e = 0.0;
    double p = 0.0;
    double e_aux = 0.0;
    double p_aux = 0.0;
};

/// Exact and auxiliary statistics of one hypothesis. `aux_stream` supplies
/// the auxiliary channel's randomness.
inline StatQuad make_statistic(const DgpSpec& spec, double z, double mu, CounterStream& aux_stream) {
    const double lam = spec.lambda();
    const auto lr_e = [lam](double x) { return std::exp(lam * x - 0.5 * lam * lam); };
    StatQuad q;
    q.e = lr_e(z);
    q.p = normal_sf(z);
    switch (spec.kind) {
    case DgpKind::AuxSignal:
        q.e_aux = poisson(aux_stream, 1.0 + mu);
        q.p_aux = beta_one(aux_stream, 1.0 + mu);
        break;
    case DgpKind::NoisyProxy: {
        const double y = z + spec.sigma * standard_normal(aux_stream);
        q.e_aux = lr_e(y);
        q.p_aux = normal_sf(y);
        break;
    }
    case DgpKind::CorrelatedProxy: {
        // Y = rho Z + sqrt(1 - rho^2) W has mean rho mu, unit variance and
        // correlation rho with Z.
        const double y = spec.rho * z + std::sqrt(1.0 - spec.rho * spec.rho) * standard_normal(aux_stream);
        q.e_aux = lr_e(y);
        q.p_aux = normal_sf(y);
        break;
    }
    }
    return q;
}

struct Statistics {
    std::vector<double> e, p, e_aux, p_aux;
};

inline Statistics make_statistics(const DgpSpec& spec, const SignalDraw& signal, std::uint32_t rep,
                                  std::uint64_t seed) {
    Statistics st;
    st.e.resize(spec.n);
    st.p.resize(spec.n);
    st.e_aux.resize(spec.n);
    st.p_aux.resize(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) {
        CounterStream s = rng_stream(seed, rep, i, Purpose::Auxiliary);
        const StatQuad q = make_statistic(spec, signal.z[i], signal.mu[i], s);
        st.e[i] = q.e;
        st.p[i] = q.p;
        st.e_aux[i] = q.e_aux;
        st.p_aux[i] = q.p_aux;
    }
    return st;
}

struct DefaultChoice {
    UtilitySpec utility;
    StatMode mode;
};

/// Utility and construction used by Active-Default in each study: identity /
/// log-inverse for the auxiliary-signal study with the independent
/// p-construction; log1p / log-inverse with the general-dependence
/// construction for the two proxy studies.
inline DefaultChoice utility_defaults(DgpKind kind, StatFamily family) {
    if (family == StatFamily::E)
        return {kind == DgpKind::AuxSignal ? UtilitySpec::identity() : UtilitySpec::log1p(), StatMode::e_value()};
    return {UtilitySpec::log_inverse(kDefaultEps),
            kind == DgpKind::AuxSignal ? StatMode::p_independent() : StatMode::p_general()};
}

struct RunMetrics {
    std::string method;
    std::uint32_t rep = 0;
    double fdp = 0.0;
    double tpp = 0.0;
    std::size_t queries = 0;
    double efficiency = 0.0;
    std::size_t discoveries = 0;
    std::size_t true_discoveries = 0;
};

inline RunMetrics compute_metrics(const RejectionSet& rs, const std::vector<Truth>& truth, std::size_t queries) {
    RunMetrics m;
    std::size_t n1 = 0;
    for (Truth t : truth) n1 += t == Truth::NonNull;
    std::size_t s = 0;
    for (std::size_t i : rs.rejected) s += truth[i] == Truth::NonNull;
    const std::size_t r = rs.rejected.size();
    m.discoveries = r;
    m.true_discoveries = s;
    m.fdp = static_cast<double>(r - s) / static_cast<double>(std::max<std::size_t>(r, 1));
    m.tpp = n1 == 0 ? 0.0 : static_cast<double>(s) / static_cast<double>(n1);
    m.queries = queries;
    m.efficiency = queries == 0 ? 0.0 : static_cast<double>(s) / static_cast<double>(queries);
    return m;
}

struct MethodSummary {
    std::string method;
    double fdr = 0.0, fdr_se = 0.0;
    double tpr = 0.0, tpr_se = 0.0;
    double queries_mean = 0.0;
    double efficiency_mean = 0.0, efficiency_se = 0.0;
};

struct ExperimentConfig {
    DgpSpec dgp;
    StatFamily family = StatFamily::E;
    std::vector<MethodSpec> methods;
    double budget = 100.0;
    std::size_t reps = 100;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

struct ExperimentResult {
    /// Rows ordered by replication, then by method in configuration order.
    std::vector<RunMetrics> rows;
    std::vector<MethodSummary> summary;
};

/// Methods compared in the studies, with Active-Default's utility taken from
/// utility_defaults.
inline std::vector<MethodSpec> standard_methods(DgpKind kind, StatFamily family, BetaParam beta) {
    return {MethodSpec::active_default(utility_defaults(kind, family).utility, beta), MethodSpec::active_xu(beta),
            MethodSpec::xu(beta), MethodSpec::random(), MethodSpec::all()};
}

inline std::vector<MethodSummary> summarize(const std::vector<RunMetrics>& rows, const std::vector<MethodSpec>& methods,
                                            std::size_t reps) {
    std::vector<MethodSummary> out;
    const std::size_t m = methods.size();
    const double r = static_cast<double>(reps);
    const auto mean_se = [&](std::size_t mi, auto field) {
        double sum = 0.0;
        for (std::size_t k = 0; k < reps; ++k) sum += field(rows[k * m + mi]);
        const double mean = sum / r;
        double ss = 0.0;
        for (std::size_t k = 0; k < reps; ++k) {
            const double d = field(rows[k * m + mi]) - mean;
            ss += d * d;
        }
        const double se = reps > 1 ? std::sqrt(ss / (r - 1.0) / r) : 0.0;
        return std::pair{mean, se};
    };
    for (std::size_t mi = 0; mi < m; ++mi) {
        MethodSummary s;
        s.method = to_string(methods[mi].kind);
        std::tie(s.fdr, s.fdr_se) = mean_se(mi, [](const RunMetrics& x) { return x.fdp; });
        std::tie(s.tpr, s.tpr_se) = mean_se(mi, [](const RunMetrics& x) { return x.tpp; });
        s.queries_mean = mean_se(mi, [](const RunMetrics& x) { return static_cast<double>(x.queries); }).first;
        std::tie(s.efficiency_mean, s.efficiency_se) = mean_se(mi, [](const RunMetrics& x) { return x.efficiency; });
        out.push_back(s);
    }
    return out;
}

/// Generates data for every replication, runs each method on it with shared
/// decision streams, and scores e-values with e-BH and p-values with BY.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    require(cfg.reps >= 1, "at least one replication is required");
    require(cfg.dgp.pi > 0.0, "pi must be positive: the metrics assume at least one non-null");
    require(!cfg.methods.empty(), "no methods selected");
    const std::size_t m = cfg.methods.size();
    const DefaultChoice defaults = utility_defaults(cfg.dgp.kind, cfg.family);
    const StatMode mode = defaults.mode;
    const Procedure proc = cfg.family == StatFamily::E ? Procedure::EBH : Procedure::BY;

    ExperimentResult res;
    res.rows.resize(cfg.reps * m);
    parallel_for(cfg.reps, cfg.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            const auto rep = static_cast<std::uint32_t>(k);
            const SignalDraw signal = gen_signal(cfg.dgp, rep, cfg.seed);
            const Statistics st = make_statistics(cfg.dgp, signal, rep, cfg.seed);
            const auto& aux = cfg.family == StatFamily::E ? st.e_aux : st.p_aux;
            const auto& exact_vals = cfg.family == StatFamily::E ? st.e : st.p;
            const HypothesisView view{aux};
            for (std::size_t mi = 0; mi < m; ++mi) {
                auto exact = [&exact_vals](std::size_t i) { return exact_vals[i]; };
                const RunOutput out =
                    run_method(cfg.methods[mi], mode, cfg.budget, view, exact, cfg.seed, RunContext{rep, 1});
                std::vector<double> values(out.outcomes.size());
                for (std::size_t i = 0; i < values.size(); ++i) values[i] = out.outcomes[i].value;
                const RejectionSet rs = apply_procedure(proc, values, cfg.dgp.alpha);
                RunMetrics met = compute_metrics(rs, signal.truth, out.n_queries);
                met.method = to_string(cfg.methods[mi].kind);
                met.rep = rep;
                res.rows[k * m + mi] = met;
            }
        }
    });
    res.summary = summarize(res.rows, cfg.methods, cfg.reps);
    return res;
}

inline void write_runs_csv(std::ostream& os, const std::vector<RunMetrics>& rows) {
    os << "method,rep,fdp,tpp,queries,efficiency\n";
    for (const auto& r : rows)
        os << r.method << ',' << r.rep << ',' << io::fmt(r.fdp) << ',' << io::fmt(r.tpp) << ',' << r.queries << ','
           << io::fmt(r.efficiency) << '\n';
}

inline void write_summary_csv(std::ostream& os, const std::vector<MethodSummary>& rows) {
    os << "method,fdr,fdr_se,tpr,tpr_se,queries_mean,efficiency_mean,efficiency_se\n";
    for (const auto& s : rows)
        os << s.method << ',' << io::fmt(s.fdr) << ',' << io::fmt(s.fdr_se) << ',' << io::fmt(s.tpr) << ','
           << io::fmt(s.tpr_se) << ',' << io::fmt(s.queries_mean) << ',' << io::fmt(s.efficiency_mean) << ','
           << io::fmt(s.efficiency_se) << '\n';
}

} // namespace activeht::sim
