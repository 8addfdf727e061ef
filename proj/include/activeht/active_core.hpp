#pragma once

// Single-hypothesis active e-value and p-value constructions, plus Monte Carlo
// testers for their validity and a dominance check for (a, b) candidates.
//
// Query branch (U < min(1, h)):   e: (1 - beta) / h * E
//                                 p: min(1, b * P), b = h / (1 - beta)          (independent)
//                                                   b = min(1, sup h) / (1 - beta) (general)
// No-query branch:                e: beta / (1 - h)
//                                 p: min(1, (1 - h) / beta)

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "activeht/common.hpp"
#include "activeht/rng.hpp"

namespace activeht {

class BetaParam {
public:
    explicit BetaParam(double beta = 0.5) : beta_(beta) {
        require(beta > 0.0 && beta < 1.0, "beta must lie in the open interval (0, 1), got " + std::to_string(beta));
    }
    double value() const { return beta_; }
    friend bool operator==(BetaParam, BetaParam) = default;

private:
    double beta_;
};

/// Allocation value h (possibly above 1) and the Bernoulli probability min(1, h).
struct ControlValue {
    double h = 0.0;
    double query_prob = 0.0;

    static ControlValue from(double h) {
        require(std::isfinite(h) && h >= 0.0, "control value must be finite and nonnegative");
        return ControlValue{h, std::min(1.0, h)};
    }
};

struct StatMode {
    enum class Kind { EValue, PValueIndependent, PValueGeneral };

    Kind kind = Kind::EValue;
    /// Certified upper bound on sup h, used only by PValueGeneral.
    double sup_h = 1.0;

    static StatMode e_value() { return {Kind::EValue, 1.0}; }
    static StatMode p_independent() { return {Kind::PValueIndependent, 1.0}; }
    static StatMode p_general(double sup_h = 1.0) {
        require(sup_h > 0.0 && sup_h <= 1.0, "sup_h must lie in (0, 1]");
        return {Kind::PValueGeneral, sup_h};
    }

    bool is_p() const { return kind != Kind::EValue; }
    friend bool operator==(const StatMode&, const StatMode&) = default;
};

inline std::string to_string(StatMode::Kind k) {
    switch (k) {
    case StatMode::Kind::EValue: return "e";
    case StatMode::Kind::PValueIndependent: return "p-indep";
    case StatMode::Kind::PValueGeneral: return "p-general";
    }
    return "?";
}

enum class Branch { Query, NoQuery };

inline const char* to_string(Branch b) { return b == Branch::Query ? "query" : "no-query"; }

struct ActiveOutcome {
    double value = 0.0;
    bool queried = false;
    Branch branch = Branch::NoQuery;
    /// Multiplier applied to the exact statistic; 0 when not queried.
    double scale = 0.0;
};

namespace detail {

inline void check_draw(double u) {
    require(u >= 0.0 && u < 1.0, "uniform draw must lie in [0, 1)");
}

} // namespace detail

/// Active e-value. `e_exact` is a nullary callable evaluated only on the
/// query branch.
template <class Exact>
ActiveOutcome active_e(Exact&& e_exact, ControlValue h, BetaParam beta, double u) {
    detail::check_draw(u);
    const double b = beta.value();
    if (u < h.query_prob) {
        if (!(h.h > 0.0)) throw std::logic_error("query branch reached with h = 0");
        const double e = e_exact();
        require(std::isfinite(e) && e >= 0.0, "exact e-value must be finite and nonnegative");
        const double scale = (1.0 - b) / h.h;
        return {scale * e, true, Branch::Query, scale};
    }
    if (h.h >= 1.0) throw std::logic_error("no-query branch reached with h >= 1");
    return {b / (1.0 - h.h), false, Branch::NoQuery, 0.0};
}

/// Scale b applied to the exact p-value on the query branch.
inline double p_query_scale(ControlValue h, BetaParam beta, const StatMode& mode) {
    const double denom = 1.0 - beta.value();
    return mode.kind == StatMode::Kind::PValueIndependent ? h.h / denom : std::min(1.0, mode.sup_h) / denom;
}

template <class Exact>
ActiveOutcome active_p(Exact&& p_exact, ControlValue h, BetaParam beta, const StatMode& mode, double u) {
    require(mode.is_p(), "active_p requires a p-value mode");
    detail::check_draw(u);
    if (u < h.query_prob) {
        if (!(h.h > 0.0)) throw std::logic_error("query branch reached with h = 0");
        const double p = p_exact();
        require(p >= 0.0 && p <= 1.0, "exact p-value must lie in [0, 1]");
        const double scale = p_query_scale(h, beta, mode);
        return {std::min(1.0, scale * p), true, Branch::Query, scale};
    }
    if (h.h >= 1.0) throw std::logic_error("no-query branch reached with h >= 1");
    return {std::min(1.0, (1.0 - h.h) / beta.value()), false, Branch::NoQuery, 0.0};
}

/// Dispatches to active_e or active_p by mode.
template <class Exact>
ActiveOutcome active_statistic(Exact&& exact, ControlValue h, BetaParam beta, const StatMode& mode, double u) {
    if (mode.is_p()) return active_p(std::forward<Exact>(exact), h, beta, mode, u);
    return active_e(std::forward<Exact>(exact), h, beta, u);
}

// ---------------------------------------------------------------------------
// Monte Carlo validity testers

struct McEstimate {
    double mean = 0.0;
    double se = 0.0;
};

struct EcdfPoint {
    double s = 0.0;
    double ecdf = 0.0;
    double se = 0.0;
};

/// Draws one (auxiliary, exact) pair from its stream.
using PairSampler = std::function<std::pair<double, double>(CounterStream&)>;
using ControlFn = std::function<ControlValue(double)>;

inline constexpr std::size_t kMinMcSamples = 10000;

/// Estimates E[E_active] for a null sampler. Sample j uses the streams
/// (seed, 0, j, Sampler) and (seed, 0, j, Decision).
inline McEstimate mc_evalue_validity(const PairSampler& sampler, const ControlFn& h_fn, BetaParam beta,
                                     std::size_t n_samples, std::uint64_t seed, unsigned threads = 1) {
    require(n_samples >= kMinMcSamples, "Monte Carlo validity check needs at least 10^4 samples");
    std::vector<double> values(n_samples);
    parallel_for(n_samples, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t j = begin; j < end; ++j) {
            CounterStream s = rng_stream(seed, 0, j, Purpose::Sampler);
            const auto [aux, exact] = sampler(s);
            if (!(aux >= 0.0) || !(exact >= 0.0)) throw DomainError("sampler produced a negative e-value");
            const double u = uniform_draw(seed, 0, j, Purpose::Decision);
            values[j] = active_e([e = exact] { return e; }, h_fn(aux), beta, u).value;
        }
    });
    ExactSum sum;
    for (double v : values) sum.add(v);
    const double n = static_cast<double>(n_samples);
    const double mean = sum.value() / n;
    ExactSum sq;
    for (double v : values) sq.add((v - mean) * (v - mean));
    return {mean, std::sqrt(sq.value() / (n - 1.0) / n)};
}

/// Empirical CDF of P_active at each level of s_grid, with binomial standard
/// errors.
inline std::vector<EcdfPoint> mc_pvalue_superuniformity(const PairSampler& sampler, const ControlFn& h_fn,
                                                        BetaParam beta, const StatMode& mode,
                                                        std::span<const double> s_grid, std::size_t n_samples,
                                                        std::uint64_t seed, unsigned threads = 1) {
    require(mode.is_p(), "super-uniformity check requires a p-value mode");
    require(n_samples >= kMinMcSamples, "Monte Carlo validity check needs at least 10^4 samples");
    for (double s : s_grid) require(s > 0.0 && s <= 1.0, "grid levels must lie in (0, 1]");
    std::vector<double> values(n_samples);
    parallel_for(n_samples, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t j = begin; j < end; ++j) {
            CounterStream s = rng_stream(seed, 0, j, Purpose::Sampler);
            const auto [aux, exact] = sampler(s);
            if (!(exact >= 0.0 && exact <= 1.0) || !(aux >= 0.0 && aux <= 1.0))
                throw DomainError("sampler produced a p-value outside [0, 1]");
            const double u = uniform_draw(seed, 0, j, Purpose::Decision);
            values[j] = active_p([p = exact] { return p; }, h_fn(aux), beta, mode, u).value;
        }
    });
    std::vector<EcdfPoint> out;
    out.reserve(s_grid.size());
    const double n = static_cast<double>(n_samples);
    for (double s : s_grid) {
        const auto hits = std::count_if(values.begin(), values.end(), [s](double v) { return v <= s; });
        const double f = static_cast<double>(hits) / n;
        out.push_back({s, f, std::sqrt(f * (1.0 - f) / n)});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Dominance of the optimal (a, b) pair over other valid candidates

/// A function tabulated on a grid of auxiliary values.
struct Tabulated {
    std::vector<double> x;
    std::vector<double> y;
};

class InvalidCandidate : public DomainError {
public:
    using DomainError::DomainError;
};

/// Checks that (a, b) satisfy sup a(1 - h) <= beta and sup b h <= 1 - beta on
/// the grid, then reports whether a <= beta / (1 - h) and b <= (1 - beta) / h
/// wherever 0 < h < 1.
inline bool dominance_check(const Tabulated& a, const Tabulated& b, const std::function<double(double)>& h_fn,
                            BetaParam beta) {
    require(a.x.size() == a.y.size() && b.x.size() == b.y.size(), "tabulated function has mismatched lengths");
    require(a.x == b.x, "candidates must share one grid");
    constexpr double rel = 1e-12;
    const double bt = beta.value();
    for (std::size_t i = 0; i < a.x.size(); ++i) {
        const double h = h_fn(a.x[i]);
        require(h >= 0.0 && h <= 1.0, "control function must map into [0, 1]");
        if (a.y[i] < 0.0 || b.y[i] < 0.0) throw InvalidCandidate("candidate functions must be nonnegative");
        if (a.y[i] * (1.0 - h) > bt * (1.0 + rel) || b.y[i] * h > (1.0 - bt) * (1.0 + rel))
            throw InvalidCandidate("invalid candidate: violates the validity bound at x = " + std::to_string(a.x[i]));
    }
    for (std::size_t i = 0; i < a.x.size(); ++i) {
        const double h = h_fn(a.x[i]);
        if (!(h > 0.0 && h < 1.0)) continue;
        if (a.y[i] > bt / (1.0 - h) * (1.0 + rel)) return false;
        if (b.y[i] > (1.0 - bt) / h * (1.0 + rel)) return false;
    }
    return true;
}

} // namespace activeht
