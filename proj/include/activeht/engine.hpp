#pragma once

// Budgeted active inference over N hypotheses and the comparison baselines
// (All, Random, Xu, Active-Xu). Exact statistics are evaluated lazily: the
// caller supplies a callable double(std::size_t) that is invoked once per
// queried hypothesis and never otherwise. With threads > 1 the callable is
// invoked concurrently and must be safe for that.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <type_traits>
#include <stdexcept>
#include <string>
#include <vector>

#include "activeht/active_core.hpp"
#include "activeht/allocation.hpp"
#include "activeht/common.hpp"
#include "activeht/rng.hpp"

namespace activeht {

enum class Truth : std::uint8_t { Null, NonNull };

struct HypothesisRecord {
    std::string id;
    double aux = 0.0;
    std::function<double()> exact;
    std::optional<Truth> truth;
};

/// Non-owning view of a set of hypotheses. Random streams are keyed by
/// `keys[i]` when present, otherwise by position.
struct HypothesisView {
    std::span<const double> aux;
    std::span<const std::uint64_t> keys = {};
    std::span<const std::string> ids = {};

    std::size_t size() const { return aux.size(); }
    std::uint64_t key(std::size_t i) const { return keys.empty() ? i : keys[i]; }
    std::string id(std::size_t i) const { return ids.empty() ? "#" + std::to_string(i) : ids[i]; }
};

struct MethodSpec {
    enum class Kind { ActiveDefault, ActiveXu, Xu, Random, All };

    Kind kind = Kind::ActiveDefault;
    UtilitySpec utility = UtilitySpec::identity();
    BetaParam beta{0.5};

    static MethodSpec active_default(UtilitySpec u, BetaParam beta = BetaParam{0.5}) {
        return {Kind::ActiveDefault, std::move(u), beta};
    }
    static MethodSpec active_xu(BetaParam beta = BetaParam{0.5}) { return {Kind::ActiveXu, {}, beta}; }
    static MethodSpec xu(BetaParam beta = BetaParam{0.5}) { return {Kind::Xu, {}, beta}; }
    static MethodSpec random() { return {Kind::Random, {}, BetaParam{0.5}}; }
    static MethodSpec all() { return {Kind::All, {}, BetaParam{0.5}}; }
};

inline std::string to_string(MethodSpec::Kind k) {
    switch (k) {
    case MethodSpec::Kind::ActiveDefault: return "active-default";
    case MethodSpec::Kind::ActiveXu: return "active-xu";
    case MethodSpec::Kind::Xu: return "xu";
    case MethodSpec::Kind::Random: return "random";
    case MethodSpec::Kind::All: return "all";
    }
    return "?";
}

inline MethodSpec::Kind parse_method_kind(const std::string& name) {
    for (auto k : {MethodSpec::Kind::ActiveDefault, MethodSpec::Kind::ActiveXu, MethodSpec::Kind::Xu,
                   MethodSpec::Kind::Random, MethodSpec::Kind::All})
        if (to_string(k) == name) return k;
    throw UsageError("unknown method '" + name + "' (expected active-default, active-xu, xu, random or all)");
}

struct ActiveConfig {
    StatMode mode = StatMode::e_value();
    BetaParam beta{0.5};
    double budget = 1.0;
    UtilitySpec utility = UtilitySpec::identity();
    std::uint64_t seed = 0;
};

struct RunContext {
    std::uint32_t rep = 0;
    unsigned threads = 1;
    /// Optional caller-supplied decision draws U_i, aligned with the input;
    /// replaces the keyed streams (used to replay a recorded trace).
    std::span<const double> draws = {};
};

struct RunOutput {
    std::vector<ActiveOutcome> outcomes;
    /// Per-hypothesis control value: h_i for allocation methods, the query
    /// probability for Xu and Random, 1 for All.
    std::vector<double> control;
    std::size_t n_queries = 0;
    std::uint64_t seed = 0;
    MethodSpec method;
    std::vector<std::string> warnings;
};

namespace detail {

inline double decision_draw(const HypothesisView& view, std::uint64_t seed, const RunContext& ctx, std::size_t i) {
    if (!ctx.draws.empty()) return ctx.draws[i];
    return uniform_draw(seed, ctx.rep, view.key(i), Purpose::Decision);
}

inline void check_draws(const HypothesisView& view, const RunContext& ctx) {
    require(ctx.draws.empty() || ctx.draws.size() == view.size(), "supplied draws must match the hypothesis count");
}

inline void check_aux(const HypothesisView& view, const StatMode& mode) {
    for (std::size_t i = 0; i < view.size(); ++i) {
        const double a = view.aux[i];
        const bool ok = mode.is_p() ? (a >= 0.0 && a <= 1.0) : (a >= 0.0 && !std::isinf(a));
        if (!ok)
            throw DomainError("auxiliary statistic of hypothesis " + view.id(i) + " is outside the domain of mode " +
                              to_string(mode.kind));
    }
}

/// Wraps the caller's evaluator: validates each value and counts calls.
template <class Exact>
class Ledger {
public:
    Ledger(const HypothesisView& view, Exact& exact, const StatMode& mode) : view_(view), exact_(exact), mode_(mode) {}

    double operator()(std::size_t i) {
        calls_.fetch_add(1, std::memory_order_relaxed);
        const double v = exact_(i);
        const bool ok = mode_.is_p() ? (v >= 0.0 && v <= 1.0) : (v >= 0.0 && std::isfinite(v));
        if (!ok) throw DataError("exact statistic of hypothesis " + view_.id(i) + " is missing or invalid");
        return v;
    }

    std::size_t calls() const { return calls_.load(); }

private:
    const HypothesisView& view_;
    Exact& exact_;
    StatMode mode_;
    std::atomic<std::size_t> calls_{0};
};

template <class Exact>
void finish(RunOutput& out, const Ledger<Exact>& ledger) {
    out.n_queries = static_cast<std::size_t>(
        std::count_if(out.outcomes.begin(), out.outcomes.end(), [](const ActiveOutcome& o) { return o.queried; }));
    if (out.n_queries != ledger.calls())
        throw std::logic_error("query ledger mismatch: " + std::to_string(ledger.calls()) + " evaluations for " +
                               std::to_string(out.n_queries) + " queried hypotheses");
}

template <class Exact>
RunOutput run_allocated(const HypothesisView& view, Exact& exact, const StatMode& mode, BetaParam beta,
                        double budget, const UtilitySpec& utility, std::uint64_t seed, const RunContext& ctx,
                        const MethodSpec& method) {
    require(view.size() > 0, "no hypotheses to test");
    check_aux(view, mode);
    check_draws(view, ctx);
    const AllocationResult alloc = allocate(view.aux, utility, BudgetConfig(budget, view.size()), ctx.threads);
    Ledger<Exact> ledger(view, exact, mode);
    RunOutput out;
    out.seed = seed;
    out.method = method;
    out.warnings = alloc.warnings;
    out.outcomes.resize(view.size());
    out.control.resize(view.size());
    parallel_for(view.size(), ctx.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const double u = decision_draw(view, seed, ctx, i);
            out.outcomes[i] = active_statistic([&ledger, i] { return ledger(i); }, alloc.h[i], beta, mode, u);
            out.control[i] = alloc.h[i].h;
        }
    });
    finish(out, ledger);
    return out;
}

} // namespace detail

/// Normalized allocation followed by the optimal active construction.
template <class Exact>
RunOutput run_active_default(const HypothesisView& view, Exact&& exact, const ActiveConfig& config,
                             const RunContext& ctx = {}) {
    return detail::run_allocated(view, exact, config.mode, config.beta, config.budget, config.utility, config.seed,
                                 ctx, MethodSpec::active_default(config.utility, config.beta));
}

/// Allocation driven by the utility implied by Xu's query probability.
template <class Exact>
RunOutput run_active_xu(const HypothesisView& view, Exact&& exact, BetaParam beta, const StatMode& mode,
                        double budget, std::uint64_t seed, const RunContext& ctx = {}) {
    const UtilitySpec u = UtilitySpec::xu(beta, mode.is_p() ? Direction::Inverse : Direction::Direct);
    return detail::run_allocated(view, exact, mode, beta, budget, u, seed, ctx, MethodSpec::active_xu(beta));
}

/// Queries everything; outcomes carry the raw exact statistics.
template <class Exact>
RunOutput run_all(const HypothesisView& view, Exact&& exact, const StatMode& mode, const RunContext& ctx = {}) {
    detail::Ledger<std::remove_reference_t<Exact>> ledger(view, exact, mode);
    RunOutput out;
    out.method = MethodSpec::all();
    out.outcomes.resize(view.size());
    out.control.assign(view.size(), 1.0);
    parallel_for(view.size(), ctx.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) out.outcomes[i] = {ledger(i), true, Branch::Query, 1.0};
    });
    detail::finish(out, ledger);
    return out;
}

/// Queries a uniform random subset of exactly n_b hypotheses; the rest get 1.
/// The subset is the n_b smallest keyed draws, so it does not depend on input
/// order.
template <class Exact>
RunOutput run_random(const HypothesisView& view, Exact&& exact, const StatMode& mode, double n_b,
                     std::uint64_t seed, const RunContext& ctx = {}) {
    require(n_b >= 0.0 && n_b == std::floor(n_b), "Random requires an integer budget");
    require(n_b <= static_cast<double>(view.size()), "Random budget exceeds the number of hypotheses");
    const auto k = static_cast<std::size_t>(n_b);
    const std::size_t n = view.size();

    struct Ticket {
        double draw;
        std::uint64_t key;
        std::size_t index;
    };
    std::vector<Ticket> tickets(n);
    for (std::size_t i = 0; i < n; ++i)
        tickets[i] = {uniform_draw(seed, ctx.rep, view.key(i), Purpose::Subset), view.key(i), i};
    const auto before = [](const Ticket& a, const Ticket& b) {
        return a.draw != b.draw ? a.draw < b.draw : a.key < b.key;
    };
    if (k < n) std::nth_element(tickets.begin(), tickets.begin() + static_cast<std::ptrdiff_t>(k), tickets.end(), before);
    std::vector<char> chosen(n, 0);
    for (std::size_t j = 0; j < k; ++j) chosen[tickets[j].index] = 1;

    detail::Ledger<std::remove_reference_t<Exact>> ledger(view, exact, mode);
    RunOutput out;
    out.seed = seed;
    out.method = MethodSpec::random();
    out.outcomes.resize(n);
    out.control.assign(n, n == 0 ? 0.0 : n_b / static_cast<double>(n));
    parallel_for(n, ctx.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            out.outcomes[i] = chosen[i] ? ActiveOutcome{ledger(i), true, Branch::Query, 1.0}
                                        : ActiveOutcome{1.0, false, Branch::NoQuery, 0.0};
    });
    detail::finish(out, ledger);
    return out;
}

/// Query probability of the independent-decision baseline.
inline double xu_query_prob(double aux, BetaParam beta, const StatMode& mode) {
    if (mode.is_p()) return std::max(0.0, 1.0 - beta.value() * aux);
    return aux > 0.0 ? std::max(0.0, 1.0 - beta.value() / aux) : 0.0;
}

/// Independent per-hypothesis decisions with no global budget:
///   e: (1 - T) E^a + T (1 - beta) E,   p: (1 - T) P^a + T P / (1 - beta).
template <class Exact>
RunOutput run_xu(const HypothesisView& view, Exact&& exact, BetaParam beta, const StatMode& mode,
                 std::uint64_t seed, const RunContext& ctx = {}) {
    detail::check_aux(view, mode);
    detail::check_draws(view, ctx);
    detail::Ledger<std::remove_reference_t<Exact>> ledger(view, exact, mode);
    RunOutput out;
    out.seed = seed;
    out.method = MethodSpec::xu(beta);
    out.outcomes.resize(view.size());
    out.control.resize(view.size());
    const double scale = mode.is_p() ? 1.0 / (1.0 - beta.value()) : 1.0 - beta.value();
    parallel_for(view.size(), ctx.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const double p = xu_query_prob(view.aux[i], beta, mode);
            out.control[i] = p;
            const double u = detail::decision_draw(view, seed, ctx, i);
            if (u < p) {
                double v = scale * ledger(i);
                if (mode.is_p()) v = std::min(1.0, v);
                out.outcomes[i] = {v, true, Branch::Query, scale};
            } else {
                out.outcomes[i] = {view.aux[i], false, Branch::NoQuery, 0.0};
            }
        }
    });
    detail::finish(out, ledger);
    return out;
}

/// Runs any method. `budget` is ignored by Xu and All.
template <class Exact>
RunOutput run_method(const MethodSpec& method, const StatMode& mode, double budget, const HypothesisView& view,
                     Exact&& exact, std::uint64_t seed, const RunContext& ctx = {}) {
    switch (method.kind) {
    case MethodSpec::Kind::ActiveDefault:
        return run_active_default(view, exact, ActiveConfig{mode, method.beta, budget, method.utility, seed}, ctx);
    case MethodSpec::Kind::ActiveXu: return run_active_xu(view, exact, method.beta, mode, budget, seed, ctx);
    case MethodSpec::Kind::Xu: return run_xu(view, exact, method.beta, mode, seed, ctx);
    case MethodSpec::Kind::Random: return run_random(view, exact, mode, budget, seed, ctx);
    case MethodSpec::Kind::All: {
        RunOutput out = run_all(view, exact, mode, ctx);
        out.seed = seed;
        return out;
    }
    }
    throw std::logic_error("unhandled method");
}

/// Record-based entry point; streams are keyed by a hash of each record's id.
inline RunOutput run_method(const MethodSpec& method, const StatMode& mode, double budget,
                            std::span<const HypothesisRecord> records, std::uint64_t seed,
                            const RunContext& ctx = {}) {
    std::vector<double> aux(records.size());
    std::vector<std::uint64_t> keys(records.size());
    std::vector<std::string> ids(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        aux[i] = records[i].aux;
        keys[i] = key_of(records[i].id);
        ids[i] = records[i].id;
    }
    const HypothesisView view{aux, keys, ids};
    auto exact = [&](std::size_t i) {
        if (!records[i].exact) throw DataError("hypothesis " + records[i].id + " has no exact statistic");
        return records[i].exact();
    };
    return run_method(method, mode, budget, view, exact, seed, ctx);
}

} // namespace activeht
