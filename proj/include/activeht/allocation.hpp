#pragma once

// Utility functions and the normalized budget allocation
//
//     h_i = n_b * u_i(x_i) / sum_j u_j(x_j),
//
// which satisfies sum_i h_i = n_b and hence sum_i min(1, h_i) <= n_b.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "activeht/active_core.hpp"
#include "activeht/common.hpp"

namespace activeht {

enum class Direction { Direct, Inverse };

inline constexpr double kDefaultEps = 1e-8;

struct UtilitySpec {
    enum class Family { Identity, Log1p, Inverse, LogInverse, Custom, Xu };

    Family family = Family::Identity;
    Direction direction = Direction::Direct;
    double eps = kDefaultEps;
    /// Custom: piecewise-linear table, flat beyond the endpoints.
    std::vector<double> table_x;
    std::vector<double> table_y;
    /// Xu: the hyperparameter of the implied query probability.
    double xu_beta = 0.5;

    static UtilitySpec make(Family f, Direction d, double eps = kDefaultEps) {
        UtilitySpec s;
        s.family = f;
        s.direction = d;
        s.eps = eps;
        return s;
    }
    static UtilitySpec identity() { return make(Family::Identity, Direction::Direct); }
    static UtilitySpec log1p() { return make(Family::Log1p, Direction::Direct); }
    static UtilitySpec inverse(double eps = kDefaultEps) {
        require(eps > 0.0, "utility eps must be positive");
        return make(Family::Inverse, Direction::Inverse, eps);
    }
    static UtilitySpec log_inverse(double eps = kDefaultEps) {
        require(eps > 0.0, "utility eps must be positive");
        return make(Family::LogInverse, Direction::Inverse, eps);
    }
    static UtilitySpec custom(std::vector<double> xs, std::vector<double> ys, Direction dir) {
        require(xs.size() == ys.size() && !xs.empty(), "custom utility table needs matching, nonempty columns");
        for (std::size_t i = 0; i < xs.size(); ++i) {
            require(ys[i] >= 0.0 && std::isfinite(ys[i]), "custom utility values must be nonnegative");
            if (i == 0) continue;
            require(xs[i] > xs[i - 1], "custom utility grid must be strictly increasing");
            if (dir == Direction::Direct)
                require(ys[i] >= ys[i - 1], "custom utility must be non-decreasing for a direct signal");
            else
                require(ys[i] <= ys[i - 1], "custom utility must be non-increasing for an inverse signal");
        }
        UtilitySpec s = make(Family::Custom, dir);
        s.table_x = std::move(xs);
        s.table_y = std::move(ys);
        return s;
    }
    /// Utility implied by the independent-decision baseline: max(1 - beta/x, 0)
    /// for a direct (e-value) signal, max(1 - beta*x, 0) for an inverse one.
    static UtilitySpec xu(BetaParam beta, Direction dir) {
        UtilitySpec s = make(Family::Xu, dir);
        s.xu_beta = beta.value();
        return s;
    }
};

inline std::string to_string(const UtilitySpec& spec) {
    switch (spec.family) {
    case UtilitySpec::Family::Identity: return "identity";
    case UtilitySpec::Family::Log1p: return "log1p";
    case UtilitySpec::Family::Inverse: return "inverse";
    case UtilitySpec::Family::LogInverse: return "log-inverse";
    case UtilitySpec::Family::Custom: return "custom";
    case UtilitySpec::Family::Xu: return "xu";
    }
    return "?";
}

inline double eval_utility(const UtilitySpec& spec, double x) {
    require(!std::isnan(x), "utility argument is NaN");
    require(x >= 0.0, "utility argument must be nonnegative, got " + std::to_string(x));
    switch (spec.family) {
    case UtilitySpec::Family::Identity: return x;
    case UtilitySpec::Family::Log1p: return std::log1p(x);
    case UtilitySpec::Family::Inverse: return 1.0 / (x + spec.eps);
    case UtilitySpec::Family::LogInverse: return std::log1p(1.0 / (x + spec.eps));
    case UtilitySpec::Family::Xu:
        if (spec.direction == Direction::Direct) return x > 0.0 ? std::max(1.0 - spec.xu_beta / x, 0.0) : 0.0;
        return std::max(1.0 - spec.xu_beta * x, 0.0);
    case UtilitySpec::Family::Custom: {
        const auto& xs = spec.table_x;
        const auto& ys = spec.table_y;
        if (x <= xs.front()) return ys.front();
        if (x >= xs.back()) return ys.back();
        const auto it = std::upper_bound(xs.begin(), xs.end(), x);
        const std::size_t k = static_cast<std::size_t>(it - xs.begin());
        const double t = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
        return ys[k - 1] + t * (ys[k] - ys[k - 1]);
    }
    }
    return 0.0;
}

struct BudgetConfig {
    double n_b = 0.0;
    std::size_t n = 0;

    BudgetConfig(double budget, std::size_t count) : n_b(budget), n(count) {
        require(std::isfinite(budget) && budget > 0.0, "budget must be a positive number");
        require(count > 0, "hypothesis count must be positive");
    }
};

struct AllocationResult {
    std::vector<ControlValue> h;
    /// Budget actually allocated (n_b clamped to N).
    double budget = 0.0;
    double sum_h_unclamped = 0.0;
    double expected_queries = 0.0;
    std::size_t clamp_count = 0;
    std::vector<std::string> warnings;
};

class DegenerateUtilities : public DomainError {
public:
    using DomainError::DomainError;
};

inline AllocationResult allocate(std::span<const double> aux, const UtilitySpec& spec, const BudgetConfig& budget,
                                 unsigned threads = 1) {
    require(aux.size() == budget.n, "auxiliary vector length does not match the hypothesis count");
    AllocationResult out;
    out.budget = budget.n_b;
    if (budget.n_b > static_cast<double>(budget.n)) {
        out.budget = static_cast<double>(budget.n);
        out.warnings.push_back("budget " + std::to_string(budget.n_b) + " exceeds N = " + std::to_string(budget.n) +
                               "; clamped to N");
    }

    // Chunk boundaries are fixed so that partial sums merge identically for
    // any thread count; ExactSum makes the total order-independent anyway.
    constexpr std::size_t kChunk = 1 << 16;
    const std::size_t n = aux.size();
    const std::size_t n_chunks = (n + kChunk - 1) / kChunk;
    std::vector<double> u(n);
    std::vector<ExactSum> partial(n_chunks);
    parallel_for(n_chunks, threads, [&](std::size_t cb, std::size_t ce) {
        for (std::size_t c = cb; c < ce; ++c) {
            for (std::size_t i = c * kChunk; i < std::min(n, (c + 1) * kChunk); ++i) {
                u[i] = eval_utility(spec, aux[i]);
                require(std::isfinite(u[i]), "utility is not finite at index " + std::to_string(i));
                partial[c].add(u[i]);
            }
        }
    });
    ExactSum total;
    for (const auto& p : partial) total.merge(p);
    const double sum_u = total.value();
    if (!(sum_u > 0.0))
        throw DegenerateUtilities("degenerate utilities: every utility is zero; use a utility family that is "
                                  "positive on the observed auxiliary statistics (e.g. log-inverse with eps > 0)");

    out.h.resize(n);
    std::vector<ExactSum> h_part(n_chunks), q_part(n_chunks);
    std::vector<std::size_t> clamp_part(n_chunks, 0);
    parallel_for(n_chunks, threads, [&](std::size_t cb, std::size_t ce) {
        for (std::size_t c = cb; c < ce; ++c) {
            for (std::size_t i = c * kChunk; i < std::min(n, (c + 1) * kChunk); ++i) {
                out.h[i] = ControlValue::from(out.budget * (u[i] / sum_u));
                h_part[c].add(out.h[i].h);
                q_part[c].add(out.h[i].query_prob);
                if (out.h[i].h > 1.0) ++clamp_part[c];
            }
        }
    });
    ExactSum h_sum, q_sum;
    for (std::size_t c = 0; c < n_chunks; ++c) {
        h_sum.merge(h_part[c]);
        q_sum.merge(q_part[c]);
        out.clamp_count += clamp_part[c];
    }
    out.sum_h_unclamped = h_sum.value();
    out.expected_queries = q_sum.value();
    return out;
}

/// Sample-size condition N >= 2 epsilon^2 / log(2 / delta) under which the
/// realized number of queries concentrates within epsilon of the budget.
inline bool budget_concentration_bound(double n_b, std::size_t n, double epsilon, double delta) {
    require(epsilon > 0.0, "epsilon must be positive");
    require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
    require(n_b > 0.0, "budget must be positive");
    return static_cast<double>(n) >= 2.0 * epsilon * epsilon / std::log(2.0 / delta);
}

} // namespace activeht
