#pragma once

// Step-up multiple testing procedures: BH and BY for p-values, e-BH for
// e-values. Rejection is threshold based, so tied statistics are rejected or
// retained together and permuting the input permutes the output.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "activeht/common.hpp"

namespace activeht {

enum class Procedure { BH, BY, EBH };

inline std::string to_string(Procedure p) {
    switch (p) {
    case Procedure::BH: return "bh";
    case Procedure::BY: return "by";
    case Procedure::EBH: return "ebh";
    }
    return "?";
}

inline Procedure parse_procedure(const std::string& name) {
    if (name == "bh") return Procedure::BH;
    if (name == "by") return Procedure::BY;
    if (name == "ebh" || name == "e-bh") return Procedure::EBH;
    throw UsageError("unknown procedure '" + name + "' (expected bh, by or ebh)");
}

struct RejectionSet {
    /// Rejected indices in increasing order.
    std::vector<std::size_t> rejected;
    std::size_t k_hat = 0;
    double alpha = 0.1;
    Procedure procedure = Procedure::BH;
};

/// H_N = sum_{i=1}^N 1/i, summed from the smallest term up.
inline double harmonic_number(std::size_t n) {
    double h = 0.0;
    for (std::size_t i = n; i >= 1; --i) h += 1.0 / static_cast<double>(i);
    return h;
}

namespace detail {

inline void check_alpha(double alpha) { require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)"); }

inline std::vector<std::size_t> sorted_order(std::span<const double> v, bool descending) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (descending)
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] > v[b]; });
    else
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    return idx;
}

// BH step-up at effective level `level` (alpha for BH, alpha / H_N for BY).
inline RejectionSet step_up_p(std::span<const double> p, double level, double alpha, Procedure proc) {
    for (double x : p) require(x >= 0.0 && x <= 1.0, "p-values must lie in [0, 1]");
    RejectionSet out;
    out.alpha = alpha;
    out.procedure = proc;
    const std::size_t n = p.size();
    if (n == 0) return out;
    const auto order = sorted_order(p, false);
    const double nd = static_cast<double>(n);
    for (std::size_t k = n; k >= 1; --k) {
        if (p[order[k - 1]] <= static_cast<double>(k) * level / nd) {
            out.k_hat = k;
            break;
        }
    }
    if (out.k_hat == 0) return out;
    const double threshold = static_cast<double>(out.k_hat) * level / nd;
    for (std::size_t i = 0; i < n; ++i)
        if (p[i] <= threshold) out.rejected.push_back(i);
    return out;
}

} // namespace detail

inline RejectionSet bh(std::span<const double> p, double alpha) {
    detail::check_alpha(alpha);
    return detail::step_up_p(p, alpha, alpha, Procedure::BH);
}

inline RejectionSet by(std::span<const double> p, double alpha) {
    detail::check_alpha(alpha);
    return detail::step_up_p(p, alpha / harmonic_number(p.size()), alpha, Procedure::BY);
}

/// e-BH: k_hat = max{k : e_[k] >= N / (alpha k)}, reject e_i >= N / (alpha k_hat).
inline RejectionSet ebh(std::span<const double> e, double alpha) {
    detail::check_alpha(alpha);
    for (double x : e) require(x >= 0.0 && !std::isnan(x), "e-values must be nonnegative");
    RejectionSet out;
    out.alpha = alpha;
    out.procedure = Procedure::EBH;
    const std::size_t n = e.size();
    if (n == 0) return out;
    const auto order = detail::sorted_order(e, true);
    const double nd = static_cast<double>(n);
    for (std::size_t k = n; k >= 1; --k) {
        if (e[order[k - 1]] >= nd / (alpha * static_cast<double>(k))) {
            out.k_hat = k;
            break;
        }
    }
    if (out.k_hat == 0) return out;
    const double threshold = nd / (alpha * static_cast<double>(out.k_hat));
    for (std::size_t i = 0; i < n; ++i)
        if (e[i] >= threshold) out.rejected.push_back(i);
    return out;
}

inline RejectionSet apply_procedure(Procedure proc, std::span<const double> stats, double alpha) {
    switch (proc) {
    case Procedure::BH: return bh(stats, alpha);
    case Procedure::BY: return by(stats, alpha);
    case Procedure::EBH: return ebh(stats, alpha);
    }
    return {};
}

} // namespace activeht
