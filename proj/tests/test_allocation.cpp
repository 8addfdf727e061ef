#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "activeht/allocation.hpp"

using namespace activeht;

TEST(Utility, Examples) {
    EXPECT_EQ(eval_utility(UtilitySpec::identity(), 3.0), 3.0);
    EXPECT_EQ(eval_utility(UtilitySpec::log1p(), 0.0), 0.0);
    // ln(1 + 1e8) = 18.420680754...; evaluated independently with mpmath.
    EXPECT_NEAR(eval_utility(UtilitySpec::log_inverse(1e-8), 0.0), 18.420680753952, 1e-11);
    EXPECT_EQ(eval_utility(UtilitySpec::inverse(0.5), 1.5), 0.5);
}

TEST(Utility, XuFamily) {
    const auto direct = UtilitySpec::xu(BetaParam(0.5), Direction::Direct);
    EXPECT_EQ(eval_utility(direct, 1.0), 0.5);
    EXPECT_EQ(eval_utility(direct, 2.0), 0.75);
    EXPECT_EQ(eval_utility(direct, 0.4), 0.0);
    EXPECT_EQ(eval_utility(direct, 0.0), 0.0);
    const auto inverse = UtilitySpec::xu(BetaParam(0.5), Direction::Inverse);
    EXPECT_EQ(eval_utility(inverse, 0.0), 1.0);
    EXPECT_EQ(eval_utility(inverse, 1.0), 0.5);
}

TEST(Utility, CustomTableIsPiecewiseLinearWithFlatEnds) {
    const auto spec = UtilitySpec::custom({0.0, 1.0, 3.0}, {0.0, 2.0, 3.0}, Direction::Direct);
    EXPECT_EQ(eval_utility(spec, 0.5), 1.0);
    EXPECT_EQ(eval_utility(spec, 2.0), 2.5);
    EXPECT_EQ(eval_utility(spec, 10.0), 3.0);
    EXPECT_EQ(eval_utility(spec, 0.0), 0.0);
    EXPECT_THROW(UtilitySpec::custom({0.0, 1.0}, {2.0, 1.0}, Direction::Direct), DomainError);
    EXPECT_THROW(UtilitySpec::custom({0.0, 1.0}, {1.0, 2.0}, Direction::Inverse), DomainError);
    EXPECT_THROW(UtilitySpec::custom({1.0, 0.0}, {1.0, 2.0}, Direction::Direct), DomainError);
    EXPECT_THROW(UtilitySpec::custom({0.0}, {-1.0}, Direction::Direct), DomainError);
    EXPECT_THROW(UtilitySpec::custom({}, {}, Direction::Direct), DomainError);
}

TEST(Utility, RejectsBadArguments) {
    EXPECT_THROW(eval_utility(UtilitySpec::identity(), -1.0), DomainError);
    EXPECT_THROW(eval_utility(UtilitySpec::log1p(), std::nan("")), DomainError);
    EXPECT_THROW(UtilitySpec::inverse(0.0), DomainError);
    EXPECT_THROW(UtilitySpec::log_inverse(-1.0), DomainError);
}

TEST(Utility, MonotoneInDeclaredDirection) {
    const std::vector<UtilitySpec> direct = {UtilitySpec::identity(), UtilitySpec::log1p()};
    const std::vector<UtilitySpec> inverse = {UtilitySpec::inverse(), UtilitySpec::log_inverse()};
    for (double x = 0.0; x < 1.0; x += 0.01) {
        for (const auto& s : direct) EXPECT_LE(eval_utility(s, x), eval_utility(s, x + 0.01));
        for (const auto& s : inverse) EXPECT_GE(eval_utility(s, x), eval_utility(s, x + 0.01));
    }
}

TEST(Allocate, Examples) {
    {
        const std::vector<double> u = {1, 2, 3};
        const auto r = allocate(u, UtilitySpec::identity(), BudgetConfig(3, 3));
        EXPECT_EQ(r.h[0].h, 0.5);
        EXPECT_EQ(r.h[1].h, 1.0);
        EXPECT_EQ(r.h[2].h, 1.5);
        EXPECT_EQ(r.expected_queries, 2.5);
        EXPECT_EQ(r.clamp_count, 1u);
        EXPECT_EQ(r.sum_h_unclamped, 3.0);
    }
    {
        const std::vector<double> u = {1, 1, 1, 1};
        const auto r = allocate(u, UtilitySpec::identity(), BudgetConfig(2, 4));
        for (const auto& h : r.h) EXPECT_EQ(h.h, 0.5);
        EXPECT_EQ(r.expected_queries, 2.0);
        EXPECT_EQ(r.clamp_count, 0u);
    }
    {
        const std::vector<double> u = {5, 0, 0, 0};
        const auto r = allocate(u, UtilitySpec::identity(), BudgetConfig(1, 4));
        EXPECT_EQ(r.h[0].h, 1.0);
        EXPECT_EQ(r.h[1].h, 0.0);
        EXPECT_EQ(r.expected_queries, 1.0);
    }
}

TEST(Allocate, DegenerateUtilitiesError) {
    const std::vector<double> u = {0, 0, 0};
    EXPECT_THROW(allocate(u, UtilitySpec::identity(), BudgetConfig(1, 3)), DegenerateUtilities);
    try {
        allocate(u, UtilitySpec::identity(), BudgetConfig(1, 3));
    } catch (const DegenerateUtilities& e) {
        EXPECT_NE(std::string(e.what()).find("use a utility"), std::string::npos);
    }
}

TEST(Allocate, BudgetAboveNIsClampedWithWarning) {
    const std::vector<double> u = {1, 1};
    const auto r = allocate(u, UtilitySpec::identity(), BudgetConfig(5, 2));
    EXPECT_EQ(r.budget, 2.0);
    EXPECT_EQ(r.warnings.size(), 1u);
    EXPECT_EQ(r.h[0].h, 1.0);
}

TEST(Allocate, RejectsBadConfig) {
    EXPECT_THROW(BudgetConfig(0.0, 3), DomainError);
    EXPECT_THROW(BudgetConfig(1.0, 0), DomainError);
    const std::vector<double> u = {1, 1};
    EXPECT_THROW(allocate(u, UtilitySpec::identity(), BudgetConfig(1, 3)), DomainError);
}

TEST(Allocate, ConcentrationBoundExamples) {
    // 2 * 50^2 / ln(40) = 1355.4251534...
    EXPECT_NEAR(2.0 * 2500.0 / std::log(40.0), 1355.4251534, 1e-6);
    EXPECT_TRUE(budget_concentration_bound(500, 10000, 50, 0.05));
    EXPECT_FALSE(budget_concentration_bound(500, 1355, 50, 0.05));
    EXPECT_TRUE(budget_concentration_bound(500, 1356, 50, 0.05));
    EXPECT_THROW(budget_concentration_bound(500, 10000, 0, 0.05), DomainError);
    EXPECT_THROW(budget_concentration_bound(500, 10000, 50, 1.0), DomainError);
}

// ---------------------------------------------------------------------------
// Properties

namespace {

std::vector<double> heavy_tailed(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::lognormal_distribution<double> ln(0.0, 3.0);
    std::vector<double> v(n);
    for (auto& x : v) x = ln(gen);
    return v;
}

} // namespace

TEST(AllocateProperty, ExactBudgetIdentityAndCostBound) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const std::size_t n = 10 + seed * 397;
        const auto aux = heavy_tailed(n, seed);
        const double nb = 1.0 + static_cast<double>(seed % 7) * 0.13 * static_cast<double>(n);
        for (const auto& spec : {UtilitySpec::identity(), UtilitySpec::log1p()}) {
            const auto r = allocate(aux, spec, BudgetConfig(nb, n));
            EXPECT_NEAR(r.sum_h_unclamped, r.budget, 1e-9 * r.budget);
            EXPECT_LE(r.expected_queries, r.budget * (1.0 + 1e-12));
            if (r.clamp_count > 0) {
                EXPECT_LT(r.expected_queries, r.budget);
            }
            for (const auto& h : r.h) EXPECT_EQ(h.query_prob, std::min(1.0, h.h));
        }
    }
}

TEST(AllocateProperty, LargeInputBudgetIdentity) {
    const std::size_t n = 2'000'000;
    const auto aux = heavy_tailed(n, 99);
    const auto r = allocate(aux, UtilitySpec::log1p(), BudgetConfig(5000, n), 4);
    EXPECT_NEAR(r.sum_h_unclamped, 5000.0, 1e-9 * 5000.0);
}

TEST(AllocateProperty, ScaleInvariance) {
    const auto aux = heavy_tailed(1000, 5);
    const auto base = allocate(aux, UtilitySpec::identity(), BudgetConfig(50, 1000));
    const auto ulps = [](double a, double b) {
        return std::fabs(a - b) / (std::nextafter(std::fabs(b), 1e300) - std::fabs(b));
    };
    // Powers of two scale exactly, so normalization must cancel them exactly.
    for (double c : {0.0009765625, 4.0, 1048576.0}) {
        std::vector<double> scaled(aux);
        for (auto& x : scaled) x *= c;
        const auto r = allocate(scaled, UtilitySpec::identity(), BudgetConfig(50, 1000));
        for (std::size_t i = 0; i < aux.size(); ++i) EXPECT_LE(ulps(r.h[i].h, base.h[i].h), 1.0) << "c=" << c;
    }
    // Otherwise each scaled input already carries half an ulp of rounding.
    for (double c : {0.001, 3.0, 1e6}) {
        std::vector<double> scaled(aux);
        for (auto& x : scaled) x *= c;
        const auto r = allocate(scaled, UtilitySpec::identity(), BudgetConfig(50, 1000));
        for (std::size_t i = 0; i < aux.size(); ++i) EXPECT_LE(ulps(r.h[i].h, base.h[i].h), 3.0) << "c=" << c;
    }
}

TEST(AllocateProperty, MonotoneAllocation) {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> p(500);
    for (auto& x : p) x = unit(gen);
    const auto inv = allocate(p, UtilitySpec::log_inverse(), BudgetConfig(20, p.size()));
    const auto dir = allocate(p, UtilitySpec::log1p(), BudgetConfig(20, p.size()));
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = 0; j < p.size(); ++j)
            if (p[i] > p[j]) {
                ASSERT_LE(inv.h[i].h, inv.h[j].h);
                ASSERT_GE(dir.h[i].h, dir.h[j].h);
            }
}

TEST(AllocateProperty, CompressionEffectiveness) {
    std::vector<double> u(1000, 1.0);
    u[0] = 1e6;
    const auto ident = allocate(u, UtilitySpec::identity(), BudgetConfig(100, 1000));
    const auto logc = allocate(u, UtilitySpec::log1p(), BudgetConfig(100, 1000));
    // Oracle: identity gives h_0 = 100e6/(1e6+999) > 1 and h_j = 100/(1e6+999).
    const double denom = 1e6 + 999.0;
    const double oracle_ident = 1.0 + 999.0 * 100.0 / denom;
    EXPECT_NEAR(ident.expected_queries, oracle_ident, 1e-9);
    EXPECT_LT(ident.expected_queries, 15.0);
    // Oracle: log1p gives u_0 = ln(1e6+1), u_j = ln 2.
    const double l0 = std::log1p(1e6), l1 = std::log(2.0);
    const double s = l0 + 999.0 * l1;
    const double oracle_log = std::min(1.0, 100.0 * l0 / s) + 999.0 * 100.0 * l1 / s;
    EXPECT_NEAR(logc.expected_queries, oracle_log, 1e-9);
    EXPECT_GE(logc.expected_queries, 95.0);
}

TEST(AllocateProperty, ThreadCountInvariant) {
    const auto aux = heavy_tailed(300000, 8);
    const auto a = allocate(aux, UtilitySpec::log1p(), BudgetConfig(1000, aux.size()), 1);
    const auto b = allocate(aux, UtilitySpec::log1p(), BudgetConfig(1000, aux.size()), 8);
    EXPECT_EQ(a.sum_h_unclamped, b.sum_h_unclamped);
    EXPECT_EQ(a.expected_queries, b.expected_queries);
    for (std::size_t i = 0; i < aux.size(); ++i) ASSERT_EQ(a.h[i].h, b.h[i].h);
}
