#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "activeht/mt_procedures.hpp"
#include "support/mt_oracle.hpp"

using namespace activeht;
using Idx = std::vector<std::size_t>;

TEST(BH, Examples) {
    const std::vector<double> p = {0.01, 0.02, 0.5};
    const auto r = bh(p, 0.1);
    EXPECT_EQ(r.k_hat, 2u);
    EXPECT_EQ(r.rejected, (Idx{0, 1}));
    EXPECT_EQ(r.procedure, Procedure::BH);

    EXPECT_TRUE(bh(std::vector<double>(5, 1.0), 0.1).rejected.empty());
    EXPECT_EQ(bh(std::vector<double>(5, 1.0), 0.1).k_hat, 0u);

    const std::vector<double> boundary(4, 0.1 / 4);
    EXPECT_EQ(bh(boundary, 0.1).rejected.size(), 4u);
}

TEST(BY, Examples) {
    EXPECT_DOUBLE_EQ(harmonic_number(3), 11.0 / 6.0);
    const std::vector<double> p = {0.01, 0.02, 0.5};
    const auto r = by(p, 0.1);
    EXPECT_EQ(r.k_hat, 2u);
    EXPECT_EQ(r.rejected, (Idx{0, 1}));

    for (double x : {0.05, 0.1, 0.2}) {
        const std::vector<double> one = {x};
        EXPECT_EQ(by(one, 0.1).rejected, bh(one, 0.1).rejected);
    }
    EXPECT_TRUE(by(std::vector<double>(3, 1.0), 0.1).rejected.empty());
}

TEST(EBH, Examples) {
    const std::vector<double> e = {40, 30, 1};
    const auto r = ebh(e, 0.1);
    EXPECT_EQ(r.k_hat, 2u);
    EXPECT_EQ(r.rejected, (Idx{0, 1}));
    EXPECT_TRUE(ebh(std::vector<double>(4, 0.0), 0.1).rejected.empty());
    const std::vector<double> single = {1.0 / 0.1};
    EXPECT_EQ(ebh(single, 0.1).rejected, (Idx{0}));
}

TEST(Procedures, RejectBadInput) {
    const std::vector<double> bad_p = {0.5, 1.5};
    EXPECT_THROW(bh(bad_p, 0.1), DomainError);
    EXPECT_THROW(by(bad_p, 0.1), DomainError);
    const std::vector<double> bad_e = {1.0, -0.1};
    EXPECT_THROW(ebh(bad_e, 0.1), DomainError);
    const std::vector<double> ok = {0.5};
    EXPECT_THROW(bh(ok, 0.0), DomainError);
    EXPECT_THROW(bh(ok, 1.0), DomainError);
    EXPECT_THROW(parse_procedure("holm"), UsageError);
    EXPECT_EQ(parse_procedure("e-bh"), Procedure::EBH);
}

TEST(Procedures, EmptyInput) {
    const std::vector<double> none;
    EXPECT_TRUE(bh(none, 0.1).rejected.empty());
    EXPECT_TRUE(ebh(none, 0.1).rejected.empty());
}

TEST(Procedures, MatchBruteForceOracle) {
    const auto& pg = mt_oracle::p_grid();
    const auto& eg = mt_oracle::e_grid();
    for (double alpha : {0.05, 0.2}) {
        std::size_t n = mt_oracle::enumerate(pg, 6, [&](const std::vector<double>& v) {
            ASSERT_EQ(bh(v, alpha).rejected, mt_oracle::bh(v, alpha));
            ASSERT_EQ(by(v, alpha).rejected, mt_oracle::by(v, alpha));
        });
        EXPECT_EQ(n, 19530u);
        mt_oracle::enumerate(eg, 6, [&](const std::vector<double>& v) {
            ASSERT_EQ(ebh(v, alpha).rejected, mt_oracle::ebh(v, alpha));
        });
    }
}

TEST(Procedures, KHatEqualsRejectionCount) {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int t = 0; t < 500; ++t) {
        std::vector<double> p(50);
        for (auto& x : p) x = std::pow(unit(gen), 4.0);
        for (auto proc : {Procedure::BH, Procedure::BY}) {
            const auto r = apply_procedure(proc, p, 0.1);
            EXPECT_EQ(r.k_hat, r.rejected.size());
        }
        std::vector<double> e(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) e[i] = 1.0 / (p[i] + 1e-6);
        const auto r = ebh(e, 0.1);
        EXPECT_EQ(r.k_hat, r.rejected.size());
    }
}

TEST(Procedures, Monotonicity) {
    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int t = 0; t < 2000; ++t) {
        std::vector<double> p(12);
        for (auto& x : p) x = std::pow(unit(gen), 3.0);
        const auto before = bh(p, 0.1).rejected;
        const std::size_t j = gen() % p.size();
        p[j] *= unit(gen);
        const auto after = bh(p, 0.1).rejected;
        EXPECT_TRUE(std::includes(after.begin(), after.end(), before.begin(), before.end()));

        std::vector<double> e(12);
        for (auto& x : e) x = 1.0 / std::pow(unit(gen) + 1e-9, 1.5);
        const auto eb = ebh(e, 0.1).rejected;
        e[j] *= 1.0 + 5.0 * unit(gen);
        const auto ea = ebh(e, 0.1).rejected;
        EXPECT_TRUE(std::includes(ea.begin(), ea.end(), eb.begin(), eb.end()));
    }
}

TEST(Procedures, TiesRejectedTogether) {
    const std::vector<double> p = {0.02, 0.02, 0.02, 0.9};
    const auto r = bh(p, 0.1);
    EXPECT_EQ(r.rejected, (Idx{0, 1, 2}));
    const std::vector<double> p2 = {0.04, 0.04, 0.9};
    // 0.04 > 1 * 0.1 / 3 but <= 2 * 0.1 / 3: both tied values go together.
    EXPECT_EQ(bh(p2, 0.1).rejected, (Idx{0, 1}));
}

TEST(Procedures, PermutationEquivariance) {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> p(40);
    for (auto& x : p) x = std::pow(unit(gen), 5.0);
    std::vector<std::size_t> perm(p.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), gen);
    std::vector<double> q(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) q[k] = p[perm[k]];
    const auto rp = by(p, 0.2).rejected;
    auto rq = by(q, 0.2).rejected;
    for (auto& k : rq) k = perm[k];
    std::sort(rq.begin(), rq.end());
    EXPECT_EQ(rp, rq);
}

TEST(Harmonic, LargeNAccuracy) {
    // H_n = ln n + gamma + 1/(2n) - 1/(12 n^2) + ...
    const double n = 1e7;
    const double approx = std::log(n) + 0.57721566490153286 + 1.0 / (2.0 * n) - 1.0 / (12.0 * n * n);
    EXPECT_NEAR(harmonic_number(10'000'000), approx, 1e-12);
}
