#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "activeht/sim_lab.hpp"

using namespace activeht;
using namespace activeht::sim;

TEST(DgpSpecTest, DerivedParameters) {
    const auto s = DgpSpec::aux_signal(2000, 0.1, 0.1);
    EXPECT_DOUBLE_EQ(s.tau_sq(), 2.0 * std::log(2000.0));
    EXPECT_DOUBLE_EQ(s.lambda(), std::sqrt(std::log(20000.0)));
    EXPECT_THROW(DgpSpec::noisy_proxy(10, 0.1, 0.0), DomainError);
    EXPECT_THROW(DgpSpec::correlated_proxy(10, 0.1, 1.0), DomainError);
    EXPECT_THROW(DgpSpec::aux_signal(10, 1.5), DomainError);
    EXPECT_THROW(parse_dgp_kind("gaussian"), UsageError);
    EXPECT_EQ(parse_dgp_kind("correlated"), DgpKind::CorrelatedProxy);
}

TEST(GenSignal, AllNullAndAllNonNull) {
    const auto null = gen_signal(DgpSpec::aux_signal(500, 0.0), 0, 1);
    for (std::size_t i = 0; i < 500; ++i) {
        EXPECT_EQ(null.mu[i], 0.0);
        EXPECT_EQ(null.truth[i], Truth::Null);
    }
    const auto alt = gen_signal(DgpSpec::aux_signal(500, 1.0), 0, 1);
    for (std::size_t i = 0; i < 500; ++i) {
        EXPECT_GT(alt.mu[i], 0.0);
        EXPECT_EQ(alt.truth[i], Truth::NonNull);
    }
}

TEST(GenSignal, NonNullCountIsBinomial) {
    const auto s = gen_signal(DgpSpec::aux_signal(10000, 0.1), 0, 2024);
    std::size_t n1 = 0;
    for (Truth t : s.truth) n1 += t == Truth::NonNull;
    EXPECT_NEAR(static_cast<double>(n1), 1000.0, 4.0 * std::sqrt(10000 * 0.1 * 0.9));
}

TEST(GenSignal, ZIsMuPlusUnitNoise) {
    const auto s = gen_signal(DgpSpec::aux_signal(200000, 0.3), 1, 5);
    double sum = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < s.z.size(); ++i) {
        const double d = s.z[i] - s.mu[i];
        sum += d;
        sq += d * d;
    }
    const double n = static_cast<double>(s.z.size());
    EXPECT_NEAR(sum / n, 0.0, 4.0 / std::sqrt(n));
    EXPECT_NEAR(sq / n, 1.0, 4.0 * std::sqrt(2.0 / n));
}

TEST(MakeStatistic, PlugInExamples) {
    const auto spec = DgpSpec::noisy_proxy(1000, 0.1, 1.0);
    const double lam = spec.lambda();
    auto s = rng_stream(1, 0, 0, Purpose::Auxiliary);
    const auto q = make_statistic(spec, lam, 0.0, s);
    EXPECT_DOUBLE_EQ(q.e, std::exp(lam * lam / 2.0));
    auto s2 = rng_stream(1, 0, 0, Purpose::Auxiliary);
    EXPECT_EQ(make_statistic(spec, 0.0, 0.0, s2).p, 0.5);
}

TEST(MakeStatistic, NullBetaAuxIsUniform) {
    const auto spec = DgpSpec::aux_signal(100000, 0.0);
    const auto sig = gen_signal(spec, 0, 3);
    const auto st = make_statistics(spec, sig, 0, 3);
    double sum = 0.0, esum = 0.0;
    for (std::size_t i = 0; i < spec.n; ++i) {
        sum += st.p_aux[i];
        esum += st.e_aux[i];
    }
    const double n = static_cast<double>(spec.n);
    EXPECT_NEAR(sum / n, 0.5, 3.0 * std::sqrt(1.0 / 12.0 / n));
    // Poisson(1) under the null.
    EXPECT_NEAR(esum / n, 1.0, 4.0 / std::sqrt(n));
}

TEST(MakeStatistic, CorrelatedProxyMoments) {
    const double rho = 0.6;
    const auto spec = DgpSpec::correlated_proxy(200000, 0.0, rho);
    const auto sig = gen_signal(spec, 0, 4);
    const auto st = make_statistics(spec, sig, 0, 4);
    // Recover Y from P^a = 1 - Phi(Y) via a symmetric check on correlation sign:
    // P and P^a should be positively associated.
    double both_small = 0.0;
    for (std::size_t i = 0; i < spec.n; ++i) both_small += st.p[i] < 0.5 && st.p_aux[i] < 0.5;
    // P(Z > 0, Y > 0) = 1/4 + asin(rho) / (2 pi)
    const double expect = 0.25 + std::asin(rho) / (2.0 * std::numbers::pi);
    EXPECT_NEAR(both_small / static_cast<double>(spec.n), expect, 4.0 * std::sqrt(expect * (1 - expect) / spec.n));
}

TEST(UtilityDefaults, MatchStudies) {
    const auto se = utility_defaults(DgpKind::AuxSignal, StatFamily::E);
    EXPECT_EQ(se.utility.family, UtilitySpec::Family::Identity);
    const auto sp = utility_defaults(DgpKind::AuxSignal, StatFamily::P);
    EXPECT_EQ(sp.utility.family, UtilitySpec::Family::LogInverse);
    EXPECT_EQ(sp.mode.kind, StatMode::Kind::PValueIndependent);
    for (auto k : {DgpKind::NoisyProxy, DgpKind::CorrelatedProxy}) {
        EXPECT_EQ(utility_defaults(k, StatFamily::E).utility.family, UtilitySpec::Family::Log1p);
        const auto p = utility_defaults(k, StatFamily::P);
        EXPECT_EQ(p.utility.family, UtilitySpec::Family::LogInverse);
        EXPECT_EQ(p.mode.kind, StatMode::Kind::PValueGeneral);
    }
    EXPECT_THROW(parse_stat_family("q"), UsageError);
}

TEST(Metrics, Identities) {
    std::vector<Truth> truth = {Truth::NonNull, Truth::Null, Truth::NonNull, Truth::Null};
    RejectionSet rs;
    rs.rejected = {0, 1, 2};
    const auto m = compute_metrics(rs, truth, 4);
    EXPECT_EQ(m.true_discoveries, 2u);
    EXPECT_DOUBLE_EQ(m.fdp, 1.0 / 3.0);
    EXPECT_EQ(m.tpp, 1.0);
    EXPECT_EQ(m.efficiency, 0.5);
    RejectionSet none;
    const auto z = compute_metrics(none, truth, 0);
    EXPECT_EQ(z.fdp, 0.0);
    EXPECT_EQ(z.efficiency, 0.0);
}

namespace {

ExperimentConfig small_config(DgpKind kind, StatFamily fam, unsigned threads = 1) {
    ExperimentConfig cfg;
    cfg.dgp = kind == DgpKind::AuxSignal    ? DgpSpec::aux_signal(400, 0.2)
              : kind == DgpKind::NoisyProxy ? DgpSpec::noisy_proxy(400, 0.2, 1.0)
                                            : DgpSpec::correlated_proxy(400, 0.2, 0.5);
    cfg.family = fam;
    cfg.methods = standard_methods(kind, fam, BetaParam(0.5));
    cfg.budget = 20;
    cfg.reps = 12;
    cfg.seed = 77;
    cfg.threads = threads;
    return cfg;
}

} // namespace

TEST(Experiment, AllQueriesEverything) {
    auto cfg = small_config(DgpKind::AuxSignal, StatFamily::E);
    cfg.methods = {MethodSpec::all()};
    const auto res = run_experiment(cfg);
    for (const auto& r : res.rows) EXPECT_EQ(r.queries, 400u);
}

TEST(Experiment, RejectsZeroPi) {
    auto cfg = small_config(DgpKind::AuxSignal, StatFamily::E);
    cfg.dgp = DgpSpec::aux_signal(100, 0.0);
    EXPECT_THROW(run_experiment(cfg), DomainError);
}

TEST(Experiment, MetricIdentitiesPerRow) {
    for (auto fam : {StatFamily::E, StatFamily::P}) {
        const auto res = run_experiment(small_config(DgpKind::NoisyProxy, fam));
        for (const auto& r : res.rows) {
            EXPECT_EQ(r.fdp * static_cast<double>(std::max<std::size_t>(r.discoveries, 1)) +
                          static_cast<double>(r.true_discoveries),
                      static_cast<double>(r.discoveries));
            if (r.queries > 0) {
                EXPECT_DOUBLE_EQ(r.efficiency * static_cast<double>(r.queries), r.true_discoveries);
            }
            EXPECT_GE(r.fdp, 0.0);
            EXPECT_LE(r.tpp, 1.0);
        }
    }
}

TEST(Experiment, DeterministicAcrossThreadCounts) {
    for (auto kind : {DgpKind::AuxSignal, DgpKind::NoisyProxy, DgpKind::CorrelatedProxy})
        for (auto fam : {StatFamily::E, StatFamily::P}) {
            std::ostringstream a, b, c;
            const auto r1 = run_experiment(small_config(kind, fam, 1));
            const auto r8 = run_experiment(small_config(kind, fam, 8));
            const auto again = run_experiment(small_config(kind, fam, 1));
            write_runs_csv(a, r1.rows);
            write_summary_csv(a, r1.summary);
            write_runs_csv(b, r8.rows);
            write_summary_csv(b, r8.summary);
            write_runs_csv(c, again.rows);
            write_summary_csv(c, again.summary);
            EXPECT_EQ(a.str(), b.str());
            EXPECT_EQ(a.str(), c.str());
        }
}

TEST(Experiment, CsvHeaders) {
    const auto res = run_experiment(small_config(DgpKind::AuxSignal, StatFamily::P));
    std::ostringstream runs, summary;
    write_runs_csv(runs, res.rows);
    write_summary_csv(summary, res.summary);
    EXPECT_EQ(runs.str().substr(0, runs.str().find('\n')), "method,rep,fdp,tpp,queries,efficiency");
    EXPECT_EQ(summary.str().substr(0, summary.str().find('\n')),
              "method,fdr,fdr_se,tpr,tpr_se,queries_mean,efficiency_mean,efficiency_se");
    EXPECT_EQ(res.rows.size(), 12u * 5u);
    EXPECT_EQ(res.summary.size(), 5u);
}

TEST(Experiment, FdrControlAuxSignalDeskScale) {
    for (auto fam : {StatFamily::E, StatFamily::P}) {
        ExperimentConfig cfg;
        cfg.dgp = DgpSpec::aux_signal(2000, 0.1);
        cfg.family = fam;
        cfg.methods = standard_methods(DgpKind::AuxSignal, fam, BetaParam(0.5));
        cfg.budget = 100;
        cfg.reps = 100;
        cfg.seed = 2;
        cfg.threads = 0;
        const auto res = run_experiment(cfg);
        for (const auto& s : res.summary) EXPECT_LE(s.fdr, 0.1 + 3.0 * s.fdr_se) << s.method << " " << to_string(fam);
    }
}
