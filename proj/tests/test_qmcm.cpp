#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "testutil.hpp"
#include "winfo/qmcm.hpp"

using namespace winfo;

namespace {

std::vector<double> truncated_normal(std::size_t count, double mu, double sigma, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(mu, sigma);
    std::vector<double> v;
    while (v.size() < count) {
        const double x = g(rng);
        if (x > 0.0) v.push_back(x);
    }
    return v;
}

std::vector<std::vector<double>> subset_of(const std::vector<std::vector<double>>& pts,
                                           const std::vector<std::size_t>& idx, std::size_t count) {
    std::vector<std::vector<double>> out;
    for (std::size_t i = 0; i < count; ++i) out.push_back(pts[idx[i]]);
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// nearest distances

TEST(NearestDistance, Examples) {
    const auto ref = testutil::ensemble({{1, 0}, {0, 3}});
    EXPECT_EQ(nearest_distance(WeightVector({0, 0}), ref), 1.0);
    EXPECT_EQ(nearest_distance(WeightVector({0, 3}), ref), 0.0);
    EXPECT_THROW(nearest_distance(WeightVector({0, 0}), WeightEnsemble{}), EmptyReference);
    EXPECT_THROW(nearest_distance(WeightVector({0}), ref), DimMismatch);
}

TEST(NearestDistance, MatchesExhaustiveScan) {
    const auto pts = testutil::random_points(500, 50, 4);
    std::vector<std::vector<double>> refs(pts.begin(), pts.begin() + 50);
    const auto ref = testutil::ensemble(refs);
    for (const auto& q : pts) {
        double best = INFINITY;
        for (const auto& r : refs) best = std::min(best, oracle::distance(q, r));
        EXPECT_NEAR(nearest_distance(testutil::to_weights(q), ref), best, 1e-12 * std::max(1.0, best));
    }
}

TEST(MeanNearestDistance, Examples) {
    const auto q = testutil::ensemble({{0}, {2}, {4}});
    const auto r = mean_nearest_distance(q, testutil::ensemble({{0}}));
    EXPECT_EQ(r.distances, (std::vector<double>{0, 2, 4}));
    EXPECT_EQ(r.mean, 2.0);
    EXPECT_EQ(r.cv(), 1.0);

    const auto same = mean_nearest_distance(q, q);
    EXPECT_EQ(same.mean, 0.0);
    EXPECT_THROW(same.cv(), CvUndefined);
}

TEST(MeanNearestDistance, WorkerCountDoesNotChangeResult) {
    const auto pts = testutil::ensemble(testutil::random_points(200, 10, 6));
    const auto ref = testutil::ensemble(testutil::random_points(30, 10, 7));
    const auto a = mean_nearest_distance(pts, ref, 1);
    const auto b = mean_nearest_distance(pts, ref, 3);
    EXPECT_EQ(a.distances, b.distances);
    EXPECT_EQ(a.mean, b.mean);
}

TEST(Monotonicity, NestedSubsetsNeverIncreaseTheSum) {
    std::size_t violations = 0;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        for (std::size_t dim : {1u, 2u, 10u}) {
            const auto pts = testutil::random_points(80, dim, 1000 * seed + dim);
            std::vector<std::size_t> order(pts.size());
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::shuffle(order.begin(), order.end(), std::mt19937_64(seed));
            const auto all = testutil::ensemble(pts);
            double prev = INFINITY;
            for (std::size_t k : {1u, 2u, 5u, 10u, 20u, 40u, 80u}) {
                const auto sub = subset_of(pts, order, k);
                const auto r = mean_nearest_distance(all, testutil::ensemble(sub));
                double total = 0.0;
                for (double d : r.distances) total += d;
                EXPECT_NEAR(total, oracle::nearest_sum(pts, sub), 1e-9 * std::max(1.0, total));
                if (total > prev) ++violations;
                prev = total;
            }
            EXPECT_EQ(prev, 0.0);   // full reference set
        }
    }
    EXPECT_EQ(violations, 0u);
}

TEST(Monotonicity, AddingTheQueryZeroesItsContribution) {
    const auto pts = testutil::random_points(20, 5, 3);
    auto ref = testutil::ensemble({pts[0], pts[1]});
    const auto q = testutil::to_weights(pts[7]);
    EXPECT_GT(nearest_distance(q, ref), 0.0);
    ref.add(q, 7);
    EXPECT_EQ(nearest_distance(q, ref), 0.0);
}

TEST(Homogeneity, ScalingScalesNearestDistances) {
    // powers of two keep float storage exact
    const auto pts = testutil::random_points(60, 4, 12);
    for (double c : {0.5, 2.0, 8.0}) {
        std::vector<std::vector<double>> scaled;
        for (const auto& p : pts) {
            scaled.push_back(p);
            for (auto& x : scaled.back()) x *= c;
        }
        const std::vector<std::vector<double>> ref(pts.begin(), pts.begin() + 10);
        const std::vector<std::vector<double>> sref(scaled.begin(), scaled.begin() + 10);
        const auto a = mean_nearest_distance(testutil::ensemble(pts), testutil::ensemble(ref));
        const auto b = mean_nearest_distance(testutil::ensemble(scaled), testutil::ensemble(sref));
        for (std::size_t i = 0; i < a.distances.size(); ++i) EXPECT_EQ(b.distances[i], c * a.distances[i]);
        EXPECT_EQ(b.mean, c * a.mean);

        SequenceSource sa(a.distances), sb(b.distances);
        const auto ea = qmcm_estimate(sa, QmcmConfig{0.2, 20, 30});
        const auto eb = qmcm_estimate(sb, QmcmConfig{0.2, 20, 30});
        EXPECT_EQ(eb.d_hat, c * ea.d_hat);
        EXPECT_EQ(eb.resample_count, ea.resample_count);
    }
}

// ---------------------------------------------------------------------------
// information from ratio and support means

TEST(InformationFromRatio, Examples) {
    EXPECT_NEAR(information_from_ratio(1.0 / std::exp(1.0)), 1.0, 1e-15);
    EXPECT_NEAR(information_from_ratio(0.5), std::log(2.0), 1e-15);
    EXPECT_LT(information_from_ratio(1.0 - 1e-12), 1e-11);
    EXPECT_GT(information_from_ratio(1.0 - 1e-12), 0.0);
    EXPECT_THROW(information_from_ratio(0.0), DomainError);
    EXPECT_THROW(information_from_ratio(1.0), DomainError);
    EXPECT_THROW(information_from_ratio(-0.5), DomainError);
}

TEST(SupportMeans, BothSidesOfTheRelation) {
    const auto pop = random_unit_vectors(400, 8, 5);
    std::vector<std::size_t> idx(100);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    const auto s = support_means(pop, idx);
    EXPECT_DOUBLE_EQ(s.rho, 0.25);
    // exact identity: subset members contribute zero to the population mean
    EXPECT_NEAR(s.mean_all, (1.0 - s.rho) * s.mean_support, 1e-12);
    EXPECT_NEAR(s.mean_support, s.mean_all / (1.0 - s.rho), 1e-12);
    EXPECT_THROW(support_means(pop, std::vector<std::size_t>{}), EmptyReference);
}

// ---------------------------------------------------------------------------
// adaptive estimator

TEST(Qmcm, ConstantSourceConvergesImmediately) {
    SequenceSource src(std::vector<double>(200, 3.25));
    const auto e = qmcm_estimate(src, QmcmConfig{});
    EXPECT_TRUE(e.converged);
    EXPECT_EQ(e.d_hat, 3.25);
    EXPECT_EQ(e.resample_count, 0u);
    EXPECT_EQ(e.samples_used, 200u);
    EXPECT_EQ(e.achieved_cv, 0.0);
}

TEST(Qmcm, MatchesNaiveLoop) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto stream = truncated_normal(300, 10.0, 2.0, seed);
        SequenceSource src(stream);
        const auto e = qmcm_estimate(src, QmcmConfig{0.15, 50, 250});
        const auto want = oracle::naive_qmcm(stream, 0.15, 50, 250);
        EXPECT_EQ(e.d_hat, want.d_hat);
        EXPECT_EQ(e.resample_count, want.resamples);
        EXPECT_EQ(e.converged, want.converged);
    }
}

TEST(Qmcm, HeavyTailedSourceNeedsResamples) {
    std::mt19937_64 rng(3);
    std::lognormal_distribution<double> ln(0.0, 1.0);
    std::vector<double> stream(20000);
    for (auto& x : stream) x = ln(rng);
    SequenceSource src(stream);
    const auto e = qmcm_estimate(src, QmcmConfig{0.3, 200, 0});
    const auto want = oracle::naive_qmcm(stream, 0.3, 200, 10000);
    EXPECT_GT(e.resample_count, 0u);
    EXPECT_EQ(e.d_hat, want.d_hat);
    EXPECT_TRUE(e.converged);
    EXPECT_LE(e.achieved_cv, 0.3);
}

TEST(Qmcm, InfiniteThresholdIsPlainMean) {
    const auto stream = truncated_normal(100, 5.0, 3.0, 9);
    SequenceSource src(stream);
    const auto e = qmcm_estimate(src, QmcmConfig{std::numeric_limits<double>::infinity(), 40, 0});
    double sum = 0.0;
    for (std::size_t i = 0; i < 40; ++i) sum += stream[i];
    EXPECT_EQ(e.d_hat, sum / 40.0);
    EXPECT_EQ(e.resample_count, 0u);
}

TEST(Qmcm, ExhaustedLimitReturnsUnconverged) {
    std::vector<double> stream;
    for (int i = 0; i < 100; ++i) stream.push_back(i % 2 ? 1.0 : 100.0);
    SequenceSource src(stream);
    const auto e = qmcm_estimate(src, QmcmConfig{0.01, 10, 5});
    EXPECT_FALSE(e.converged);
    EXPECT_EQ(e.resample_count, 5u);
    EXPECT_GT(e.achieved_cv, 0.01);
}

TEST(Qmcm, ExhaustedSourceThrows) {
    SequenceSource short_src(std::vector<double>{1.0, 2.0});
    EXPECT_THROW(qmcm_estimate(short_src, QmcmConfig{0.3, 5, 0}), SourceExhausted);
    std::vector<double> stream;
    for (int i = 0; i < 12; ++i) stream.push_back(i % 2 ? 1.0 : 100.0);
    SequenceSource src(stream);
    EXPECT_THROW(qmcm_estimate(src, QmcmConfig{0.01, 10, 0}), SourceExhausted);
}

TEST(Qmcm, RejectsBadConfig) {
    SequenceSource src(std::vector<double>(10, 1.0));
    EXPECT_THROW(qmcm_estimate(src, QmcmConfig{0.0, 5, 0}), InvalidArgument);
    EXPECT_THROW(qmcm_estimate(src, QmcmConfig{0.3, 1, 0}), InvalidArgument);
    EXPECT_EQ((QmcmConfig{0.3, 200, 0}).resample_limit(), 10000u);
}

TEST(Qmcm, TiesRemoveLowestPosition) {
    // 0 and 10 deviate equally from mean 5; the first one goes
    SequenceSource src(std::vector<double>{0.0, 10.0, 5.0, 5.0, 5.0});
    const auto e = qmcm_estimate(src, QmcmConfig{0.5, 3, 2});
    // after one removal: {10, 5, 5}
    EXPECT_EQ(e.resample_count, 1u);
    EXPECT_DOUBLE_EQ(e.d_hat, 20.0 / 3.0);
}

TEST(Qmcm, PairSourceAdapter) {
    struct Pairs {
        int left = 3;
        std::optional<std::pair<WeightVector, WeightVector>> next() {
            if (left-- == 0) return std::nullopt;
            return std::pair{WeightVector({0, 0}), WeightVector({3, 4})};
        }
    } pairs;
    PairDistanceSource src(pairs);
    const auto e = qmcm_estimate(src, QmcmConfig{0.3, 3, 0});
    EXPECT_EQ(e.d_hat, 5.0);
}

TEST(Qmcm, ShuffledSourceIsSeeded) {
    std::vector<double> pop(100);
    std::iota(pop.begin(), pop.end(), 1.0);
    ShuffledSource a(pop, 4), b(pop, 4);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
    EXPECT_FALSE(a.next().has_value());
}

// ---------------------------------------------------------------------------
// compare_runs

TEST(CompareRuns, Examples) {
    QmcmEstimate a{4.0, 200, 0, 0.01, 0.04, true};
    QmcmEstimate b{6.0, 200, 0, 0.01, 0.06, true};
    EXPECT_EQ(compare_runs(a, b), InfoOrder::LessInfo);
    EXPECT_EQ(compare_runs(b, a), InfoOrder::MoreInfo);
    EXPECT_EQ(compare_runs(a, a), InfoOrder::Indistinguishable);
    // inside the band max(std)/sqrt(n) = 1.0 / sqrt(100) = 0.1
    QmcmEstimate c{4.0, 100, 0, 0.25, 1.0, true}, d{4.05, 100, 0, 0.25, 1.0, true};
    EXPECT_EQ(compare_runs(c, d), InfoOrder::Indistinguishable);
    d.converged = false;
    EXPECT_THROW(compare_runs(c, d), NotConverged);
}

// ---------------------------------------------------------------------------
// distance simulation

TEST(UnitVectors, AreNormalized) {
    const auto e = random_unit_vectors(50, 30, 1);
    for (const auto& w : e.members()) {
        double s = 0.0;
        for (float v : w.values()) s += static_cast<double>(v) * v;
        EXPECT_NEAR(s, 1.0, 1e-6);
    }
}

TEST(Simulation, DeterministicPerSeed) {
    const auto a = simulate_distance_distribution(1000, 20, 0.1, 42);
    const auto b = simulate_distance_distribution(1000, 20, 0.1, 42, kDefaultBins, 3);
    EXPECT_EQ(a.report.distances, b.report.distances);
    EXPECT_EQ(a.kl_to_normal, b.kl_to_normal);
    EXPECT_EQ(a.report.distances.size(), 900u);
    const auto c = simulate_distance_distribution(1000, 20, 0.1, 43);
    EXPECT_NE(a.report.distances, c.report.distances);
}

TEST(Simulation, Preconditions) {
    EXPECT_THROW(simulate_distance_distribution(99, 10, 0.1, 1), InvalidArgument);
    EXPECT_THROW(simulate_distance_distribution(1000, 10, 0.0, 1), InvalidArgument);
    EXPECT_THROW(simulate_distance_distribution(1000, 10, 1.0, 1), InvalidArgument);
    EXPECT_THROW(simulate_distance_distribution(100, 10, 0.005, 1), InsufficientSamples);
    EXPECT_THROW(simulate_distance_distribution(100, 10, 0.75, 1), InsufficientSamples);
}

TEST(Simulation, LowFractionIsNearNormal) {
    const auto s = simulate_distance_distribution(4000, 100, 0.1, 7);
    EXPECT_LT(s.kl_to_normal, 0.1);
    EXPECT_GE(s.kl_to_normal, 0.0);
}
