#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "testutil.hpp"
#include "winfo/core.hpp"
#include "winfo/csv.hpp"
#include "winfo/manifest.hpp"
#include "winfo/snapshot.hpp"
#include "winfo/stats.hpp"

using namespace winfo;

TEST(WeightVector, RejectsEmptyAndNonFinite) {
    EXPECT_THROW(WeightVector(std::vector<float>{}), Error);
    EXPECT_THROW(WeightVector({1.0f, std::numeric_limits<float>::quiet_NaN()}), Error);
    EXPECT_THROW(WeightVector({std::numeric_limits<float>::infinity()}), Error);
    const WeightVector w({1.0f, -2.0f});
    EXPECT_EQ(w.dim(), 2u);
    EXPECT_EQ(w[1], -2.0f);
}

TEST(WeightEnsemble, EnforcesSharedDim) {
    WeightEnsemble e(Stage::Final);
    e.add(WeightVector({1.0f, 2.0f}), 7);
    EXPECT_THROW(e.add(WeightVector({1.0f}), 8), DimMismatch);
    EXPECT_EQ(e.size(), 1u);
    EXPECT_EQ(e.seeds().front(), 7);
    EXPECT_EQ(e.stage(), Stage::Final);
    EXPECT_THROW(WeightEnsemble({WeightVector({1.0f})}, {}), InvalidArgument);
}

// ---------------------------------------------------------------------------
// flatten_weights

TEST(Flatten, RowMajorWithBiasAfterMatrix) {
    const std::vector<LayerTensor> layers{LayerTensor::matrix(2, 2, {1, 2, 3, 4}), LayerTensor::vector({5, 6})};
    const auto w = flatten_weights(layers);
    ASSERT_EQ(w.dim(), 6u);
    for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(w[i], static_cast<float>(i + 1));
}

TEST(Flatten, SingleScalarMatrix) {
    const std::vector<LayerTensor> layers{LayerTensor::matrix(1, 1, {7})};
    const auto w = flatten_weights(layers);
    EXPECT_EQ(w.dim(), 1u);
    EXPECT_EQ(w[0], 7.0f);
}

TEST(Flatten, EmptyModel) {
    EXPECT_THROW(flatten_weights(std::span<const LayerTensor>{}), EmptyModel);
}

TEST(Flatten, ReportsOffendingLayer) {
    const std::vector<LayerTensor> layers{LayerTensor::matrix(1, 2, {1, 2}), LayerTensor::vector({3}),
                                          LayerTensor::vector({std::nan("")})};
    try {
        flatten_weights(layers);
        FAIL() << "expected NonFiniteLayer";
    } catch (const NonFiniteLayer& e) {
        EXPECT_EQ(e.layer(), 2u);
    }
    const std::vector<LayerTensor> overflow{LayerTensor::vector({1e300})};
    EXPECT_THROW(flatten_weights(overflow), NonFiniteLayer);
}

TEST(Flatten, DeterministicAndInjective) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const auto a = testutil::gaussian(12, rng);
        auto b = a;
        b[static_cast<std::size_t>(trial) % 12] += 0.5;
        const std::vector<LayerTensor> la{LayerTensor::matrix(3, 3, {a.begin(), a.begin() + 9}),
                                          LayerTensor::vector({a.begin() + 9, a.end()})};
        const std::vector<LayerTensor> lb{LayerTensor::matrix(3, 3, {b.begin(), b.begin() + 9}),
                                          LayerTensor::vector({b.begin() + 9, b.end()})};
        EXPECT_EQ(flatten_weights(la), flatten_weights(la));
        EXPECT_FALSE(flatten_weights(la) == flatten_weights(lb));
    }
}

// ---------------------------------------------------------------------------
// distances

TEST(Distance, Examples) {
    EXPECT_EQ(euclidean_distance(WeightVector({0, 0}), WeightVector({3, 4})), 5.0);
    EXPECT_EQ(euclidean_distance(WeightVector({1.5f, -2.5f}), WeightVector({1.5f, -2.5f})), 0.0);
    EXPECT_THROW(euclidean_distance(WeightVector({1}), WeightVector({1, 2})), DimMismatch);
}

TEST(Distance, MatchesSummationOracle) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto pts = testutil::random_points(2, 100, seed);
        const double got = euclidean_distance(testutil::to_weights(pts[0]), testutil::to_weights(pts[1]));
        const double want = oracle::distance(pts[0], pts[1]);
        EXPECT_NEAR(got, want, 1e-12 * want);
        EXPECT_EQ(got, euclidean_distance(testutil::to_weights(pts[1]), testutil::to_weights(pts[0])));
    }
}

TEST(Pairwise, Examples) {
    EXPECT_THROW(pairwise_distances(WeightEnsemble{}), EmptyEnsemble);
    const auto one = pairwise_distances(testutil::ensemble({{1.0, 2.0}}));
    EXPECT_EQ(one.n(), 1u);
    EXPECT_EQ(one(0, 0), 0.0);
    const auto line = pairwise_distances(testutil::ensemble({{0.0}, {1.0}, {3.0}}));
    EXPECT_EQ(line(0, 0), 0.0);
    EXPECT_EQ(line(0, 1), 1.0);
    EXPECT_EQ(line(0, 2), 3.0);
}

TEST(Pairwise, MatchesPairLoopAndInvariants) {
    const auto pts = testutil::random_points(50, 10, 11);
    const auto e = testutil::ensemble(pts);
    const auto dm = pairwise_distances(e);
    for (std::size_t i = 0; i < 50; ++i) {
        EXPECT_EQ(dm(i, i), 0.0);
        for (std::size_t j = 0; j < 50; ++j) {
            EXPECT_EQ(dm(i, j), euclidean_distance(e[i], e[j]));
            EXPECT_EQ(dm(i, j), dm(j, i));
            EXPECT_GE(dm(i, j), 0.0);
        }
    }
    for (std::size_t i = 0; i < 50; ++i)
        for (std::size_t j = 0; j < 50; ++j)
            for (std::size_t k = 0; k < 50; k += 7) EXPECT_LE(dm(i, j), dm(i, k) + dm(k, j) + 1e-9);
}

TEST(Pairwise, WorkerCountDoesNotChangeResult) {
    const auto e = testutil::ensemble(testutil::random_points(40, 8, 3));
    const auto a = pairwise_distances(e, 1);
    const auto b = pairwise_distances(e, 4);
    for (std::size_t i = 0; i < 40; ++i)
        for (std::size_t j = 0; j < 40; ++j) EXPECT_EQ(a(i, j), b(i, j));
}

TEST(Pairwise, PermutationEquivariant) {
    const auto pts = testutil::random_points(25, 6, 9);
    std::vector<std::size_t> perm(pts.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), std::mt19937_64(1));
    std::vector<std::vector<double>> shuffled;
    for (auto p : perm) shuffled.push_back(pts[p]);
    const auto a = pairwise_distances(testutil::ensemble(pts));
    const auto b = pairwise_distances(testutil::ensemble(shuffled));
    for (std::size_t i = 0; i < perm.size(); ++i)
        for (std::size_t j = 0; j < perm.size(); ++j) EXPECT_EQ(b(i, j), a(perm[i], perm[j]));
}

// ---------------------------------------------------------------------------
// snapshots

TEST(Snapshot, RoundTrip) {
    const auto dir = testutil::temp_dir("snapshot");
    const WeightVector w({1.0f, -2.0f, 3.5f});
    save_snapshot(w, dir / "w.wodo");
    EXPECT_EQ(load_snapshot(dir / "w.wodo"), w);
}

TEST(Snapshot, RoundTripIsBitExact) {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<std::uint32_t> bits;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<float> v(1 + static_cast<std::size_t>(trial));
        for (auto& x : v) {
            do x = std::bit_cast<float>(bits(rng));
            while (!std::isfinite(x));
        }
        const WeightVector w(v);
        const auto back = decode_snapshot(encode_snapshot(w));
        ASSERT_EQ(back.dim(), w.dim());
        for (std::size_t i = 0; i < w.dim(); ++i)
            EXPECT_EQ(std::bit_cast<std::uint32_t>(back[i]), std::bit_cast<std::uint32_t>(w[i]));
    }
}

TEST(Snapshot, LayoutIsLittleEndian) {
    const auto bytes = encode_snapshot(WeightVector({1.0f}));
    const std::vector<unsigned char> want{'W', 'O', 'D', 'O', 1, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0x00, 0x00, 0x80, 0x3f};
    EXPECT_EQ(bytes, want);
}

TEST(Snapshot, Errors) {
    auto good = encode_snapshot(WeightVector({1.0f, 2.0f, 3.0f, 4.0f}));
    auto bad_magic = good;
    bad_magic[0] = 'X';
    EXPECT_THROW(decode_snapshot(bad_magic), FormatError);
    EXPECT_THROW(decode_snapshot({'W', 'O'}), FormatError);

    auto truncated = good;
    truncated.resize(truncated.size() - 4);   // header dim 4, 3 floats present
    EXPECT_THROW(decode_snapshot(truncated), TruncationError);
    EXPECT_THROW(decode_snapshot({good.begin(), good.begin() + 9}), TruncationError);

    EXPECT_THROW(decode_snapshot(good, 5), HeaderError);
    auto longer = good;
    longer.insert(longer.end(), {0, 0, 0, 0});
    EXPECT_THROW(decode_snapshot(longer), HeaderError);

    auto version = good;
    version[4] = 2;
    EXPECT_THROW(decode_snapshot(version), FormatError);
}

// ---------------------------------------------------------------------------
// manifest

TEST(Manifest, JsonRoundTripAndValidation) {
    const auto dir = testutil::temp_dir("manifest");
    RunManifest m;
    m.run_id = "member_3";
    m.seed = 4;
    m.label_fraction = 0.4;
    m.corruption_rate = 0.1;
    m.epochs = 12;
    m.learning_rate = 0.05;
    m.batch_size = 8;
    m.dataset_recipe = {4, 24, 20};
    m.initial_snapshot = "a.wodo";
    m.final_snapshot = "b.wodo";
    save_manifest(m, dir / "m.json");
    EXPECT_EQ(load_manifest(dir / "m.json"), m);

    save_snapshot(WeightVector({1.0f, 2.0f}), dir / "a.wodo");
    save_snapshot(WeightVector({1.0f, 2.0f, 3.0f}), dir / "b.wodo");
    EXPECT_THROW(m.validate_snapshots(dir), HeaderError);
    save_snapshot(WeightVector({1.0f, 2.0f}), dir / "b.wodo");
    EXPECT_NO_THROW(m.validate_snapshots(dir));

    auto bad = m;
    bad.label_fraction = 0.0;
    EXPECT_THROW(bad.validate(), ManifestError);
    bad = m;
    bad.corruption_rate = 1.5;
    EXPECT_THROW(bad.validate(), ManifestError);
    bad = m;
    bad.learning_rate = 0.0;
    EXPECT_THROW(bad.validate(), ManifestError);
}

TEST(Manifest, UsesSpecFieldNames) {
    nlohmann::json j = RunManifest{};
    for (const char* key : {"run_id", "seed", "label_fraction", "corruption_rate", "epochs", "learning_rate",
                            "batch_size", "dataset_recipe", "initial_snapshot", "final_snapshot"})
        EXPECT_TRUE(j.contains(key)) << key;
    EXPECT_THROW(nlohmann::json::parse(R"({"run_id": "x"})").get<RunManifest>(), std::exception);
}

// ---------------------------------------------------------------------------
// csv and stats

TEST(Csv, DoublesRoundTrip) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
        const double v = u(rng);
        EXPECT_EQ(csv::parse_double(csv::format_double(v)), v);
        EXPECT_EQ(csv::parse_double(csv::format_shortest(v)), v);
    }
    EXPECT_THROW(csv::parse_double("1.5x"), Error);
}

TEST(Csv, WriterAndParser) {
    csv::Writer w({"a", "b"});
    w.row({"1", "x"}).row({"2", ""});
    EXPECT_EQ(w.str(), "a,b\n1,x\n2,\n");
    const auto t = csv::parse(w.str());
    ASSERT_EQ(t.rows.size(), 2u);
    EXPECT_EQ(t.rows[1][t.column("b")], "");
    EXPECT_THROW(csv::parse("a,b\n1\n"), Error);
}

TEST(Stats, RanksAndSpearman) {
    const std::vector<double> x{3.0, 1.0, 2.0, 2.0};
    EXPECT_EQ(stats::ranks(x), (std::vector<double>{4.0, 1.0, 2.5, 2.5}));
    const std::vector<double> a{1, 2, 3, 4, 5}, b{10, 20, 25, 26, 100}, c{5, 4, 3, 2, 1};
    EXPECT_DOUBLE_EQ(stats::spearman(a, b), 1.0);
    EXPECT_DOUBLE_EQ(stats::spearman(a, c), -1.0);
    EXPECT_DOUBLE_EQ(stats::sample_std(std::vector<double>{2, 4, 4, 4, 5, 5, 7, 9}), std::sqrt(32.0 / 7.0));
}

TEST(Parallel, VisitsEveryIndexAndRethrowsLowest) {
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
    EXPECT_TRUE(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
    try {
        parallel_for(100, 4, [](std::size_t i) {
            if (i == 30 || i == 70) throw std::runtime_error(std::to_string(i));
        });
        FAIL();
    } catch (const std::runtime_error& e) {
        EXPECT_STREQ(e.what(), "30");
    }
}
