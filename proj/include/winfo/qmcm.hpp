#pragma once

// Quasi-Monte Carlo estimation of support shrink from nearest-element
// distances, plus the adaptive remove-worst/resample estimator.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "winfo/core.hpp"
#include "winfo/infometrics.hpp"
#include "winfo/stats.hpp"

namespace winfo {

struct NearestDistanceReport {
    std::vector<double> distances;
    double mean = 0.0;
    double std = 0.0;   // Bessel-corrected

    /// Coefficient of variation; undefined when every distance is zero.
    double cv() const {
        if (mean == 0.0) throw CvUndefined("coefficient of variation undefined for zero mean");
        return std / mean;
    }

    static NearestDistanceReport from(std::vector<double> distances) {
        NearestDistanceReport r;
        r.mean = stats::mean(distances);
        r.std = stats::sample_std(distances);
        r.distances = std::move(distances);
        return r;
    }
};

/// Distance from x to its closest member of the reference set.
inline double nearest_distance(const WeightVector& x, const WeightEnsemble& reference_set) {
    if (reference_set.empty()) throw EmptyReference("reference set is empty");
    if (x.dim() != reference_set.dim())
        throw DimMismatch("query dim " + std::to_string(x.dim()) + " vs reference dim " +
                          std::to_string(reference_set.dim()));
    double best = std::numeric_limits<double>::infinity();
    for (const auto& member : reference_set.members())
        best = std::min(best, squared_distance(x.values(), member.values()));
    return std::sqrt(best);
}

/// Nearest distance of every query to the reference set. Queries are split
/// across workers; each slot is written once.
inline NearestDistanceReport mean_nearest_distance(const WeightEnsemble& queries,
                                                   const WeightEnsemble& reference_set,
                                                   std::size_t workers = 1) {
    if (queries.empty()) throw EmptyEnsemble("query set is empty");
    if (reference_set.empty()) throw EmptyReference("reference set is empty");
    if (queries.dim() != reference_set.dim()) throw DimMismatch("query and reference dims differ");
    std::vector<double> d(queries.size());
    parallel_for(queries.size(), workers,
                 [&](std::size_t i) { d[i] = nearest_distance(queries[i], reference_set); });
    return NearestDistanceReport::from(std::move(d));
}

/// I = log(1 / rho) for a support shrink ratio rho = |supp after| / |supp before|.
inline double information_from_ratio(double rho) {
    if (!(rho > 0.0 && rho < 1.0)) throw DomainError("support ratio must lie in (0, 1)");
    return detail::log_inverse_ratio(rho);
}

/// Average nearest distance over the whole population versus over the
/// support of d (the points outside the subset), for one subset.
struct SupportMeans {
    double rho = 0.0;               // |subset| / |population|
    double mean_all = 0.0;          // D / |X|, subset members contribute 0
    double mean_support = 0.0;      // D / |X - X'|
};

inline SupportMeans support_means(const WeightEnsemble& population,
                                  std::span<const std::size_t> subset_indices,
                                  std::size_t workers = 1) {
    std::vector<char> in_subset(population.size(), 0);
    WeightEnsemble subset(population.stage()), rest(population.stage());
    for (auto i : subset_indices) {
        if (i >= population.size()) throw InvalidArgument("subset index out of range");
        in_subset[i] = 1;
    }
    for (std::size_t i = 0; i < population.size(); ++i)
        (in_subset[i] ? subset : rest).add(population[i], population.seeds()[i]);
    if (subset.empty()) throw EmptyReference("subset is empty");
    if (rest.empty()) throw InsufficientSamples("subset covers the whole population");

    const auto report = mean_nearest_distance(rest, subset, workers);
    double total = 0.0;
    for (double d : report.distances) total += d;
    SupportMeans s;
    s.rho = static_cast<double>(subset.size()) / static_cast<double>(population.size());
    s.mean_all = total / static_cast<double>(population.size());
    s.mean_support = total / static_cast<double>(rest.size());
    return s;
}

// ---------------------------------------------------------------------------
// Adaptive estimator

/// Anything that yields one distance per draw, or nullopt when exhausted.
template <class S>
concept DistanceSource = requires(S s) {
    { s.next() } -> std::convertible_to<std::optional<double>>;
};

/// Anything that yields (initial, final) weight pairs.
template <class S>
concept PairSource = requires(S s) {
    { s.next() } -> std::convertible_to<std::optional<std::pair<WeightVector, WeightVector>>>;
};

/// Turns a pair source into a distance source via init -> final distance.
template <PairSource Pairs>
class PairDistanceSource {
public:
    explicit PairDistanceSource(Pairs& pairs) : pairs_(&pairs) {}
    std::optional<double> next() {
        auto p = pairs_->next();
        if (!p) return std::nullopt;
        return euclidean_distance(p->first, p->second);
    }

private:
    Pairs* pairs_;
};

/// Replays a fixed list of distances in order.
class SequenceSource {
public:
    explicit SequenceSource(std::vector<double> values) : values_(std::move(values)) {}
    std::optional<double> next() {
        if (pos_ >= values_.size()) return std::nullopt;
        return values_[pos_++];
    }

private:
    std::vector<double> values_;
    std::size_t pos_ = 0;
};

/// Draws without replacement from a finite population in a seeded order.
class ShuffledSource {
public:
    ShuffledSource(std::vector<double> population, std::uint64_t seed) : values_(std::move(population)) {
        std::mt19937_64 rng(seed);
        std::shuffle(values_.begin(), values_.end(), rng);
    }
    std::optional<double> next() {
        if (pos_ >= values_.size()) return std::nullopt;
        return values_[pos_++];
    }

private:
    std::vector<double> values_;
    std::size_t pos_ = 0;
};

struct QmcmConfig {
    double t = 0.3;            // cv threshold
    std::size_t n = 200;       // accepted sample count
    std::size_t max_resamples = 0;   // 0 selects 50 n

    std::size_t resample_limit() const { return max_resamples == 0 ? 50 * n : max_resamples; }
};

struct QmcmEstimate {
    double d_hat = 0.0;
    std::size_t samples_used = 0;
    std::size_t resample_count = 0;
    double achieved_cv = 0.0;
    double std_dev = 0.0;
    bool converged = false;
};

namespace detail {

struct SampleMoments {
    double mean;
    double std;
    double cv;
};

// Sums run in sample order so results are reproducible bit for bit.
inline SampleMoments moments(const std::vector<double>& y) {
    double sum = 0.0;
    for (double v : y) sum += v;
    const double mean = sum / static_cast<double>(y.size());
    double ss = 0.0;
    for (double v : y) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(y.size() - 1));
    // an all-zero sample has no spread; treat it as converged
    const double cv = mean == 0.0 ? 0.0 : sd / mean;
    return {mean, sd, cv};
}

}  // namespace detail

/// Draws n distances, then while cv > t removes the sample deviating most
/// from the mean (lowest position on ties) and appends a fresh draw. The
/// accepted set keeps draw order with removed entries erased.
template <DistanceSource Source>
QmcmEstimate qmcm_estimate(Source& source, const QmcmConfig& cfg) {
    if (!(cfg.t > 0.0)) throw InvalidArgument("cv threshold must be positive");
    if (cfg.n < 2) throw InvalidArgument("qmcm needs at least 2 samples");

    auto draw = [&] {
        std::optional<double> d = source.next();
        if (!d) throw SourceExhausted("sampling source exhausted");
        if (!(*d >= 0.0) || !std::isfinite(*d)) throw InvalidArgument("source produced an invalid distance");
        return *d;
    };

    std::vector<double> y;
    y.reserve(cfg.n);
    for (std::size_t i = 0; i < cfg.n; ++i) y.push_back(draw());

    QmcmEstimate est;
    est.samples_used = cfg.n;
    const std::size_t limit = cfg.resample_limit();
    auto m = detail::moments(y);
    while (m.cv > cfg.t && est.resample_count < limit) {
        std::size_t worst = 0;
        double worst_dev = -1.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double dev = std::abs(y[i] - m.mean);
            if (dev > worst_dev) {
                worst_dev = dev;
                worst = i;
            }
        }
        y.erase(y.begin() + static_cast<std::ptrdiff_t>(worst));
        y.push_back(draw());
        ++est.resample_count;
        m = detail::moments(y);
    }
    est.d_hat = m.mean;
    est.std_dev = m.std;
    est.achieved_cv = m.cv;
    est.converged = m.cv <= cfg.t;
    return est;
}

enum class InfoOrder { LessInfo, MoreInfo, Indistinguishable };

inline const char* to_string(InfoOrder o) {
    switch (o) {
        case InfoOrder::LessInfo: return "less";
        case InfoOrder::MoreInfo: return "more";
        default: return "indistinguishable";
    }
}

/// Orders two runs by d_hat with a noise band eps = max(std_a, std_b) / sqrt(n).
inline InfoOrder compare_runs(const QmcmEstimate& a, const QmcmEstimate& b) {
    if (!a.converged || !b.converged) throw NotConverged("compare_runs needs converged estimates");
    const auto n = static_cast<double>(std::min(a.samples_used, b.samples_used));
    const double eps = std::max(a.std_dev, b.std_dev) / std::sqrt(n);
    if (a.d_hat < b.d_hat - eps) return InfoOrder::LessInfo;
    if (a.d_hat > b.d_hat + eps) return InfoOrder::MoreInfo;
    return InfoOrder::Indistinguishable;
}

// ---------------------------------------------------------------------------
// Nearest-distance distribution simulation

struct DistanceSimulation {
    NearestDistanceReport report;
    Histogram histogram;
    std::vector<double> normal_mass;   // moment-matched normal, per bin
    double kl_to_normal = 0.0;
};

/// Uniform points on the unit sphere (normalized standard normals).
inline WeightEnsemble random_unit_vectors(std::size_t count, std::size_t dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    WeightEnsemble out;
    std::vector<double> buf(dim);
    for (std::size_t i = 0; i < count; ++i) {
        double norm2 = 0.0;
        do {
            norm2 = 0.0;
            for (auto& v : buf) {
                v = normal(rng);
                norm2 += v * v;
            }
        } while (norm2 == 0.0);
        const double inv = 1.0 / std::sqrt(norm2);
        std::vector<float> f(dim);
        for (std::size_t k = 0; k < dim; ++k) f[k] = static_cast<float>(buf[k] * inv);
        out.add(WeightVector(std::move(f)), static_cast<std::int64_t>(i));
    }
    return out;
}

/// Samples population_size unit vectors, takes a random subset of
/// floor(fraction * size) as the reference set and measures the nearest
/// distance of every remaining point to it.
inline DistanceSimulation simulate_distance_distribution(std::size_t population_size, std::size_t dim,
                                                         double subset_fraction, std::uint64_t seed,
                                                         std::size_t bins = kDefaultBins,
                                                         std::size_t workers = 1) {
    if (population_size < 100) throw InvalidArgument("population must hold at least 100 elements");
    if (dim == 0) throw InvalidArgument("dimension must be positive");
    if (!(subset_fraction > 0.0 && subset_fraction < 1.0))
        throw InvalidArgument("subset fraction must lie in (0, 1)");
    const auto subset_size =
        static_cast<std::size_t>(std::floor(subset_fraction * static_cast<double>(population_size)));
    if (subset_size == 0) throw InsufficientSamples("subset is empty");
    if (population_size - subset_size < 30)
        throw InsufficientSamples("fewer than 30 query distances");

    const auto population = random_unit_vectors(population_size, dim, seed);
    std::vector<std::size_t> order(population_size);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<char> in_subset(population_size, 0);
    for (std::size_t i = 0; i < subset_size; ++i) in_subset[order[i]] = 1;
    WeightEnsemble subset, queries;
    for (std::size_t i = 0; i < population_size; ++i)
        (in_subset[i] ? subset : queries).add(population[i], population.seeds()[i]);

    DistanceSimulation sim;
    sim.report = mean_nearest_distance(queries, subset, workers);
    sim.histogram = make_histogram(sim.report.distances, bins);
    sim.normal_mass = fit_normal_mass(sim.histogram);
    sim.kl_to_normal = kl_divergence(sim.histogram, sim.normal_mass);
    return sim;
}

}  // namespace winfo
