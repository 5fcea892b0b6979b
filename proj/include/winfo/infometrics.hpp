#pragma once

// Information-theoretic primitives. All logarithms are natural (nats).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "winfo/errors.hpp"

namespace winfo {

/// Equal-width counts over strictly increasing edges.
struct Histogram {
    std::vector<double> edges;           // bins + 1 values
    std::vector<std::uint64_t> counts;   // bins values
    std::uint64_t total = 0;

    std::size_t bins() const noexcept { return counts.size(); }
    double midpoint(std::size_t i) const { return 0.5 * (edges[i] + edges[i + 1]); }

    /// Empirical probability of bin i.
    double p(std::size_t i) const {
        return static_cast<double>(counts[i]) / static_cast<double>(total);
    }

    std::vector<double> probabilities() const {
        std::vector<double> out(bins());
        for (std::size_t i = 0; i < bins(); ++i) out[i] = p(i);
        return out;
    }

    void validate() const {
        if (counts.size() < 2) throw InvalidArgument("histogram needs at least 2 bins");
        if (edges.size() != counts.size() + 1)
            throw InvalidArgument("histogram needs bins + 1 edges");
        for (std::size_t i = 0; i + 1 < edges.size(); ++i)
            if (!(edges[i] < edges[i + 1])) throw InvalidArgument("histogram edges must increase");
        std::uint64_t sum = 0;
        for (auto c : counts) sum += c;
        if (sum != total || total == 0) throw InvalidArgument("histogram counts must sum to total > 0");
    }
};

inline constexpr std::size_t kDefaultBins = 64;

/// Bins samples into `bins` equal-width bins spanning [min, max]; the
/// maximum lands in the last bin. A constant sample gets a unit-wide range.
inline Histogram make_histogram(std::span<const double> samples, std::size_t bins = kDefaultBins) {
    if (samples.empty()) throw InvalidArgument("cannot histogram an empty sample");
    if (bins < 2) throw InvalidArgument("histogram needs at least 2 bins");
    auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
    double lo = *lo_it, hi = *hi_it;
    if (lo == hi) {
        lo -= 0.5;
        hi += 0.5;
    }
    Histogram h;
    h.edges.resize(bins + 1);
    const double width = (hi - lo) / static_cast<double>(bins);
    for (std::size_t i = 0; i <= bins; ++i) h.edges[i] = lo + width * static_cast<double>(i);
    h.edges[bins] = hi;
    h.counts.assign(bins, 0);
    for (double x : samples) {
        auto idx = static_cast<std::size_t>((x - lo) / width);
        if (idx >= bins) idx = bins - 1;
        ++h.counts[idx];
    }
    h.total = samples.size();
    return h;
}

/// Shannon entropy of a probability vector, with 0 ln 0 := 0.
inline double entropy(std::span<const double> p) {
    if (p.empty()) throw InvalidDistribution("empty distribution");
    double sum = 0.0;
    for (double x : p) {
        if (!(x >= 0.0) || !std::isfinite(x)) throw InvalidDistribution("negative or non-finite probability");
        sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw InvalidDistribution("probabilities sum to " + std::to_string(sum));
    double h = 0.0;
    for (double x : p)
        if (x > 0.0) h -= x * std::log(x);
    return h;
}

namespace detail {

/// log(1 / rho), the single expression shared by every support-ratio formula.
inline double log_inverse_ratio(double rho) { return -std::log(rho); }

}  // namespace detail

/// Entropy drop between two uniform supports, ln(before) - ln(after).
inline double information_gain(std::uint64_t support_before, std::uint64_t support_after) {
    if (support_before == 0 || support_after == 0)
        throw InvalidArgument("support sizes must be positive");
    if (support_after > support_before)
        throw ShrinkViolation("support grew from " + std::to_string(support_before) + " to " +
                              std::to_string(support_after));
    if (support_after == support_before) return 0.0;
    return detail::log_inverse_ratio(static_cast<double>(support_after) /
                                     static_cast<double>(support_before));
}

/// Mutual information of a joint count table (rows x cols).
inline double mutual_information(const std::vector<std::vector<std::uint64_t>>& joint) {
    if (joint.empty() || joint.front().empty()) throw EmptyTable("empty joint table");
    const std::size_t rows = joint.size(), cols = joint.front().size();
    for (const auto& r : joint)
        if (r.size() != cols) throw InvalidArgument("joint table rows differ in length");

    std::vector<double> row_sum(rows, 0.0), col_sum(cols, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) {
            const auto c = static_cast<double>(joint[i][j]);
            row_sum[i] += c;
            col_sum[j] += c;
            total += c;
        }
    if (total == 0.0) throw EmptyTable("joint table has no counts");

    double mi = 0.0;
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) {
            if (joint[i][j] == 0) continue;
            const double pxy = static_cast<double>(joint[i][j]) / total;
            const double px = row_sum[i] / total, py = col_sum[j] / total;
            mi += pxy * std::log(pxy / (px * py));
        }
    return std::max(mi, 0.0);
}

inline constexpr double kKlFloor = 1e-12;

/// KL(P || Q) where P is the histogram's empirical mass and Q a mass vector
/// over the same bins. Q is floored at kKlFloor and renormalized.
inline double kl_divergence(const Histogram& p_hist, std::span<const double> q_mass) {
    if (q_mass.size() != p_hist.bins())
        throw BinMismatch("Q has " + std::to_string(q_mass.size()) + " bins, P has " +
                          std::to_string(p_hist.bins()));
    if (p_hist.total == 0) throw InvalidArgument("empty histogram");
    std::vector<double> q(q_mass.begin(), q_mass.end());
    double qsum = 0.0;
    for (auto& x : q) {
        if (!(x >= 0.0)) throw InvalidDistribution("Q has a negative entry");
        x = std::max(x, kKlFloor);
        qsum += x;
    }
    double kl = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        const double p = p_hist.p(i);
        if (p > 0.0) kl += p * std::log(p / (q[i] / qsum));
    }
    return kl;
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// Per-bin mass of the normal whose mean and (Bessel) std match the
/// histogram's midpoint moments, renormalized over the histogram range.
inline std::vector<double> fit_normal_mass(const Histogram& hist) {
    if (hist.total < 30) throw InsufficientSamples("normal fit needs at least 30 samples");
    const auto n = static_cast<double>(hist.total);
    double mu = 0.0;
    for (std::size_t i = 0; i < hist.bins(); ++i)
        mu += static_cast<double>(hist.counts[i]) * hist.midpoint(i);
    mu /= n;
    double ss = 0.0;
    for (std::size_t i = 0; i < hist.bins(); ++i) {
        const double d = hist.midpoint(i) - mu;
        ss += static_cast<double>(hist.counts[i]) * d * d;
    }
    const double sigma = std::sqrt(ss / (n - 1.0));
    if (!(sigma > 0.0)) throw DegenerateFit("histogram has zero variance");

    std::vector<double> mass(hist.bins());
    double sum = 0.0;
    for (std::size_t i = 0; i < hist.bins(); ++i) {
        mass[i] = normal_cdf((hist.edges[i + 1] - mu) / sigma) - normal_cdf((hist.edges[i] - mu) / sigma);
        sum += mass[i];
    }
    if (!(sum > 0.0)) throw DegenerateFit("normal fit has no mass over the histogram range");
    for (auto& m : mass) m /= sum;
    return mass;
}

}  // namespace winfo
