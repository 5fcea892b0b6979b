#pragma once

// Weight-space primitives: flattened weight vectors, ensembles and
// Euclidean distance matrices.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "winfo/errors.hpp"
#include "winfo/parallel.hpp"

namespace winfo {

/// One network's full parameter state as a flat vector. Stored at
/// snapshot precision (f32); every distance is accumulated in f64.
class WeightVector {
public:
    WeightVector() = default;

    explicit WeightVector(std::vector<float> values) : values_(std::move(values)) {
        if (values_.empty()) throw EmptyModel("weight vector must have positive dimension");
        for (float v : values_)
            if (!std::isfinite(v)) throw InvalidArgument("weight vector entries must be finite");
    }

    std::size_t dim() const noexcept { return values_.size(); }
    std::span<const float> values() const noexcept { return values_; }
    float operator[](std::size_t i) const { return values_[i]; }

    friend bool operator==(const WeightVector&, const WeightVector&) = default;

private:
    std::vector<float> values_;
};

enum class Stage { Initial, Final };

inline std::string_view to_string(Stage s) { return s == Stage::Initial ? "initial" : "final"; }

/// Ordered collection of same-dimension weight vectors with one seed per member.
class WeightEnsemble {
public:
    explicit WeightEnsemble(Stage stage = Stage::Initial) : stage_(stage) {}

    WeightEnsemble(std::vector<WeightVector> members, std::vector<std::int64_t> seeds,
                   Stage stage = Stage::Initial)
        : stage_(stage) {
        if (members.size() != seeds.size())
            throw InvalidArgument("ensemble needs exactly one seed per member");
        for (std::size_t i = 0; i < members.size(); ++i) add(std::move(members[i]), seeds[i]);
    }

    /// Builds an ensemble whose seeds are the member indices.
    static WeightEnsemble from_members(std::vector<WeightVector> members,
                                       Stage stage = Stage::Initial) {
        std::vector<std::int64_t> seeds(members.size());
        for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = static_cast<std::int64_t>(i);
        return WeightEnsemble(std::move(members), std::move(seeds), stage);
    }

    void add(WeightVector member, std::int64_t seed) {
        if (!members_.empty() && member.dim() != dim())
            throw DimMismatch("ensemble member has dim " + std::to_string(member.dim()) +
                              ", expected " + std::to_string(dim()));
        members_.push_back(std::move(member));
        seeds_.push_back(seed);
    }

    std::size_t dim() const noexcept { return members_.empty() ? 0 : members_.front().dim(); }
    std::size_t size() const noexcept { return members_.size(); }
    bool empty() const noexcept { return members_.empty(); }
    Stage stage() const noexcept { return stage_; }

    const WeightVector& operator[](std::size_t i) const { return members_[i]; }
    const std::vector<WeightVector>& members() const noexcept { return members_; }
    const std::vector<std::int64_t>& seeds() const noexcept { return seeds_; }

private:
    Stage stage_;
    std::vector<WeightVector> members_;
    std::vector<std::int64_t> seeds_;
};

/// Symmetric n x n matrix of pairwise distances, zero on the diagonal.
class DistanceMatrix {
public:
    explicit DistanceMatrix(std::size_t n) : n_(n), entries_(n * n, 0.0) {}

    std::size_t n() const noexcept { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return entries_[i * n_ + j]; }

    /// Sets both (i, j) and (j, i).
    void set(std::size_t i, std::size_t j, double d) {
        entries_[i * n_ + j] = d;
        entries_[j * n_ + i] = d;
    }

    std::span<const double> row(std::size_t i) const {
        return std::span<const double>(entries_).subspan(i * n_, n_);
    }

private:
    std::size_t n_;
    std::vector<double> entries_;
};

/// A layer tensor in row-major order. Vectors are 1 x cols.
struct LayerTensor {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    static LayerTensor matrix(std::size_t rows, std::size_t cols, std::vector<double> data) {
        if (data.size() != rows * cols)
            throw InvalidArgument("matrix data size does not match its shape");
        return {rows, cols, std::move(data)};
    }
    static LayerTensor vector(std::vector<double> data) {
        const std::size_t n = data.size();
        return {1, n, std::move(data)};
    }
    std::size_t size() const noexcept { return data.size(); }
};

/// Concatenates layers in declared order. Callers list each bias right after
/// its matrix.
inline WeightVector flatten_weights(std::span<const LayerTensor> layers) {
    if (layers.empty()) throw EmptyModel("no layers to flatten");
    std::size_t total = 0;
    for (const auto& l : layers) total += l.size();
    if (total == 0) throw EmptyModel("model has no parameters");

    std::vector<float> out;
    out.reserve(total);
    for (std::size_t li = 0; li < layers.size(); ++li) {
        for (double v : layers[li].data) {
            const auto f = static_cast<float>(v);
            if (!std::isfinite(v) || !std::isfinite(f)) throw NonFiniteLayer(li);
            out.push_back(f);
        }
    }
    return WeightVector(std::move(out));
}

inline double squared_distance(std::span<const float> a, std::span<const float> b) {
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = static_cast<double>(a[k]) - static_cast<double>(b[k]);
        acc += d * d;
    }
    return acc;
}

inline double euclidean_distance(const WeightVector& a, const WeightVector& b) {
    if (a.dim() != b.dim())
        throw DimMismatch("cannot measure distance between dims " + std::to_string(a.dim()) +
                          " and " + std::to_string(b.dim()));
    return std::sqrt(squared_distance(a.values(), b.values()));
}

/// Rows are partitioned across workers; each entry is computed once from
/// (i, j) with i < j, so the result is independent of the worker count.
inline DistanceMatrix pairwise_distances(const WeightEnsemble& ensemble, std::size_t workers = 1) {
    if (ensemble.empty()) throw EmptyEnsemble("cannot compute distances of an empty ensemble");
    const std::size_t n = ensemble.size();
    DistanceMatrix dm(n);
    parallel_for(n, workers, [&](std::size_t i) {
        for (std::size_t j = i + 1; j < n; ++j)
            dm.set(i, j, euclidean_distance(ensemble[i], ensemble[j]));
    });
    return dm;
}

}  // namespace winfo
