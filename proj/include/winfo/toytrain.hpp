#pragma once

// Small dependency-free MLP trainer (softmax cross-entropy, mini-batch SGD)
// and synthetic blob datasets with label restriction and corruption.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "winfo/core.hpp"

namespace winfo {

enum class Activation { ReLU, Tanh };

struct MlpSpec {
    std::vector<std::size_t> layer_sizes;   // input, hidden..., output
    Activation activation = Activation::Tanh;
    std::uint64_t seed = 0;                 // initialization seed

    void validate() const {
        if (layer_sizes.size() < 2) throw InvalidArgument("an MLP needs at least input and output layers");
        for (auto s : layer_sizes)
            if (s == 0) throw InvalidArgument("layer sizes must be positive");
    }
    std::size_t input_size() const { return layer_sizes.front(); }
    std::size_t output_size() const { return layer_sizes.back(); }
};

struct SyntheticDataset {
    std::vector<double> inputs;   // N x dim, row-major
    std::vector<int> labels;      // N values in [0, class_count)
    std::size_t dim = 0;
    int class_count = 0;
    std::uint64_t seed = 0;

    std::size_t size() const noexcept { return labels.size(); }
    std::span<const double> input(std::size_t i) const {
        return std::span<const double>(inputs).subspan(i * dim, dim);
    }
    std::vector<std::size_t> class_histogram() const {
        std::vector<std::size_t> h(static_cast<std::size_t>(class_count), 0);
        for (int l : labels) ++h[static_cast<std::size_t>(l)];
        return h;
    }
};

/// k Gaussian clusters with isotropic spread. For k <= dim the means are
/// e_c / sqrt(2), pairwise exactly 1 apart; otherwise they are drawn from
/// the seed and rescaled so the closest pair is 1 apart. Means do not
/// depend on per_class, so datasets differing only in per_class share them.
inline SyntheticDataset make_blobs(int k, int per_class, std::size_t dim, double spread, std::uint64_t seed) {
    if (k < 2) throw InvalidArgument("make_blobs needs at least 2 classes");
    if (per_class < 10) throw InvalidArgument("make_blobs needs at least 10 samples per class");
    if (dim == 0) throw InvalidArgument("make_blobs needs positive dim");
    if (!(spread > 0.0)) throw InvalidArgument("spread must be positive");

    const auto kk = static_cast<std::size_t>(k);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    std::vector<double> means(kk * dim, 0.0);
    if (kk <= dim) {
        for (std::size_t c = 0; c < kk; ++c) means[c * dim + c] = 1.0 / std::sqrt(2.0);
    } else {
        for (auto& m : means) m = normal(rng);
        double closest = std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < kk; ++a)
            for (std::size_t b = a + 1; b < kk; ++b) {
                double s = 0.0;
                for (std::size_t j = 0; j < dim; ++j) {
                    const double d = means[a * dim + j] - means[b * dim + j];
                    s += d * d;
                }
                closest = std::min(closest, std::sqrt(s));
            }
        for (auto& m : means) m /= closest;
    }

    SyntheticDataset ds;
    ds.dim = dim;
    ds.class_count = k;
    ds.seed = seed;
    ds.inputs.reserve(kk * static_cast<std::size_t>(per_class) * dim);
    for (int c = 0; c < k; ++c)
        for (int s = 0; s < per_class; ++s) {
            for (std::size_t j = 0; j < dim; ++j)
                ds.inputs.push_back(means[static_cast<std::size_t>(c) * dim + j] + spread * normal(rng));
            ds.labels.push_back(c);
        }
    return ds;
}

/// Keeps the samples of the first ceil(fraction * k) classes.
inline SyntheticDataset restrict_labels(const SyntheticDataset& ds, double fraction) {
    if (!(fraction > 0.0 && fraction <= 1.0)) throw InvalidArgument("label fraction must lie in (0, 1]");
    // the epsilon keeps 0.2 * 10 from rounding up to 3 classes
    const auto keep = static_cast<int>(std::ceil(fraction * ds.class_count - 1e-9));
    if (keep < 1) throw NoClassesLeft("label fraction leaves no class");
    if (keep >= ds.class_count) return ds;

    SyntheticDataset out;
    out.dim = ds.dim;
    out.class_count = keep;
    out.seed = ds.seed;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (ds.labels[i] >= keep) continue;
        const auto x = ds.input(i);
        out.inputs.insert(out.inputs.end(), x.begin(), x.end());
        out.labels.push_back(ds.labels[i]);
    }
    return out;
}

/// Picks floor(rate * N) positions uniformly and permutes their labels
/// among themselves. Features are untouched.
inline SyntheticDataset corrupt_labels(const SyntheticDataset& ds, double rate, std::uint64_t seed) {
    if (!(rate >= 0.0 && rate <= 1.0)) throw InvalidArgument("corruption rate must lie in [0, 1]");
    const std::size_t n = ds.size();
    const auto m = static_cast<std::size_t>(std::floor(rate * static_cast<double>(n) + 1e-9));
    SyntheticDataset out = ds;
    if (m == 0) return out;

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(m);
    std::sort(idx.begin(), idx.end());

    std::vector<int> picked(m);
    for (std::size_t i = 0; i < m; ++i) picked[i] = ds.labels[idx[i]];
    std::shuffle(picked.begin(), picked.end(), rng);
    for (std::size_t i = 0; i < m; ++i) out.labels[idx[i]] = picked[i];
    return out;
}

/// Positions chosen by corrupt_labels for the same (N, rate, seed).
inline std::vector<std::size_t> corrupted_positions(std::size_t n, double rate, std::uint64_t seed) {
    const auto m = static_cast<std::size_t>(std::floor(rate * static_cast<double>(n) + 1e-9));
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(m);
    std::sort(idx.begin(), idx.end());
    return idx;
}

/// Fully connected network. Parameters live in one flat vector laid out as
/// W0 (out x in, row-major), b0, W1, b1, ... which is also the flattening order.
class Mlp {
public:
    explicit Mlp(MlpSpec spec) : spec_(std::move(spec)) {
        spec_.validate();
        std::size_t off = 0;
        for (std::size_t l = 0; l + 1 < spec_.layer_sizes.size(); ++l) {
            const auto in = spec_.layer_sizes[l], out = spec_.layer_sizes[l + 1];
            layers_.push_back({in, out, off, off + in * out});
            off += in * out + out;
        }
        params_.assign(off, 0.0);
        initialize(spec_.seed);
    }

    /// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] for weights and biases.
    void initialize(std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        for (const auto& L : layers_) {
            const double a = 1.0 / std::sqrt(static_cast<double>(L.in));
            std::uniform_real_distribution<double> u(-a, a);
            for (std::size_t i = 0; i < L.in * L.out + L.out; ++i) params_[L.w + i] = u(rng);
        }
    }

    const MlpSpec& spec() const noexcept { return spec_; }
    std::size_t parameter_count() const noexcept { return params_.size(); }
    std::span<const double> parameters() const noexcept { return params_; }
    std::span<double> parameters() noexcept { return params_; }

    std::vector<LayerTensor> layers() const {
        std::vector<LayerTensor> out;
        for (const auto& L : layers_) {
            out.push_back(LayerTensor::matrix(
                L.out, L.in,
                std::vector<double>(params_.begin() + static_cast<std::ptrdiff_t>(L.w),
                                    params_.begin() + static_cast<std::ptrdiff_t>(L.b))));
            out.push_back(LayerTensor::vector(
                std::vector<double>(params_.begin() + static_cast<std::ptrdiff_t>(L.b),
                                    params_.begin() + static_cast<std::ptrdiff_t>(L.b + L.out))));
        }
        return out;
    }

    WeightVector flatten() const {
        const auto l = layers();
        return flatten_weights(l);
    }

    std::vector<double> logits(std::span<const double> x) const {
        std::vector<double> a(x.begin(), x.end()), z;
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            affine(l, a, z);
            if (l + 1 < layers_.size())
                for (auto& v : z) v = activate(v);
            a.swap(z);
        }
        return a;
    }

    int predict(std::span<const double> x) const {
        const auto z = logits(x);
        return static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
    }

    double accuracy(const SyntheticDataset& ds) const {
        std::size_t hit = 0;
        for (std::size_t i = 0; i < ds.size(); ++i) hit += predict(ds.input(i)) == ds.labels[i];
        return static_cast<double>(hit) / static_cast<double>(ds.size());
    }

    /// Mean softmax cross-entropy over the listed samples; writes the
    /// gradient of that mean into grad (same layout as parameters()).
    double loss_and_gradient(const SyntheticDataset& ds, std::span<const std::size_t> batch,
                             std::span<double> grad) const {
        std::fill(grad.begin(), grad.end(), 0.0);
        const std::size_t depth = layers_.size();
        std::vector<std::vector<double>> acts(depth + 1), pre(depth);
        for (std::size_t l = 0; l < depth; ++l) {
            pre[l].resize(layers_[l].out);
            acts[l + 1].resize(layers_[l].out);
        }
        std::size_t widest = 0;
        for (auto s : spec_.layer_sizes) widest = std::max(widest, s);
        std::vector<double> delta(widest), back(widest);

        double loss = 0.0;
        const double inv_b = 1.0 / static_cast<double>(batch.size());
        for (auto idx : batch) {
            const auto x = ds.input(idx);
            acts[0].assign(x.begin(), x.end());
            for (std::size_t l = 0; l < depth; ++l) {
                affine(l, acts[l], pre[l]);
                for (std::size_t o = 0; o < pre[l].size(); ++o)
                    acts[l + 1][o] = l + 1 < depth ? activate(pre[l][o]) : pre[l][o];
            }
            // softmax into delta, then delta = p - onehot(y)
            const auto& z = acts[depth];
            const std::size_t classes = z.size();
            const double zmax = *std::max_element(z.begin(), z.end());
            double sum = 0.0;
            for (std::size_t c = 0; c < classes; ++c) sum += (delta[c] = std::exp(z[c] - zmax));
            for (std::size_t c = 0; c < classes; ++c) delta[c] /= sum;
            const auto y = static_cast<std::size_t>(ds.labels[idx]);
            loss -= std::log(std::max(delta[y], 1e-300));
            delta[y] -= 1.0;

            for (std::size_t l = depth; l-- > 0;) {
                const auto& L = layers_[l];
                const auto& a_in = acts[l];
                for (std::size_t o = 0; o < L.out; ++o) {
                    const double g = delta[o] * inv_b;
                    grad[L.b + o] += g;
                    double* gw = &grad[L.w + o * L.in];
                    for (std::size_t i = 0; i < L.in; ++i) gw[i] += g * a_in[i];
                }
                if (l == 0) break;
                std::fill(back.begin(), back.begin() + static_cast<std::ptrdiff_t>(L.in), 0.0);
                for (std::size_t o = 0; o < L.out; ++o) {
                    const double* w = &params_[L.w + o * L.in];
                    const double d = delta[o];
                    for (std::size_t i = 0; i < L.in; ++i) back[i] += w[i] * d;
                }
                for (std::size_t i = 0; i < L.in; ++i)
                    delta[i] = back[i] * activate_grad(pre[l - 1][i], acts[l][i]);
            }
        }
        return loss * inv_b;
    }

    double loss(const SyntheticDataset& ds, std::span<const std::size_t> batch) const {
        std::vector<double> g(params_.size());
        return loss_and_gradient(ds, batch, g);
    }

private:
    struct Layer {
        std::size_t in, out;
        std::size_t w, b;   // offsets into params_
    };

    void affine(std::size_t l, std::span<const double> a, std::vector<double>& z) const {
        const auto& L = layers_[l];
        z.resize(L.out);
        for (std::size_t o = 0; o < L.out; ++o) {
            const double* w = &params_[L.w + o * L.in];
            double s = params_[L.b + o];
            for (std::size_t i = 0; i < L.in; ++i) s += w[i] * a[i];
            z[o] = s;
        }
    }

    double activate(double v) const {
        return spec_.activation == Activation::ReLU ? std::max(v, 0.0) : std::tanh(v);
    }
    double activate_grad(double pre, double post) const {
        return spec_.activation == Activation::ReLU ? (pre > 0.0 ? 1.0 : 0.0) : 1.0 - post * post;
    }

    MlpSpec spec_;
    std::vector<Layer> layers_;
    std::vector<double> params_;
};

struct TrainConfig {
    int epochs = 20;
    double learning_rate = 0.1;
    std::size_t batch_size = 16;
    std::uint64_t seed = 0;   // data-order seed
};

struct TrainResult {
    WeightVector initial;
    WeightVector final;
    std::vector<double> loss_curve;   // one entry per update, pre-update batch loss
    double final_accuracy = 0.0;
};

inline std::size_t step_count(std::size_t samples, int epochs, std::size_t batch_size) {
    return static_cast<std::size_t>(epochs) * ((samples + batch_size - 1) / batch_size);
}

/// Mini-batch SGD for exactly epochs * ceil(N / batch_size) updates. The
/// sample order is reshuffled every epoch from cfg.seed.
inline TrainResult train(const MlpSpec& spec, const SyntheticDataset& ds, const TrainConfig& cfg) {
    if (spec.input_size() != ds.dim)
        throw InvalidArgument("network input size " + std::to_string(spec.input_size()) +
                              " does not match dataset dim " + std::to_string(ds.dim));
    if (spec.output_size() != static_cast<std::size_t>(ds.class_count))
        throw InvalidArgument("network output size " + std::to_string(spec.output_size()) +
                              " does not match class count " + std::to_string(ds.class_count));
    if (cfg.epochs <= 0) throw InvalidArgument("epochs must be positive");
    if (cfg.batch_size == 0) throw InvalidArgument("batch size must be positive");
    if (!(cfg.learning_rate >= 0.0)) throw InvalidArgument("learning rate must be non-negative");
    if (ds.size() == 0) throw InvalidArgument("empty dataset");

    Mlp net(spec);
    TrainResult r;
    r.initial = net.flatten();

    const std::size_t n = ds.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(cfg.seed);
    std::vector<double> grad(net.parameter_count());
    r.loss_curve.reserve(step_count(n, cfg.epochs, cfg.batch_size));

    std::size_t step = 0;
    for (int e = 0; e < cfg.epochs; ++e) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < n; start += cfg.batch_size, ++step) {
            const std::size_t end = std::min(n, start + cfg.batch_size);
            const std::span<const std::size_t> batch(order.data() + start, end - start);
            const double loss = net.loss_and_gradient(ds, batch, grad);
            if (!std::isfinite(loss)) throw DivergenceError(step);
            r.loss_curve.push_back(loss);
            auto p = net.parameters();
            for (std::size_t k = 0; k < p.size(); ++k) p[k] -= cfg.learning_rate * grad[k];
        }
    }
    for (double v : net.parameters())
        if (!std::isfinite(v)) throw DivergenceError(step);
    r.final = net.flatten();
    r.final_accuracy = net.accuracy(ds);
    return r;
}

}  // namespace winfo
