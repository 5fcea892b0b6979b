#pragma once

// Experiment drivers: random-init ensembles, two fixed inits, label-fraction
// and label-corruption sweeps, nearest-distance simulations and ensemble
// distance statistics. Everything is deterministic in ExperimentConfig.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "winfo/core.hpp"
#include "winfo/csv.hpp"
#include "winfo/manifest.hpp"
#include "winfo/mds.hpp"
#include "winfo/parallel.hpp"
#include "winfo/qmcm.hpp"
#include "winfo/snapshot.hpp"
#include "winfo/stats.hpp"
#include "winfo/toytrain.hpp"

namespace winfo::harness {

enum class Experiment { InitEnsemble, TwoScratch, LabelFraction, LabelCorruption, DistanceSim, Stats };

inline std::vector<double> default_fractions() { return {0.2, 0.4, 0.6, 0.8, 1.0}; }

inline std::vector<double> default_rates() {
    std::vector<double> r;
    for (int i = 0; i <= 10; ++i) r.push_back(i / 10.0);
    return r;
}

struct ExperimentConfig {
    Experiment experiment = Experiment::LabelFraction;
    std::size_t ensemble_size = 200;
    std::uint64_t base_seed = 1;

    // trainer
    std::vector<std::size_t> hidden{16};
    Activation activation = Activation::Tanh;
    int epochs = 48;   // epochs on the full dataset; fixes the step budget
    double learning_rate = 0.1;
    std::size_t batch_size = 16;

    // dataset
    int class_count = 10;
    int samples_per_class = 24;
    std::size_t input_dim = 20;
    double spread = 0.3;

    // estimator
    double qmcm_t = 0.3;
    std::size_t qmcm_n = 200;
    std::size_t max_resamples = 0;   // 0 selects 50 n
    double pairing_threshold = 0.95;

    std::vector<double> fractions = default_fractions();
    std::vector<double> rates = default_rates();
    std::size_t mds_dim = 3;

    // nearest-distance simulation
    std::size_t sim_size = 10000;
    std::size_t sim_dim = 100;
    std::vector<double> sim_fractions{0.1};
    std::size_t bins = kDefaultBins;

    std::size_t workers = 0;   // 0 uses every hardware thread
    bool save_snapshots = false;
    std::string output_dir = "out";

    QmcmConfig qmcm() const { return {qmcm_t, qmcm_n, max_resamples}; }

    void validate() const {
        const bool ensemble = experiment != Experiment::DistanceSim;
        if (ensemble && ensemble_size < 2) throw InvalidArgument("ensemble_size must be at least 2");
        if (experiment == Experiment::TwoScratch && ensemble_size % 2 != 0)
            throw InvalidArgument("two-scratch needs an even ensemble_size");
        if (epochs <= 0) throw InvalidArgument("epochs must be positive");
        if (!(learning_rate >= 0.0)) throw InvalidArgument("learning_rate must be non-negative");
        if (batch_size == 0) throw InvalidArgument("batch_size must be positive");
        if (class_count < 2 || samples_per_class < 10 || input_dim == 0 || !(spread > 0.0))
            throw InvalidArgument("invalid dataset recipe");
        for (auto h : hidden)
            if (h == 0) throw InvalidArgument("hidden layer sizes must be positive");
        if (!(qmcm_t > 0.0) || qmcm_n < 2) throw InvalidArgument("invalid qmcm parameters");
        if (!(pairing_threshold >= 0.0 && pairing_threshold <= 1.0))
            throw InvalidArgument("pairing_threshold must be in [0, 1]");
        for (double f : fractions)
            if (!(f > 0.0 && f <= 1.0)) throw InvalidArgument("fractions must lie in (0, 1]");
        for (double r : rates)
            if (!(r >= 0.0 && r <= 1.0)) throw InvalidArgument("rates must lie in [0, 1]");
        if (mds_dim == 0) throw InvalidArgument("mds_dim must be positive");
        if (bins < 2) throw InvalidArgument("bins must be at least 2");
    }
};

// ---------------------------------------------------------------------------
// Seeds. Member i uses base_seed + i; independent streams are split off with
// splitmix64 so initialization and data order never share a generator.

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

enum SeedStream : std::uint64_t { kInitStream = 1, kOrderStream, kDatasetStream, kCorruptionStream, kTwoInitStream };

inline std::uint64_t member_seed(const ExperimentConfig& cfg, std::size_t index) {
    return cfg.base_seed + index;
}

inline SyntheticDataset base_dataset(const ExperimentConfig& cfg, int per_class) {
    return make_blobs(cfg.class_count, per_class, cfg.input_dim, cfg.spread,
                      mix_seed(cfg.base_seed, kDatasetStream));
}

inline SyntheticDataset base_dataset(const ExperimentConfig& cfg) {
    return base_dataset(cfg, cfg.samples_per_class);
}

inline MlpSpec mlp_spec(const ExperimentConfig& cfg, std::size_t outputs, std::uint64_t init_seed) {
    MlpSpec s;
    s.layer_sizes.push_back(cfg.input_dim);
    s.layer_sizes.insert(s.layer_sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
    s.layer_sizes.push_back(outputs);
    s.activation = cfg.activation;
    s.seed = init_seed;
    return s;
}

// ---------------------------------------------------------------------------
// Ensemble training

struct MemberPlan {
    std::uint64_t init_seed;
    std::uint64_t order_seed;
    std::int64_t seed;   // recorded member seed
};

struct EnsembleRun {
    WeightEnsemble initials{Stage::Initial};
    WeightEnsemble finals{Stage::Final};
    std::vector<std::size_t> member_index;   // plan index of each kept member
    std::vector<double> accuracies;
    std::vector<std::vector<double>> loss_curves;
    std::vector<std::size_t> skipped;   // diverged plan indices
    int epochs = 0;
    std::size_t steps = 0;

    double mean_accuracy() const { return accuracies.empty() ? 0.0 : stats::mean(accuracies); }
};

inline MemberPlan random_init_plan(const ExperimentConfig& cfg, std::size_t i) {
    const auto s = member_seed(cfg, i);
    return {mix_seed(s, kInitStream), mix_seed(s, kOrderStream), static_cast<std::int64_t>(s)};
}

/// Trains one network per plan, in parallel. Diverged members are skipped;
/// more than 10% skipped is an error.
inline EnsembleRun train_ensemble(const ExperimentConfig& cfg, const SyntheticDataset& ds, int epochs,
                                  const std::vector<MemberPlan>& plans) {
    std::vector<std::optional<TrainResult>> results(plans.size());
    parallel_for(plans.size(), cfg.workers, [&](std::size_t i) {
        const auto spec = mlp_spec(cfg, static_cast<std::size_t>(ds.class_count), plans[i].init_seed);
        try {
            results[i] = train(spec, ds, TrainConfig{epochs, cfg.learning_rate, cfg.batch_size, plans[i].order_seed});
        } catch (const DivergenceError&) {
            results[i].reset();
        }
    });

    EnsembleRun run;
    run.epochs = epochs;
    run.steps = step_count(ds.size(), epochs, cfg.batch_size);
    for (std::size_t i = 0; i < plans.size(); ++i) {
        if (!results[i]) {
            run.skipped.push_back(i);
            continue;
        }
        run.initials.add(std::move(results[i]->initial), plans[i].seed);
        run.finals.add(std::move(results[i]->final), plans[i].seed);
        run.member_index.push_back(i);
        run.accuracies.push_back(results[i]->final_accuracy);
        run.loss_curves.push_back(std::move(results[i]->loss_curve));
    }
    if (run.skipped.size() * 10 > plans.size())
        throw Error(std::to_string(run.skipped.size()) + " of " + std::to_string(plans.size()) +
                    " ensemble members diverged");
    return run;
}

inline EnsembleRun train_random_ensemble(const ExperimentConfig& cfg, const SyntheticDataset& ds, int epochs) {
    std::vector<MemberPlan> plans;
    for (std::size_t i = 0; i < cfg.ensemble_size; ++i) plans.push_back(random_init_plan(cfg, i));
    return train_ensemble(cfg, ds, epochs, plans);
}

// ---------------------------------------------------------------------------
// Ensemble statistics

/// Fraction of members whose final weight is the nearest final to their own
/// initial weight. Ties go to the member's own index.
inline double check_nearest_pairing(const WeightEnsemble& initials, const WeightEnsemble& finals,
                                    std::size_t workers = 1) {
    if (initials.size() != finals.size() || initials.empty())
        throw PairingError("initial and final ensembles must be non-empty and equally sized");
    if (initials.dim() != finals.dim()) throw PairingError("initial and final dims differ");
    const std::size_t n = initials.size();
    std::vector<char> own(n, 0);
    parallel_for(n, workers, [&](std::size_t i) {
        const auto x = initials[i].values();
        const double d_own = squared_distance(x, finals[i].values());
        bool ok = true;
        for (std::size_t j = 0; j < n && ok; ++j)
            if (j != i && squared_distance(x, finals[j].values()) < d_own) ok = false;
        own[i] = ok;
    });
    std::size_t hits = 0;
    for (char c : own) hits += c != 0;
    return static_cast<double>(hits) / static_cast<double>(n);
}

struct DistanceStats {
    double mean = 0.0;
    double std = 0.0;
    double cv_percent = 0.0;
    std::size_t count = 0;
};

/// Statistics of the per-index initial -> final distances.
inline DistanceStats ensemble_distance_stats(const WeightEnsemble& initials, const WeightEnsemble& finals) {
    if (initials.size() != finals.size() || initials.empty())
        throw PairingError("initial and final ensembles must be non-empty and equally sized");
    std::vector<double> d(initials.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = euclidean_distance(initials[i], finals[i]);
    DistanceStats s;
    s.count = d.size();
    s.mean = stats::mean(d);
    s.std = stats::sample_std(d);
    s.cv_percent = s.mean == 0.0 ? 0.0 : 100.0 * s.std / s.mean;
    return s;
}

struct RadiusStats {
    double mean = 0.0;
    double std = 0.0;
    double cv = 0.0;
};

inline RadiusStats radius_stats(const std::vector<double>& radii) {
    RadiusStats r;
    r.mean = stats::mean(radii);
    r.std = stats::sample_std(radii);
    r.cv = r.mean == 0.0 ? 0.0 : r.std / r.mean;
    return r;
}

/// Distance of every member from the ensemble centroid in weight space.
inline std::vector<double> weight_space_radii(const WeightEnsemble& e) {
    std::vector<double> centroid(e.dim(), 0.0);
    for (const auto& m : e.members())
        for (std::size_t k = 0; k < e.dim(); ++k) centroid[k] += m[k];
    for (auto& c : centroid) c /= static_cast<double>(e.size());
    std::vector<double> r(e.size());
    for (std::size_t i = 0; i < e.size(); ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < e.dim(); ++k) {
            const double d = static_cast<double>(e[i][k]) - centroid[k];
            s += d * d;
        }
        r[i] = std::sqrt(s);
    }
    return r;
}

// ---------------------------------------------------------------------------
// QMCM sampling source over an ensemble that trains further members on demand

class LazyEnsembleSource {
public:
    LazyEnsembleSource(const ExperimentConfig& cfg, const SyntheticDataset& ds, int epochs,
                       const EnsembleRun& ensemble, std::size_t extra_limit)
        : cfg_(&cfg), ds_(&ds), epochs_(epochs), ensemble_(&ensemble), extra_limit_(extra_limit) {}

    std::optional<std::pair<WeightVector, WeightVector>> next() {
        if (pos_ < ensemble_->initials.size()) {
            const auto i = pos_++;
            return std::pair{ensemble_->initials[i], ensemble_->finals[i]};
        }
        while (extra_ < extra_limit_) {
            const auto plan = random_init_plan(*cfg_, cfg_->ensemble_size + extra_++);
            const auto spec = mlp_spec(*cfg_, static_cast<std::size_t>(ds_->class_count), plan.init_seed);
            try {
                auto r = train(spec, *ds_, TrainConfig{epochs_, cfg_->learning_rate, cfg_->batch_size, plan.order_seed});
                ++trained_;
                return std::pair{std::move(r.initial), std::move(r.final)};
            } catch (const DivergenceError&) {
            }
        }
        return std::nullopt;
    }

    std::size_t extra_trained() const noexcept { return trained_; }

private:
    const ExperimentConfig* cfg_;
    const SyntheticDataset* ds_;
    int epochs_;
    const EnsembleRun* ensemble_;
    std::size_t extra_limit_;
    std::size_t pos_ = 0;
    std::size_t extra_ = 0;
    std::size_t trained_ = 0;
};

// ---------------------------------------------------------------------------
// Label-fraction and label-corruption sweeps

struct ArmResult {
    double arm = 0.0;   // label fraction or corruption rate
    QmcmEstimate estimate;
    double pairing = 0.0;
    double mean_accuracy = 0.0;
    std::size_t samples = 0;   // dataset size
    int epochs = 0;
    std::size_t steps = 0;
    std::size_t members = 0;
};

/// Trains the arm's ensemble, checks the pairing precondition, then runs
/// the adaptive estimator on init -> final distances.
inline ArmResult run_arm(const ExperimentConfig& cfg, double arm, const SyntheticDataset& ds, int epochs) {
    auto ensemble = train_random_ensemble(cfg, ds, epochs);
    ArmResult r;
    r.arm = arm;
    r.samples = ds.size();
    r.epochs = epochs;
    r.steps = ensemble.steps;
    r.members = ensemble.initials.size();
    r.mean_accuracy = ensemble.mean_accuracy();
    r.pairing = check_nearest_pairing(ensemble.initials, ensemble.finals, cfg.workers);
    if (r.pairing < cfg.pairing_threshold) throw PreconditionFailed(arm, r.pairing);

    LazyEnsembleSource pairs(cfg, ds, epochs, ensemble, cfg.qmcm().resample_limit());
    PairDistanceSource<LazyEnsembleSource> source(pairs);
    r.estimate = qmcm_estimate(source, cfg.qmcm());
    return r;
}

/// Epochs giving every arm the same number of updates as `epochs` passes
/// over `full_size` samples.
inline int epochs_for_budget(const ExperimentConfig& cfg, std::size_t full_size, std::size_t arm_size) {
    const std::size_t budget = step_count(full_size, cfg.epochs, cfg.batch_size);
    const std::size_t per_epoch = (arm_size + cfg.batch_size - 1) / cfg.batch_size;
    if (budget % per_epoch != 0)
        throw InvalidArgument("step budget " + std::to_string(budget) + " is not a whole number of epochs for " +
                              std::to_string(arm_size) + " samples");
    return static_cast<int>(budget / per_epoch);
}

inline std::vector<ArmResult> run_label_fraction(const ExperimentConfig& cfg) {
    cfg.validate();
    auto fractions = cfg.fractions;
    std::sort(fractions.begin(), fractions.end());
    const auto full = base_dataset(cfg);
    std::vector<ArmResult> rows;
    for (double f : fractions) {
        const auto ds = restrict_labels(full, f);
        rows.push_back(run_arm(cfg, f, ds, epochs_for_budget(cfg, full.size(), ds.size())));
    }
    return rows;
}

inline std::vector<ArmResult> run_label_corruption(const ExperimentConfig& cfg) {
    cfg.validate();
    auto rates = cfg.rates;
    std::sort(rates.begin(), rates.end());
    const auto clean = base_dataset(cfg);
    std::vector<ArmResult> rows;
    for (double r : rates) {
        const auto ds = corrupt_labels(clean, r, mix_seed(cfg.base_seed, kCorruptionStream));
        rows.push_back(run_arm(cfg, r, ds, cfg.epochs));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Ensemble visualization

struct InitEnsembleResult {
    EnsembleRun ensemble;
    MdsEmbedding initial_embedding;
    MdsEmbedding final_embedding;
    RadiusStats initial_radius;          // in the m-dim embedding
    RadiusStats final_radius;
    RadiusStats initial_weight_radius;   // in full weight space
    RadiusStats final_weight_radius;
};

inline InitEnsembleResult run_init_ensemble(const ExperimentConfig& cfg) {
    cfg.validate();
    InitEnsembleResult r;
    r.ensemble = train_random_ensemble(cfg, base_dataset(cfg), cfg.epochs);
    const std::size_t m = std::min(cfg.mds_dim, r.ensemble.initials.size());
    r.initial_embedding = mds_embed(pairwise_distances(r.ensemble.initials, cfg.workers), m);
    r.final_embedding = mds_embed(pairwise_distances(r.ensemble.finals, cfg.workers), m);
    r.initial_radius = radius_stats(centroid_radii(r.initial_embedding.points));
    r.final_radius = radius_stats(centroid_radii(r.final_embedding.points));
    r.initial_weight_radius = radius_stats(weight_space_radii(r.ensemble.initials));
    r.final_weight_radius = radius_stats(weight_space_radii(r.ensemble.finals));
    return r;
}

struct TwoScratchResult {
    EnsembleRun ensemble;
    WeightVector init_a;
    WeightVector init_b;
    std::vector<int> group;          // 0 for init A, 1 for init B, per final
    std::vector<int> nearest_init;   // nearest init in weight space, per final
    double own_fraction = 0.0;
    MdsEmbedding embedding;          // rows: init A, init B, finals...
};

/// Half the ensemble starts from init A, half from init B; members differ
/// only in data order.
inline TwoScratchResult run_two_scratch(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto ds = base_dataset(cfg);
    const std::uint64_t seed_a = mix_seed(cfg.base_seed, kTwoInitStream);
    const std::uint64_t seed_b = mix_seed(cfg.base_seed + 1, kTwoInitStream);
    const std::size_t half = cfg.ensemble_size / 2;

    std::vector<MemberPlan> plans;
    for (std::size_t i = 0; i < cfg.ensemble_size; ++i) {
        const auto s = member_seed(cfg, i);
        plans.push_back({i < half ? seed_a : seed_b, mix_seed(s, kOrderStream), static_cast<std::int64_t>(s)});
    }

    TwoScratchResult r;
    r.ensemble = train_ensemble(cfg, ds, cfg.epochs, plans);
    const auto outputs = static_cast<std::size_t>(ds.class_count);
    r.init_a = Mlp(mlp_spec(cfg, outputs, seed_a)).flatten();
    r.init_b = Mlp(mlp_spec(cfg, outputs, seed_b)).flatten();

    std::size_t own = 0;
    for (std::size_t k = 0; k < r.ensemble.finals.size(); ++k) {
        const int g = r.ensemble.member_index[k] < half ? 0 : 1;
        const double da = euclidean_distance(r.ensemble.finals[k], r.init_a);
        const double db = euclidean_distance(r.ensemble.finals[k], r.init_b);
        // ties go to the member's own init
        const int nearest = da < db ? 0 : db < da ? 1 : g;
        r.group.push_back(g);
        r.nearest_init.push_back(nearest);
        own += nearest == g;
    }
    r.own_fraction = static_cast<double>(own) / static_cast<double>(r.ensemble.finals.size());

    WeightEnsemble joint(Stage::Final);
    joint.add(r.init_a, 0);
    joint.add(r.init_b, 1);
    for (std::size_t k = 0; k < r.ensemble.finals.size(); ++k)
        joint.add(r.ensemble.finals[k], r.ensemble.finals.seeds()[k]);
    r.embedding = mds_embed(pairwise_distances(joint, cfg.workers), std::min(cfg.mds_dim, joint.size()));
    return r;
}

// ---------------------------------------------------------------------------
// Nearest-distance simulations

struct SimRow {
    double fraction = 0.0;
    DistanceSimulation sim;
};

inline std::vector<SimRow> run_distance_sim(const ExperimentConfig& cfg) {
    std::vector<SimRow> rows;
    auto fractions = cfg.sim_fractions;
    std::sort(fractions.begin(), fractions.end());
    for (double f : fractions)
        rows.push_back({f, simulate_distance_distribution(cfg.sim_size, cfg.sim_dim, f, cfg.base_seed, cfg.bins,
                                                          cfg.workers)});
    return rows;
}

// ---------------------------------------------------------------------------
// CSV and manifest output

using csv::format_double;

inline csv::Writer arm_table(const std::string& arm_column, const std::vector<ArmResult>& rows) {
    csv::Writer w({arm_column, "d_hat", "achieved_cv", "resample_count", "converged", "pairing", "accuracy",
                   "epochs", "steps"});
    for (const auto& r : rows)
        w.row({format_double(r.arm), format_double(r.estimate.d_hat), format_double(r.estimate.achieved_cv),
               std::to_string(r.estimate.resample_count), r.estimate.converged ? "1" : "0",
               format_double(r.pairing), format_double(r.mean_accuracy), std::to_string(r.epochs),
               std::to_string(r.steps)});
    return w;
}

inline csv::Writer embedding_table(const MdsEmbedding& e, const std::vector<std::string>& stages,
                                   const std::vector<std::int64_t>& indices) {
    std::vector<std::string> header{"index", "stage"};
    for (std::size_t k = 1; k <= e.m; ++k) header.push_back("x" + std::to_string(k));
    csv::Writer w(header);
    for (std::size_t i = 0; i < e.n; ++i) {
        std::vector<std::string> row{std::to_string(indices[i]), stages[i]};
        for (std::size_t k = 0; k < e.m; ++k)
            row.push_back(format_double(e.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k))));
        w.row(row);
    }
    return w;
}

inline csv::Writer histogram_table(const DistanceSimulation& sim) {
    csv::Writer w({"bin_left", "bin_right", "count", "p", "q"});
    const auto& h = sim.histogram;
    for (std::size_t i = 0; i < h.bins(); ++i)
        w.row({format_double(h.edges[i]), format_double(h.edges[i + 1]), std::to_string(h.counts[i]),
               format_double(h.p(i)), format_double(sim.normal_mass[i])});
    return w;
}

inline csv::Writer kl_table(const std::vector<SimRow>& rows) {
    csv::Writer w({"fraction", "kl"});
    for (const auto& r : rows) w.row({format_double(r.fraction), format_double(r.sim.kl_to_normal)});
    return w;
}

inline csv::Writer loss_table(const std::vector<double>& curve) {
    csv::Writer w({"step", "loss"});
    for (std::size_t s = 0; s < curve.size(); ++s) w.row({std::to_string(s), format_double(curve[s])});
    return w;
}

inline csv::Writer stats_table(const DistanceStats& s, double pairing) {
    csv::Writer w({"count", "mean", "std", "cv_percent", "pairing"});
    w.row({std::to_string(s.count), format_double(s.mean), format_double(s.std), format_double(s.cv_percent),
           format_double(pairing)});
    return w;
}

/// Writes snapshots, loss curves and one RunManifest per member under dir.
inline void save_ensemble_artifacts(const ExperimentConfig& cfg, const EnsembleRun& run,
                                    const SyntheticDataset& ds, double label_fraction, double corruption_rate,
                                    const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (std::size_t k = 0; k < run.initials.size(); ++k) {
        const std::string id = "member_" + std::to_string(run.member_index[k]);
        RunManifest m;
        m.run_id = id;
        m.seed = run.initials.seeds()[k];
        m.label_fraction = label_fraction;
        m.corruption_rate = corruption_rate;
        m.epochs = run.epochs;
        m.learning_rate = cfg.learning_rate;
        m.batch_size = static_cast<int>(cfg.batch_size);
        m.dataset_recipe = {ds.class_count, static_cast<int>(ds.size()) / ds.class_count,
                            static_cast<int>(ds.dim)};
        m.initial_snapshot = id + "_initial.wodo";
        m.final_snapshot = id + "_final.wodo";
        save_snapshot(run.initials[k], dir / m.initial_snapshot);
        save_snapshot(run.finals[k], dir / m.final_snapshot);
        loss_table(run.loss_curves[k]).save(dir / (id + "_loss.csv"));
        // a zero learning rate is not a valid training manifest
        if (m.learning_rate > 0.0) save_manifest(m, dir / (id + ".json"));
    }
}

// ---------------------------------------------------------------------------
// Config (de)serialization. Every key is optional; unknown keys are rejected.

inline const char* to_string(Experiment e) {
    switch (e) {
        case Experiment::InitEnsemble: return "init-ensemble";
        case Experiment::TwoScratch: return "two-scratch";
        case Experiment::LabelFraction: return "label-fraction";
        case Experiment::LabelCorruption: return "label-corruption";
        case Experiment::DistanceSim: return "sim-dist";
        default: return "stats";
    }
}

inline Experiment experiment_from_string(const std::string& s) {
    for (auto e : {Experiment::InitEnsemble, Experiment::TwoScratch, Experiment::LabelFraction,
                   Experiment::LabelCorruption, Experiment::DistanceSim, Experiment::Stats})
        if (s == to_string(e)) return e;
    throw InvalidArgument("unknown experiment '" + s + "'");
}

inline nlohmann::json config_to_json(const ExperimentConfig& c) {
    return {{"experiment", to_string(c.experiment)},
            {"ensemble_size", c.ensemble_size},
            {"base_seed", c.base_seed},
            {"hidden", c.hidden},
            {"activation", c.activation == Activation::ReLU ? "relu" : "tanh"},
            {"epochs", c.epochs},
            {"learning_rate", c.learning_rate},
            {"batch_size", c.batch_size},
            {"class_count", c.class_count},
            {"samples_per_class", c.samples_per_class},
            {"input_dim", c.input_dim},
            {"spread", c.spread},
            {"qmcm_t", c.qmcm_t},
            {"qmcm_n", c.qmcm_n},
            {"max_resamples", c.max_resamples},
            {"pairing_threshold", c.pairing_threshold},
            {"fractions", c.fractions},
            {"rates", c.rates},
            {"mds_dim", c.mds_dim},
            {"sim_size", c.sim_size},
            {"sim_dim", c.sim_dim},
            {"sim_fractions", c.sim_fractions},
            {"bins", c.bins},
            {"save_snapshots", c.save_snapshots}};
}

inline void apply_overrides(ExperimentConfig& c, const nlohmann::json& j) {
    if (!j.is_object()) throw InvalidArgument("config must be a JSON object");
    for (const auto& [key, v] : j.items()) {
        try {
            if (key == "experiment") c.experiment = experiment_from_string(v.get<std::string>());
            else if (key == "ensemble_size") v.get_to(c.ensemble_size);
            else if (key == "base_seed") v.get_to(c.base_seed);
            else if (key == "hidden") v.get_to(c.hidden);
            else if (key == "activation") {
                const auto a = v.get<std::string>();
                if (a == "relu") c.activation = Activation::ReLU;
                else if (a == "tanh") c.activation = Activation::Tanh;
                else throw InvalidArgument("activation must be relu or tanh");
            }
            else if (key == "epochs") v.get_to(c.epochs);
            else if (key == "learning_rate") v.get_to(c.learning_rate);
            else if (key == "batch_size") v.get_to(c.batch_size);
            else if (key == "class_count") v.get_to(c.class_count);
            else if (key == "samples_per_class") v.get_to(c.samples_per_class);
            else if (key == "input_dim") v.get_to(c.input_dim);
            else if (key == "spread") v.get_to(c.spread);
            else if (key == "qmcm_t") v.get_to(c.qmcm_t);
            else if (key == "qmcm_n") v.get_to(c.qmcm_n);
            else if (key == "max_resamples") v.get_to(c.max_resamples);
            else if (key == "pairing_threshold") v.get_to(c.pairing_threshold);
            else if (key == "fractions") v.get_to(c.fractions);
            else if (key == "rates") v.get_to(c.rates);
            else if (key == "mds_dim") v.get_to(c.mds_dim);
            else if (key == "sim_size") v.get_to(c.sim_size);
            else if (key == "sim_dim") v.get_to(c.sim_dim);
            else if (key == "sim_fractions") v.get_to(c.sim_fractions);
            else if (key == "bins") v.get_to(c.bins);
            else if (key == "save_snapshots") v.get_to(c.save_snapshots);
            else if (key == "workers") v.get_to(c.workers);
            else if (key == "output_dir") v.get_to(c.output_dir);
            else throw InvalidArgument("unknown config key '" + key + "'");
        } catch (const nlohmann::json::exception& e) {
            throw InvalidArgument("config key '" + key + "': " + e.what());
        }
    }
}

inline nlohmann::json arm_manifest(const ExperimentConfig& cfg, const std::string& arm_name,
                                   const std::vector<ArmResult>& rows) {
    nlohmann::json arms = nlohmann::json::array();
    for (const auto& r : rows)
        arms.push_back({{arm_name, r.arm},
                        {"pairing", r.pairing},
                        {"pairing_passed", r.pairing >= cfg.pairing_threshold},
                        {"members", r.members},
                        {"samples", r.samples},
                        {"epochs", r.epochs},
                        {"steps", r.steps},
                        {"d_hat", r.estimate.d_hat},
                        {"achieved_cv", r.estimate.achieved_cv},
                        {"resample_count", r.estimate.resample_count},
                        {"converged", r.estimate.converged},
                        {"mean_accuracy", r.mean_accuracy}});
    return {{"config", config_to_json(cfg)}, {"arms", arms}};
}

}  // namespace winfo::harness
