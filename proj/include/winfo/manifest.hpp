#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include "json.hpp"
#include "winfo/snapshot.hpp"

namespace winfo {

struct DatasetRecipe {
    int class_count = 10;
    int samples_per_class = 24;
    int input_dim = 20;

    friend bool operator==(const DatasetRecipe&, const DatasetRecipe&) = default;
};

/// Describes one training process and binds its initial/final snapshots.
struct RunManifest {
    std::string run_id;
    std::int64_t seed = 0;
    double label_fraction = 1.0;
    double corruption_rate = 0.0;
    int epochs = 1;
    double learning_rate = 0.1;
    int batch_size = 16;
    DatasetRecipe dataset_recipe;
    std::string initial_snapshot;
    std::string final_snapshot;

    friend bool operator==(const RunManifest&, const RunManifest&) = default;

    void validate() const {
        if (!(label_fraction > 0.0 && label_fraction <= 1.0))
            throw ManifestError("label_fraction must be in (0, 1]");
        if (!(corruption_rate >= 0.0 && corruption_rate <= 1.0))
            throw ManifestError("corruption_rate must be in [0, 1]");
        if (epochs <= 0) throw ManifestError("epochs must be positive");
        if (!(learning_rate > 0.0)) throw ManifestError("learning_rate must be positive");
        if (batch_size <= 0) throw ManifestError("batch_size must be positive");
        if (dataset_recipe.class_count <= 0 || dataset_recipe.samples_per_class <= 0 ||
            dataset_recipe.input_dim <= 0)
            throw ManifestError("dataset_recipe entries must be positive");
    }

    /// Loads whichever referenced snapshots exist (paths relative to base)
    /// and checks they agree on dim.
    void validate_snapshots(const std::filesystem::path& base = {}) const {
        std::optional<std::size_t> dim;
        for (const auto& rel : {initial_snapshot, final_snapshot}) {
            if (rel.empty()) continue;
            const auto path = base / rel;
            if (!std::filesystem::exists(path)) continue;
            const auto w = load_snapshot(path, dim);
            dim = w.dim();
        }
    }
};

inline void to_json(nlohmann::json& j, const DatasetRecipe& r) {
    j = nlohmann::json{{"class_count", r.class_count},
                       {"samples_per_class", r.samples_per_class},
                       {"input_dim", r.input_dim}};
}

inline void from_json(const nlohmann::json& j, DatasetRecipe& r) {
    j.at("class_count").get_to(r.class_count);
    j.at("samples_per_class").get_to(r.samples_per_class);
    j.at("input_dim").get_to(r.input_dim);
}

inline void to_json(nlohmann::json& j, const RunManifest& m) {
    j = nlohmann::json{{"run_id", m.run_id},
                       {"seed", m.seed},
                       {"label_fraction", m.label_fraction},
                       {"corruption_rate", m.corruption_rate},
                       {"epochs", m.epochs},
                       {"learning_rate", m.learning_rate},
                       {"batch_size", m.batch_size},
                       {"dataset_recipe", m.dataset_recipe},
                       {"initial_snapshot", m.initial_snapshot},
                       {"final_snapshot", m.final_snapshot}};
}

inline void from_json(const nlohmann::json& j, RunManifest& m) {
    j.at("run_id").get_to(m.run_id);
    j.at("seed").get_to(m.seed);
    j.at("label_fraction").get_to(m.label_fraction);
    j.at("corruption_rate").get_to(m.corruption_rate);
    j.at("epochs").get_to(m.epochs);
    j.at("learning_rate").get_to(m.learning_rate);
    j.at("batch_size").get_to(m.batch_size);
    j.at("dataset_recipe").get_to(m.dataset_recipe);
    j.at("initial_snapshot").get_to(m.initial_snapshot);
    j.at("final_snapshot").get_to(m.final_snapshot);
}

inline void save_manifest(const RunManifest& m, const std::filesystem::path& path) {
    m.validate();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << nlohmann::json(m).dump(2) << '\n';
}

inline RunManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    RunManifest m;
    try {
        nlohmann::json::parse(in).get_to(m);
    } catch (const nlohmann::json::exception& e) {
        throw ManifestError(path.string() + ": " + e.what());
    }
    m.validate();
    m.validate_snapshots(path.parent_path());
    return m;
}

}  // namespace winfo
