// Command-line front end for the weight-space information experiments.
//
// Exit codes: 0 success, 2 precondition failure, 1 any other error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "winfo/harness.hpp"

namespace fs = std::filesystem;
using namespace winfo;
using namespace winfo::harness;

namespace {

struct CommonOptions {
    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> ensemble_size;
    std::optional<std::size_t> workers;
    bool save_snapshots = false;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--config", o.config_path, "JSON file with config overrides")->check(CLI::ExistingFile);
    cmd->add_option("--out-dir", o.out_dir, "Output directory")->capture_default_str();
    cmd->add_option("--seed", o.seed, "Base seed");
    cmd->add_option("--ensemble-size", o.ensemble_size, "Networks per ensemble");
    cmd->add_option("--workers", o.workers, "Worker threads (0 = all cores)");
}

ExperimentConfig load_config(Experiment e, const CommonOptions& o) {
    ExperimentConfig cfg;
    cfg.experiment = e;
    if (!o.config_path.empty()) {
        std::ifstream in(o.config_path);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& ex) {
            throw InvalidArgument(o.config_path + ": " + ex.what());
        }
        // a manifest written by a previous run carries its config under "config"
        if (j.is_object() && j.contains("config") && j["config"].is_object()) j = j["config"];
        if (j.is_object()) j.erase("experiment");
        apply_overrides(cfg, j);
    }
    if (o.seed) cfg.base_seed = *o.seed;
    if (o.ensemble_size) cfg.ensemble_size = *o.ensemble_size;
    if (o.workers) cfg.workers = *o.workers;
    if (o.save_snapshots) cfg.save_snapshots = true;
    cfg.output_dir = o.out_dir;
    cfg.validate();
    return cfg;
}

fs::path prepare_out(const ExperimentConfig& cfg) {
    fs::path dir(cfg.output_dir);
    fs::create_directories(dir);
    return dir;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
}

std::string fraction_tag(double f) { return csv::format_shortest(f); }

int cmd_sim_dist(const ExperimentConfig& cfg) {
    const auto dir = prepare_out(cfg);
    const auto rows = run_distance_sim(cfg);
    for (const auto& r : rows) histogram_table(r.sim).save(dir / ("histogram_" + fraction_tag(r.fraction) + ".csv"));
    kl_table(rows).save(dir / "kl_sweep.csv");

    nlohmann::json summary = nlohmann::json::array();
    for (const auto& r : rows)
        summary.push_back({{"fraction", r.fraction},
                           {"queries", r.sim.report.distances.size()},
                           {"mean", r.sim.report.mean},
                           {"std", r.sim.report.std},
                           {"kl", r.sim.kl_to_normal}});
    write_json(dir / "manifest.json", {{"config", config_to_json(cfg)}, {"fractions", summary}});
    for (const auto& r : rows)
        std::printf("fraction %-6s mean %.6f std %.6f kl %.6f\n", csv::format_shortest(r.fraction).c_str(),
                    r.sim.report.mean, r.sim.report.std, r.sim.kl_to_normal);
    return 0;
}

int cmd_mds(const std::vector<std::string>& inputs, std::size_t m, const std::string& stage,
            const std::string& out) {
    WeightEnsemble e;
    for (std::size_t i = 0; i < inputs.size(); ++i)
        e.add(load_snapshot(inputs[i], e.empty() ? std::nullopt : std::optional<std::size_t>(e.dim())),
              static_cast<std::int64_t>(i));
    const auto emb = mds_embed(pairwise_distances(e), m);
    std::vector<std::int64_t> idx(emb.n);
    for (std::size_t i = 0; i < emb.n; ++i) idx[i] = static_cast<std::int64_t>(i);
    const auto table = embedding_table(emb, std::vector<std::string>(emb.n, stage), idx);
    if (out.empty() || out == "-") {
        std::cout << table.str();
    } else {
        if (fs::path(out).has_parent_path()) fs::create_directories(fs::path(out).parent_path());
        table.save(out);
    }
    return 0;
}

int cmd_init_ensemble(const ExperimentConfig& cfg) {
    const auto dir = prepare_out(cfg);
    const auto r = run_init_ensemble(cfg);

    std::vector<std::string> header{"index", "stage"};
    for (std::size_t k = 1; k <= r.initial_embedding.m; ++k) header.push_back("x" + std::to_string(k));
    csv::Writer emb(header);
    for (const auto* e : {&r.initial_embedding, &r.final_embedding}) {
        const std::string stage = e == &r.initial_embedding ? "initial" : "final";
        for (std::size_t i = 0; i < e->n; ++i) {
            std::vector<std::string> row{std::to_string(r.ensemble.member_index[i]), stage};
            for (std::size_t k = 0; k < e->m; ++k)
                row.push_back(csv::format_double(e->points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k))));
            emb.row(row);
        }
    }
    emb.save(dir / "embedding.csv");

    csv::Writer radius({"stage", "space", "mean_radius", "std_radius", "cv"});
    auto put = [&](const char* stage, const char* space, const RadiusStats& s) {
        radius.row({stage, space, csv::format_double(s.mean), csv::format_double(s.std), csv::format_double(s.cv)});
    };
    put("initial", "embedding", r.initial_radius);
    put("final", "embedding", r.final_radius);
    put("initial", "weights", r.initial_weight_radius);
    put("final", "weights", r.final_weight_radius);
    radius.save(dir / "radius.csv");

    if (cfg.save_snapshots) save_ensemble_artifacts(cfg, r.ensemble, base_dataset(cfg), 1.0, 0.0, dir / "runs");
    write_json(dir / "manifest.json", {{"config", config_to_json(cfg)},
                                       {"members", r.ensemble.initials.size()},
                                       {"skipped", r.ensemble.skipped},
                                       {"mean_accuracy", r.ensemble.mean_accuracy()}});
    std::printf("initial radius %.6f (cv %.4f), final radius %.6f (cv %.4f)\n", r.initial_radius.mean,
                r.initial_radius.cv, r.final_radius.mean, r.final_radius.cv);
    return 0;
}

int cmd_two_scratch(const ExperimentConfig& cfg) {
    const auto dir = prepare_out(cfg);
    const auto r = run_two_scratch(cfg);

    std::vector<std::string> stages{"initial", "initial"};
    std::vector<std::int64_t> idx{0, 1};
    for (std::size_t k = 0; k < r.ensemble.finals.size(); ++k) {
        stages.push_back("final");
        idx.push_back(static_cast<std::int64_t>(r.ensemble.member_index[k]));
    }
    embedding_table(r.embedding, stages, idx).save(dir / "embedding.csv");

    csv::Writer assign({"index", "group", "nearest_init", "own"});
    for (std::size_t k = 0; k < r.group.size(); ++k)
        assign.row({std::to_string(r.ensemble.member_index[k]), std::to_string(r.group[k]),
                    std::to_string(r.nearest_init[k]), r.group[k] == r.nearest_init[k] ? "1" : "0"});
    assign.save(dir / "assignment.csv");

    if (cfg.save_snapshots) save_ensemble_artifacts(cfg, r.ensemble, base_dataset(cfg), 1.0, 0.0, dir / "runs");
    write_json(dir / "manifest.json", {{"config", config_to_json(cfg)},
                                       {"members", r.ensemble.finals.size()},
                                       {"skipped", r.ensemble.skipped},
                                       {"own_fraction", r.own_fraction}});
    std::printf("finals nearest to their own init: %.4f\n", r.own_fraction);
    return 0;
}

int cmd_sweep(const ExperimentConfig& cfg, bool corruption) {
    const auto dir = prepare_out(cfg);
    const std::string arm = corruption ? "rate" : "fraction";
    const auto rows = corruption ? run_label_corruption(cfg) : run_label_fraction(cfg);
    arm_table(arm, rows).save(dir / (corruption ? "label_corruption.csv" : "label_fraction.csv"));
    write_json(dir / "manifest.json", arm_manifest(cfg, arm, rows));
    for (const auto& r : rows)
        std::printf("%s %-4s d_hat %.6f cv %.4f pairing %.3f acc %.3f\n", arm.c_str(),
                    csv::format_shortest(r.arm).c_str(), r.estimate.d_hat, r.estimate.achieved_cv, r.pairing,
                    r.mean_accuracy);
    return 0;
}

int cmd_stats(const ExperimentConfig& cfg, const std::vector<std::string>& initial_files,
              const std::vector<std::string>& final_files) {
    const auto dir = prepare_out(cfg);
    WeightEnsemble initials(Stage::Initial), finals(Stage::Final);
    if (!initial_files.empty() || !final_files.empty()) {
        if (initial_files.size() != final_files.size())
            throw PairingError("--initial and --final need the same number of snapshots");
        for (std::size_t i = 0; i < initial_files.size(); ++i) {
            auto dim = initials.empty() ? std::nullopt : std::optional<std::size_t>(initials.dim());
            initials.add(load_snapshot(initial_files[i], dim), static_cast<std::int64_t>(i));
            finals.add(load_snapshot(final_files[i], initials.dim()), static_cast<std::int64_t>(i));
        }
    } else {
        auto run = train_random_ensemble(cfg, base_dataset(cfg), cfg.epochs);
        if (cfg.save_snapshots) save_ensemble_artifacts(cfg, run, base_dataset(cfg), 1.0, 0.0, dir / "runs");
        initials = std::move(run.initials);
        finals = std::move(run.finals);
    }
    const auto s = ensemble_distance_stats(initials, finals);
    const double pairing = check_nearest_pairing(initials, finals, cfg.workers);
    stats_table(s, pairing).save(dir / "stats.csv");
    write_json(dir / "manifest.json", {{"config", config_to_json(cfg)}, {"members", s.count}});
    std::printf("mean %.6f std %.6f cv %.4f%% pairing %.4f\n", s.mean, s.std, s.cv_percent, pairing);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Weight-space information estimates for neural network training"};
    app.require_subcommand(1);

    // sim-dist
    CommonOptions sim_opts;
    std::size_t sim_size = 10000, sim_dim = 100, bins = kDefaultBins;
    std::vector<double> sim_fractions{0.1};
    auto* sim = app.add_subcommand("sim-dist", "Nearest-distance distribution of random unit vectors");
    add_common(sim, sim_opts);
    sim->add_option("--size", sim_size, "Population size")->capture_default_str();
    sim->add_option("--dim", sim_dim, "Vector dimension")->capture_default_str();
    sim->add_option("--fraction", sim_fractions, "Subset fraction(s)")->capture_default_str();
    sim->add_option("--bins", bins, "Histogram bins")->capture_default_str();

    // mds
    std::vector<std::string> mds_in;
    std::size_t mds_m = 3;
    std::string mds_out, mds_stage = "initial";
    auto* mds = app.add_subcommand("mds", "Classical MDS embedding of weight snapshots");
    mds->add_option("--in", mds_in, "Snapshot files")->required()->check(CLI::ExistingFile);
    mds->add_option("--m", mds_m, "Embedding dimension")->capture_default_str();
    mds->add_option("--out", mds_out, "Output CSV (stdout if omitted)");
    mds->add_option("--stage", mds_stage, "Stage label written to every row")->capture_default_str();

    // ensemble experiments
    CommonOptions init_opts, two_opts, frac_opts, corr_opts, stats_opts;
    auto* init = app.add_subcommand("init-ensemble", "MDS of random-init and trained ensembles");
    auto* two = app.add_subcommand("two-scratch", "Ensembles trained from two fixed initializations");
    auto* frac = app.add_subcommand("label-fraction", "Estimate versus fraction of label classes");
    auto* corr = app.add_subcommand("label-corruption", "Estimate versus label corruption rate");
    auto* st = app.add_subcommand("stats", "Initial-to-final distance statistics");
    for (auto [cmd, opts] : {std::pair{init, &init_opts}, std::pair{two, &two_opts}, std::pair{frac, &frac_opts},
                             std::pair{corr, &corr_opts}, std::pair{st, &stats_opts}}) {
        add_common(cmd, *opts);
    }
    for (auto* cmd : {init, two, st})
        cmd->add_flag("--save-snapshots", (cmd == init ? init_opts : cmd == two ? two_opts : stats_opts).save_snapshots,
                      "Write per-member snapshots and manifests");
    std::vector<std::string> stats_initial, stats_final;
    st->add_option("--initial", stats_initial, "Initial snapshots")->check(CLI::ExistingFile);
    st->add_option("--final", stats_final, "Final snapshots")->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : 1;
    }

    try {
        if (sim->parsed()) {
            auto cfg = load_config(Experiment::DistanceSim, sim_opts);
            if (sim->count("--size")) cfg.sim_size = sim_size;
            if (sim->count("--dim")) cfg.sim_dim = sim_dim;
            if (sim->count("--fraction")) cfg.sim_fractions = sim_fractions;
            if (sim->count("--bins")) cfg.bins = bins;
            cfg.validate();
            return cmd_sim_dist(cfg);
        }
        if (mds->parsed()) return cmd_mds(mds_in, mds_m, mds_stage, mds_out);
        if (init->parsed()) return cmd_init_ensemble(load_config(Experiment::InitEnsemble, init_opts));
        if (two->parsed()) return cmd_two_scratch(load_config(Experiment::TwoScratch, two_opts));
        if (frac->parsed()) return cmd_sweep(load_config(Experiment::LabelFraction, frac_opts), false);
        if (corr->parsed()) return cmd_sweep(load_config(Experiment::LabelCorruption, corr_opts), true);
        if (st->parsed()) return cmd_stats(load_config(Experiment::Stats, stats_opts), stats_initial, stats_final);
    } catch (const PreconditionFailed& e) {
        std::fprintf(stderr, "precondition failed: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
