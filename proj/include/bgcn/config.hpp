#pragma once

#include "bgcn/errors.hpp"
#include "bgcn/gcn.hpp"
#include "bgcn/graph.hpp"
#include "bgcn/sampler.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace bgcn {

inline constexpr const char* kVersion = "banditgcn 0.1.0";

// Flat key-value config with [graph] [model] [sampler] [run] sections and
// '#' comments. Unknown sections or keys are errors.
struct ExperimentConfig {
    // [graph]
    std::string edges_path;
    std::string features_path;
    std::string labels_path;
    std::string train_path;
    std::string val_path;
    std::string test_path;
    Weighting weighting = Weighting::symmetric_norm;
    bool add_self_loops = false;
    // synthetic generator keys (synth-graph verb)
    std::size_t synth_nodes = 2000;
    std::size_t synth_communities = 4;
    double synth_p_in = 0.02;
    double synth_p_out = 0.002;
    std::size_t synth_feature_dim = 16;
    double synth_center_scale = 3.0;
    double synth_feature_noise = 1.0;
    double synth_train_fraction = 0.6;
    double synth_val_fraction = 0.2;

    // [model]
    std::string model = "gcn";
    std::size_t depth = 2;
    std::size_t hidden_dim = 16;
    Activation activation = Activation::relu;
    std::string lr_schedule = "constant"; // constant | inverse_t
    double lr = 0.001;

    // [sampler]
    SamplerConfig sampler;
    bool estimator_given = false;
    double bs_eta = 0.01; // BanditSampler temperature in A/B experiments

    // [run]
    std::uint64_t seed = 1;
    std::size_t trials = 10;
    std::size_t epochs = 100;
    std::size_t batch_size = 64;
    std::size_t steps = 400;
    double corrupt_fraction = 0.05;
    double corrupt_scale = 40.0;
    std::size_t probe_roots = 8;
    // regret experiment
    std::string env = "log_decay"; // log_decay | piecewise_constant | sinusoidal
    std::size_t arms = 5;
    std::size_t plays = 1;
    std::vector<std::size_t> horizons = {1000, 3000, 10000, 30000, 100000};
    std::size_t env_seeds = 10;
    double env_cap = 1.0;
    double env_c_v_bar = 1.0;
    double env_budget = 1.0;
    std::size_t env_changes = 2;
    double env_gap = 0.5;
    double env_noise = 0.0;
    std::string policy = "rexp3_auto"; // rexp3_auto | rexp3_manual | exp3m_no_restart | uniform_random

    LrSchedule schedule() const;
};

ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

// Resolved-config echo used as the manifest body: stable key order, no
// volatile fields, so identical configs render identically.
std::string render_manifest(const ExperimentConfig& cfg, const std::string& experiment,
                            std::uint64_t seed);

} // namespace bgcn
