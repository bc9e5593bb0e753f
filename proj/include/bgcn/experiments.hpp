#pragma once

#include "bgcn/config.hpp"
#include "bgcn/gcn.hpp"
#include "bgcn/graph.hpp"
#include "bgcn/regret.hpp"
#include "bgcn/sampler.hpp"
#include "bgcn/sbm.hpp"

#include <functional>
#include <string>
#include <vector>

namespace bgcn {

struct Dataset {
    SparseGraph graph;
    std::vector<int> labels;
    std::vector<NodeId> train_nodes;
    std::vector<NodeId> val_nodes;
    std::vector<NodeId> test_nodes;
};

Dataset load_dataset(const ExperimentConfig& cfg);
Dataset dataset_from_sbm(const SbmDataset& sbm);

struct ModelOptions {
    std::size_t depth = 2;
    std::size_t hidden_dim = 16;
    Activation activation = Activation::relu;
    LrSchedule lr = LrSchedule::constant(0.001);
};

// The mini-batch training loop: per step one batch of labeled roots is read,
// a sampling plan built, the model stepped by SGD on the sampled loss and
// the sampler given its reward feedback. Batches cycle over shuffled epochs.
class TrainLoop {
  public:
    TrainLoop(const Dataset& data, const SamplerConfig& sampler, const ModelOptions& model,
              std::size_t batch_size, std::uint64_t seed);

    using StepObserver = std::function<void(const SamplingPlan&, const ForwardTrace&)>;

    SgdStepInfo step(const StepObserver& observer = {});

    // Fraction of `nodes` whose argmax class from an exact full forward pass
    // matches their label.
    double accuracy(const std::vector<NodeId>& nodes) const;

    const GcnState& model() const { return model_; }
    GcnState& model() { return model_; }
    const AssumptionMonitor& monitor() const { return monitor_; }
    AssumptionMonitor& monitor() { return monitor_; }
    PolicyTable& policies() { return policies_; }
    std::size_t steps_per_epoch() const;

    void collect_rewards(std::vector<RewardRecord>* sink) { reward_sink_ = sink; }

  private:
    std::vector<NodeId> next_batch();

    const Dataset& data_;
    GcnState model_;
    PolicyTable policies_;
    AssumptionMonitor monitor_;
    std::uint64_t seed_;
    std::size_t batch_size_;
    std::vector<NodeId> epoch_order_;
    std::size_t epoch_ = 0;
    std::size_t cursor_ = 0;
    std::vector<RewardRecord>* reward_sink_ = nullptr;
};

// Appends rows to <dir>/<experiment>_results.csv after writing the manifest
// sidecar; all numeric formatting is deterministic.
class ResultWriter {
  public:
    ResultWriter(const std::string& out_dir, const std::string& experiment,
                 const ExperimentConfig& cfg, std::uint64_t seed);
    ~ResultWriter();

    void row(std::uint64_t seed, std::size_t step, const std::string& metric, double value);
    const std::string& results_path() const { return results_path_; }

  private:
    std::string experiment_;
    std::string results_path_;
    std::string buffer_;
};

struct ApproxErrorTrial {
    std::vector<double> dist_bs;
    std::vector<double> dist_our;
    double delta_dist = 0.0; // sum(dist_our) - sum(dist_bs)
};

// Per-step approximation error of both samplers against the exact layer-1
// aggregate, under a shared full-gradient weight trajectory.
ApproxErrorTrial approx_error_trial(const Dataset& data, const ExperimentConfig& cfg,
                                    std::uint64_t trial_seed);

struct ApproxErrorSummary {
    std::vector<double> trial_deltas;
    double mean_delta = 0.0;
    double std_delta = 0.0;
};

ApproxErrorSummary run_approx_error(const ExperimentConfig& cfg, const std::string& out_dir,
                                    std::uint64_t seed);

struct NormBiasRun {
    std::vector<double> per_epoch_counts; // corrupted-node inclusions per epoch
    double mean_count = 0.0;
    double test_accuracy = 0.0;
};

NormBiasRun norm_bias_single_run(const Dataset& data, const ExperimentConfig& cfg,
                                 SamplerKind sampler, const std::vector<NodeId>& marked,
                                 bool corrupted, std::uint64_t trial_seed);

struct NormBiasSummary {
    // Indexed by trial: per-epoch mean counts for each (sampler, variant).
    std::vector<double> bs_normal, bs_scaled, thanos_normal, thanos_scaled;
};

NormBiasSummary run_norm_bias(const ExperimentConfig& cfg, const std::string& out_dir,
                              std::uint64_t seed);

struct TrainAccuracySummary {
    std::vector<double> best_val_test_acc; // per trial
};

TrainAccuracySummary run_train_accuracy(const ExperimentConfig& cfg, const std::string& out_dir,
                                        std::uint64_t seed);

struct BudgetMonitorResult {
    std::vector<double> variation;   // sup over probe pairs, per step
    std::vector<double> running_sum;
    std::vector<double> bound;       // C_v_bar ln t with monitored constants
    bool all_satisfied = true;
    // Reward-bound check over the same run: every sampler reward against
    // 3 * (running max ||z||)^2.
    double max_abs_reward_seen = 0.0;
    double final_reward_ceiling = 0.0;
    std::size_t reward_bound_violations = 0;
};

BudgetMonitorResult budget_monitor_trial(const Dataset& data, const ExperimentConfig& cfg,
                                         std::uint64_t seed);

BudgetMonitorResult run_budget_monitor(const ExperimentConfig& cfg, const std::string& out_dir,
                                       std::uint64_t seed);

struct RegretSummary {
    std::vector<std::pair<double, double>> mean_regret_by_horizon;
    ScalingFit fit;
    bool fitted = false;
};

RegretSummary run_regret(const ExperimentConfig& cfg, const std::string& out_dir,
                         std::uint64_t seed);

void run_synth_graph(const ExperimentConfig& cfg, const std::string& out_dir, std::uint64_t seed);

} // namespace bgcn
