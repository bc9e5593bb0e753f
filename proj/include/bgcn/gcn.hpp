#pragma once

#include "bgcn/graph.hpp"
#include "bgcn/reward.hpp"

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace bgcn {

enum class Activation { relu, tanh };

struct LrSchedule {
    enum class Kind { inverse_t, constant };
    Kind kind = Kind::constant;
    double base = 0.001;

    static LrSchedule inverse_t(double base = 1.0) { return {Kind::inverse_t, base}; }
    static LrSchedule constant(double value) { return {Kind::constant, value}; }
    double at(std::size_t step) const {
        return kind == Kind::inverse_t ? base / static_cast<double>(step) : base;
    }
};

// Layer weights plus the step counter driving the learning-rate schedule.
struct GcnState {
    std::vector<Eigen::MatrixXd> layer_weights;
    std::size_t step = 1;
    LrSchedule lr;
    Activation activation = Activation::relu;

    std::size_t depth() const { return layer_weights.size(); }
    void validate() const;

    // Glorot-style uniform init over the given layer sizes
    // (dims = [d_in, d_hidden..., d_out]).
    static GcnState init(const std::vector<std::size_t>& dims, Activation act, LrSchedule lr,
                         std::uint64_t seed);

    void save(const std::string& path) const;
    static GcnState load(const std::string& path);
};

enum class EstimatorKind { biased, unbiased };

// One aggregation site: root v at layer l consumes the layer-l embeddings of
// its sampled neighbors. `coeffs` carries the estimator scaling per neighbor
// (on top of the edge weight a_vi): 1 for exact aggregation, K/|S| for the
// biased estimator, inverse-probability weights for the unbiased one.
struct PlanSite {
    NodeId root = 0;
    std::vector<NodeId> sampled;
    std::vector<double> probs;
    std::vector<double> coeffs;
    std::vector<std::uint8_t> capped; // exp3m cap flags, empty otherwise
};

struct SamplingPlan {
    std::size_t depth = 0;
    EstimatorKind estimator = EstimatorKind::biased;
    std::vector<std::vector<PlanSite>> sites; // sites[l], l = 0..depth-1
    std::vector<std::vector<NodeId>> frontiers; // frontiers[l], l = 0..depth; [depth] = roots

    const std::vector<NodeId>& roots() const { return frontiers[depth]; }
};

// Exact-aggregation plan over full neighborhoods, expanded from the roots.
SamplingPlan make_full_plan(const SparseGraph& g, const std::vector<NodeId>& roots,
                            std::size_t depth);

struct LayerFrame {
    std::vector<NodeId> nodes; // sorted ascending
    Eigen::MatrixXd h;         // one row per node

    Eigen::Index index_of(NodeId v) const;
};

struct ForwardTrace {
    std::vector<LayerFrame> frames; // frames[l].h = layer-l embeddings, l = 0..depth
    std::vector<Eigen::MatrixXd> aggregates;      // per layer: mu-hat rows, root order
    std::vector<Eigen::MatrixXd> pre_activations; // per layer: aggregate * W
};

// Running maxima over a training run, standing in for the boundedness
// constants of the theory.
struct AssumptionMonitor {
    double max_param_norm_seen = 0.0;    // empirical C_theta (spectral)
    double max_grad_norm_sum_seen = 0.0; // empirical C_g (sum over layers, Frobenius)
    std::vector<double> max_z_norm_seen; // per aggregation layer
    std::vector<double> max_z_step_seen; // per layer, max ||z_{t+1} - z_t|| observed

    double max_weighted_embedding_norm_seen() const;
    void observe_weights(const GcnState& state);
    void observe_z_norm(std::size_t layer, double norm);

    // Bound constants assembled from the monitor plus the graph.
    BoundConstants bound_constants(const SparseGraph& g) const;
};

// Spectral norm by power iteration (deterministic start vector).
double spectral_norm(const Eigen::MatrixXd& m, int iterations = 50);

// Forward propagation along a plan. Every site aggregates its neighbors'
// previous-layer embeddings with the plan's coefficients, multiplies by the
// layer weight and applies the activation. With a full plan this is the exact
// propagation; with a sampled plan the aggregate is the chosen estimator.
ForwardTrace forward(const SparseGraph& g, const GcnState& state, const SamplingPlan& plan,
                     AssumptionMonitor* monitor = nullptr);

ForwardTrace forward_full(const SparseGraph& g, const GcnState& state,
                          const std::vector<NodeId>& roots, AssumptionMonitor* monitor = nullptr);

// Softmax cross-entropy over the plan roots, averaged across the batch.
// `labels` holds one class id per graph node (-1 = unlabeled).
double sampled_loss(const SparseGraph& g, const GcnState& state, const SamplingPlan& plan,
                    const std::vector<int>& labels);

struct SgdStepInfo {
    double loss = 0.0;
    double grad_norm_sum = 0.0; // sum over layers of Frobenius norms
    double lr_used = 0.0;
};

// One SGD step on the plan's batch: exact reverse-mode gradients of the
// traced sampled computation, W -= alpha_t * grad, step counter++. The trace
// must come from forward() on this same plan and pre-update state. The
// monitor picks up new maxima for parameter and gradient norms.
SgdStepInfo sgd_step(GcnState& state, const SparseGraph& g, const SamplingPlan& plan,
                     const ForwardTrace& trace, const std::vector<int>& labels,
                     AssumptionMonitor& monitor);

// Convenience overload that runs the forward pass itself.
SgdStepInfo sgd_step(GcnState& state, const SparseGraph& g, const SamplingPlan& plan,
                     const std::vector<int>& labels, AssumptionMonitor& monitor);

struct BoundCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    bool ok = false;
};

// Checks the per-step embedding drift against
// alpha_t * G^(l-1) * A_bar * C_sigma * C_x * C_g evaluated with the
// monitor's empirical constants. Both traces must cover the same node set
// at the given layer (layer >= 1).
BoundCheck embedding_step_bound_check(const SparseGraph& g, const ForwardTrace& before,
                                      const ForwardTrace& after, const AssumptionMonitor& monitor,
                                      std::size_t layer, double alpha_t);

} // namespace bgcn
