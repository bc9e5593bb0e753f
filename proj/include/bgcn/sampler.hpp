#pragma once

#include "bgcn/bandit.hpp"
#include "bgcn/gcn.hpp"
#include "bgcn/graph.hpp"

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace bgcn {

enum class SamplerKind { uniform, banditsampler, thanos, thanos_m };

struct SamplerConfig {
    SamplerKind kind = SamplerKind::thanos_m;
    std::size_t k = 2;
    double eta = 0.1;
    double gamma = 0.1;
    std::size_t delta_t = 0; // restart period; 0 disables restarts
    EstimatorKind estimator = EstimatorKind::biased;

    static EstimatorKind default_estimator(SamplerKind kind) {
        return kind == SamplerKind::banditsampler ? EstimatorKind::unbiased
                                                  : EstimatorKind::biased;
    }
};

// Per-root arm weights, one row per graph node over that node's neighbor
// list. Rows materialize lazily on first touch; the step counter drives the
// Rexp3 restart schedule across all rows at once.
class PolicyTable {
  public:
    PolicyTable() = default;
    PolicyTable(SamplerConfig config, std::uint64_t seed) : config_(config), seed_(seed) {}

    const SamplerConfig& config() const { return config_; }
    std::uint64_t seed() const { return seed_; }
    std::size_t step() const { return step_; }
    std::size_t row_count() const { return rows_.size(); }

    ArmState& row(NodeId v, std::size_t degree);
    const ArmState* find_row(NodeId v) const;

    void advance_step();
    void reset_all_rows();

    // Policy-table snapshot (magic BPT1).
    void save(const std::string& path) const;
    static PolicyTable load(const std::string& path, SamplerConfig config, std::uint64_t seed);

  private:
    SamplerConfig config_;
    std::uint64_t seed_ = 0;
    std::size_t step_ = 1;
    std::unordered_map<NodeId, ArmState> rows_;
};

// Top-down frontier sampling: every root in the layer-(l+1) frontier draws k
// neighbors according to its policy row, which becomes part of the layer-l
// frontier. The same per-node policy row serves every layer.
SamplingPlan build_plan(const SparseGraph& g, PolicyTable& policies,
                        const std::vector<NodeId>& roots, std::size_t depth);

// Reward feedback from a finished forward pass. Rewards are computed at the
// layer-1 aggregation sites from the sampled neighbors' weighted embeddings
// and fed into the importance-weighted update of each root's row; uniform
// sampling leaves the table untouched. Advances the step counter and applies
// the Rexp3 restart at epoch boundaries. Collected rewards are appended to
// `collector` when given.
void feedback(const SparseGraph& g, PolicyTable& policies, const SamplingPlan& plan,
              const ForwardTrace& trace, std::vector<RewardRecord>* collector = nullptr);

} // namespace bgcn
