#include "bgcn/sampler.hpp"

#include "bgcn/reward.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace bgcn {

namespace {

constexpr char kPolicyMagic[4] = {'B', 'P', 'T', '1'};

std::vector<NodeId> sorted_unique(std::vector<NodeId> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

// Draw `k` distinct indices from [0, n) uniformly (partial Fisher-Yates).
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, Rng& rng) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t j = 0; j < k; ++j) {
        const std::size_t pick = j + static_cast<std::size_t>(rng.below(n - j));
        std::swap(idx[j], idx[pick]);
    }
    idx.resize(k);
    return idx;
}

std::size_t arm_index(const SparseGraph& g, NodeId root, NodeId neighbor) {
    auto nbrs = g.neighbors(root);
    const auto it = std::lower_bound(nbrs.begin(), nbrs.end(), neighbor);
    if (it == nbrs.end() || *it != neighbor)
        throw std::invalid_argument("sampler: id is not a neighbor of its root");
    return static_cast<std::size_t>(it - nbrs.begin());
}

} // namespace

ArmState& PolicyTable::row(NodeId v, std::size_t degree) {
    auto it = rows_.find(v);
    if (it == rows_.end()) {
        const std::size_t plays = std::min(config_.k, degree);
        std::optional<std::size_t> epoch;
        if (config_.delta_t > 0) epoch = config_.delta_t;
        it = rows_.emplace(v, ArmState::fresh(degree, plays, config_.eta, config_.gamma, epoch))
                 .first;
    }
    return it->second;
}

const ArmState* PolicyTable::find_row(NodeId v) const {
    const auto it = rows_.find(v);
    return it == rows_.end() ? nullptr : &it->second;
}

void PolicyTable::advance_step() {
    step_ += 1;
    if (config_.delta_t > 0 && step_ % config_.delta_t == 0) reset_all_rows();
}

void PolicyTable::reset_all_rows() {
    for (auto& [v, state] : rows_) {
        std::fill(state.weights.begin(), state.weights.end(), 1.0);
        state.steps_since_reset = 0;
    }
}

void PolicyTable::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("policy save: cannot open " + path);
    out.write(kPolicyMagic, sizeof(kPolicyMagic));
    const std::uint64_t n = rows_.size();
    out.write(reinterpret_cast<const char*>(&n), sizeof(n));
    std::vector<NodeId> ids;
    ids.reserve(rows_.size());
    for (const auto& [v, state] : rows_) ids.push_back(v);
    std::sort(ids.begin(), ids.end());
    for (NodeId v : ids) {
        const ArmState& state = rows_.at(v);
        out.write(reinterpret_cast<const char*>(&v), sizeof(v));
        const std::uint64_t arms = state.arm_count;
        out.write(reinterpret_cast<const char*>(&arms), sizeof(arms));
        out.write(reinterpret_cast<const char*>(state.weights.data()),
                  static_cast<std::streamsize>(arms * sizeof(double)));
        const std::uint64_t since = state.steps_since_reset;
        out.write(reinterpret_cast<const char*>(&since), sizeof(since));
    }
    if (!out) throw std::runtime_error("policy save: write failed for " + path);
}

PolicyTable PolicyTable::load(const std::string& path, SamplerConfig config, std::uint64_t seed) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("policy load: cannot open " + path);
    char magic[4];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kPolicyMagic, sizeof(magic)) != 0)
        throw std::runtime_error("policy load: bad magic in " + path);
    PolicyTable table(config, seed);
    std::uint64_t n = 0;
    in.read(reinterpret_cast<char*>(&n), sizeof(n));
    for (std::uint64_t r = 0; r < n; ++r) {
        NodeId v = 0;
        std::uint64_t arms = 0;
        in.read(reinterpret_cast<char*>(&v), sizeof(v));
        in.read(reinterpret_cast<char*>(&arms), sizeof(arms));
        if (!in) throw std::runtime_error("policy load: truncated " + path);
        ArmState state = table.row(v, arms);
        in.read(reinterpret_cast<char*>(state.weights.data()),
                static_cast<std::streamsize>(arms * sizeof(double)));
        std::uint64_t since = 0;
        in.read(reinterpret_cast<char*>(&since), sizeof(since));
        if (!in) throw std::runtime_error("policy load: truncated " + path);
        state.steps_since_reset = since;
        table.rows_[v] = std::move(state);
    }
    return table;
}

SamplingPlan build_plan(const SparseGraph& g, PolicyTable& policies,
                        const std::vector<NodeId>& roots, std::size_t depth) {
    if (depth == 0) throw std::invalid_argument("build_plan: depth must be >= 1");
    if (roots.empty()) throw std::invalid_argument("build_plan: no roots");
    const SamplerConfig& cfg = policies.config();

    SamplingPlan plan;
    plan.depth = depth;
    plan.estimator = cfg.estimator;
    plan.sites.resize(depth);
    plan.frontiers.resize(depth + 1);
    plan.frontiers[depth] = sorted_unique(roots);
    for (NodeId v : plan.frontiers[depth])
        if (v >= g.node_count()) throw std::invalid_argument("build_plan: root out of range");

    for (std::size_t l = depth; l-- > 0;) {
        std::vector<NodeId> next;
        for (NodeId v : plan.frontiers[l + 1]) {
            const std::size_t deg = g.degree(v);
            if (deg == 0) throw std::invalid_argument("build_plan: root with zero degree");
            auto nbrs = g.neighbors(v);
            Rng rng = Rng::stream(policies.seed(), v, policies.step(), l);

            PlanSite site;
            site.root = v;
            const double kd = static_cast<double>(deg);

            switch (cfg.kind) {
            case SamplerKind::uniform: {
                if (deg <= cfg.k) {
                    site.sampled.assign(nbrs.begin(), nbrs.end());
                    site.probs.assign(deg, 1.0);
                    site.coeffs.assign(deg, 1.0);
                } else {
                    auto picks = sample_without_replacement(deg, cfg.k, rng);
                    std::sort(picks.begin(), picks.end());
                    const double incl = static_cast<double>(cfg.k) / kd;
                    for (std::size_t j : picks) {
                        site.sampled.push_back(nbrs[j]);
                        site.probs.push_back(incl);
                        site.coeffs.push_back(1.0 / incl); // same for both estimators
                    }
                }
                break;
            }
            case SamplerKind::banditsampler:
            case SamplerKind::thanos: {
                ArmState& state = policies.row(v, deg);
                const std::vector<double> p = exp3_policy(state);
                // k repeated draws, duplicates collapsed to one arm each.
                std::vector<std::uint8_t> chosen(deg, 0);
                for (std::size_t j = 0; j < cfg.k; ++j) {
                    double u = rng.uniform();
                    std::size_t pick = deg - 1;
                    for (std::size_t i = 0; i < deg; ++i) {
                        u -= p[i];
                        if (u < 0.0) {
                            pick = i;
                            break;
                        }
                    }
                    chosen[pick] = 1;
                }
                std::vector<std::size_t> picks;
                for (std::size_t i = 0; i < deg; ++i)
                    if (chosen[i]) picks.push_back(i);
                const double m = static_cast<double>(picks.size());
                for (std::size_t i : picks) {
                    site.sampled.push_back(nbrs[i]);
                    site.probs.push_back(p[i]);
                    site.coeffs.push_back(cfg.estimator == EstimatorKind::biased
                                              ? kd / m
                                              : 1.0 / (m * p[i]));
                }
                break;
            }
            case SamplerKind::thanos_m: {
                ArmState& state = policies.row(v, deg);
                const Exp3mPolicy pol = exp3m_policy(state);
                const auto picks = depround(state.plays, pol.probabilities, rng);
                const double m = static_cast<double>(picks.size());
                for (std::size_t i : picks) {
                    site.sampled.push_back(nbrs[i]);
                    site.probs.push_back(pol.probabilities[i]);
                    site.coeffs.push_back(cfg.estimator == EstimatorKind::biased
                                              ? kd / m
                                              : 1.0 / pol.probabilities[i]);
                    site.capped.push_back(pol.is_capped[i]);
                }
                break;
            }
            }

            if (cfg.estimator == EstimatorKind::unbiased)
                for (double p : site.probs)
                    if (!(p > 0.0))
                        throw std::invalid_argument("build_plan: zero probability in unbiased mode");

            next.insert(next.end(), site.sampled.begin(), site.sampled.end());
            plan.sites[l].push_back(std::move(site));
        }
        plan.frontiers[l] = sorted_unique(std::move(next));
    }
    return plan;
}

void feedback(const SparseGraph& g, PolicyTable& policies, const SamplingPlan& plan,
              const ForwardTrace& trace, std::vector<RewardRecord>* collector) {
    const SamplerConfig& cfg = policies.config();
    if (cfg.kind == SamplerKind::uniform) {
        policies.advance_step();
        return;
    }

    // Rewards come from the sites that aggregate layer-1 embeddings (the
    // sites at layer 0 when the model has a single layer).
    const std::size_t reward_layer = std::min<std::size_t>(1, plan.depth - 1);
    const LayerFrame& frame = trace.frames[reward_layer];
    const BanditMode mode =
        cfg.kind == SamplerKind::thanos_m ? BanditMode::exp3m : BanditMode::exp3;

    for (const PlanSite& site : plan.sites[reward_layer]) {
        auto nbrs = g.neighbors(site.root);
        auto ws = g.weights(site.root);

        std::vector<Eigen::VectorXd> zs;
        zs.reserve(site.sampled.size());
        for (NodeId i : site.sampled) {
            const auto it = std::lower_bound(nbrs.begin(), nbrs.end(), i);
            const double a = ws[static_cast<std::size_t>(it - nbrs.begin())];
            zs.push_back(a * frame.h.row(frame.index_of(i)).transpose());
        }

        std::vector<RewardRecord> records(site.sampled.size());
        if (cfg.kind == SamplerKind::banditsampler) {
            for (std::size_t j = 0; j < zs.size(); ++j)
                records[j].reward = reward_banditsampler(zs[j], site.probs[j]);
        } else {
            for (std::size_t j = 0; j < zs.size(); ++j)
                records[j].reward = reward_thanos_practical(zs[j], zs, zs.size());
        }
        std::vector<std::uint8_t> is_capped(g.degree(site.root), 0);
        for (std::size_t j = 0; j < site.sampled.size(); ++j) {
            records[j].arm = arm_index(g, site.root, site.sampled[j]);
            records[j].probability = site.probs[j];
            if (!site.capped.empty() && site.capped[j]) is_capped[records[j].arm] = 1;
        }

        ArmState& state = policies.row(site.root, g.degree(site.root));
        update_weights(state, records, mode, is_capped);
        if (collector) collector->insert(collector->end(), records.begin(), records.end());
    }
    policies.advance_step();
}

} // namespace bgcn
