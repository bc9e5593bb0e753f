#pragma once

#include "bgcn/rng.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace bgcn {

enum class BanditMode { exp3, exp3m };

// Exponential-weights state for one root node's neighbor arms.
struct ArmState {
    std::vector<double> weights; // all > 0 and finite
    std::size_t arm_count = 0;
    std::size_t plays = 1; // k
    double eta = 0.0;
    double gamma = 0.0;
    std::optional<std::size_t> epoch_len; // restart period, when restarts are on
    std::size_t steps_since_reset = 0;

    static ArmState fresh(std::size_t arms, std::size_t k, double eta, double gamma,
                          std::optional<std::size_t> epoch_len = std::nullopt);
};

struct DrawOutcome {
    std::vector<std::size_t> sampled;  // |sampled| = k in exp3m mode
    std::vector<double> probabilities; // full policy at draw time
};

struct RewardRecord {
    std::size_t arm = 0;
    double reward = 0.0;
    double probability = 0.0; // probability used at draw time
};

struct Exp3mPolicy {
    std::vector<double> probabilities;  // sum to k, each in (0, 1]
    std::vector<std::size_t> capped;    // arms pinned at probability 1
    std::vector<std::uint8_t> is_capped;
};

// p_i = (1 - gamma) w_i / sum(w) + gamma / K; sums to 1.
std::vector<double> exp3_policy(const ArmState& state);

// Multiple-play policy with weight capping so every p_i <= 1 and the total
// is exactly k. Capped arms receive probability exactly 1.
Exp3mPolicy exp3m_policy(const ArmState& state);

// Turns p (summing to k, entries in [0,1]) into exactly k arm indices whose
// inclusion probabilities match p. Result is sorted.
std::vector<std::size_t> depround(std::size_t k, std::vector<double> p, Rng& rng);

// Importance-weighted exponential update: sampled arms get w *= exp(eta r/p),
// unsampled arms are untouched; exp3m mode skips capped arms. Weights are
// rescaled by the max when it exceeds 1e100, which leaves the policy invariant.
void update_weights(ArmState& state, const std::vector<RewardRecord>& rewards, BanditMode mode,
                    const std::vector<std::uint8_t>& is_capped = {});

// Rexp3 restart: at multiples of the epoch length all weights return to 1.
void maybe_restart(ArmState& state, std::size_t global_step);

struct TunedHyperparams {
    double eta = 0.0;
    double gamma = 0.0;
    std::size_t delta_t = 1;
};

// Closed-form schedule:
//   eta     = sqrt(2 k ln(K/k) / (C_r (e^{C_r} - 1) K T))
//   gamma   = min{1, sqrt((e^{C_r} - 1) K ln(K/k) / (2 k^2 C_r T))}
//   delta_T = ceil((C_v_bar ln T)^(-2/3) (K ln K)^(1/3) T^(2/3))
TunedHyperparams theorem3_hyperparams(double c_r, std::size_t arm_count, std::size_t plays,
                                      std::size_t horizon, double c_v_bar);

} // namespace bgcn
