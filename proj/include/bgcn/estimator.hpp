#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

namespace bgcn {

// One root's view of its neighborhood at some layer: the weighted embeddings
// z_i = a_vi * h_i and a sampling policy over the same indices. In single-play
// mode the policy sums to 1, in multiple-play mode to k.
struct NeighborSnapshot {
    std::vector<Eigen::VectorXd> weighted_embeddings;
    Eigen::VectorXd policy;

    std::size_t arm_count() const { return weighted_embeddings.size(); }
    void validate(double policy_sum = 1.0) const;
};

struct BiasVariance {
    double bias = 0.0;
    double variance = 0.0;
};

// p*_i = ||z_i|| / sum_j ||z_j||; undefined (rejected) when all z are zero.
Eigen::VectorXd optimal_policy(const NeighborSnapshot& snap);

// V_e = sum_i ||z_i||^2 / p_i. Zero-norm arms contribute 0 regardless of p_i;
// p_i = 0 with ||z_i|| > 0 is rejected.
double effective_variance(const NeighborSnapshot& snap);

// V_c = ||sum_j z_j||^2; independent of the policy.
double constant_variance(const NeighborSnapshot& snap);

// Minimum single-play variance over all policies:
// sum_ij ||z_i|| ||z_j|| (1 - cos(z_i, z_j)). Requires all z nonzero.
double min_variance(const NeighborSnapshot& snap);

// (K/k) * sum over the sampled subset.
Eigen::VectorXd biased_estimate(const NeighborSnapshot& snap,
                                const std::vector<std::size_t>& sampled, std::size_t k);

// Closed-form bias and variance of the k=1 biased estimator mu_hat = K z_I:
//   bias = K^2 ||sum p_i z_i - mu/K||^2
//   var  = K^2 E_p ||z_i - sum p_j z_j||^2
BiasVariance bias_and_variance_k1(const NeighborSnapshot& snap);

// E_p ||z_i/p_i - mu||^2 by direct enumeration (test oracle for V_e - V_c).
double single_play_variance_enumerated(const NeighborSnapshot& snap);

// E ||K z_I - mu||^2 by direct enumeration (test oracle for bias + variance).
double k1_total_error_enumerated(const NeighborSnapshot& snap);

} // namespace bgcn
