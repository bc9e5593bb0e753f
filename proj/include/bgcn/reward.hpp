#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <vector>

namespace bgcn {

enum class RewardKind { banditsampler, thanos_exact, thanos_practical };

struct RewardConfig {
    RewardKind kind = RewardKind::thanos_practical;
    std::optional<double> reward_clip; // monitor ceiling, not applied to values
};

// Norm-over-squared-probability reward of the variance-gradient sampler.
// Unbounded as p -> 0; callers own the heavy tail.
double reward_banditsampler(const Eigen::VectorXd& z_i, double p_i);

// r = 2 z_i . z_bar - ||z_i||^2, maximized (= ||z_bar||^2) at z_i = z_bar.
// Satisfies r = ||z_bar||^2 - ||z_i - z_bar||^2 exactly.
double reward_thanos_exact(const Eigen::VectorXd& z_i, const Eigen::VectorXd& z_bar);

// ReLU of the exact form with z_bar replaced by the sampled mean.
double reward_thanos_practical(const Eigen::VectorXd& z_i,
                               const std::vector<Eigen::VectorXd>& sampled_zs, std::size_t k);

// Inputs for the closed-form bound constants. c_theta and c_grad_sum are
// empirical (from a training monitor); the rest come from the graph.
struct BoundConstants {
    double c_sigma = 1.0; // relu/tanh are 1-Lipschitz
    double c_theta = 0.0; // max spectral norm of any layer weight
    double c_x = 0.0;     // max feature aggregate norm
    double a_bar = 0.0;   // max edge weight
    double d_bar = 0.0;   // max degree
};

// G = C_sigma C_theta D_bar A_bar.
double growth_factor(const BoundConstants& c);

// C_z at a layer: G^(l-1) A_bar C_sigma C_theta C_x, layer >= 1.
double embedding_norm_bound(const BoundConstants& c, std::size_t layer);

// C_r = 3 C_z^2: ceiling on |r| for both thanos reward forms.
double reward_bound(const BoundConstants& c, std::size_t layer);

// C_v_bar = 12 G^(2(l-1)) C_sigma^2 C_x^2 A_bar^2 C_theta C_g, the variation
// budget coefficient in V_T = C_v_bar ln T.
double variation_budget_coefficient(const BoundConstants& c, double c_grad_sum,
                                    std::size_t layer);

} // namespace bgcn
