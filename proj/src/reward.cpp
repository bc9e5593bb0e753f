#include "bgcn/reward.hpp"

#include <cmath>
#include <stdexcept>

namespace bgcn {

double reward_banditsampler(const Eigen::VectorXd& z_i, double p_i) {
    if (p_i <= 0.0) throw std::invalid_argument("reward_banditsampler: p must be > 0");
    const double n = z_i.norm();
    if (n == 0.0) return 0.0;
    return n / (p_i * p_i);
}

double reward_thanos_exact(const Eigen::VectorXd& z_i, const Eigen::VectorXd& z_bar) {
    if (z_i.size() != z_bar.size())
        throw std::invalid_argument("reward_thanos_exact: dimension mismatch");
    return 2.0 * z_i.dot(z_bar) - z_i.squaredNorm();
}

double reward_thanos_practical(const Eigen::VectorXd& z_i,
                               const std::vector<Eigen::VectorXd>& sampled_zs, std::size_t k) {
    if (sampled_zs.empty() || k == 0)
        throw std::invalid_argument("reward_thanos_practical: empty sample");
    if (sampled_zs.size() != k)
        throw std::invalid_argument("reward_thanos_practical: k must equal |sampled_zs|");
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(z_i.size());
    for (const auto& z : sampled_zs) {
        if (z.size() != z_i.size())
            throw std::invalid_argument("reward_thanos_practical: dimension mismatch");
        mean += z;
    }
    mean /= static_cast<double>(k);
    return std::max(0.0, reward_thanos_exact(z_i, mean));
}

double growth_factor(const BoundConstants& c) {
    return c.c_sigma * c.c_theta * c.d_bar * c.a_bar;
}

double embedding_norm_bound(const BoundConstants& c, std::size_t layer) {
    if (layer < 1) throw std::invalid_argument("embedding_norm_bound: layer must be >= 1");
    return std::pow(growth_factor(c), static_cast<double>(layer - 1)) * c.a_bar * c.c_sigma *
           c.c_theta * c.c_x;
}

double reward_bound(const BoundConstants& c, std::size_t layer) {
    const double cz = embedding_norm_bound(c, layer);
    return 3.0 * cz * cz;
}

double variation_budget_coefficient(const BoundConstants& c, double c_grad_sum,
                                    std::size_t layer) {
    if (layer < 1)
        throw std::invalid_argument("variation_budget_coefficient: layer must be >= 1");
    const double g2 = std::pow(growth_factor(c), 2.0 * static_cast<double>(layer - 1));
    return 12.0 * g2 * c.c_sigma * c.c_sigma * c.c_x * c.c_x * c.a_bar * c.a_bar * c.c_theta *
           c_grad_sum;
}

} // namespace bgcn
