#include "bgcn/estimator.hpp"

#include <cmath>
#include <stdexcept>

namespace bgcn {

void NeighborSnapshot::validate(double policy_sum) const {
    if (weighted_embeddings.empty())
        throw std::invalid_argument("snapshot: needs at least one neighbor");
    if (static_cast<std::size_t>(policy.size()) != weighted_embeddings.size())
        throw std::invalid_argument("snapshot: policy length must match neighbor count");
    const Eigen::Index dim = weighted_embeddings.front().size();
    for (const auto& z : weighted_embeddings)
        if (z.size() != dim) throw std::invalid_argument("snapshot: mixed embedding dimensions");
    double sum = 0.0;
    for (Eigen::Index i = 0; i < policy.size(); ++i) {
        if (policy[i] < 0.0) throw std::invalid_argument("snapshot: negative policy entry");
        sum += policy[i];
    }
    if (std::abs(sum - policy_sum) > 1e-9)
        throw std::invalid_argument("snapshot: policy does not sum to the expected total");
}

namespace {

Eigen::VectorXd total(const NeighborSnapshot& snap) {
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(snap.weighted_embeddings.front().size());
    for (const auto& z : snap.weighted_embeddings) mu += z;
    return mu;
}

} // namespace

Eigen::VectorXd optimal_policy(const NeighborSnapshot& snap) {
    snap.validate();
    const std::size_t n = snap.arm_count();
    Eigen::VectorXd norms(static_cast<Eigen::Index>(n));
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        norms[static_cast<Eigen::Index>(i)] = snap.weighted_embeddings[i].norm();
        sum += norms[static_cast<Eigen::Index>(i)];
    }
    if (sum == 0.0)
        throw std::invalid_argument("optimal_policy: undefined when all embeddings are zero");
    return norms / sum;
}

double effective_variance(const NeighborSnapshot& snap) {
    snap.validate();
    double ve = 0.0;
    for (std::size_t i = 0; i < snap.arm_count(); ++i) {
        const double n2 = snap.weighted_embeddings[i].squaredNorm();
        if (n2 == 0.0) continue;
        const double p = snap.policy[static_cast<Eigen::Index>(i)];
        if (p <= 0.0)
            throw std::invalid_argument("effective_variance: p_i = 0 for a nonzero embedding");
        ve += n2 / p;
    }
    return ve;
}

double constant_variance(const NeighborSnapshot& snap) {
    snap.validate();
    return total(snap).squaredNorm();
}

double min_variance(const NeighborSnapshot& snap) {
    snap.validate();
    const std::size_t n = snap.arm_count();
    std::vector<double> norms(n);
    for (std::size_t i = 0; i < n; ++i) {
        norms[i] = snap.weighted_embeddings[i].norm();
        if (norms[i] == 0.0)
            throw std::invalid_argument("min_variance: zero embedding has no defined angle");
    }
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double cosine =
                snap.weighted_embeddings[i].dot(snap.weighted_embeddings[j]) / (norms[i] * norms[j]);
            v += norms[i] * norms[j] * (1.0 - cosine);
        }
    }
    return v;
}

Eigen::VectorXd biased_estimate(const NeighborSnapshot& snap,
                                const std::vector<std::size_t>& sampled, std::size_t k) {
    snap.validate(snap.policy.sum()); // structure only; any policy total is fine here
    if (sampled.empty() || k == 0)
        throw std::invalid_argument("biased_estimate: sample must be nonempty");
    if (sampled.size() != k)
        throw std::invalid_argument("biased_estimate: |sampled| must equal k");
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(snap.weighted_embeddings.front().size());
    for (std::size_t i : sampled) {
        if (i >= snap.arm_count()) throw std::invalid_argument("biased_estimate: bad index");
        acc += snap.weighted_embeddings[i];
    }
    return (static_cast<double>(snap.arm_count()) / static_cast<double>(k)) * acc;
}

BiasVariance bias_and_variance_k1(const NeighborSnapshot& snap) {
    snap.validate();
    const double kk = static_cast<double>(snap.arm_count());
    const Eigen::VectorXd mu = total(snap);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(mu.size());
    for (std::size_t i = 0; i < snap.arm_count(); ++i)
        mean += snap.policy[static_cast<Eigen::Index>(i)] * snap.weighted_embeddings[i];
    BiasVariance out;
    out.bias = kk * kk * (mean - mu / kk).squaredNorm();
    for (std::size_t i = 0; i < snap.arm_count(); ++i)
        out.variance += snap.policy[static_cast<Eigen::Index>(i)] *
                        (snap.weighted_embeddings[i] - mean).squaredNorm();
    out.variance *= kk * kk;
    return out;
}

double single_play_variance_enumerated(const NeighborSnapshot& snap) {
    snap.validate();
    const Eigen::VectorXd mu = total(snap);
    double v = 0.0;
    for (std::size_t i = 0; i < snap.arm_count(); ++i) {
        const double p = snap.policy[static_cast<Eigen::Index>(i)];
        if (p <= 0.0)
            throw std::invalid_argument("single_play_variance_enumerated: needs p > 0");
        v += p * (snap.weighted_embeddings[i] / p - mu).squaredNorm();
    }
    return v;
}

double k1_total_error_enumerated(const NeighborSnapshot& snap) {
    snap.validate();
    const double kk = static_cast<double>(snap.arm_count());
    const Eigen::VectorXd mu = total(snap);
    double err = 0.0;
    for (std::size_t i = 0; i < snap.arm_count(); ++i)
        err += snap.policy[static_cast<Eigen::Index>(i)] *
               (kk * snap.weighted_embeddings[i] - mu).squaredNorm();
    return err;
}

} // namespace bgcn
