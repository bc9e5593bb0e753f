#include "bgcn/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace bgcn {

namespace {

constexpr double kWeightRenormCeiling = 1e100;

void check_weights(const ArmState& state) {
    if (state.weights.size() != state.arm_count || state.arm_count == 0)
        throw std::invalid_argument("bandit: weight vector size mismatch");
    for (double w : state.weights)
        if (!(w > 0.0) || !std::isfinite(w))
            throw std::invalid_argument("bandit: weights must be positive and finite");
}

} // namespace

ArmState ArmState::fresh(std::size_t arms, std::size_t k, double eta, double gamma,
                         std::optional<std::size_t> epoch_len) {
    ArmState s;
    s.weights.assign(arms, 1.0);
    s.arm_count = arms;
    s.plays = k;
    s.eta = eta;
    s.gamma = gamma;
    s.epoch_len = epoch_len;
    return s;
}

std::vector<double> exp3_policy(const ArmState& state) {
    check_weights(state);
    const double total = std::accumulate(state.weights.begin(), state.weights.end(), 0.0);
    std::vector<double> p(state.arm_count);
    for (std::size_t i = 0; i < state.arm_count; ++i)
        p[i] = (1.0 - state.gamma) * state.weights[i] / total +
               state.gamma / static_cast<double>(state.arm_count);
    return p;
}

Exp3mPolicy exp3m_policy(const ArmState& state) {
    check_weights(state);
    const std::size_t n = state.arm_count;
    const std::size_t k = state.plays;
    if (k == 0 || k > n) throw std::invalid_argument("exp3m_policy: need 1 <= k <= K");
    const double gamma = state.gamma;
    const double kd = static_cast<double>(k);
    const double nd = static_cast<double>(n);

    Exp3mPolicy out;
    out.is_capped.assign(n, 0);

    if (k == n) {
        // Sampling everything: every arm is pinned at probability 1.
        out.probabilities.assign(n, 1.0);
        for (std::size_t i = 0; i < n; ++i) {
            out.is_capped[i] = 1;
            out.capped.push_back(i);
        }
        return out;
    }

    std::vector<double> capped_weights = state.weights;

    // An arm's probability k((1-gamma) w/sum + gamma/K) would exceed 1 when
    // w / sum(w) > alpha. In that case the top weights are clamped to the
    // solution a_bar of a_bar / (sum_{w>=a_bar} a_bar + sum_{w<a_bar} w) = alpha,
    // which pins their probability at exactly 1.
    const double alpha = (1.0 / kd - gamma / nd) / (1.0 - gamma);
    const double total = std::accumulate(state.weights.begin(), state.weights.end(), 0.0);
    const double max_w = *std::max_element(state.weights.begin(), state.weights.end());

    if (max_w >= alpha * total) {
        // Sort indices by descending weight, ties broken by lower index.
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return state.weights[a] > state.weights[b];
        });
        // Suffix sums from the small end keep the below-cap tail free of
        // cancellation even when it is many orders below the total.
        std::vector<double> suffix(n + 1, 0.0);
        for (std::size_t j = n; j-- > 0;) suffix[j] = suffix[j + 1] + state.weights[order[j]];

        double a_bar = 0.0;
        bool found = false;
        for (std::size_t m = 1; m < n; ++m) {
            const double md = static_cast<double>(m);
            // Near m*alpha = 1 the division is ill-conditioned; let the
            // bisection fallback handle it instead of trusting the quotient.
            if (1.0 - md * alpha <= 1e-9 * (1.0 + md * alpha)) break;
            const double cand = alpha * suffix[m] / (1.0 - md * alpha);
            const bool upper_ok = state.weights[order[m - 1]] >= cand;
            const bool lower_ok = state.weights[order[m]] < cand;
            if (upper_ok && lower_ok) {
                a_bar = cand;
                found = true;
                break;
            }
        }
        if (!found) {
            // Fallback: f(a) = a / (sum_{w>=a} a + sum_{w<a} w) is increasing
            // with f(0+) = 0 and f(max_w) >= alpha, so bisection always lands.
            auto f = [&](double a) {
                double denom = 0.0;
                for (double w : state.weights) denom += (w >= a) ? a : w;
                return a / denom;
            };
            double lo = 0.0, hi = max_w;
            for (int iter = 0; iter < 200; ++iter) {
                const double mid = 0.5 * (lo + hi);
                if (f(mid) < alpha)
                    lo = mid;
                else
                    hi = mid;
            }
            a_bar = hi;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (state.weights[i] >= a_bar) {
                capped_weights[i] = a_bar;
                out.is_capped[i] = 1;
                out.capped.push_back(i);
            }
        }
    }

    const double capped_total =
        std::accumulate(capped_weights.begin(), capped_weights.end(), 0.0);
    out.probabilities.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.probabilities[i] =
            kd * ((1.0 - gamma) * capped_weights[i] / capped_total + gamma / nd);
        if (out.is_capped[i]) out.probabilities[i] = 1.0; // exact by construction
    }
    return out;
}

std::vector<std::size_t> depround(std::size_t k, std::vector<double> p, Rng& rng) {
    const std::size_t n = p.size();
    if (k == 0 || k > n) throw std::invalid_argument("depround: need 1 <= k <= |p|");
    double sum = 0.0;
    for (double x : p) {
        if (x < -1e-12 || x > 1.0 + 1e-12)
            throw std::invalid_argument("depround: probabilities must lie in [0, 1]");
        sum += x;
    }
    if (std::abs(sum - static_cast<double>(k)) > 1e-9)
        throw std::invalid_argument("depround: probabilities must sum to k");

    std::vector<std::size_t> active;
    active.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        p[i] = std::clamp(p[i], 0.0, 1.0);
        if (p[i] > 0.0 && p[i] < 1.0) active.push_back(i);
    }

    // Pairwise transfer: each round drives at least one of the pair to an
    // exact 0 or 1 (assigned exactly, not by accumulation).
    while (active.size() >= 2) {
        const std::size_t i = active[0];
        const std::size_t j = active[1];
        const double beta = std::min(1.0 - p[i], p[j]);
        const double zeta = std::min(p[i], 1.0 - p[j]);
        if (rng.uniform() < zeta / (beta + zeta)) {
            if (beta == 1.0 - p[i]) {
                p[i] = 1.0;
                p[j] -= beta;
            } else {
                p[i] += beta;
                p[j] = 0.0;
            }
        } else {
            if (zeta == p[i]) {
                p[i] = 0.0;
                p[j] += zeta;
            } else {
                p[i] -= zeta;
                p[j] = 1.0;
            }
        }
        std::size_t kept = 0;
        for (std::size_t idx : {i, j})
            if (p[idx] > 0.0 && p[idx] < 1.0) active[kept++] = idx;
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(kept),
                     active.begin() + 2);
    }
    if (active.size() == 1) {
        // Rounding drift can leave one near-integral entry; snap it.
        const std::size_t i = active[0];
        if (p[i] < 1e-6)
            p[i] = 0.0;
        else if (p[i] > 1.0 - 1e-6)
            p[i] = 1.0;
        else
            throw std::runtime_error("depround: non-integral residue");
    }

    std::vector<std::size_t> result;
    result.reserve(k);
    for (std::size_t i = 0; i < n; ++i)
        if (p[i] == 1.0) result.push_back(i);
    if (result.size() != k) throw std::runtime_error("depround: cardinality drifted from k");
    return result;
}

void update_weights(ArmState& state, const std::vector<RewardRecord>& rewards, BanditMode mode,
                    const std::vector<std::uint8_t>& is_capped) {
    check_weights(state);
    std::vector<double> exponent(state.arm_count, 0.0);
    for (const auto& rec : rewards) {
        if (rec.arm >= state.arm_count)
            throw std::invalid_argument("update_weights: reward for unknown arm");
        if (!(rec.probability > 0.0))
            throw std::invalid_argument("update_weights: reward carries p <= 0");
        if (mode == BanditMode::exp3m && rec.arm < is_capped.size() && is_capped[rec.arm])
            continue;
        exponent[rec.arm] += state.eta * rec.reward / rec.probability;
    }

    // Unclipped rewards (the variance-gradient kind) can put hundreds of nats
    // into a single update. When the multiplicative path would overflow, work
    // on log weights and rescale so the max lands at 1 -- a common positive
    // factor, so the policy and argmax are unchanged.
    bool log_space = false;
    for (std::size_t i = 0; i < state.arm_count; ++i) {
        if (!std::isfinite(exponent[i]))
            throw std::runtime_error("update_weights: non-finite reward update");
        // exp(exponent) alone can overflow even when w * exp(exponent) is
        // representable, so both trigger the log path.
        if (exponent[i] > 700.0 || exponent[i] + std::log(state.weights[i]) > 700.0)
            log_space = true;
    }

    if (log_space) {
        std::vector<double> logw(state.arm_count);
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < state.arm_count; ++i) {
            logw[i] = std::log(state.weights[i]) + exponent[i];
            mx = std::max(mx, logw[i]);
        }
        for (std::size_t i = 0; i < state.arm_count; ++i)
            state.weights[i] = std::max(std::exp(logw[i] - mx), 1e-300);
    } else {
        for (std::size_t i = 0; i < state.arm_count; ++i)
            if (exponent[i] != 0.0) state.weights[i] *= std::exp(exponent[i]);
        const double max_w = *std::max_element(state.weights.begin(), state.weights.end());
        if (max_w > kWeightRenormCeiling) {
            // Common rescale: leaves the policy untouched. The floor keeps
            // long-losing arms from underflowing to zero (their probability
            // is pinned by the gamma/K exploration term anyway).
            for (double& w : state.weights) w = std::max(w / max_w, 1e-300);
        }
    }
    ++state.steps_since_reset;
}

void maybe_restart(ArmState& state, std::size_t global_step) {
    if (!state.epoch_len.has_value()) return;
    const std::size_t len = *state.epoch_len;
    if (len == 0) throw std::invalid_argument("maybe_restart: epoch length must be >= 1");
    if (global_step % len == 0) {
        std::fill(state.weights.begin(), state.weights.end(), 1.0);
        state.steps_since_reset = 0;
    }
}

TunedHyperparams theorem3_hyperparams(double c_r, std::size_t arm_count, std::size_t plays,
                                      std::size_t horizon, double c_v_bar) {
    if (arm_count < 2 || horizon < arm_count)
        throw std::invalid_argument("theorem3_hyperparams: need T >= K >= 2");
    if (plays == 0 || plays > arm_count)
        throw std::invalid_argument("theorem3_hyperparams: need 1 <= k <= K");
    if (!(c_r > 0.0) || !(c_v_bar > 0.0))
        throw std::invalid_argument("theorem3_hyperparams: C_r and C_v_bar must be > 0");
    if (c_r > 700.0)
        throw std::invalid_argument(
            "theorem3_hyperparams: exp(C_r) overflows; rescale rewards below ~700");

    const double kk = static_cast<double>(arm_count);
    const double kd = static_cast<double>(plays);
    const double td = static_cast<double>(horizon);
    const double expm = std::expm1(c_r); // e^{C_r} - 1
    const double log_ratio = std::log(kk / kd);

    TunedHyperparams h;
    h.eta = std::sqrt(2.0 * kd * log_ratio / (c_r * expm * kk * td));
    h.gamma = std::min(1.0, std::sqrt(expm * kk * log_ratio / (2.0 * kd * kd * c_r * td)));
    const double delta = std::pow(c_v_bar * std::log(td), -2.0 / 3.0) *
                         std::cbrt(kk * std::log(kk)) * std::pow(td, 2.0 / 3.0);
    h.delta_t = static_cast<std::size_t>(std::max(1.0, std::ceil(delta)));
    return h;
}

} // namespace bgcn
