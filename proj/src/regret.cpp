#include "bgcn/regret.hpp"

#include "bgcn/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace bgcn {

EnvSpec EnvSpec::sinusoidal(double budget, double cap) {
    EnvSpec s;
    s.kind = Kind::sinusoidal;
    s.budget = budget;
    s.reward_cap = cap;
    return s;
}

EnvSpec EnvSpec::piecewise_constant(std::size_t num_changes, double gap, double cap) {
    EnvSpec s;
    s.kind = Kind::piecewise_constant;
    s.num_changes = num_changes;
    s.gap = gap;
    s.reward_cap = cap;
    return s;
}

EnvSpec EnvSpec::log_decay(double c_v_bar, double cap) {
    EnvSpec s;
    s.kind = Kind::log_decay;
    s.c_v_bar = c_v_bar;
    s.reward_cap = cap;
    return s;
}

double DriftEnvironment::recompute_budget() const {
    double total = 0.0;
    for (std::size_t t = 0; t + 1 < horizon; ++t) {
        double sup = 0.0;
        for (std::size_t i = 0; i < arm_count; ++i)
            sup = std::max(sup, std::abs(means(static_cast<Eigen::Index>(i),
                                               static_cast<Eigen::Index>(t + 1)) -
                                         means(static_cast<Eigen::Index>(i),
                                               static_cast<Eigen::Index>(t))));
        total += sup;
    }
    return total;
}

DriftEnvironment make_environment(const EnvSpec& spec, std::size_t arm_count, std::size_t plays,
                                  std::size_t horizon, std::uint64_t seed) {
    if (arm_count < 2) throw std::invalid_argument("make_environment: need K >= 2");
    if (horizon < arm_count) throw std::invalid_argument("make_environment: need T >= K");
    if (plays == 0 || plays > arm_count)
        throw std::invalid_argument("make_environment: need 1 <= k <= K");
    if (!(spec.reward_cap > 0.0))
        throw std::invalid_argument("make_environment: reward cap must be > 0");
    if (spec.noise_half_width < 0.0 || 2.0 * spec.noise_half_width >= spec.reward_cap)
        throw std::invalid_argument("make_environment: noise half-width too large for the cap");

    DriftEnvironment env;
    env.arm_count = arm_count;
    env.plays = plays;
    env.horizon = horizon;
    env.noise_half_width = spec.noise_half_width;
    env.reward_cap = spec.reward_cap;
    env.means.resize(static_cast<Eigen::Index>(arm_count), static_cast<Eigen::Index>(horizon));

    // Means live inside [lo, hi] so that realized rewards (mean + noise)
    // never leave [0, cap].
    const double lo = spec.noise_half_width;
    const double hi = spec.reward_cap - spec.noise_half_width;
    const double band = hi - lo;

    switch (spec.kind) {
    case EnvSpec::Kind::piecewise_constant: {
        if (spec.num_changes >= horizon)
            throw std::invalid_argument("make_environment: more changes than horizon");
        if (!(spec.gap >= 0.0) || spec.gap > band)
            throw std::invalid_argument("make_environment: gap outside the feasible band");
        const double high = hi;
        const double low = hi - spec.gap;
        const std::size_t segments = spec.num_changes + 1;
        for (std::size_t t = 0; t < horizon; ++t) {
            const std::size_t seg = std::min(segments - 1, t * segments / horizon);
            for (std::size_t i = 0; i < arm_count; ++i)
                env.means(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) =
                    (i == seg % arm_count) ? high : low;
        }
        break;
    }
    case EnvSpec::Kind::log_decay: {
        if (!(spec.c_v_bar > 0.0))
            throw std::invalid_argument("make_environment: log_decay needs c_v_bar > 0");
        // One arm moves per step, rotating round-robin, with drift
        // c_v_bar / (t+1) so the realized budget is c_v_bar (H_T - 1),
        // within the c_v_bar ln T budget for every T >= 2. Direction
        // reflects off the band edges before the move, keeping each step's
        // drift exact.
        std::vector<double> m(arm_count);
        std::vector<double> dir(arm_count);
        for (std::size_t i = 0; i < arm_count; ++i) {
            m[i] = lo + band * static_cast<double>(i + 1) / static_cast<double>(arm_count + 1);
            dir[i] = (i % 2 == 0) ? 1.0 : -1.0;
        }
        for (std::size_t i = 0; i < arm_count; ++i)
            env.means(static_cast<Eigen::Index>(i), 0) = m[i];
        for (std::size_t t = 1; t < horizon; ++t) {
            const std::size_t j = (t - 1) % arm_count;
            const double step = std::min(spec.c_v_bar / static_cast<double>(t + 1), band);
            if (m[j] + dir[j] * step > hi || m[j] + dir[j] * step < lo) dir[j] = -dir[j];
            m[j] = std::clamp(m[j] + dir[j] * step, lo, hi);
            for (std::size_t i = 0; i < arm_count; ++i)
                env.means(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = m[i];
        }
        break;
    }
    case EnvSpec::Kind::sinusoidal: {
        if (!(spec.budget > 0.0))
            throw std::invalid_argument("make_environment: sinusoidal needs a positive budget");
        const double mid = 0.5 * (lo + hi);
        const double period = std::max(8.0, static_cast<double>(horizon) / 4.0);
        const double omega = 2.0 * 3.14159265358979323846 / period;
        Rng rng = Rng::stream(seed, 0x5e9u);
        std::vector<double> phase(arm_count);
        for (std::size_t i = 0; i < arm_count; ++i)
            phase[i] = 2.0 * 3.14159265358979323846 *
                       (static_cast<double>(i) / static_cast<double>(arm_count) +
                        0.1 * rng.uniform());
        auto fill = [&](double amp) {
            for (std::size_t t = 0; t < horizon; ++t)
                for (std::size_t i = 0; i < arm_count; ++i)
                    env.means(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) =
                        mid + amp * std::sin(omega * static_cast<double>(t) + phase[i]);
        };
        fill(0.25 * band);
        const double measured = env.recompute_budget();
        if (measured <= 0.0)
            throw std::invalid_argument("make_environment: degenerate sinusoidal drift");
        const double amp = 0.25 * band * spec.budget / measured;
        if (amp > 0.5 * band)
            throw std::invalid_argument("make_environment: budget infeasible inside the cap");
        fill(amp);
        break;
    }
    }

    env.realized_budget = env.recompute_budget();
    env.budget_coefficient =
        spec.kind == EnvSpec::Kind::log_decay
            ? spec.c_v_bar
            : std::max(env.realized_budget, 1e-12) / std::log(static_cast<double>(horizon));
    return env;
}

namespace {

double top_k_sum(const Eigen::MatrixXd& means, std::size_t t, std::size_t k) {
    std::vector<double> col(static_cast<std::size_t>(means.rows()));
    for (std::size_t i = 0; i < col.size(); ++i)
        col[i] = means(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t));
    std::partial_sort(col.begin(), col.begin() + static_cast<std::ptrdiff_t>(k), col.end(),
                      std::greater<double>());
    return std::accumulate(col.begin(), col.begin() + static_cast<std::ptrdiff_t>(k), 0.0);
}

} // namespace

RegretTrace run_policy(const DriftEnvironment& env, const PolicySpec& policy,
                       std::uint64_t seed) {
    const std::size_t n = env.arm_count;
    const std::size_t k = env.plays;
    const std::size_t horizon = env.horizon;

    // Resolve hyperparameters. Closed-form tuning needs ln(K/k) > 0, so when
    // k == K the weights never move (every arm is sampled anyway).
    double eta = policy.eta;
    double gamma = policy.gamma;
    std::size_t delta_t = policy.delta_t;
    if (policy.kind == PolicySpec::Kind::rexp3_auto) {
        // The epoch length comes from the full horizon; the exponential-weights
        // temperatures are then instantiated for one epoch, which is the
        // horizon the per-batch weak-regret bound is applied to.
        const TunedHyperparams h =
            theorem3_hyperparams(env.reward_cap, n, k, horizon, env.budget_coefficient);
        delta_t = h.delta_t;
        const TunedHyperparams per_epoch = theorem3_hyperparams(
            env.reward_cap, n, k, std::max(delta_t, n), env.budget_coefficient);
        eta = per_epoch.eta;
        gamma = per_epoch.gamma;
    } else if (policy.kind != PolicySpec::Kind::uniform_random && (eta == 0.0 || gamma == 0.0)) {
        const TunedHyperparams h =
            theorem3_hyperparams(env.reward_cap, n, k, horizon,
                                 std::max(env.budget_coefficient, 1e-12));
        if (eta == 0.0) eta = h.eta;
        if (gamma == 0.0) gamma = h.gamma;
    }
    const bool restarts =
        (policy.kind == PolicySpec::Kind::rexp3_auto ||
         policy.kind == PolicySpec::Kind::rexp3_manual) &&
        delta_t > 0;

    RegretTrace trace;
    trace.per_step_policy_payoff.resize(horizon);
    trace.per_step_dynamic_oracle.resize(horizon);
    trace.per_step_weak_oracle.resize(horizon);

    // Static oracle: best fixed k-set by total mean over the horizon.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> totals(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) totals[i] = env.means.row(static_cast<Eigen::Index>(i)).sum();
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return totals[a] > totals[b]; });
    trace.static_oracle_best_set.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(trace.static_oracle_best_set.begin(), trace.static_oracle_best_set.end());

    ArmState state = ArmState::fresh(n, k, eta, gamma,
                                     restarts ? std::optional<std::size_t>(delta_t) : std::nullopt);
    Rng rng = Rng::stream(seed, 0xba2d17u);

    for (std::size_t t = 1; t <= horizon; ++t) {
        if (restarts) maybe_restart(state, t);

        std::vector<std::size_t> sampled;
        std::vector<double> probs(n, static_cast<double>(k) / static_cast<double>(n));
        std::vector<std::uint8_t> is_capped;
        if (policy.kind == PolicySpec::Kind::uniform_random) {
            std::vector<std::size_t> idx(n);
            std::iota(idx.begin(), idx.end(), 0);
            for (std::size_t j = 0; j < k; ++j) {
                const std::size_t pick = j + static_cast<std::size_t>(rng.below(n - j));
                std::swap(idx[j], idx[pick]);
            }
            sampled.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
            std::sort(sampled.begin(), sampled.end());
        } else {
            const Exp3mPolicy pol = exp3m_policy(state);
            sampled = depround(k, pol.probabilities, rng);
            probs = pol.probabilities;
            is_capped = pol.is_capped;
        }

        double payoff = 0.0;
        std::vector<RewardRecord> records;
        records.reserve(sampled.size());
        for (std::size_t i : sampled) {
            double r = env.means(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t - 1));
            if (env.noise_half_width > 0.0)
                r += rng.uniform(-env.noise_half_width, env.noise_half_width);
            payoff += r;
            records.push_back({i, r, probs[i]});
        }
        if (policy.kind != PolicySpec::Kind::uniform_random)
            update_weights(state, records, BanditMode::exp3m, is_capped);

        trace.per_step_policy_payoff[t - 1] = payoff;
        trace.per_step_dynamic_oracle[t - 1] = top_k_sum(env.means, t - 1, k);
        double weak = 0.0;
        for (std::size_t i : trace.static_oracle_best_set)
            weak += env.means(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t - 1));
        trace.per_step_weak_oracle[t - 1] = weak;
        trace.cumulative_dynamic_regret += trace.per_step_dynamic_oracle[t - 1] - payoff;
        trace.cumulative_weak_regret += weak - payoff;
    }
    return trace;
}

void export_trace(const RegretTrace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("export_trace: cannot open " + path);
    out << "t,policy_payoff,dynamic_oracle,weak_oracle,cum_R,cum_Rhat\n";
    double cum_r = 0.0, cum_rhat = 0.0;
    char buf[160];
    for (std::size_t t = 0; t < trace.per_step_policy_payoff.size(); ++t) {
        cum_r += trace.per_step_dynamic_oracle[t] - trace.per_step_policy_payoff[t];
        cum_rhat += trace.per_step_weak_oracle[t] - trace.per_step_policy_payoff[t];
        std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%.17g,%.17g\n", t + 1,
                      trace.per_step_policy_payoff[t], trace.per_step_dynamic_oracle[t],
                      trace.per_step_weak_oracle[t], cum_r, cum_rhat);
        out << buf;
    }
    if (!out) throw std::runtime_error("export_trace: write failed for " + path);
}

ScalingFit fit_scaling_exponent(const std::vector<std::pair<double, double>>& horizon_regret) {
    if (horizon_regret.size() < 4)
        throw std::invalid_argument("fit_scaling_exponent: need at least 4 horizons");
    std::vector<double> xs, ys;
    for (const auto& [t, r] : horizon_regret) {
        if (!(r > 0.0))
            throw std::invalid_argument(
                "fit_scaling_exponent: nonpositive regret (average over more seeds)");
        xs.push_back(std::log(t));
        ys.push_back(std::log(r));
    }
    const double n = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_scaling_exponent: degenerate horizons");
    ScalingFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return fit;
}

} // namespace bgcn
