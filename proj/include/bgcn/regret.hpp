#pragma once

#include "bgcn/bandit.hpp"

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace bgcn {

struct EnvSpec {
    enum class Kind { sinusoidal, piecewise_constant, log_decay };
    Kind kind = Kind::log_decay;
    double reward_cap = 1.0;       // declared ceiling on every realized reward
    double noise_half_width = 0.0; // 0 = noiseless
    double budget = 0.0;           // sinusoidal: target total variation
    std::size_t num_changes = 0;   // piecewise_constant
    double gap = 0.0;              // piecewise_constant: high minus low mean
    double c_v_bar = 0.0;          // log_decay: V_T = c_v_bar ln T budget coefficient

    static EnvSpec sinusoidal(double budget, double cap = 1.0);
    static EnvSpec piecewise_constant(std::size_t num_changes, double gap, double cap = 1.0);
    static EnvSpec log_decay(double c_v_bar, double cap = 1.0);
};

// Non-stationary bandit environment with a known mean-reward path per arm.
// The means are the ground truth used by the oracles; policies only see
// realized rewards.
struct DriftEnvironment {
    std::size_t arm_count = 0;
    std::size_t plays = 1;
    std::size_t horizon = 0;
    Eigen::MatrixXd means; // K x T
    double noise_half_width = 0.0;
    double reward_cap = 0.0;
    double realized_budget = 0.0;
    double budget_coefficient = 0.0; // C_v_bar handed to theorem3 auto-tuning

    // Full rescan of sum_t max_i |mean_{i,t+1} - mean_{i,t}|.
    double recompute_budget() const;
};

DriftEnvironment make_environment(const EnvSpec& spec, std::size_t arm_count, std::size_t plays,
                                  std::size_t horizon, std::uint64_t seed);

struct PolicySpec {
    enum class Kind { rexp3_auto, rexp3_manual, exp3m_no_restart, uniform_random };
    Kind kind = Kind::rexp3_auto;
    double eta = 0.0;       // manual / no-restart; 0 = tune from the closed forms
    double gamma = 0.0;     // likewise
    std::size_t delta_t = 0; // rexp3_manual restart period

    static PolicySpec rexp3_auto() { return {Kind::rexp3_auto, 0.0, 0.0, 0}; }
    static PolicySpec rexp3_manual(double eta, double gamma, std::size_t delta_t) {
        return {Kind::rexp3_manual, eta, gamma, delta_t};
    }
    static PolicySpec exp3m_no_restart(double eta = 0.0, double gamma = 0.0) {
        return {Kind::exp3m_no_restart, eta, gamma, 0};
    }
    static PolicySpec uniform_random() { return {Kind::uniform_random, 0.0, 0.0, 0}; }
};

struct RegretTrace {
    std::vector<double> per_step_policy_payoff;
    std::vector<double> per_step_dynamic_oracle; // exact top-k mean sum
    std::vector<double> per_step_weak_oracle;    // best fixed k-set mean sum
    std::vector<std::size_t> static_oracle_best_set;
    double cumulative_dynamic_regret = 0.0;
    double cumulative_weak_regret = 0.0;
};

RegretTrace run_policy(const DriftEnvironment& env, const PolicySpec& policy,
                       std::uint64_t seed);

// CSV rows: t,policy_payoff,dynamic_oracle,weak_oracle,cum_R,cum_Rhat.
void export_trace(const RegretTrace& trace, const std::string& path);

struct ScalingFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

// Log-log least squares of mean regret against horizon. Needs >= 4 horizons
// and strictly positive regrets.
ScalingFit fit_scaling_exponent(const std::vector<std::pair<double, double>>& horizon_regret);

} // namespace bgcn
