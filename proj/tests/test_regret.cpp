#include "bgcn/regret.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace bgcn;

TEST_CASE("piecewise environment budgets") {
    SUBCASE("no changes means zero budget") {
        const auto env = make_environment(EnvSpec::piecewise_constant(0, 0.5), 3, 1, 300, 1);
        CHECK(env.realized_budget == 0.0);
        CHECK(env.recompute_budget() == 0.0);
    }
    SUBCASE("rotating worst case: two switches, sup 2 each") {
        const auto env =
            make_environment(EnvSpec::piecewise_constant(2, 2.0, 3.0), 3, 1, 300, 1);
        // enumerate: switches at t=100 and t=200, both swapping a 3 and a 1
        CHECK(env.realized_budget == doctest::Approx(4.0));
        CHECK(env.recompute_budget() == doctest::Approx(env.realized_budget));
        // means hold {3, 1} values
        CHECK(env.means.maxCoeff() == doctest::Approx(3.0));
        CHECK(env.means.minCoeff() == doctest::Approx(1.0));
        // exactly one high arm per step
        for (std::size_t t = 0; t < 300; ++t) {
            int high = 0;
            for (std::size_t i = 0; i < 3; ++i)
                if (env.means(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) > 2.0)
                    ++high;
            CHECK(high == 1);
        }
    }
    SUBCASE("more changes than steps is infeasible") {
        CHECK_THROWS_AS(make_environment(EnvSpec::piecewise_constant(500, 1.0), 3, 1, 100, 1),
                        std::invalid_argument);
    }
}

TEST_CASE("log decay environment stays within the lemma budget") {
    const double c_v = 12.0;
    const auto env = make_environment(EnvSpec::log_decay(c_v, 30.0), 4, 1, 1000, 3);
    // realized budget is c_v (H_T - 1), under c_v ln T
    double harmonic = 0.0;
    for (int t = 1; t <= 1000; ++t) harmonic += 1.0 / t;
    CHECK(env.realized_budget == doctest::Approx(c_v * (harmonic - 1.0)).epsilon(1e-9));
    CHECK(env.realized_budget <= c_v * std::log(1000.0));
    CHECK(env.recompute_budget() == doctest::Approx(env.realized_budget));
    // per-step variation never exceeds c_v / (t+1)
    for (std::size_t t = 0; t + 1 < env.horizon; ++t) {
        double sup = 0.0;
        for (std::size_t i = 0; i < env.arm_count; ++i)
            sup = std::max(sup, std::abs(env.means(static_cast<Eigen::Index>(i),
                                                   static_cast<Eigen::Index>(t + 1)) -
                                         env.means(static_cast<Eigen::Index>(i),
                                                   static_cast<Eigen::Index>(t))));
        CHECK(sup <= c_v / static_cast<double>(t + 2) + 1e-12);
    }
}

TEST_CASE("sinusoidal environment hits its target budget") {
    const auto env = make_environment(EnvSpec::sinusoidal(12.0, 2.0), 5, 2, 2000, 9);
    CHECK(env.realized_budget == doctest::Approx(12.0).epsilon(1e-6));
    CHECK(env.means.minCoeff() >= 0.0);
    CHECK(env.means.maxCoeff() <= 2.0);
}

TEST_CASE("environment validation") {
    CHECK_THROWS_AS(make_environment(EnvSpec::log_decay(1.0), 1, 1, 100, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_environment(EnvSpec::log_decay(1.0), 5, 1, 3, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_environment(EnvSpec::log_decay(1.0), 5, 6, 100, 1),
                    std::invalid_argument);
    EnvSpec noisy = EnvSpec::log_decay(1.0, 1.0);
    noisy.noise_half_width = 0.6; // needs 2h < cap
    CHECK_THROWS_AS(make_environment(noisy, 5, 1, 100, 1), std::invalid_argument);
}

TEST_CASE("uniform random on a two-armed stationary gap") {
    // means {1, 0}: dynamic oracle pays 1 per step, uniform wins half the time
    const auto env = make_environment(EnvSpec::piecewise_constant(0, 1.0, 1.0), 2, 1, 10000, 4);
    const RegretTrace trace = run_policy(env, PolicySpec::uniform_random(), 42);
    // Bernoulli(1/2) sum: sd = sqrt(T/4) = 50
    CHECK(std::abs(trace.cumulative_dynamic_regret - 5000.0) <= 3.0 * 50.0);
}

TEST_CASE("tuned exp3m without restarts has small weak regret on stationary env") {
    const auto env = make_environment(EnvSpec::piecewise_constant(0, 1.0, 1.0), 2, 1, 10000, 4);
    const RegretTrace trace = run_policy(env, PolicySpec::exp3m_no_restart(), 7);
    CHECK(trace.cumulative_weak_regret / 10000.0 < 0.1);
}

TEST_CASE("dynamic oracle dominates the static oracle and the policy") {
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        const auto env = make_environment(EnvSpec::log_decay(2.0, 1.0), 5, 2, 500, seed);
        for (const PolicySpec& pol :
             {PolicySpec::uniform_random(), PolicySpec::rexp3_auto(),
              PolicySpec::exp3m_no_restart()}) {
            const RegretTrace trace = run_policy(env, pol, seed + 100);
            CHECK(trace.cumulative_dynamic_regret >= trace.cumulative_weak_regret - 1e-9);
            for (std::size_t t = 0; t < env.horizon; ++t) {
                CHECK(trace.per_step_dynamic_oracle[t] >=
                      trace.per_step_policy_payoff[t] - 1e-9);
                CHECK(trace.per_step_dynamic_oracle[t] >=
                      trace.per_step_weak_oracle[t] - 1e-9);
            }
        }
    }
}

TEST_CASE("dynamic oracle equals the exact top-k mean sum") {
    const auto env = make_environment(EnvSpec::log_decay(3.0, 1.0), 6, 3, 200, 21);
    const RegretTrace trace = run_policy(env, PolicySpec::uniform_random(), 5);
    for (std::size_t t = 0; t < env.horizon; ++t) {
        std::vector<double> col;
        for (std::size_t i = 0; i < env.arm_count; ++i)
            col.push_back(env.means(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)));
        std::sort(col.begin(), col.end(), std::greater<double>());
        CHECK(trace.per_step_dynamic_oracle[t] ==
              doctest::Approx(col[0] + col[1] + col[2]).epsilon(1e-12));
    }
}

TEST_CASE("restart schedule resets learning inside run_policy") {
    // with delta_t = 1 every step restarts: policy stays uniform, so on the
    // stationary gap env the regret is ~half the horizon, like uniform_random
    const auto env = make_environment(EnvSpec::piecewise_constant(0, 1.0, 1.0), 2, 1, 4000, 8);
    const RegretTrace uniformish = run_policy(env, PolicySpec::rexp3_manual(0.5, 0.1, 1), 11);
    CHECK(std::abs(uniformish.cumulative_dynamic_regret - 2000.0) <= 3.0 * std::sqrt(4000.0 / 4.0));
    const RegretTrace learned = run_policy(env, PolicySpec::rexp3_manual(0.5, 0.1, 100000), 11);
    CHECK(learned.cumulative_dynamic_regret < 0.5 * uniformish.cumulative_dynamic_regret);
}

TEST_CASE("scaling exponent fits") {
    SUBCASE("exact two-thirds power law") {
        std::vector<std::pair<double, double>> pts;
        for (double t : {1e3, 3e3, 1e4, 3e4, 1e5}) pts.emplace_back(t, std::pow(t, 2.0 / 3.0));
        const ScalingFit fit = fit_scaling_exponent(pts);
        CHECK(fit.slope == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
        CHECK(fit.r_squared == doctest::Approx(1.0));
    }
    SUBCASE("linear regret detection") {
        std::vector<std::pair<double, double>> pts;
        for (double t : {1e3, 3e3, 1e4, 3e4}) pts.emplace_back(t, 0.37 * t);
        CHECK(fit_scaling_exponent(pts).slope == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("too few points or nonpositive regret rejected") {
        std::vector<std::pair<double, double>> pts = {{1e3, 10.0}, {1e4, 20.0}};
        CHECK_THROWS_AS(fit_scaling_exponent(pts), std::invalid_argument);
        pts = {{1e3, 10.0}, {3e3, 20.0}, {1e4, -1.0}, {3e4, 40.0}};
        CHECK_THROWS_AS(fit_scaling_exponent(pts), std::invalid_argument);
    }
}

TEST_CASE("trace export format") {
    const auto env = make_environment(EnvSpec::piecewise_constant(0, 1.0, 1.0), 2, 1, 5, 4);
    const RegretTrace trace = run_policy(env, PolicySpec::uniform_random(), 3);
    const std::string path =
        (std::filesystem::temp_directory_path() / "bgcn_trace.csv").string();
    export_trace(trace, path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,policy_payoff,dynamic_oracle,weak_oracle,cum_R,cum_Rhat");
    int rows = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 5);
    std::filesystem::remove(path);
}
