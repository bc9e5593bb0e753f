#include "bgcn/bandit.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace bgcn;

namespace {

ArmState state_with(std::vector<double> weights, std::size_t k, double eta, double gamma) {
    ArmState s = ArmState::fresh(weights.size(), k, eta, gamma);
    s.weights = std::move(weights);
    return s;
}

} // namespace

TEST_CASE("exp3 policy") {
    SUBCASE("uniform weights stay uniform for any gamma") {
        for (double gamma : {0.0, 0.3, 1.0}) {
            const auto p = exp3_policy(state_with({1, 1, 1, 1}, 1, 0.1, gamma));
            for (double x : p) CHECK(x == doctest::Approx(0.25));
        }
    }
    SUBCASE("gamma = 1 ignores the weights") {
        const auto p = exp3_policy(state_with({100, 1}, 1, 0.1, 1.0));
        CHECK(p[0] == doctest::Approx(0.5));
        CHECK(p[1] == doctest::Approx(0.5));
    }
    SUBCASE("gamma = 0 is plain normalization") {
        const auto p = exp3_policy(state_with({3, 1}, 1, 0.1, 0.0));
        CHECK(p[0] == doctest::Approx(0.75));
        CHECK(p[1] == doctest::Approx(0.25));
    }
    SUBCASE("sums to one, floor gamma/K, for random weights") {
        Rng rng(5);
        for (int t = 0; t < 2000; ++t) {
            const std::size_t n = 2 + rng.below(7);
            std::vector<double> w(n);
            for (double& x : w) x = std::exp(rng.uniform(-20, 20));
            const double gamma = rng.uniform(0.0, 1.0);
            const auto p = exp3_policy(state_with(std::move(w), 1, 0.1, gamma));
            const double sum = std::accumulate(p.begin(), p.end(), 0.0);
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
            for (double x : p) CHECK(x >= gamma / static_cast<double>(n) - 1e-12);
        }
    }
}

TEST_CASE("exp3m policy") {
    SUBCASE("k = K pins every arm at 1") {
        const auto pol = exp3m_policy(state_with({1, 1, 1}, 3, 0.1, 0.2));
        for (double p : pol.probabilities) CHECK(p == 1.0);
        CHECK(pol.capped.size() == 3);
    }
    SUBCASE("capped example solves a_bar = 2 exactly") {
        const auto pol = exp3m_policy(state_with({10, 1, 1}, 2, 0.1, 0.0));
        CHECK(pol.probabilities[0] == 1.0);
        CHECK(pol.probabilities[1] == 0.5);
        CHECK(pol.probabilities[2] == 0.5);
        REQUIRE(pol.capped.size() == 1);
        CHECK(pol.capped[0] == 0);
    }
    SUBCASE("no weight over the threshold leaves the plain mixture") {
        const auto pol = exp3m_policy(state_with({1, 1, 1, 1}, 2, 0.1, 0.2));
        CHECK(pol.capped.empty());
        for (double p : pol.probabilities) CHECK(p == doctest::Approx(0.5));
    }
    SUBCASE("random states: sum k, entries in (0, 1], capped exactly 1") {
        Rng rng(99);
        for (int t = 0; t < 5000; ++t) {
            const std::size_t n = 2 + rng.below(7);
            const std::size_t k = 1 + rng.below(n);
            std::vector<double> w(n);
            for (double& x : w) x = std::exp(rng.uniform(-30, 30));
            const double gamma = rng.uniform(0.001, 0.999);
            const auto pol = exp3m_policy(state_with(std::move(w), k, 0.1, gamma));
            const double sum =
                std::accumulate(pol.probabilities.begin(), pol.probabilities.end(), 0.0);
            CHECK(sum == doctest::Approx(static_cast<double>(k)).epsilon(1e-9));
            for (std::size_t i = 0; i < n; ++i) {
                CHECK(pol.probabilities[i] > 0.0);
                CHECK(pol.probabilities[i] <= 1.0 + 1e-12);
                if (pol.is_capped[i]) CHECK(pol.probabilities[i] == 1.0);
            }
        }
    }
}

TEST_CASE("depround") {
    Rng rng(7);
    SUBCASE("integral inputs are deterministic") {
        CHECK(depround(1, {1.0}, rng) == std::vector<std::size_t>{0});
        CHECK(depround(2, {1.0, 1.0, 0.0}, rng) == std::vector<std::size_t>{0, 1});
    }
    SUBCASE("arm with p = 1 is always included") {
        for (int t = 0; t < 200; ++t) {
            const auto s = depround(2, {0.5, 0.5, 1.0}, rng);
            CHECK(s.size() == 2);
            CHECK(std::find(s.begin(), s.end(), 2) != s.end());
        }
    }
    SUBCASE("bad sum rejected") {
        CHECK_THROWS_AS(depround(2, {0.5, 0.5, 0.5}, rng), std::invalid_argument);
    }
    SUBCASE("monte carlo marginals match p") {
        const std::vector<double> p = {0.5, 0.5, 1.0};
        const int trials = 100000;
        std::vector<int> hits(3, 0);
        for (int t = 0; t < trials; ++t)
            for (std::size_t i : depround(2, p, rng)) hits[i]++;
        CHECK(hits[2] == trials);
        for (int i = 0; i < 2; ++i) {
            const double freq = static_cast<double>(hits[i]) / trials;
            CHECK(freq == doctest::Approx(0.5).epsilon(0.02)); // ~0.01 absolute
        }
    }
    SUBCASE("cardinality always k on random vectors") {
        for (int t = 0; t < 2000; ++t) {
            const std::size_t n = 2 + rng.below(7);
            const std::size_t k = 1 + rng.below(n);
            // random point with sum k: draw then rescale inside [0,1]
            std::vector<double> p(n);
            double sum = 0.0;
            for (double& x : p) {
                x = rng.uniform(0.01, 1.0);
                sum += x;
            }
            for (double& x : p) x = std::min(1.0, x * static_cast<double>(k) / sum);
            // fix any rescale shortfall on the smallest entries
            double total = std::accumulate(p.begin(), p.end(), 0.0);
            for (std::size_t i = 0; i < n && total < static_cast<double>(k) - 1e-12; ++i) {
                const double add = std::min(1.0 - p[i], static_cast<double>(k) - total);
                p[i] += add;
                total += add;
            }
            const auto s = depround(k, p, rng);
            CHECK(s.size() == k);
        }
    }
}

TEST_CASE("weight updates") {
    SUBCASE("zero reward leaves weights alone") {
        ArmState s = state_with({1, 2, 3}, 1, 0.5, 0.1);
        update_weights(s, {{0, 0.0, 0.5}}, BanditMode::exp3);
        CHECK(s.weights == std::vector<double>{1, 2, 3});
    }
    SUBCASE("eta zero leaves weights alone") {
        ArmState s = state_with({1, 2, 3}, 1, 0.0, 0.1);
        update_weights(s, {{1, 5.0, 0.5}}, BanditMode::exp3);
        CHECK(s.weights == std::vector<double>{1, 2, 3});
    }
    SUBCASE("single importance-weighted update") {
        ArmState s = state_with({1, 1}, 1, 0.1, 0.1);
        update_weights(s, {{0, 1.0, 0.5}}, BanditMode::exp3);
        CHECK(s.weights[0] == doctest::Approx(std::exp(0.2)));
        CHECK(s.weights[1] == 1.0);
    }
    SUBCASE("exp3m skips capped arms") {
        ArmState s = state_with({1, 1}, 1, 0.1, 0.1);
        update_weights(s, {{0, 1.0, 1.0}, {1, 1.0, 0.5}}, BanditMode::exp3m, {1, 0});
        CHECK(s.weights[0] == 1.0);
        CHECK(s.weights[1] == doctest::Approx(std::exp(0.2)));
    }
    SUBCASE("unknown arm rejected") {
        ArmState s = state_with({1, 1}, 1, 0.1, 0.1);
        CHECK_THROWS_AS(update_weights(s, {{5, 1.0, 0.5}}, BanditMode::exp3),
                        std::invalid_argument);
    }
    SUBCASE("renormalization keeps the policy identical") {
        Rng rng(11);
        for (int t = 0; t < 200; ++t) {
            const std::size_t n = 2 + rng.below(5);
            std::vector<double> w(n);
            for (double& x : w) x = std::exp(rng.uniform(0, 10));
            ArmState a = state_with(w, 1, 0.1, 0.3);
            ArmState b = a;
            for (double& x : b.weights) x *= 1e90; // uniform rescale
            const auto pa = exp3_policy(a);
            const auto pb = exp3_policy(b);
            for (std::size_t i = 0; i < n; ++i)
                CHECK(pa[i] == doctest::Approx(pb[i]).epsilon(1e-12));
        }
    }
    SUBCASE("overflow guard rescales by the max") {
        ArmState s = state_with({1e110, 1.0}, 1, 0.0, 0.1);
        update_weights(s, {{0, 0.0, 0.5}}, BanditMode::exp3);
        CHECK(s.weights[0] == 1.0);
        CHECK(s.weights[1] == doctest::Approx(1e-110));
    }
}

TEST_CASE("importance estimate is unbiased under the draw") {
    // E[r_hat_i] = p_i * (r_i / p_i) + (1 - p_i) * 0 = r_i, enumerated
    // exhaustively over single-arm draws for K <= 5.
    Rng rng(13);
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 2 + rng.below(4);
        std::vector<double> w(n);
        for (double& x : w) x = std::exp(rng.uniform(-2, 2));
        const auto p = exp3_policy(state_with(w, 1, 0.1, rng.uniform(0.05, 0.9)));
        for (std::size_t i = 0; i < n; ++i) {
            const double r = rng.uniform(0, 3);
            double expectation = 0.0;
            for (std::size_t drawn = 0; drawn < n; ++drawn)
                expectation += p[drawn] * (drawn == i ? r / p[i] : 0.0);
            CHECK(expectation == doctest::Approx(r).epsilon(1e-9));
        }
    }
}

TEST_CASE("rexp3 restart") {
    ArmState s = state_with({5, 7, 9}, 1, 0.1, 0.1);
    s.epoch_len = 10;
    SUBCASE("off boundary unchanged") {
        maybe_restart(s, 13);
        CHECK(s.weights == std::vector<double>{5, 7, 9});
    }
    SUBCASE("boundary resets to ones") {
        s.steps_since_reset = 9;
        maybe_restart(s, 20);
        CHECK(s.weights == std::vector<double>{1, 1, 1});
        CHECK(s.steps_since_reset == 0);
    }
    SUBCASE("epoch length one resets every step") {
        s.epoch_len = 1;
        for (std::size_t t = 1; t < 5; ++t) {
            s.weights = {2, 2, 2};
            maybe_restart(s, t);
            CHECK(s.weights == std::vector<double>{1, 1, 1});
        }
    }
}

TEST_CASE("theorem 3 hyperparameters") {
    SUBCASE("frozen closed-form values") {
        const auto h = theorem3_hyperparams(3.0, 10, 2, 10000, 12.0);
        CHECK(h.eta == doctest::Approx(1.06036233041e-3).epsilon(1e-9));
        CHECK(h.gamma == doctest::Approx(0.0357753329261).epsilon(1e-9));
        CHECK(h.delta_t == 58); // ceil of 57.3368652795
    }
    SUBCASE("k = K degenerates to no learning") {
        const auto h = theorem3_hyperparams(1.0, 6, 6, 100, 2.0);
        CHECK(h.eta == 0.0);
        CHECK(h.gamma == 0.0);
    }
    SUBCASE("overflow guard") {
        CHECK_THROWS_WITH_AS(theorem3_hyperparams(800.0, 10, 2, 10000, 1.0),
                             doctest::Contains("rescale"), std::invalid_argument);
    }
    SUBCASE("bad shapes rejected") {
        CHECK_THROWS_AS(theorem3_hyperparams(1.0, 1, 1, 100, 1.0), std::invalid_argument);
        CHECK_THROWS_AS(theorem3_hyperparams(1.0, 10, 0, 100, 1.0), std::invalid_argument);
        CHECK_THROWS_AS(theorem3_hyperparams(1.0, 10, 2, 5, 1.0), std::invalid_argument);
    }
}
