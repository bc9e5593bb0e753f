#include "bgcn/config.hpp"
#include "bgcn/errors.hpp"
#include "bgcn/experiments.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <string>

namespace {

struct VerbArgs {
    std::string config_path;
    std::string out_dir = ".";
    std::int64_t seed = -1; // -1 = take the config's seed
};

void add_common(CLI::App* cmd, VerbArgs& args) {
    cmd->add_option("--config", args.config_path, "experiment config file")->required();
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--seed", args.seed, "RNG seed (overrides the config)");
}

std::uint64_t resolve_seed(const bgcn::ExperimentConfig& cfg, const VerbArgs& args) {
    return args.seed >= 0 ? static_cast<std::uint64_t>(args.seed) : cfg.seed;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"bandit-driven GCN neighbor sampling experiments"};
    app.require_subcommand(1);

    VerbArgs approx, norm, train, regret, budget, synth;
    add_common(app.add_subcommand("approx-error",
                                  "per-step aggregation error of both samplers"),
               approx);
    add_common(app.add_subcommand("norm-bias", "sampling counts under feature corruption"), norm);
    add_common(app.add_subcommand("train", "node classification training curves"), train);
    add_common(app.add_subcommand("regret", "non-stationary bandit regret scaling"), regret);
    add_common(app.add_subcommand("budget-monitor",
                                  "reward variation vs the C_v_bar ln T budget"),
               budget);
    add_common(app.add_subcommand("synth-graph", "generate a synthetic community graph"), synth);

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("approx-error")) {
            const auto cfg = bgcn::parse_config_file(approx.config_path);
            const auto summary =
                bgcn::run_approx_error(cfg, approx.out_dir, resolve_seed(cfg, approx));
            std::printf("approx-error: mean delta_dist %.6g (std %.6g) over %zu trials\n",
                        summary.mean_delta, summary.std_delta, summary.trial_deltas.size());
        } else if (app.got_subcommand("norm-bias")) {
            const auto cfg = bgcn::parse_config_file(norm.config_path);
            const auto summary = bgcn::run_norm_bias(cfg, norm.out_dir, resolve_seed(cfg, norm));
            auto mean = [](const std::vector<double>& xs) {
                double s = 0.0;
                for (double x : xs) s += x;
                return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
            };
            std::printf("norm-bias mean counts: bs %.1f -> %.1f, thanos %.1f -> %.1f\n",
                        mean(summary.bs_normal), mean(summary.bs_scaled),
                        mean(summary.thanos_normal), mean(summary.thanos_scaled));
        } else if (app.got_subcommand("train")) {
            const auto cfg = bgcn::parse_config_file(train.config_path);
            const auto summary =
                bgcn::run_train_accuracy(cfg, train.out_dir, resolve_seed(cfg, train));
            double best = 0.0;
            for (double x : summary.best_val_test_acc) best += x;
            if (!summary.best_val_test_acc.empty())
                best /= static_cast<double>(summary.best_val_test_acc.size());
            std::printf("train: mean best-val test accuracy %.4f over %zu trials\n", best,
                        summary.best_val_test_acc.size());
        } else if (app.got_subcommand("regret")) {
            const auto cfg = bgcn::parse_config_file(regret.config_path);
            const auto summary = bgcn::run_regret(cfg, regret.out_dir, resolve_seed(cfg, regret));
            if (summary.fitted)
                std::printf("regret: fitted slope %.4f (r^2 %.4f)\n", summary.fit.slope,
                            summary.fit.r_squared);
            else
                std::printf("regret: %zu horizons recorded\n",
                            summary.mean_regret_by_horizon.size());
        } else if (app.got_subcommand("budget-monitor")) {
            const auto cfg = bgcn::parse_config_file(budget.config_path);
            const auto result =
                bgcn::run_budget_monitor(cfg, budget.out_dir, resolve_seed(cfg, budget));
            std::printf("budget-monitor: %zu steps, bound %s\n", result.variation.size(),
                        result.all_satisfied ? "satisfied" : "VIOLATED");
            if (!result.all_satisfied) return 4;
        } else if (app.got_subcommand("synth-graph")) {
            const auto cfg = bgcn::parse_config_file(synth.config_path);
            bgcn::run_synth_graph(cfg, synth.out_dir, resolve_seed(cfg, synth));
            std::printf("synth-graph: dataset written to %s\n", synth.out_dir.c_str());
        }
    } catch (const bgcn::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const bgcn::NumericError& e) {
        std::fprintf(stderr, "numeric failure: %s\n", e.what());
        return 3;
    } catch (const bgcn::MonitorViolation& e) {
        std::fprintf(stderr, "monitor violation: %s\n", e.what());
        return 4;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
