#include "bgcn/experiments.hpp"

#include "bgcn/errors.hpp"
#include "bgcn/reward.hpp"
#include "bgcn/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

namespace bgcn {

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void require_gcn(const ExperimentConfig& cfg) {
    if (cfg.model != "gcn")
        throw ConfigError("model '" + cfg.model + "' is not supported; only gcn is in scope");
}

std::vector<std::size_t> model_dims(const ExperimentConfig& cfg, const Dataset& data) {
    int classes = 0;
    for (int y : data.labels) classes = std::max(classes, y + 1);
    std::vector<std::size_t> dims;
    dims.push_back(data.graph.feature_dim());
    for (std::size_t l = 0; l + 1 < cfg.depth; ++l) dims.push_back(cfg.hidden_dim);
    dims.push_back(static_cast<std::size_t>(classes));
    return dims;
}

ModelOptions model_options(const ExperimentConfig& cfg) {
    ModelOptions m;
    m.depth = cfg.depth;
    m.hidden_dim = cfg.hidden_dim;
    m.activation = cfg.activation;
    m.lr = cfg.schedule();
    return m;
}

double mean_of(const std::vector<double>& xs) {
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double std_of(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean_of(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

// Exact first-layer embeddings h^(1) = sigma(sum_j a_ij x_j W^(0)) for a set
// of nodes, used by the budget monitor's probe rewards.
Eigen::MatrixXd layer1_embeddings(const SparseGraph& g, const GcnState& state,
                                  const std::vector<NodeId>& ids) {
    Eigen::MatrixXd agg(static_cast<Eigen::Index>(ids.size()), g.features().cols());
    for (std::size_t r = 0; r < ids.size(); ++r) {
        Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(g.features().cols());
        auto nbrs = g.neighbors(ids[r]);
        auto ws = g.weights(ids[r]);
        for (std::size_t e = 0; e < nbrs.size(); ++e) acc += ws[e] * g.features().row(nbrs[e]);
        agg.row(static_cast<Eigen::Index>(r)) = acc;
    }
    Eigen::MatrixXd pre = agg * state.layer_weights[0];
    if (state.activation == Activation::relu) return pre.cwiseMax(0.0);
    return pre.array().tanh().matrix();
}

} // namespace

Dataset load_dataset(const ExperimentConfig& cfg) {
    if (cfg.edges_path.empty() || cfg.features_path.empty())
        throw ConfigError("dataset: [graph] edges and features paths are required");
    std::size_t max_node = 0;
    const auto edges = read_edge_list(cfg.edges_path, &max_node);
    const Eigen::MatrixXd feats = read_feature_matrix(cfg.features_path);
    const std::size_t nodes = static_cast<std::size_t>(feats.rows());
    if (max_node >= nodes) throw ConfigError("dataset: edge list references unknown nodes");
    Dataset d;
    d.graph = SparseGraph::from_edges(edges, nodes, cfg.weighting, {}, cfg.add_self_loops)
                  .with_features(feats);
    if (!cfg.labels_path.empty()) {
        d.labels = read_label_file(cfg.labels_path);
        if (d.labels.size() != nodes) throw ConfigError("dataset: label count mismatch");
    }
    if (!cfg.train_path.empty()) d.train_nodes = read_index_file(cfg.train_path);
    if (!cfg.val_path.empty()) d.val_nodes = read_index_file(cfg.val_path);
    if (!cfg.test_path.empty()) d.test_nodes = read_index_file(cfg.test_path);
    return d;
}

Dataset dataset_from_sbm(const SbmDataset& sbm) {
    Dataset d;
    d.graph = sbm.graph;
    d.labels = sbm.labels;
    d.train_nodes = sbm.train_nodes;
    d.val_nodes = sbm.val_nodes;
    d.test_nodes = sbm.test_nodes;
    return d;
}

TrainLoop::TrainLoop(const Dataset& data, const SamplerConfig& sampler, const ModelOptions& model,
                     std::size_t batch_size, std::uint64_t seed)
    : data_(data), policies_(sampler, seed), seed_(seed),
      batch_size_(std::max<std::size_t>(1, batch_size)) {
    if (data.train_nodes.empty()) throw std::invalid_argument("train loop: no training nodes");
    if (data.labels.empty()) throw std::invalid_argument("train loop: no labels");
    int classes = 0;
    for (int y : data.labels) classes = std::max(classes, y + 1);
    std::vector<std::size_t> dims;
    dims.push_back(data.graph.feature_dim());
    for (std::size_t l = 0; l + 1 < model.depth; ++l) dims.push_back(model.hidden_dim);
    dims.push_back(static_cast<std::size_t>(classes));
    model_ = GcnState::init(dims, model.activation, model.lr, seed);
    monitor_.observe_weights(model_);
    epoch_order_ = data.train_nodes;
}

std::size_t TrainLoop::steps_per_epoch() const {
    return (data_.train_nodes.size() + batch_size_ - 1) / batch_size_;
}

std::vector<NodeId> TrainLoop::next_batch() {
    if (cursor_ == 0) {
        Rng rng = Rng::stream(seed_, 0xe90cu, epoch_);
        for (std::size_t i = epoch_order_.size(); i > 1; --i)
            std::swap(epoch_order_[i - 1], epoch_order_[static_cast<std::size_t>(rng.below(i))]);
    }
    const std::size_t end = std::min(cursor_ + batch_size_, epoch_order_.size());
    std::vector<NodeId> batch(epoch_order_.begin() + static_cast<std::ptrdiff_t>(cursor_),
                              epoch_order_.begin() + static_cast<std::ptrdiff_t>(end));
    cursor_ = end;
    if (cursor_ >= epoch_order_.size()) {
        cursor_ = 0;
        epoch_ += 1;
    }
    return batch;
}

SgdStepInfo TrainLoop::step(const StepObserver& observer) {
    const std::vector<NodeId> batch = next_batch();
    const SamplingPlan plan = build_plan(data_.graph, policies_, batch, model_.depth());
    const ForwardTrace trace = forward(data_.graph, model_, plan, &monitor_);
    if (observer) observer(plan, trace);
    feedback(data_.graph, policies_, plan, trace, reward_sink_);
    return sgd_step(model_, data_.graph, plan, trace, data_.labels, monitor_);
}

double TrainLoop::accuracy(const std::vector<NodeId>& nodes) const {
    if (nodes.empty()) return 0.0;
    const ForwardTrace trace = forward_full(data_.graph, model_, nodes);
    const LayerFrame& top = trace.frames.back();
    std::size_t hits = 0;
    for (NodeId v : nodes) {
        Eigen::Index best = 0;
        top.h.row(top.index_of(v)).maxCoeff(&best);
        if (static_cast<int>(best) == data_.labels[v]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(nodes.size());
}

ResultWriter::ResultWriter(const std::string& out_dir, const std::string& experiment,
                           const ExperimentConfig& cfg, std::uint64_t seed)
    : experiment_(experiment) {
    std::filesystem::create_directories(out_dir);
    const std::string manifest_path = out_dir + "/" + experiment + "_manifest.txt";
    std::ofstream manifest(manifest_path);
    if (!manifest) throw std::runtime_error("cannot open " + manifest_path);
    manifest << render_manifest(cfg, experiment, seed);
    results_path_ = out_dir + "/" + experiment + "_results.csv";
    buffer_ = "experiment,seed,step,metric,value\n";
}

ResultWriter::~ResultWriter() {
    std::ofstream out(results_path_);
    if (out) out << buffer_;
}

void ResultWriter::row(std::uint64_t seed, std::size_t step, const std::string& metric,
                       double value) {
    std::ostringstream line;
    line << experiment_ << ',' << seed << ',' << step << ',' << metric << ',' << fmt(value)
         << '\n';
    buffer_ += line.str();
}

ApproxErrorTrial approx_error_trial(const Dataset& data, const ExperimentConfig& cfg,
                                    std::uint64_t trial_seed) {
    require_gcn(cfg);
    const SparseGraph& g = data.graph;

    SamplerConfig our_cfg = cfg.sampler;
    SamplerConfig bs_cfg = cfg.sampler;
    bs_cfg.kind = SamplerKind::banditsampler;
    bs_cfg.eta = cfg.bs_eta;
    bs_cfg.estimator = EstimatorKind::unbiased;
    bs_cfg.delta_t = 0; // restarts are the Rexp3 ingredient, not BanditSampler's
    PolicyTable ours(our_cfg, Rng::mix(trial_seed, 0x0a));
    PolicyTable bs(bs_cfg, Rng::mix(trial_seed, 0x0b));

    GcnState model = GcnState::init(model_dims(cfg, data), cfg.activation, cfg.schedule(),
                                    trial_seed);
    AssumptionMonitor monitor;

    std::vector<NodeId> order = data.train_nodes;
    ApproxErrorTrial out;
    std::size_t cursor = 0, epoch = 0;

    for (std::size_t t = 0; t < cfg.steps; ++t) {
        if (cursor == 0) {
            Rng rng = Rng::stream(trial_seed, 0xba7cu, epoch);
            for (std::size_t i = order.size(); i > 1; --i)
                std::swap(order[i - 1], order[static_cast<std::size_t>(rng.below(i))]);
        }
        const std::size_t end = std::min(cursor + cfg.batch_size, order.size());
        std::vector<NodeId> batch(order.begin() + static_cast<std::ptrdiff_t>(cursor),
                                  order.begin() + static_cast<std::ptrdiff_t>(end));
        cursor = end;
        if (cursor >= order.size()) {
            cursor = 0;
            ++epoch;
        }

        // Exact layer-1 aggregates come from the full plan; both samplers are
        // measured against them under the same shared weights.
        const SamplingPlan full_plan = make_full_plan(g, batch, cfg.depth);
        const ForwardTrace full_trace = forward(g, model, full_plan);

        const SamplingPlan our_plan = build_plan(g, ours, batch, cfg.depth);
        const ForwardTrace our_trace = forward(g, model, our_plan);
        const SamplingPlan bs_plan = build_plan(g, bs, batch, cfg.depth);
        const ForwardTrace bs_trace = forward(g, model, bs_plan);

        const std::size_t agg_layer = cfg.depth - 1; // aggregates of layer-(depth-1) embeddings
        double dist_our = 0.0, dist_bs = 0.0;
        for (Eigen::Index r = 0; r < full_trace.aggregates[agg_layer].rows(); ++r) {
            dist_our += (our_trace.aggregates[agg_layer].row(r) -
                         full_trace.aggregates[agg_layer].row(r))
                            .norm();
            dist_bs += (bs_trace.aggregates[agg_layer].row(r) -
                        full_trace.aggregates[agg_layer].row(r))
                           .norm();
        }
        out.dist_our.push_back(dist_our);
        out.dist_bs.push_back(dist_bs);

        feedback(g, ours, our_plan, our_trace);
        feedback(g, bs, bs_plan, bs_trace);

        // Shared trajectory: the model advances on the exact full-batch
        // gradient so neither sampler's noise steers the weights.
        sgd_step(model, g, full_plan, full_trace, data.labels, monitor);
    }
    out.delta_dist = std::accumulate(out.dist_our.begin(), out.dist_our.end(), 0.0) -
                     std::accumulate(out.dist_bs.begin(), out.dist_bs.end(), 0.0);
    return out;
}

ApproxErrorSummary run_approx_error(const ExperimentConfig& cfg, const std::string& out_dir,
                                    std::uint64_t seed) {
    require_gcn(cfg);
    const Dataset data = load_dataset(cfg);
    ResultWriter writer(out_dir, "approx_error", cfg, seed);
    ApproxErrorSummary summary;
    for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
        const std::uint64_t trial_seed = Rng::mix(seed, trial);
        const ApproxErrorTrial res = approx_error_trial(data, cfg, trial_seed);
        double cum = 0.0;
        for (std::size_t t = 0; t < res.dist_bs.size(); ++t) {
            writer.row(trial_seed, t + 1, "dist_bs", res.dist_bs[t]);
            writer.row(trial_seed, t + 1, "dist_our", res.dist_our[t]);
            cum += res.dist_our[t] - res.dist_bs[t];
            writer.row(trial_seed, t + 1, "delta_dist_cum", cum);
        }
        writer.row(trial_seed, res.dist_bs.size(), "delta_dist", res.delta_dist);
        summary.trial_deltas.push_back(res.delta_dist);
    }
    summary.mean_delta = mean_of(summary.trial_deltas);
    summary.std_delta = std_of(summary.trial_deltas);
    writer.row(seed, cfg.steps, "delta_dist_mean", summary.mean_delta);
    writer.row(seed, cfg.steps, "delta_dist_std", summary.std_delta);
    return summary;
}

NormBiasRun norm_bias_single_run(const Dataset& data, const ExperimentConfig& cfg,
                                 SamplerKind sampler, const std::vector<NodeId>& marked,
                                 bool corrupted, std::uint64_t trial_seed) {
    require_gcn(cfg);
    Dataset run_data = data;
    if (corrupted)
        run_data.graph = data.graph.with_corrupted_features(marked, cfg.corrupt_scale);

    SamplerConfig scfg = cfg.sampler;
    scfg.kind = sampler;
    if (sampler == SamplerKind::banditsampler) {
        scfg.eta = cfg.bs_eta;
        scfg.estimator = EstimatorKind::unbiased;
        scfg.delta_t = 0;
    } else {
        scfg.estimator = cfg.estimator_given ? cfg.sampler.estimator
                                             : SamplerConfig::default_estimator(sampler);
    }

    TrainLoop loop(run_data, scfg, model_options(cfg), cfg.batch_size, trial_seed);
    std::vector<std::uint8_t> is_marked(run_data.graph.node_count(), 0);
    for (NodeId v : marked) is_marked[v] = 1;

    NormBiasRun out;
    const std::size_t per_epoch = loop.steps_per_epoch();
    double best_val = -1.0;
    for (std::size_t e = 0; e < cfg.epochs; ++e) {
        double count = 0.0;
        for (std::size_t s = 0; s < per_epoch; ++s) {
            loop.step([&](const SamplingPlan& plan, const ForwardTrace&) {
                for (const auto& layer_sites : plan.sites)
                    for (const PlanSite& site : layer_sites)
                        for (NodeId i : site.sampled)
                            if (is_marked[i]) count += 1.0;
            });
        }
        out.per_epoch_counts.push_back(count);
        const double val = loop.accuracy(run_data.val_nodes);
        if (val > best_val) {
            best_val = val;
            out.test_accuracy = loop.accuracy(run_data.test_nodes);
        }
    }
    out.mean_count = mean_of(out.per_epoch_counts);
    return out;
}

NormBiasSummary run_norm_bias(const ExperimentConfig& cfg, const std::string& out_dir,
                              std::uint64_t seed) {
    require_gcn(cfg);
    const Dataset data = load_dataset(cfg);
    ResultWriter writer(out_dir, "norm_bias", cfg, seed);
    NormBiasSummary summary;

    const std::size_t n_marked = std::max<std::size_t>(
        1, static_cast<std::size_t>(cfg.corrupt_fraction *
                                    static_cast<double>(data.train_nodes.size())));

    for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
        const std::uint64_t trial_seed = Rng::mix(seed, trial);
        std::vector<NodeId> pool = data.train_nodes;
        Rng rng = Rng::stream(trial_seed, 0xc0bbu);
        for (std::size_t i = pool.size(); i > 1; --i)
            std::swap(pool[i - 1], pool[static_cast<std::size_t>(rng.below(i))]);
        std::vector<NodeId> marked(pool.begin(),
                                   pool.begin() + static_cast<std::ptrdiff_t>(n_marked));
        std::sort(marked.begin(), marked.end());

        struct Cell {
            SamplerKind kind;
            bool corrupted;
            const char* name;
            std::vector<double>* sink;
        };
        const Cell cells[] = {
            {SamplerKind::banditsampler, false, "bs_normal_count", &summary.bs_normal},
            {SamplerKind::banditsampler, true, "bs_scaled_count", &summary.bs_scaled},
            {SamplerKind::thanos, false, "thanos_normal_count", &summary.thanos_normal},
            {SamplerKind::thanos, true, "thanos_scaled_count", &summary.thanos_scaled},
        };
        for (const Cell& cell : cells) {
            const NormBiasRun run =
                norm_bias_single_run(data, cfg, cell.kind, marked, cell.corrupted, trial_seed);
            for (std::size_t e = 0; e < run.per_epoch_counts.size(); ++e)
                writer.row(trial_seed, e + 1, cell.name, run.per_epoch_counts[e]);
            writer.row(trial_seed, cfg.epochs, std::string(cell.name) + "_mean", run.mean_count);
            writer.row(trial_seed, cfg.epochs, std::string(cell.name) + "_test_acc",
                       run.test_accuracy);
            cell.sink->push_back(run.mean_count);
        }
    }
    return summary;
}

TrainAccuracySummary run_train_accuracy(const ExperimentConfig& cfg, const std::string& out_dir,
                                        std::uint64_t seed) {
    require_gcn(cfg);
    const Dataset data = load_dataset(cfg);
    if (data.val_nodes.empty() || data.test_nodes.empty())
        throw ConfigError("train: val/test split files are required");
    ResultWriter writer(out_dir, "train", cfg, seed);
    TrainAccuracySummary summary;
    for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
        const std::uint64_t trial_seed = Rng::mix(seed, trial);
        TrainLoop loop(data, cfg.sampler, model_options(cfg), cfg.batch_size, trial_seed);
        double best_val = -1.0, best_test = 0.0;
        for (std::size_t e = 0; e < cfg.epochs; ++e) {
            const std::size_t per_epoch = loop.steps_per_epoch();
            double loss = 0.0;
            for (std::size_t s = 0; s < per_epoch; ++s) loss += loop.step().loss;
            const double val = loop.accuracy(data.val_nodes);
            const double test = loop.accuracy(data.test_nodes);
            writer.row(trial_seed, e + 1, "train_loss", loss / static_cast<double>(per_epoch));
            writer.row(trial_seed, e + 1, "val_acc", val);
            writer.row(trial_seed, e + 1, "test_acc", test);
            if (val > best_val) {
                best_val = val;
                best_test = test;
            }
        }
        writer.row(trial_seed, cfg.epochs, "best_val_test_acc", best_test);
        summary.best_val_test_acc.push_back(best_test);
    }
    return summary;
}

BudgetMonitorResult budget_monitor_trial(const Dataset& data, const ExperimentConfig& cfg,
                                         std::uint64_t seed) {
    require_gcn(cfg);
    if (cfg.lr_schedule != "inverse_t")
        throw ConfigError("budget-monitor: the variation bound needs lr_schedule = inverse_t");

    TrainLoop loop(data, cfg.sampler, model_options(cfg), cfg.batch_size, seed);
    const SparseGraph& g = data.graph;

    // Fixed probe sites: a few roots with one frozen sampled neighbor set
    // each. Rewards are recomputed from exact embeddings every step, so the
    // only moving part is the weight trajectory.
    struct Probe {
        NodeId root;
        std::vector<NodeId> sampled;
        std::vector<double> edge_w;
    };
    std::vector<Probe> probes;
    Rng prng = Rng::stream(seed, 0x9206eu);
    std::vector<NodeId> pool = data.train_nodes;
    for (std::size_t i = pool.size(); i > 1; --i)
        std::swap(pool[i - 1], pool[static_cast<std::size_t>(prng.below(i))]);
    const std::size_t n_probes = std::min<std::size_t>(std::max<std::size_t>(cfg.probe_roots, 1),
                                                       pool.size());
    std::vector<NodeId> probe_neighbor_ids;
    for (std::size_t p = 0; p < n_probes; ++p) {
        Probe probe;
        probe.root = pool[p];
        auto nbrs = g.neighbors(probe.root);
        auto ws = g.weights(probe.root);
        const std::size_t take = std::min<std::size_t>(cfg.sampler.k, nbrs.size());
        std::vector<std::size_t> idx(nbrs.size());
        std::iota(idx.begin(), idx.end(), 0);
        for (std::size_t j = 0; j < take; ++j) {
            const std::size_t pick = j + static_cast<std::size_t>(prng.below(idx.size() - j));
            std::swap(idx[j], idx[pick]);
        }
        for (std::size_t j = 0; j < take; ++j) {
            probe.sampled.push_back(nbrs[idx[j]]);
            probe.edge_w.push_back(ws[idx[j]]);
            probe_neighbor_ids.push_back(nbrs[idx[j]]);
        }
        probes.push_back(std::move(probe));
    }
    std::sort(probe_neighbor_ids.begin(), probe_neighbor_ids.end());
    probe_neighbor_ids.erase(std::unique(probe_neighbor_ids.begin(), probe_neighbor_ids.end()),
                             probe_neighbor_ids.end());

    auto probe_rewards = [&](const GcnState& state) {
        const Eigen::MatrixXd h1 = layer1_embeddings(g, state, probe_neighbor_ids);
        auto h1_of = [&](NodeId v) {
            const auto it =
                std::lower_bound(probe_neighbor_ids.begin(), probe_neighbor_ids.end(), v);
            return h1.row(static_cast<Eigen::Index>(it - probe_neighbor_ids.begin()));
        };
        std::vector<double> rewards;
        for (const Probe& probe : probes) {
            std::vector<Eigen::VectorXd> zs;
            for (std::size_t j = 0; j < probe.sampled.size(); ++j)
                zs.push_back(probe.edge_w[j] * h1_of(probe.sampled[j]).transpose());
            for (const auto& z : zs)
                rewards.push_back(reward_thanos_practical(z, zs, zs.size()));
        }
        return rewards;
    };

    BudgetMonitorResult out;
    std::vector<RewardRecord> step_rewards;
    loop.collect_rewards(&step_rewards);
    std::vector<double> prev = probe_rewards(loop.model());
    double running = 0.0;
    for (std::size_t t = 1; t <= cfg.steps; ++t) {
        if (t > 1) {
            const std::vector<double> cur = probe_rewards(loop.model());
            double sup = 0.0;
            for (std::size_t i = 0; i < cur.size(); ++i)
                sup = std::max(sup, std::abs(cur[i] - prev[i]));
            running += sup;
            prev = cur;
            const double c_v_bar = variation_budget_coefficient(
                loop.monitor().bound_constants(g), loop.monitor().max_grad_norm_sum_seen, 1);
            const double bound = c_v_bar * std::log(static_cast<double>(t));
            out.variation.push_back(sup);
            out.running_sum.push_back(running);
            out.bound.push_back(bound);
            if (running > bound + 1e-9) out.all_satisfied = false;
        } else {
            out.variation.push_back(0.0);
            out.running_sum.push_back(0.0);
            out.bound.push_back(0.0);
        }
        step_rewards.clear();
        loop.step();
        // Lemma-1 ceiling on every reward handed out this step, evaluated
        // with the running max over observed weighted-embedding norms.
        const double zmax = loop.monitor().max_weighted_embedding_norm_seen();
        out.final_reward_ceiling = 3.0 * zmax * zmax;
        for (const RewardRecord& rec : step_rewards) {
            out.max_abs_reward_seen = std::max(out.max_abs_reward_seen, std::abs(rec.reward));
            if (std::abs(rec.reward) > out.final_reward_ceiling + 1e-12)
                ++out.reward_bound_violations;
        }
    }
    return out;
}

BudgetMonitorResult run_budget_monitor(const ExperimentConfig& cfg, const std::string& out_dir,
                                       std::uint64_t seed) {
    const Dataset data = load_dataset(cfg);
    ResultWriter writer(out_dir, "budget_monitor", cfg, seed);
    const BudgetMonitorResult res = budget_monitor_trial(data, cfg, seed);
    for (std::size_t t = 0; t < res.variation.size(); ++t) {
        writer.row(seed, t + 1, "variation", res.variation[t]);
        writer.row(seed, t + 1, "running_sum", res.running_sum[t]);
        writer.row(seed, t + 1, "bound", res.bound[t]);
        writer.row(seed, t + 1, "satisfied",
                   (t == 0 || res.running_sum[t] <= res.bound[t] + 1e-9) ? 1.0 : 0.0);
    }
    writer.row(seed, res.variation.size(), "all_satisfied", res.all_satisfied ? 1.0 : 0.0);
    return res;
}

RegretSummary run_regret(const ExperimentConfig& cfg, const std::string& out_dir,
                         std::uint64_t seed) {
    ResultWriter writer(out_dir, "regret", cfg, seed);

    EnvSpec spec;
    if (cfg.env == "log_decay") spec = EnvSpec::log_decay(cfg.env_c_v_bar, cfg.env_cap);
    else if (cfg.env == "piecewise_constant")
        spec = EnvSpec::piecewise_constant(cfg.env_changes, cfg.env_gap, cfg.env_cap);
    else if (cfg.env == "sinusoidal") spec = EnvSpec::sinusoidal(cfg.env_budget, cfg.env_cap);
    else throw ConfigError("regret: unknown env '" + cfg.env + "'");
    spec.noise_half_width = cfg.env_noise;

    PolicySpec policy;
    if (cfg.policy == "rexp3_auto") policy = PolicySpec::rexp3_auto();
    else if (cfg.policy == "rexp3_manual")
        policy = PolicySpec::rexp3_manual(cfg.sampler.eta, cfg.sampler.gamma, cfg.sampler.delta_t);
    else if (cfg.policy == "exp3m_no_restart")
        policy = PolicySpec::exp3m_no_restart(cfg.sampler.eta, cfg.sampler.gamma);
    else if (cfg.policy == "uniform_random") policy = PolicySpec::uniform_random();
    else throw ConfigError("regret: unknown policy '" + cfg.policy + "'");

    RegretSummary summary;
    for (std::size_t horizon : cfg.horizons) {
        const DriftEnvironment env = make_environment(spec, cfg.arms, cfg.plays, horizon, seed);
        writer.row(seed, horizon, "realized_budget", env.realized_budget);
        std::vector<double> regrets;
        for (std::size_t s = 0; s < cfg.env_seeds; ++s) {
            const std::uint64_t run_seed = Rng::mix(seed, Rng::mix(horizon, s));
            const RegretTrace trace = run_policy(env, policy, run_seed);
            writer.row(run_seed, horizon, "dynamic_regret", trace.cumulative_dynamic_regret);
            writer.row(run_seed, horizon, "weak_regret", trace.cumulative_weak_regret);
            regrets.push_back(trace.cumulative_dynamic_regret);
            if (s == 0)
                export_trace(trace, out_dir + "/regret_trace_T" + std::to_string(horizon) +
                                        ".csv");
        }
        const double mean_r = mean_of(regrets);
        writer.row(seed, horizon, "mean_dynamic_regret", mean_r);
        summary.mean_regret_by_horizon.emplace_back(static_cast<double>(horizon), mean_r);
    }
    if (summary.mean_regret_by_horizon.size() >= 4) {
        bool positive = true;
        for (const auto& [t, r] : summary.mean_regret_by_horizon)
            if (!(r > 0.0)) positive = false;
        if (positive) {
            summary.fit = fit_scaling_exponent(summary.mean_regret_by_horizon);
            summary.fitted = true;
            writer.row(seed, 0, "fit_slope", summary.fit.slope);
            writer.row(seed, 0, "fit_intercept", summary.fit.intercept);
            writer.row(seed, 0, "fit_r_squared", summary.fit.r_squared);
        }
    }
    return summary;
}

void run_synth_graph(const ExperimentConfig& cfg, const std::string& out_dir,
                     std::uint64_t seed) {
    ResultWriter writer(out_dir, "synth_graph", cfg, seed);
    SbmSpec spec;
    spec.nodes = cfg.synth_nodes;
    spec.communities = cfg.synth_communities;
    spec.p_in = cfg.synth_p_in;
    spec.p_out = cfg.synth_p_out;
    spec.feature_dim = cfg.synth_feature_dim;
    spec.center_scale = cfg.synth_center_scale;
    spec.feature_noise = cfg.synth_feature_noise;
    spec.train_fraction = cfg.synth_train_fraction;
    spec.val_fraction = cfg.synth_val_fraction;
    spec.weighting = cfg.weighting;
    spec.add_self_loops = cfg.add_self_loops;
    const SbmDataset data = make_sbm(spec, seed);
    save_dataset(data, out_dir);
    writer.row(seed, 0, "nodes", static_cast<double>(data.graph.node_count()));
    writer.row(seed, 0, "directed_edges", static_cast<double>(data.graph.edge_count()));
    writer.row(seed, 0, "train_nodes", static_cast<double>(data.train_nodes.size()));
    writer.row(seed, 0, "val_nodes", static_cast<double>(data.val_nodes.size()));
    writer.row(seed, 0, "test_nodes", static_cast<double>(data.test_nodes.size()));
}

} // namespace bgcn
