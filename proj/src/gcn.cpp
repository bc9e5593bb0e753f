#include "bgcn/gcn.hpp"

#include "bgcn/errors.hpp"
#include "bgcn/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace bgcn {

namespace {

constexpr char kCheckpointMagic[4] = {'G', 'C', 'W', '1'};

Eigen::MatrixXd apply_activation(const Eigen::MatrixXd& x, Activation act) {
    if (act == Activation::relu) return x.cwiseMax(0.0);
    return x.array().tanh().matrix();
}

// Derivative evaluated from pre-activation and the stored output.
Eigen::MatrixXd activation_grad(const Eigen::MatrixXd& preact, const Eigen::MatrixXd& out,
                                Activation act) {
    if (act == Activation::relu)
        return (preact.array() > 0.0).cast<double>().matrix();
    return (1.0 - out.array().square()).matrix();
}

std::vector<NodeId> sorted_unique(std::vector<NodeId> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

} // namespace

void GcnState::validate() const {
    if (layer_weights.empty()) throw std::invalid_argument("gcn: depth must be >= 1");
    for (std::size_t l = 0; l + 1 < layer_weights.size(); ++l)
        if (layer_weights[l].cols() != layer_weights[l + 1].rows())
            throw std::invalid_argument("gcn: adjacent layer shapes do not chain");
    if (step < 1) throw std::invalid_argument("gcn: step counter starts at 1");
}

GcnState GcnState::init(const std::vector<std::size_t>& dims, Activation act, LrSchedule lr,
                        std::uint64_t seed) {
    if (dims.size() < 2) throw std::invalid_argument("gcn: need at least input and output dims");
    GcnState s;
    s.activation = act;
    s.lr = lr;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const auto rows = static_cast<Eigen::Index>(dims[l]);
        const auto cols = static_cast<Eigen::Index>(dims[l + 1]);
        const double scale = std::sqrt(6.0 / static_cast<double>(dims[l] + dims[l + 1]));
        Eigen::MatrixXd w(rows, cols);
        Rng rng = Rng::stream(seed, 0x57u, l);
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index c = 0; c < cols; ++c) w(r, c) = rng.uniform(-scale, scale);
        s.layer_weights.push_back(std::move(w));
    }
    s.validate();
    return s;
}

void GcnState::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("gcn save: cannot open " + path);
    out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
    const std::uint64_t depth64 = layer_weights.size();
    out.write(reinterpret_cast<const char*>(&depth64), sizeof(depth64));
    for (const auto& w : layer_weights) {
        const std::uint64_t rows = static_cast<std::uint64_t>(w.rows());
        const std::uint64_t cols = static_cast<std::uint64_t>(w.cols());
        out.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
        out.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c) {
                const double x = w(r, c);
                out.write(reinterpret_cast<const char*>(&x), sizeof(x));
            }
    }
    if (!out) throw std::runtime_error("gcn save: write failed for " + path);
}

GcnState GcnState::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("gcn load: cannot open " + path);
    char magic[4];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0)
        throw std::runtime_error("gcn load: bad magic in " + path);
    std::uint64_t depth64 = 0;
    in.read(reinterpret_cast<char*>(&depth64), sizeof(depth64));
    GcnState s;
    for (std::uint64_t l = 0; l < depth64; ++l) {
        std::uint64_t rows = 0, cols = 0;
        in.read(reinterpret_cast<char*>(&rows), sizeof(rows));
        in.read(reinterpret_cast<char*>(&cols), sizeof(cols));
        if (!in) throw std::runtime_error("gcn load: truncated " + path);
        Eigen::MatrixXd w(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c) {
                double x;
                in.read(reinterpret_cast<char*>(&x), sizeof(x));
                if (!in) throw std::runtime_error("gcn load: truncated " + path);
                w(r, c) = x;
            }
        s.layer_weights.push_back(std::move(w));
    }
    s.validate();
    return s;
}

Eigen::Index LayerFrame::index_of(NodeId v) const {
    const auto it = std::lower_bound(nodes.begin(), nodes.end(), v);
    if (it == nodes.end() || *it != v)
        throw std::invalid_argument("trace: node missing from layer frame");
    return static_cast<Eigen::Index>(it - nodes.begin());
}

SamplingPlan make_full_plan(const SparseGraph& g, const std::vector<NodeId>& roots,
                            std::size_t depth) {
    if (depth == 0) throw std::invalid_argument("make_full_plan: depth must be >= 1");
    if (roots.empty()) throw std::invalid_argument("make_full_plan: no roots");
    for (NodeId v : roots)
        if (v >= g.node_count()) throw std::invalid_argument("make_full_plan: root out of range");

    SamplingPlan plan;
    plan.depth = depth;
    plan.estimator = EstimatorKind::biased; // coefficients are all 1: exact
    plan.sites.resize(depth);
    plan.frontiers.resize(depth + 1);
    plan.frontiers[depth] = sorted_unique(roots);

    for (std::size_t l = depth; l-- > 0;) {
        std::vector<NodeId> next;
        for (NodeId v : plan.frontiers[l + 1]) {
            PlanSite site;
            site.root = v;
            auto nbrs = g.neighbors(v);
            site.sampled.assign(nbrs.begin(), nbrs.end());
            site.probs.assign(nbrs.size(), 1.0);
            site.coeffs.assign(nbrs.size(), 1.0);
            next.insert(next.end(), nbrs.begin(), nbrs.end());
            plan.sites[l].push_back(std::move(site));
        }
        plan.frontiers[l] = sorted_unique(std::move(next));
    }
    return plan;
}

double AssumptionMonitor::max_weighted_embedding_norm_seen() const {
    double m = 0.0;
    for (double x : max_z_norm_seen) m = std::max(m, x);
    return m;
}

void AssumptionMonitor::observe_weights(const GcnState& state) {
    for (const auto& w : state.layer_weights)
        max_param_norm_seen = std::max(max_param_norm_seen, spectral_norm(w));
}

void AssumptionMonitor::observe_z_norm(std::size_t layer, double norm) {
    if (max_z_norm_seen.size() <= layer) max_z_norm_seen.resize(layer + 1, 0.0);
    max_z_norm_seen[layer] = std::max(max_z_norm_seen[layer], norm);
}

BoundConstants AssumptionMonitor::bound_constants(const SparseGraph& g) const {
    BoundConstants c;
    c.c_sigma = 1.0;
    c.c_theta = max_param_norm_seen;
    c.c_x = g.constants().feature_aggregate_norm;
    c.a_bar = g.constants().max_edge_weight;
    c.d_bar = static_cast<double>(g.constants().max_degree);
    return c;
}

double spectral_norm(const Eigen::MatrixXd& m, int iterations) {
    if (m.size() == 0) return 0.0;
    Eigen::VectorXd v = Eigen::VectorXd::Ones(m.cols());
    v.normalize();
    double sigma = 0.0;
    for (int i = 0; i < iterations; ++i) {
        Eigen::VectorXd u = m * v;
        const double un = u.norm();
        if (un == 0.0) return 0.0;
        v = m.transpose() * u;
        const double vn = v.norm();
        if (vn == 0.0) return 0.0;
        v /= vn;
        sigma = vn / un;
    }
    return sigma;
}

ForwardTrace forward(const SparseGraph& g, const GcnState& state, const SamplingPlan& plan,
                     AssumptionMonitor* monitor) {
    state.validate();
    if (!g.has_features()) throw std::invalid_argument("forward: graph has no features");
    if (plan.depth != state.depth())
        throw std::invalid_argument("forward: plan depth does not match model depth");
    if (g.feature_dim() != static_cast<std::size_t>(state.layer_weights[0].rows()))
        throw std::invalid_argument("forward: feature dim does not match W(0) rows");

    const std::size_t depth = plan.depth;
    ForwardTrace trace;
    trace.frames.resize(depth + 1);
    trace.aggregates.resize(depth);
    trace.pre_activations.resize(depth);

    trace.frames[0].nodes = plan.frontiers[0];
    trace.frames[0].h.resize(static_cast<Eigen::Index>(plan.frontiers[0].size()),
                             static_cast<Eigen::Index>(g.feature_dim()));
    for (std::size_t r = 0; r < plan.frontiers[0].size(); ++r)
        trace.frames[0].h.row(static_cast<Eigen::Index>(r)) = g.features().row(plan.frontiers[0][r]);

    for (std::size_t l = 0; l < depth; ++l) {
        const auto& sites = plan.sites[l];
        const auto& frame = trace.frames[l];
        const Eigen::Index d_in = state.layer_weights[l].rows();
        Eigen::MatrixXd agg(static_cast<Eigen::Index>(sites.size()), d_in);
        for (std::size_t s = 0; s < sites.size(); ++s) {
            const PlanSite& site = sites[s];
            if (site.sampled.empty())
                throw std::invalid_argument("forward: empty sample at an aggregation site");
            Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(d_in);
            auto nbrs = g.neighbors(site.root);
            auto ws = g.weights(site.root);
            for (std::size_t j = 0; j < site.sampled.size(); ++j) {
                const NodeId i = site.sampled[j];
                const auto it = std::lower_bound(nbrs.begin(), nbrs.end(), i);
                if (it == nbrs.end() || *it != i)
                    throw std::invalid_argument("forward: sampled id is not a neighbor of root");
                const double a = ws[static_cast<std::size_t>(it - nbrs.begin())];
                const Eigen::Index row = frame.index_of(i);
                acc += (site.coeffs[j] * a) * frame.h.row(row);
                if (monitor) monitor->observe_z_norm(l, a * frame.h.row(row).norm());
            }
            agg.row(static_cast<Eigen::Index>(s)) = acc;
        }
        trace.aggregates[l] = agg;
        trace.pre_activations[l] = agg * state.layer_weights[l];
        trace.frames[l + 1].nodes = plan.frontiers[l + 1];
        trace.frames[l + 1].h = apply_activation(trace.pre_activations[l], state.activation);
    }
    return trace;
}

ForwardTrace forward_full(const SparseGraph& g, const GcnState& state,
                          const std::vector<NodeId>& roots, AssumptionMonitor* monitor) {
    return forward(g, state, make_full_plan(g, roots, state.depth()), monitor);
}

namespace {

// Softmax cross-entropy over the trace's top-layer rows; fills row gradients
// (d loss / d logits, already averaged over the batch) when grad != nullptr.
double xent_over_roots(const ForwardTrace& trace, const std::vector<NodeId>& roots,
                       const std::vector<int>& labels, Eigen::MatrixXd* grad) {
    const auto& top = trace.frames.back();
    const Eigen::Index classes = top.h.cols();
    if (grad) grad->setZero(top.h.rows(), classes);
    double loss = 0.0;
    const double inv_b = 1.0 / static_cast<double>(roots.size());
    for (NodeId v : roots) {
        const int label = (v < labels.size()) ? labels[v] : -1;
        if (label < 0 || label >= classes) {
            std::ostringstream msg;
            msg << "loss: node " << v << " has no usable label";
            throw std::invalid_argument(msg.str());
        }
        const Eigen::Index row = top.index_of(v);
        const Eigen::RowVectorXd logits = top.h.row(row);
        const double mx = logits.maxCoeff();
        const Eigen::RowVectorXd shifted = (logits.array() - mx).exp();
        const double z = shifted.sum();
        loss -= inv_b * (std::log(shifted[label]) - std::log(z));
        if (grad) {
            Eigen::RowVectorXd p = shifted / z;
            p[label] -= 1.0;
            grad->row(row) += inv_b * p;
        }
    }
    if (!std::isfinite(loss)) throw NumericError("loss: non-finite value");
    return loss;
}

} // namespace

double sampled_loss(const SparseGraph& g, const GcnState& state, const SamplingPlan& plan,
                    const std::vector<int>& labels) {
    const ForwardTrace trace = forward(g, state, plan);
    return xent_over_roots(trace, plan.roots(), labels, nullptr);
}

SgdStepInfo sgd_step(GcnState& state, const SparseGraph& g, const SamplingPlan& plan,
                     const ForwardTrace& trace, const std::vector<int>& labels,
                     AssumptionMonitor& monitor) {
    if (plan.roots().empty()) throw std::invalid_argument("sgd_step: empty batch");
    const std::size_t depth = plan.depth;

    Eigen::MatrixXd g_top;
    SgdStepInfo info;
    info.loss = xent_over_roots(trace, plan.roots(), labels, &g_top);

    // Reverse accumulation. g_h holds d loss / d h^(l+1) for the frame being
    // processed; scatter pushes it down to the sampled neighbors through the
    // site coefficients and edge weights.
    std::vector<Eigen::MatrixXd> grads(depth);
    Eigen::MatrixXd g_h = g_top;
    for (std::size_t l = depth; l-- > 0;) {
        const Eigen::MatrixXd sigma_grad =
            activation_grad(trace.pre_activations[l], trace.frames[l + 1].h, state.activation);
        const Eigen::MatrixXd gs = g_h.cwiseProduct(sigma_grad);
        grads[l] = trace.aggregates[l].transpose() * gs;
        const Eigen::MatrixXd gu = gs * state.layer_weights[l].transpose();

        const auto& frame = trace.frames[l];
        Eigen::MatrixXd g_below = Eigen::MatrixXd::Zero(frame.h.rows(), frame.h.cols());
        const auto& sites = plan.sites[l];
        for (std::size_t s = 0; s < sites.size(); ++s) {
            const PlanSite& site = sites[s];
            auto nbrs = g.neighbors(site.root);
            auto ws = g.weights(site.root);
            for (std::size_t j = 0; j < site.sampled.size(); ++j) {
                const NodeId i = site.sampled[j];
                const auto it = std::lower_bound(nbrs.begin(), nbrs.end(), i);
                const double a = ws[static_cast<std::size_t>(it - nbrs.begin())];
                g_below.row(frame.index_of(i)) +=
                    (site.coeffs[j] * a) * gu.row(static_cast<Eigen::Index>(s));
            }
        }
        g_h = std::move(g_below);
    }

    for (const auto& grad : grads) {
        const double n = grad.norm();
        if (!std::isfinite(n)) throw NumericError("sgd_step: non-finite gradient");
        info.grad_norm_sum += n;
    }
    info.lr_used = state.lr.at(state.step);

    for (std::size_t l = 0; l < depth; ++l) state.layer_weights[l] -= info.lr_used * grads[l];
    state.step += 1;

    monitor.max_grad_norm_sum_seen = std::max(monitor.max_grad_norm_sum_seen, info.grad_norm_sum);
    monitor.observe_weights(state);
    return info;
}

SgdStepInfo sgd_step(GcnState& state, const SparseGraph& g, const SamplingPlan& plan,
                     const std::vector<int>& labels, AssumptionMonitor& monitor) {
    const ForwardTrace trace = forward(g, state, plan, &monitor);
    return sgd_step(state, g, plan, trace, labels, monitor);
}

BoundCheck embedding_step_bound_check(const SparseGraph& g, const ForwardTrace& before,
                                      const ForwardTrace& after, const AssumptionMonitor& monitor,
                                      std::size_t layer, double alpha_t) {
    if (layer < 1) throw std::invalid_argument("embedding_step_bound_check: layer must be >= 1");
    if (layer >= before.frames.size() || layer >= after.frames.size())
        throw std::invalid_argument("embedding_step_bound_check: layer beyond trace depth");
    const LayerFrame& f0 = before.frames[layer];
    const LayerFrame& f1 = after.frames[layer];
    if (f0.nodes != f1.nodes)
        throw std::invalid_argument("embedding_step_bound_check: traces cover different nodes");

    double max_h_step = 0.0;
    for (Eigen::Index r = 0; r < f0.h.rows(); ++r)
        max_h_step = std::max(max_h_step, (f1.h.row(r) - f0.h.row(r)).norm());

    const BoundConstants c = monitor.bound_constants(g);
    BoundCheck check;
    check.lhs = c.a_bar * max_h_step;
    check.rhs = alpha_t * std::pow(growth_factor(c), static_cast<double>(layer - 1)) * c.a_bar *
                c.c_sigma * c.c_x * monitor.max_grad_norm_sum_seen;
    check.ok = check.lhs <= check.rhs + 1e-12;
    return check;
}

} // namespace bgcn
