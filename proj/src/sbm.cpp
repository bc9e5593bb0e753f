#include "bgcn/sbm.hpp"

#include "bgcn/rng.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace bgcn {

namespace {

// Sparse Bernoulli sampling over an index range via geometric skips.
template <typename Fn>
void sample_pairs(std::size_t begin, std::size_t end, double p, Rng& rng, Fn&& emit) {
    if (p <= 0.0 || begin >= end) return;
    if (p >= 1.0) {
        for (std::size_t j = begin; j < end; ++j) emit(j);
        return;
    }
    const double log1mp = std::log1p(-p);
    std::size_t j = begin;
    while (true) {
        const double u = 1.0 - rng.uniform(); // (0, 1]
        const double skip = std::floor(std::log(u) / log1mp);
        if (skip > static_cast<double>(end - j)) return;
        j += static_cast<std::size_t>(skip);
        if (j >= end) return;
        emit(j);
        ++j;
        if (j >= end) return;
    }
}

} // namespace

SbmDataset make_sbm(const SbmSpec& spec, std::uint64_t seed) {
    if (spec.nodes < 2 || spec.communities < 1 || spec.communities > spec.nodes)
        throw std::invalid_argument("make_sbm: bad node/community counts");
    if (spec.p_in <= 0.0 || spec.p_in > 1.0 || spec.p_out < 0.0 || spec.p_out > 1.0)
        throw std::invalid_argument("make_sbm: probabilities out of range");
    if (spec.train_fraction + spec.val_fraction >= 1.0)
        throw std::invalid_argument("make_sbm: split fractions leave no test nodes");

    const std::size_t n = spec.nodes;
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i)
        labels[i] = static_cast<int>(i * spec.communities / n);

    std::vector<std::pair<NodeId, NodeId>> edges;
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng = Rng::stream(seed, 0xed6e5u, i);
        sample_pairs(i + 1, n, spec.p_out, rng, [&](std::size_t j) {
            if (labels[i] != labels[j])
                edges.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(j));
        });
        // Same-community pairs form a contiguous block to the right of i and
        // are skipped above, so they get their own pass at the full p_in.
        const std::size_t block_end =
            (static_cast<std::size_t>(labels[i]) + 1) * n / spec.communities;
        sample_pairs(i + 1, block_end, spec.p_in, rng, [&](std::size_t j) {
            edges.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(j));
        });
    }

    if (spec.hub_fraction > 0.0 && spec.hub_extra_edges > 0) {
        const std::size_t hubs = std::max<std::size_t>(
            1, static_cast<std::size_t>(spec.hub_fraction * static_cast<double>(n)));
        Rng hrng = Rng::stream(seed, 0x4b9e1u);
        for (std::size_t h = 0; h < hubs; ++h) {
            const std::size_t v = static_cast<std::size_t>(hrng.below(n));
            for (std::size_t e = 0; e < spec.hub_extra_edges; ++e) {
                std::size_t j = v;
                while (j == v) j = static_cast<std::size_t>(hrng.below(n));
                edges.emplace_back(static_cast<NodeId>(v), static_cast<NodeId>(j));
            }
        }
    }

    // Every node needs a neighbor; wire isolated ones to a random node of the
    // same community (or any other node for singleton communities).
    std::vector<std::size_t> degree(n, 0);
    for (const auto& [a, b] : edges) {
        degree[a]++;
        degree[b]++;
    }
    Rng fixup = Rng::stream(seed, 0xf17u);
    for (std::size_t i = 0; i < n; ++i) {
        if (degree[i] > 0) continue;
        const std::size_t lo = static_cast<std::size_t>(labels[i]) * n / spec.communities;
        const std::size_t hi = (static_cast<std::size_t>(labels[i]) + 1) * n / spec.communities;
        std::size_t j = i;
        while (j == i) {
            if (hi - lo > 1)
                j = lo + static_cast<std::size_t>(fixup.below(hi - lo));
            else
                j = static_cast<std::size_t>(fixup.below(n));
        }
        edges.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(j));
        degree[i]++;
        degree[j]++;
    }

    SbmDataset out;
    out.labels = std::move(labels);
    SparseGraph skeleton =
        SparseGraph::from_edges(edges, n, spec.weighting, {}, spec.add_self_loops);

    Eigen::MatrixXd centers(static_cast<Eigen::Index>(spec.communities),
                            static_cast<Eigen::Index>(spec.feature_dim));
    Rng crng = Rng::stream(seed, 0xcee2u);
    for (Eigen::Index c = 0; c < centers.rows(); ++c)
        for (Eigen::Index d = 0; d < centers.cols(); ++d)
            centers(c, d) = spec.center_scale * crng.gaussian();

    Eigen::MatrixXd feats(static_cast<Eigen::Index>(n),
                          static_cast<Eigen::Index>(spec.feature_dim));
    for (std::size_t i = 0; i < n; ++i) {
        Rng frng = Rng::stream(seed, 0xfea2u, i);
        for (Eigen::Index d = 0; d < feats.cols(); ++d)
            feats(static_cast<Eigen::Index>(i), d) =
                centers(out.labels[i], d) + spec.feature_noise * frng.gaussian();
    }
    if (spec.normalize_features) {
        for (Eigen::Index r = 0; r < feats.rows(); ++r) {
            const double norm = feats.row(r).norm();
            if (norm > 0.0) feats.row(r) /= norm;
        }
    }
    out.graph = skeleton.with_features(feats);

    std::vector<NodeId> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng srng = Rng::stream(seed, 0x5b17u);
    for (std::size_t i = n; i > 1; --i)
        std::swap(order[i - 1], order[static_cast<std::size_t>(srng.below(i))]);
    const std::size_t n_train = static_cast<std::size_t>(spec.train_fraction * static_cast<double>(n));
    const std::size_t n_val = static_cast<std::size_t>(spec.val_fraction * static_cast<double>(n));
    out.train_nodes.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    out.val_nodes.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                         order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    out.test_nodes.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
    std::sort(out.train_nodes.begin(), out.train_nodes.end());
    std::sort(out.val_nodes.begin(), out.val_nodes.end());
    std::sort(out.test_nodes.begin(), out.test_nodes.end());
    return out;
}

void save_dataset(const SbmDataset& data, const std::string& dir) {
    std::filesystem::create_directories(dir);
    const auto& g = data.graph;

    // Emit each undirected edge once (v < i side).
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (NodeId v = 0; v < g.node_count(); ++v)
        for (NodeId i : g.neighbors(v))
            if (v <= i) edges.emplace_back(v, i);
    write_edge_list(dir + "/edges.tsv", edges);
    write_feature_matrix(dir + "/features.txt", g.features());

    std::ofstream lab(dir + "/labels.txt");
    if (!lab) throw std::runtime_error("save_dataset: cannot open labels.txt");
    for (int y : data.labels) lab << y << '\n';

    auto write_split = [&dir](const std::string& name, const std::vector<NodeId>& nodes) {
        std::ofstream out(dir + "/" + name);
        if (!out) throw std::runtime_error("save_dataset: cannot open " + name);
        for (NodeId v : nodes) out << v << '\n';
    };
    write_split("train.txt", data.train_nodes);
    write_split("val.txt", data.val_nodes);
    write_split("test.txt", data.test_nodes);
}

std::vector<int> read_label_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_label_file: cannot open " + path);
    std::vector<int> labels;
    int y;
    while (in >> y) labels.push_back(y);
    return labels;
}

std::vector<NodeId> read_index_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_index_file: cannot open " + path);
    std::vector<NodeId> ids;
    std::uint64_t v;
    while (in >> v) ids.push_back(static_cast<NodeId>(v));
    return ids;
}

} // namespace bgcn
