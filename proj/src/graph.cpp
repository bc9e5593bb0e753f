#include "bgcn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace bgcn {

namespace {

constexpr char kGraphMagic[4] = {'B', 'G', 'S', '1'};

void write_bytes(std::ofstream& out, const void* data, std::size_t n) {
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

void read_bytes(std::ifstream& in, void* data, std::size_t n) {
    in.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (!in) throw std::runtime_error("graph snapshot: truncated file");
}

template <typename T>
void write_array(std::ofstream& out, const std::vector<T>& v) {
    const std::uint64_t n = v.size();
    write_bytes(out, &n, sizeof(n));
    if (n > 0) write_bytes(out, v.data(), n * sizeof(T));
}

template <typename T>
std::vector<T> read_array(std::ifstream& in) {
    std::uint64_t n = 0;
    read_bytes(in, &n, sizeof(n));
    std::vector<T> v(n);
    if (n > 0) read_bytes(in, v.data(), n * sizeof(T));
    return v;
}

} // namespace

SparseGraph SparseGraph::from_edges(const std::vector<std::pair<NodeId, NodeId>>& edges,
                                    std::size_t node_count, Weighting weighting,
                                    const std::vector<double>& raw_values, bool add_self_loops) {
    if (node_count == 0) throw std::invalid_argument("from_edges: node_count must be positive");
    if (weighting == Weighting::raw && raw_values.size() != edges.size())
        throw std::invalid_argument("from_edges: raw weighting needs one value per edge");

    // Undirected: store each edge in both rows, deduplicated.
    std::vector<std::set<NodeId>> adj(node_count);
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const auto [src, dst] = edges[e];
        if (src >= node_count || dst >= node_count) {
            std::ostringstream msg;
            msg << "from_edges: edge (" << src << ", " << dst << ") out of range for "
                << node_count << " nodes";
            throw std::invalid_argument(msg.str());
        }
        adj[src].insert(dst);
        if (src != dst) adj[dst].insert(src);
    }
    if (add_self_loops) {
        for (NodeId v = 0; v < node_count; ++v) adj[v].insert(v);
    }

    SparseGraph g;
    g.node_count_ = node_count;
    g.offsets_.assign(node_count + 1, 0);
    for (NodeId v = 0; v < node_count; ++v) {
        if (adj[v].empty()) {
            std::ostringstream msg;
            msg << "from_edges: node " << v << " has no neighbors (degree >= 1 required)";
            throw std::invalid_argument(msg.str());
        }
        g.offsets_[v + 1] = g.offsets_[v] + adj[v].size();
        g.neighbor_ids_.insert(g.neighbor_ids_.end(), adj[v].begin(), adj[v].end());
    }

    g.edge_weights_.resize(g.neighbor_ids_.size());
    switch (weighting) {
    case Weighting::uniform:
        std::fill(g.edge_weights_.begin(), g.edge_weights_.end(), 1.0);
        break;
    case Weighting::symmetric_norm:
        for (NodeId v = 0; v < node_count; ++v) {
            const double dv = static_cast<double>(g.degree(v));
            for (std::size_t e = g.offsets_[v]; e < g.offsets_[v + 1]; ++e) {
                const double di = static_cast<double>(g.degree(g.neighbor_ids_[e]));
                g.edge_weights_[e] = 1.0 / std::sqrt(dv * di);
            }
        }
        break;
    case Weighting::raw: {
        // Raw values are given per input edge; apply to both directions.
        // Duplicated input edges keep the last value.
        for (std::size_t e = 0; e < edges.size(); ++e) {
            if (raw_values[e] <= 0.0)
                throw std::invalid_argument("from_edges: edge weights must be > 0");
            const auto [src, dst] = edges[e];
            auto set_weight = [&g](NodeId a, NodeId b, double w) {
                auto nbrs = g.neighbors(a);
                const auto it = std::lower_bound(nbrs.begin(), nbrs.end(), b);
                g.edge_weights_[g.offsets_[a] + static_cast<std::size_t>(it - nbrs.begin())] = w;
            };
            set_weight(src, dst, raw_values[e]);
            set_weight(dst, src, raw_values[e]);
        }
        if (add_self_loops) {
            for (NodeId v = 0; v < node_count; ++v) {
                auto nbrs = g.neighbors(v);
                const auto it = std::lower_bound(nbrs.begin(), nbrs.end(), v);
                if (it != nbrs.end() && *it == v) {
                    auto& w = g.edge_weights_[g.offsets_[v] + static_cast<std::size_t>(it - nbrs.begin())];
                    if (w == 0.0) w = 1.0;
                }
            }
        }
        for (double w : g.edge_weights_)
            if (w <= 0.0) throw std::invalid_argument("from_edges: missing raw weight for an edge");
        break;
    }
    }

    g.constants_ = g.recompute_constants();
    g.validate();
    return g;
}

SparseGraph SparseGraph::with_features(const Eigen::MatrixXd& rows) const {
    if (static_cast<std::size_t>(rows.rows()) != node_count_) {
        std::ostringstream msg;
        msg << "with_features: got " << rows.rows() << " rows for " << node_count_ << " nodes";
        throw std::invalid_argument(msg.str());
    }
    SparseGraph g = *this;
    g.features_ = rows;
    g.constants_ = g.recompute_constants();
    return g;
}

SparseGraph SparseGraph::with_corrupted_features(const std::vector<NodeId>& node_ids,
                                                 double scale) const {
    if (scale <= 0.0) throw std::invalid_argument("with_corrupted_features: scale must be > 0");
    for (NodeId v : node_ids) {
        if (v >= node_count_)
            throw std::invalid_argument("with_corrupted_features: unknown node id");
    }
    SparseGraph g = *this;
    for (NodeId v : node_ids) g.features_.row(v) *= scale;
    g.constants_ = g.recompute_constants();
    return g;
}

double SparseGraph::edge_weight(NodeId v, NodeId i) const {
    auto nbrs = neighbors(v);
    const auto it = std::lower_bound(nbrs.begin(), nbrs.end(), i);
    if (it == nbrs.end() || *it != i)
        throw std::invalid_argument("edge_weight: not a neighbor");
    return edge_weights_[offsets_[v] + static_cast<std::size_t>(it - nbrs.begin())];
}

GraphConstants SparseGraph::recompute_constants() const {
    GraphConstants c;
    for (NodeId v = 0; v < node_count_; ++v) c.max_degree = std::max(c.max_degree, degree(v));
    for (double w : edge_weights_) c.max_edge_weight = std::max(c.max_edge_weight, w);
    if (features_.rows() > 0) {
        for (NodeId v = 0; v < node_count_; ++v) {
            Eigen::VectorXd agg = Eigen::VectorXd::Zero(features_.cols());
            auto nbrs = neighbors(v);
            auto ws = weights(v);
            for (std::size_t e = 0; e < nbrs.size(); ++e)
                agg += ws[e] * features_.row(nbrs[e]).transpose();
            c.feature_aggregate_norm = std::max(c.feature_aggregate_norm, agg.norm());
        }
    }
    return c;
}

void SparseGraph::validate() const {
    if (offsets_.size() != node_count_ + 1 || offsets_.front() != 0 ||
        offsets_.back() != neighbor_ids_.size())
        throw std::invalid_argument("graph: inconsistent CSR offsets");
    for (std::size_t v = 0; v + 1 < offsets_.size(); ++v) {
        if (offsets_[v] > offsets_[v + 1])
            throw std::invalid_argument("graph: offsets must be nondecreasing");
        if (offsets_[v] == offsets_[v + 1])
            throw std::invalid_argument("graph: every node needs at least one neighbor");
    }
    for (NodeId i : neighbor_ids_)
        if (i >= node_count_) throw std::invalid_argument("graph: neighbor id out of range");
    for (double w : edge_weights_)
        if (!(w > 0.0)) throw std::invalid_argument("graph: edge weights must be > 0");
}

void SparseGraph::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save: cannot open " + path);
    write_bytes(out, kGraphMagic, sizeof(kGraphMagic));
    const std::uint64_t n = node_count_;
    write_bytes(out, &n, sizeof(n));
    std::vector<std::uint64_t> offsets(offsets_.begin(), offsets_.end());
    write_array(out, offsets);
    write_array(out, neighbor_ids_);
    write_array(out, edge_weights_);
    const std::uint64_t rows = static_cast<std::uint64_t>(features_.rows());
    const std::uint64_t cols = static_cast<std::uint64_t>(features_.cols());
    write_bytes(out, &rows, sizeof(rows));
    write_bytes(out, &cols, sizeof(cols));
    for (std::uint64_t r = 0; r < rows; ++r)
        for (std::uint64_t c = 0; c < cols; ++c) {
            const double x = features_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
            write_bytes(out, &x, sizeof(x));
        }
    if (!out) throw std::runtime_error("save: write failed for " + path);
}

SparseGraph SparseGraph::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load: cannot open " + path);
    char magic[4];
    read_bytes(in, magic, sizeof(magic));
    if (std::memcmp(magic, kGraphMagic, sizeof(magic)) != 0)
        throw std::runtime_error("load: bad magic in " + path);
    SparseGraph g;
    std::uint64_t n = 0;
    read_bytes(in, &n, sizeof(n));
    g.node_count_ = n;
    const auto offsets = read_array<std::uint64_t>(in);
    g.offsets_.assign(offsets.begin(), offsets.end());
    g.neighbor_ids_ = read_array<NodeId>(in);
    g.edge_weights_ = read_array<double>(in);
    std::uint64_t rows = 0, cols = 0;
    read_bytes(in, &rows, sizeof(rows));
    read_bytes(in, &cols, sizeof(cols));
    g.features_.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::uint64_t r = 0; r < rows; ++r)
        for (std::uint64_t c = 0; c < cols; ++c) {
            double x;
            read_bytes(in, &x, sizeof(x));
            g.features_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = x;
        }
    g.constants_ = g.recompute_constants();
    g.validate();
    return g;
}

std::vector<std::pair<NodeId, NodeId>> read_edge_list(const std::string& path,
                                                      std::size_t* max_node) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_edge_list: cannot open " + path);
    std::vector<std::pair<NodeId, NodeId>> edges;
    std::size_t hi = 0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream ls(line);
        std::uint64_t src, dst;
        if (!(ls >> src >> dst)) {
            std::ostringstream msg;
            msg << "read_edge_list: malformed line " << lineno << " in " << path;
            throw std::runtime_error(msg.str());
        }
        edges.emplace_back(static_cast<NodeId>(src), static_cast<NodeId>(dst));
        hi = std::max<std::size_t>(hi, std::max(src, dst));
    }
    if (max_node) *max_node = hi;
    return edges;
}

void write_edge_list(const std::string& path,
                     const std::vector<std::pair<NodeId, NodeId>>& edges) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_edge_list: cannot open " + path);
    for (const auto& [src, dst] : edges) out << src << '\t' << dst << '\n';
    if (!out) throw std::runtime_error("write_edge_list: write failed for " + path);
}

Eigen::MatrixXd read_feature_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_feature_matrix: cannot open " + path);
    std::size_t n = 0, d = 0;
    if (!(in >> n >> d)) throw std::runtime_error("read_feature_matrix: bad header in " + path);
    Eigen::MatrixXd rows(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < d; ++c)
            if (!(in >> rows(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c))))
                throw std::runtime_error("read_feature_matrix: truncated data in " + path);
    return rows;
}

void write_feature_matrix(const std::string& path, const Eigen::MatrixXd& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_feature_matrix: cannot open " + path);
    out << rows.rows() << ' ' << rows.cols() << '\n';
    char buf[40];
    for (Eigen::Index r = 0; r < rows.rows(); ++r) {
        for (Eigen::Index c = 0; c < rows.cols(); ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g", rows(r, c));
            out << buf << (c + 1 < rows.cols() ? " " : "");
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("write_feature_matrix: write failed for " + path);
}

} // namespace bgcn
