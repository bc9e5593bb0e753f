#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace bgcn {

using NodeId = std::uint32_t;

enum class Weighting { symmetric_norm, uniform, raw };

// Aggregate bounds over a graph: max degree, max edge weight and the largest
// feature aggregate norm max_v ||sum_i a_vi x_i||. Recomputable by full scan.
struct GraphConstants {
    std::size_t max_degree = 0;
    double max_edge_weight = 0.0;
    double feature_aggregate_norm = 0.0;
};

// Immutable undirected graph in CSR form with per-edge aggregation weights
// and one dense feature row per node. Neighbor lists are sorted by id.
// Construction validates everything; after that the structure never changes
// (feature corruption returns a new value), so concurrent reads are safe.
class SparseGraph {
  public:
    SparseGraph() = default;

    static SparseGraph from_edges(const std::vector<std::pair<NodeId, NodeId>>& edges,
                                  std::size_t node_count, Weighting weighting,
                                  const std::vector<double>& raw_values = {},
                                  bool add_self_loops = false);

    SparseGraph with_features(const Eigen::MatrixXd& rows) const;

    // Feature rows of `node_ids` multiplied elementwise by `scale`;
    // everything else identical.
    SparseGraph with_corrupted_features(const std::vector<NodeId>& node_ids, double scale) const;

    std::size_t node_count() const { return node_count_; }
    std::size_t edge_count() const { return neighbor_ids_.size(); }
    std::size_t feature_dim() const { return static_cast<std::size_t>(features_.cols()); }
    bool has_features() const { return features_.rows() > 0; }

    std::size_t degree(NodeId v) const { return offsets_[v + 1] - offsets_[v]; }

    std::span<const NodeId> neighbors(NodeId v) const {
        return {neighbor_ids_.data() + offsets_[v], degree(v)};
    }
    std::span<const double> weights(NodeId v) const {
        return {edge_weights_.data() + offsets_[v], degree(v)};
    }

    // Weight of the edge (v, i); throws if i is not a neighbor of v.
    double edge_weight(NodeId v, NodeId i) const;

    const Eigen::MatrixXd& features() const { return features_; }
    const GraphConstants& constants() const { return constants_; }

    const std::vector<std::size_t>& offsets() const { return offsets_; }
    const std::vector<NodeId>& neighbor_ids() const { return neighbor_ids_; }
    const std::vector<double>& edge_weights() const { return edge_weights_; }

    // Full-scan recomputation of the cached constants, for verification.
    GraphConstants recompute_constants() const;

    void save(const std::string& path) const;
    static SparseGraph load(const std::string& path);

  private:
    void validate() const;

    std::size_t node_count_ = 0;
    std::vector<std::size_t> offsets_;
    std::vector<NodeId> neighbor_ids_;
    std::vector<double> edge_weights_;
    Eigen::MatrixXd features_;
    GraphConstants constants_;
};

// Text formats: edge list is one "src<TAB>dst" pair per line (0-based,
// '#' comments ignored); feature file has a "node_count feature_dim" header
// followed by one whitespace-separated row per node.
std::vector<std::pair<NodeId, NodeId>> read_edge_list(const std::string& path,
                                                      std::size_t* max_node = nullptr);
void write_edge_list(const std::string& path, const std::vector<std::pair<NodeId, NodeId>>& edges);
Eigen::MatrixXd read_feature_matrix(const std::string& path);
void write_feature_matrix(const std::string& path, const Eigen::MatrixXd& rows);

} // namespace bgcn
