#pragma once

#include "bgcn/graph.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace bgcn {

// Stochastic block model with Gaussian feature clusters per community.
// Keeps acceptance runs self-contained: no external dataset downloads.
struct SbmSpec {
    std::size_t nodes = 2000;
    std::size_t communities = 4;
    double p_in = 0.02;
    double p_out = 0.002;
    std::size_t feature_dim = 16;
    double center_scale = 3.0;  // distance scale of community centers
    double feature_noise = 1.0; // per-dimension std around the center
    double train_fraction = 0.6;
    double val_fraction = 0.2;
    Weighting weighting = Weighting::symmetric_norm;
    bool add_self_loops = false;
    bool normalize_features = false; // rescale every row to unit L2 norm
    // Optional hub nodes give the degree distribution a heavy tail, like
    // citation graphs have.
    double hub_fraction = 0.0;
    std::size_t hub_extra_edges = 0;
};

struct SbmDataset {
    SparseGraph graph;
    std::vector<int> labels; // community id per node
    std::vector<NodeId> train_nodes;
    std::vector<NodeId> val_nodes;
    std::vector<NodeId> test_nodes;
};

SbmDataset make_sbm(const SbmSpec& spec, std::uint64_t seed);

// File layout used by the CLI: edges.tsv, features.txt, labels.txt and one
// node id per line for train.txt / val.txt / test.txt.
void save_dataset(const SbmDataset& data, const std::string& dir);

std::vector<int> read_label_file(const std::string& path);
std::vector<NodeId> read_index_file(const std::string& path);

} // namespace bgcn
