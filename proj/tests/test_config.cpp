#include "bgcn/config.hpp"

#include <doctest.h>

using namespace bgcn;

namespace {

const char* kFullConfig = R"(
# experiment configuration
[graph]
edges = data/edges.tsv
features = data/features.txt
labels = data/labels.txt
train_split = data/train.txt
val_split = data/val.txt
test_split = data/test.txt
weighting = symmetric
add_self_loops = false

[model]
depth = 2
hidden_dim = 16
activation = relu
lr = 0.001
lr_schedule = constant

[sampler]
sampler = thanos_m
k = 2
eta = 0.1
gamma = 0.1
delta_t = 200
estimator = biased
bs_eta = 0.01

[run]
seed = 9
trials = 10
epochs = 50
batch_size = 64
steps = 400
)";

} // namespace

TEST_CASE("full config parses") {
    const ExperimentConfig cfg = parse_config_text(kFullConfig);
    CHECK(cfg.edges_path == "data/edges.tsv");
    CHECK(cfg.weighting == Weighting::symmetric_norm);
    CHECK(cfg.depth == 2);
    CHECK(cfg.hidden_dim == 16);
    CHECK(cfg.lr == doctest::Approx(0.001));
    CHECK(cfg.sampler.kind == SamplerKind::thanos_m);
    CHECK(cfg.sampler.k == 2);
    CHECK(cfg.sampler.delta_t == 200);
    CHECK(cfg.sampler.estimator == EstimatorKind::biased);
    CHECK(cfg.bs_eta == doctest::Approx(0.01));
    CHECK(cfg.seed == 9);
    CHECK(cfg.trials == 10);
}

TEST_CASE("unknown key is an error") {
    CHECK_THROWS_WITH_AS(parse_config_text("[run]\nbogus_key = 3\n"),
                         doctest::Contains("bogus_key"), ConfigError);
}

TEST_CASE("unknown section is an error") {
    CHECK_THROWS_AS(parse_config_text("[extras]\nx = 1\n"), ConfigError);
}

TEST_CASE("key before any section is an error") {
    CHECK_THROWS_AS(parse_config_text("seed = 3\n"), ConfigError);
}

TEST_CASE("malformed numerics, ranges, comments") {
    CHECK_THROWS_AS(parse_config_text("[model]\nlr = banana\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[sampler]\ngamma = 0\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[sampler]\ngamma = 1.5\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[sampler]\nk = 0\n"), ConfigError);
    const ExperimentConfig cfg = parse_config_text("[run]\nseed = 5 # trailing comment\n");
    CHECK(cfg.seed == 5);
}

TEST_CASE("estimator defaults follow the sampler kind") {
    CHECK(parse_config_text("[sampler]\nsampler = banditsampler\n").sampler.estimator ==
          EstimatorKind::unbiased);
    CHECK(parse_config_text("[sampler]\nsampler = thanos\n").sampler.estimator ==
          EstimatorKind::biased);
    CHECK(parse_config_text("[sampler]\nsampler = uniform\nestimator = unbiased\n")
              .sampler.estimator == EstimatorKind::unbiased);
}

TEST_CASE("horizon lists parse") {
    const ExperimentConfig cfg =
        parse_config_text("[run]\nhorizons = 1000, 3000, 10000\n");
    CHECK(cfg.horizons == std::vector<std::size_t>{1000, 3000, 10000});
}

TEST_CASE("lr schedule resolution") {
    CHECK(parse_config_text("[model]\nlr_schedule = inverse_t\nlr = 1\n").schedule().at(4) ==
          doctest::Approx(0.25));
    CHECK_THROWS_AS(parse_config_text("[model]\nlr_schedule = warmup\n").schedule(),
                    ConfigError);
}

TEST_CASE("manifest is deterministic for equal configs") {
    const ExperimentConfig a = parse_config_text(kFullConfig);
    const ExperimentConfig b = parse_config_text(kFullConfig);
    CHECK(render_manifest(a, "train", 9) == render_manifest(b, "train", 9));
    CHECK(render_manifest(a, "train", 9) != render_manifest(a, "train", 10));
}
