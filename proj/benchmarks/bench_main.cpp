#include <benchmark/benchmark.h>

#include "ssg/eval.hpp"
#include "ssg/model.hpp"
#include "ssg/synth.hpp"

namespace {

ssg::schema::Dataset bench_dataset() {
    ssg::synth::SynthConfig cfg;
    cfg.train_frames = 32;
    cfg.val_frames = 8;
    cfg.test_frames = 8;
    cfg.seed = 17;
    return ssg::synth::generate_dataset(cfg);
}

void BM_GraphBuild(benchmark::State& state) {
    const auto d = bench_dataset();
    const ssg::graph::FeatureProvider provider(d.catalog);
    size_t i = 0;
    for (auto _ : state) {
        const auto& f = d.frames[i++ % d.frames.size()];
        auto nodes = ssg::graph::build_nodes(f, provider);
        auto edges = ssg::graph::candidate_edges(f, nodes, d.catalog, provider);
        benchmark::DoNotOptimize(edges);
    }
}
BENCHMARK(BM_GraphBuild);

void BM_AveragePrecision(benchmark::State& state) {
    std::vector<double> scores;
    std::vector<int> labels;
    for (int i = 0; i < 512; ++i) {
        scores.push_back((i * 2654435761u % 1024) / 1024.0);
        labels.push_back(i % 3 == 0);
    }
    for (auto _ : state) {
        auto r = ssg::eval::average_precision(scores, labels);
        benchmark::DoNotOptimize(r);
    }
}
BENCHMARK(BM_AveragePrecision);

void BM_TrainStep(benchmark::State& state) {
    const auto d = bench_dataset();
    ssg::model::ModelConfig cfg;
    cfg.d_hidden = 32;
    ssg::model::SsgModel m(d.catalog, 0, cfg);
    const auto provider = m.make_provider();
    const auto frames = ssg::model::prepare_split(d, "train", provider, nullptr);
    size_t i = 0;
    for (auto _ : state) {
        ssg::nn::Tape tp(&m.params());
        auto fr = m.frame_loss(tp, frames[i++ % frames.size()]);
        tp.backward(fr.objective);
        ssg::nn::adam_step(m.params(), tp.param_grads(), cfg.lr);
    }
}
BENCHMARK(BM_TrainStep);

void BM_Encode(benchmark::State& state) {
    const auto d = bench_dataset();
    ssg::model::ModelConfig cfg;
    cfg.d_hidden = 32;
    ssg::model::SsgModel m(d.catalog, 0, cfg);
    const auto provider = m.make_provider();
    const auto frames = ssg::model::prepare_split(d, "train", provider, nullptr);
    size_t i = 0;
    for (auto _ : state) {
        const auto& pf = frames[i++ % frames.size()];
        ssg::nn::Tape tp(&m.params());
        auto g = ssg::graph::propose_edges(pf.frame_id, pf.width, pf.height, pf.nodes,
                                           pf.candidates,
                                           std::vector<double>(pf.exist_targets.size(), 1.0), 0.5);
        auto enc = ssg::model::encode(tp, g, cfg);
        benchmark::DoNotOptimize(enc);
    }
}
BENCHMARK(BM_Encode);

}  // namespace

BENCHMARK_MAIN();
