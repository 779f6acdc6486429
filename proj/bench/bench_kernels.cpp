// Serial reference kernels against their OpenMP versions on a synthetic
// graph. The second benchmark argument selects the variant: 0 serial, 1 omp.

#include <benchmark/benchmark.h>

#include <map>
#include <memory>
#include <random>

#include "fairgi/data_io.hpp"
#include "fairgi/kernels.hpp"
#include "fairgi/models.hpp"
#include "fairgi/similarity.hpp"

namespace fairgi {
namespace {

constexpr int kChannels = 64;

struct Fixture {
  Graph graph;
  GraphOperators ops;
  SimilarityMatrix similarity;
  LaplacianMatrix lap;
  std::vector<std::uint8_t> group_of;
  Matrix z;
  Matrix att_src, att_dst;
  kernels::GatForward gat;
  Matrix d_out;
};

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

const Fixture& fixture(int nodes) {
  static std::map<int, std::unique_ptr<Fixture>> cache;
  auto& slot = cache[nodes];
  if (!slot) {
    SyntheticConfig sc;
    sc.nodes_per_group = {nodes / 2, nodes / 2};
    sc.p_intra = 20.0 / nodes;
    sc.p_inter = 2.0 / nodes;
    sc.seed = 3;
    auto f = std::make_unique<Fixture>();
    f->graph = gen_synthetic(sc);
    f->ops = make_operators(f->graph, Exec::kSerial);
    f->similarity = build_similarity(f->graph.features(), SimilarityMethod::kCosine, 10, Exec::kSerial);
    f->lap = laplacian(f->similarity);
    for (BinaryLabel s : f->graph.sensitive()) f->group_of.push_back(s == BinaryLabel::kOne ? 1 : 0);
    std::mt19937_64 rng(7);
    f->z = random_matrix(nodes, kChannels, rng);
    f->att_src = random_matrix(1, kChannels, rng);
    f->att_dst = random_matrix(1, kChannels, rng);
    f->gat = kernels::serial::gat_forward(f->ops.attention_pattern, f->z, f->att_src, f->att_dst, 0.2);
    f->d_out = random_matrix(nodes, kChannels, rng);
    slot = std::move(f);
  }
  return *slot;
}

Exec exec_of(const benchmark::State& state) { return state.range(1) == 0 ? Exec::kSerial : Exec::kParallel; }

void label(benchmark::State& state) { state.SetLabel(state.range(1) == 0 ? "serial" : "omp"); }

void BM_CosineTopk(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::cosine_topk(f.graph.features(), 10, exec_of(state)));
  label(state);
}

void BM_Spmm(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::spmm(f.ops.propagation, f.z, exec_of(state)));
  label(state);
}

void BM_GatForward(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        kernels::gat_forward(f.ops.attention_pattern, f.z, f.att_src, f.att_dst, 0.2, exec_of(state)));
  }
  label(state);
}

void BM_GatBackward(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::gat_backward(f.ops.attention_pattern, f.ops.attention_rev, f.z, f.att_src,
                                                   f.att_dst, 0.2, f.gat, f.d_out, exec_of(state)));
  }
  label(state);
}

void BM_GroupPairSums(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::group_pair_sums(f.z, f.similarity.entries(), f.group_of, 2, exec_of(state)));
  }
  label(state);
}

void BM_GroupPairGrad(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<int>(state.range(0)));
  const std::vector<double> scale{0.5, 1.5};
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::group_pair_grad(f.z, f.similarity.entries(), f.group_of, scale, exec_of(state)));
  }
  label(state);
}

void BM_LaplacianQuadratic(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::laplacian_quadratic(f.lap.entries(), f.z, exec_of(state)));
  label(state);
}

#define FAIRGI_BENCH(fn) BENCHMARK(fn)->ArgsProduct({{2000, 8000}, {0, 1}})->Unit(benchmark::kMicrosecond)

FAIRGI_BENCH(BM_CosineTopk);
FAIRGI_BENCH(BM_Spmm);
FAIRGI_BENCH(BM_GatForward);
FAIRGI_BENCH(BM_GatBackward);
FAIRGI_BENCH(BM_GroupPairSums);
FAIRGI_BENCH(BM_GroupPairGrad);
FAIRGI_BENCH(BM_LaplacianQuadratic);

}  // namespace
}  // namespace fairgi

BENCHMARK_MAIN();
