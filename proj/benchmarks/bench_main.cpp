#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "hsgns/corpus.hpp"
#include "hsgns/geometry.hpp"
#include "hsgns/trainer.hpp"

namespace {

using namespace hsgns;
namespace gi = geometry::inplace;

// Point at distance r from the base point in a random direction.
std::vector<double> point(std::size_t n, double r, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::vector<double> x(n + 1);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += (x[i] = normal(rng)) * x[i];
  for (std::size_t i = 0; i < n; ++i) x[i] *= std::sinh(r) / std::sqrt(s);
  x[n] = std::cosh(r);
  return x;
}

std::vector<double> tangent(std::span<const double> p, double len, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::vector<double> v(p.size());
  for (double& x : v) x = normal(rng);
  gi::project_to_tangent(p, v);
  const double s = len / std::sqrt(gi::dot(v, v));
  for (double& x : v) x *= s;
  return v;
}

void BM_MinkowskiDot(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto p = point(n, 1.0, rng), q = point(n, 2.0, rng);
  for (auto _ : state) benchmark::DoNotOptimize(gi::dot(p, q));
}
BENCHMARK(BM_MinkowskiDot)->Arg(5)->Arg(20)->Arg(100);

void BM_Distance(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto p = geometry::HyperboloidPoint::from_coords(geometry::MinkowskiVector(point(n, 1.0, rng)));
  const auto q = geometry::HyperboloidPoint::from_coords(geometry::MinkowskiVector(point(n, 2.0, rng)));
  for (auto _ : state) benchmark::DoNotOptimize(geometry::distance(p, q));
}
BENCHMARK(BM_Distance)->Arg(5)->Arg(20)->Arg(100);

void BM_ExpMapInPlace(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto p0 = point(n, 1.0, rng);
  const auto v = tangent(p0, 0.01, rng);
  std::vector<double> p = p0;
  for (auto _ : state) {
    std::copy(p0.begin(), p0.end(), p.begin());
    gi::exp_map(p, v, 0.01);
    benchmark::DoNotOptimize(p.data());
  }
}
BENCHMARK(BM_ExpMapInPlace)->Arg(5)->Arg(20)->Arg(100);

void BM_LogMap(benchmark::State& state) {
  std::mt19937_64 rng(4);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto p = geometry::HyperboloidPoint::from_coords(geometry::MinkowskiVector(point(n, 1.0, rng)));
  const auto q = geometry::HyperboloidPoint::from_coords(geometry::MinkowskiVector(point(n, 2.0, rng)));
  for (auto _ : state) benchmark::DoNotOptimize(geometry::log_map(p, q));
}
BENCHMARK(BM_LogMap)->Arg(5)->Arg(20)->Arg(100);

void BM_ParallelTransport(benchmark::State& state) {
  std::mt19937_64 rng(5);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto pc = point(n, 1.0, rng);
  const auto p = geometry::HyperboloidPoint::from_coords(geometry::MinkowskiVector(pc));
  const auto q = geometry::HyperboloidPoint::from_coords(geometry::MinkowskiVector(point(n, 2.0, rng)));
  const geometry::TangentVector w(p, geometry::MinkowskiVector(tangent(pc, 1.0, rng)));
  for (auto _ : state) benchmark::DoNotOptimize(geometry::parallel_transport(p, q, w));
}
BENCHMARK(BM_ParallelTransport)->Arg(5)->Arg(20)->Arg(100);

void BM_NegativeSampler(benchmark::State& state) {
  std::vector<std::int64_t> counts(static_cast<std::size_t>(state.range(0)));
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] = 1 + 1000000 / (i + 1);
  const NegativeSampler sampler(counts, 0.75);
  std::mt19937_64 rng(6);
  for (auto _ : state) benchmark::DoNotOptimize(sampler(rng));
}
BENCHMARK(BM_NegativeSampler)->Arg(1000)->Arg(100000);

// One skip-gram event (centre, positive, k negatives) through the trainer's
// locked update path.
void BM_EventStep(benchmark::State& state) {
  const bool hyperbolic = state.range(0) != 0;
  constexpr std::size_t kWords = 5000;
  std::vector<Vocabulary::Entry> entries;
  for (std::size_t i = 0; i < kWords; ++i)
    entries.push_back({"w" + std::to_string(i), static_cast<std::int64_t>(20 + kWords - i)});
  TrainConfig c;
  c.mode = hyperbolic ? Geometry::hyperbolic : Geometry::euclidean;
  c.tied = hyperbolic;
  c.min_count = 1;
  const auto vocab = Vocabulary::from_counts(std::move(entries), c.vocabulary_options());
  const Corpus corpus({0, 1}, {0, 2});
  Trainer trainer(vocab, corpus, c);
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<WordId> word(0, kWords - 1);
  std::vector<TrainingEvent> events(256);
  for (auto& e : events) {
    e.centre = word(rng);
    e.positive = word(rng);
    for (int k = 0; k < c.negatives; ++k) e.negatives.push_back(word(rng));
  }
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(trainer.apply_event(events[i], 0.01));
    i = (i + 1) % events.size();
  }
  state.SetLabel(hyperbolic ? "hyperbolic dim 20, k 10" : "euclidean dim 20, k 10");
}
BENCHMARK(BM_EventStep)->Arg(1)->Arg(0);

}  // namespace

BENCHMARK_MAIN();
