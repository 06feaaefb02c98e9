#include <benchmark/benchmark.h>

#include <Eigen/Core>
#include <random>
#include <vector>

#include "painmt/bspline.hpp"
#include "painmt/kernels.hpp"

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols,
                              std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd X(rows, cols);
  for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = g(rng);
  return X;
}

void bm_gram_rbf_parallel(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const Eigen::MatrixXd X = random_matrix(n, 11, 1);
  for (auto _ : state) {
    auto K = painmt::gram_channel(painmt::KernelKind::rbf, 0.1, X, X);
    benchmark::DoNotOptimize(K.data());
  }
  state.SetComplexityN(n);
}
BENCHMARK(bm_gram_rbf_parallel)->RangeMultiplier(2)->Range(64, 1024)->Complexity();

void bm_gram_rbf_serial(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const Eigen::MatrixXd X = random_matrix(n, 11, 1);
  for (auto _ : state) {
    auto K = painmt::detail::gram_channel_serial(painmt::KernelKind::rbf, 0.1, X, X);
    benchmark::DoNotOptimize(K.data());
  }
  state.SetComplexityN(n);
}
BENCHMARK(bm_gram_rbf_serial)->RangeMultiplier(2)->Range(64, 1024)->Complexity();

void bm_gram_linear_parallel(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const Eigen::MatrixXd X = random_matrix(n, 11, 2);
  for (auto _ : state) {
    auto K = painmt::gram_channel(painmt::KernelKind::linear, 0.0, X, X);
    benchmark::DoNotOptimize(K.data());
  }
}
BENCHMARK(bm_gram_linear_parallel)->RangeMultiplier(2)->Range(64, 1024);

void bm_combine(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  std::vector<Eigen::MatrixXd> grams;
  for (int m = 0; m < 24; ++m) grams.push_back(random_matrix(n, n, 10 + m));
  Eigen::VectorXd eta = Eigen::VectorXd::Constant(24, 1.0 / 24.0);
  for (auto _ : state) {
    auto K = painmt::combine(grams, eta);
    benchmark::DoNotOptimize(K.data());
  }
}
BENCHMARK(bm_combine)->RangeMultiplier(2)->Range(64, 512);

void bm_smooth_window(benchmark::State& state) {
  const auto basis = painmt::SplineBasis::make(4, 10, 0.0, 20.0);
  const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(500, 0.0, 20.0);
  Eigen::VectorXd w(t.size());
  for (Eigen::Index i = 0; i < t.size(); ++i)
    w[i] = std::sin(t[i] / 3.0) + 0.1 * std::cos(2.0 * t[i]);
  for (auto _ : state) {
    auto fit = painmt::smooth(basis, w, t, 0.01);
    benchmark::DoNotOptimize(fit.coeffs.data());
  }
}
BENCHMARK(bm_smooth_window);

}  // namespace

BENCHMARK_MAIN();
