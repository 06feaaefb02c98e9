#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "painmt/bspline.hpp"

using namespace painmt;

namespace {

double binom(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

TEST_CASE("basis construction validates arguments") {
  CHECK_THROWS(SplineBasis::make(0, 4, 0.0, 1.0));
  CHECK_THROWS(SplineBasis::make(4, 3, 0.0, 1.0));
  CHECK_THROWS(SplineBasis::make(4, 10, 1.0, 1.0));
  const auto b = SplineBasis::make(4, 10, 0.0, 20.0);
  CHECK(b.n_subintervals() == 7);
  CHECK(b.knots().size() == 14);
  CHECK(b.knots()[0] == 0.0);
  CHECK(b.knots()[13] == 20.0);
}

TEST_CASE("partition of unity at 1000 random points") {
  const auto b = SplineBasis::make(4, 10, 0.0, 20.0);
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 20.0);
  for (int i = 0; i < 1000; ++i) {
    const double t = u(rng);
    CHECK(std::fabs(b.eval_row(t).sum() - 1.0) < 1e-10);
  }
  CHECK(std::fabs(b.eval_row(0.0).sum() - 1.0) < 1e-12);
  CHECK(std::fabs(b.eval_row(20.0).sum() - 1.0) < 1e-12);
}

TEST_CASE("single-span cubic basis equals the Bernstein polynomials") {
  // No interior knots: B_{i,4} on [0,1] is the Bernstein basis of degree 3.
  const auto b = SplineBasis::make(4, 4, 0.0, 1.0);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double t = u(rng);
    const Eigen::VectorXd row = b.eval_row(t);
    for (int i = 0; i < 4; ++i) {
      const double bern =
          binom(3, i) * std::pow(t, i) * std::pow(1.0 - t, 3 - i);
      CHECK(row[i] == doctest::Approx(bern).epsilon(1e-12));
    }
  }
}

TEST_CASE("derivatives match central finite differences") {
  const auto b = SplineBasis::make(4, 10, 0.0, 20.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.5, 19.5);
  const double h = 1e-6;
  for (int trial = 0; trial < 50; ++trial) {
    const double t = u(rng);
    const Eigen::VectorXd d1 = b.eval_row(t, 1);
    const Eigen::VectorXd fd1 =
        (b.eval_row(t + h) - b.eval_row(t - h)) / (2.0 * h);
    CHECK((d1 - fd1).lpNorm<Eigen::Infinity>() < 1e-5);
    const Eigen::VectorXd d2 = b.eval_row(t, 2);
    const Eigen::VectorXd fd2 =
        (b.eval_row(t + h) - 2.0 * b.eval_row(t) + b.eval_row(t - h)) / (h * h);
    CHECK((d2 - fd2).lpNorm<Eigen::Infinity>() < 1e-3);
  }
}

TEST_CASE("roughness matrix matches dense numeric integration") {
  const auto b = SplineBasis::make(4, 6, 0.0, 2.0);
  const Eigen::MatrixXd R = b.roughness_matrix();
  CHECK(R.isApprox(R.transpose(), 1e-12));

  // Trapezoid oracle on a fine grid for c' R c = integral of (f'')^2.
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd c(6);
    for (int i = 0; i < 6; ++i) c[i] = g(rng);
    const int N = 20000;
    double acc = 0.0;
    double prev = std::pow(b.eval_row(0.0, 2).dot(c), 2);
    for (int i = 1; i <= N; ++i) {
      const double t = 2.0 * i / N;
      const double cur = std::pow(b.eval_row(t, 2).dot(c), 2);
      acc += 0.5 * (prev + cur) * (2.0 / N);
      prev = cur;
    }
    const double quad = c.dot(R * c);
    CHECK(quad == doctest::Approx(acc).epsilon(1e-5));
  }

  // A straight line has zero curvature energy.
  Eigen::VectorXd line(6);
  const Eigen::VectorXd t_nodes = Eigen::VectorXd::LinSpaced(40, 0.0, 2.0);
  Eigen::VectorXd w(40);
  for (int i = 0; i < 40; ++i) w[i] = 3.0 * t_nodes[i] - 1.0;
  line = smooth(b, w, t_nodes, 0.0).coeffs;
  CHECK(line.dot(R * line) < 1e-10);
}

TEST_CASE("lambda zero reproduces a cubic exactly") {
  const auto b = SplineBasis::make(4, 10, 0.0, 20.0);
  const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(500, 0.0, 20.0);
  Eigen::VectorXd w(t.size());
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    const double x = t[i];
    w[i] = 0.02 * x * x * x - 0.3 * x * x + x - 4.0;
  }
  const SmoothFit fit = smooth(b, w, t, 0.0);
  CHECK(fit.sse < 1e-9 * w.squaredNorm());
}

TEST_CASE("df limits: K at lambda=0, 2 as lambda grows") {
  const auto b = SplineBasis::make(4, 10, 0.0, 20.0);
  const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(500, 0.0, 20.0);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXd w(t.size());
  for (Eigen::Index i = 0; i < t.size(); ++i) w[i] = std::sin(t[i] / 3.0) + 0.1 * g(rng);

  CHECK(smooth(b, w, t, 0.0).df == doctest::Approx(10.0).epsilon(1e-6));
  CHECK(smooth(b, w, t, 1e12).df == doctest::Approx(2.0).epsilon(0.005));
}

TEST_CASE("df equals the hat-matrix trace computed independently") {
  const auto b = SplineBasis::make(4, 8, 0.0, 10.0);
  const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(120, 0.0, 10.0);
  Eigen::VectorXd w(t.size());
  for (Eigen::Index i = 0; i < t.size(); ++i) w[i] = std::cos(t[i]);
  const double lambda = 0.37;
  const SmoothFit fit = smooth(b, w, t, lambda);

  const Eigen::MatrixXd Phi = b.eval(t);
  const Eigen::MatrixXd Mn =
      Phi.transpose() * Phi + lambda * b.roughness_matrix();
  const Eigen::MatrixXd hat = Phi * Mn.inverse() * Phi.transpose();
  CHECK(fit.df == doctest::Approx(hat.trace()).epsilon(1e-8));
}

TEST_CASE("gcv formula and tie handling") {
  const auto b = SplineBasis::make(4, 10, 0.0, 20.0);
  const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(200, 0.0, 20.0);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0.0, 0.3);
  Eigen::VectorXd w(t.size());
  for (Eigen::Index i = 0; i < t.size(); ++i) w[i] = std::sin(t[i] / 2.0) + g(rng);

  const SmoothFit fit = smooth(b, w, t, 1.0);
  const double W = static_cast<double>(t.size());
  const double expect = (W / (W - fit.df)) * (fit.sse / (W - fit.df));
  CHECK(fit.gcv == doctest::Approx(expect).epsilon(1e-12));

  // A duplicated grid value must resolve to the larger lambda.
  const auto [lam, best] = select_lambda(b, w, t, {0.5, 0.5});
  CHECK(lam == 0.5);
  const auto [lam2, best2] = select_lambda(b, w, t, {1e-3, 1e-3, 1e-3});
  CHECK(lam2 == 1e-3);

  // Monotone sanity: the selected lambda minimizes GCV over the grid.
  const std::vector<double> grid = LambdaPolicy::default_grid();
  const auto [lam3, best3] = select_lambda(b, w, t, grid);
  for (double l : grid)
    CHECK(best3.gcv <= smooth(b, w, t, l).gcv + 1e-12);
}

TEST_CASE("smooth rejects underdetermined systems") {
  const auto b = SplineBasis::make(4, 10, 0.0, 20.0);
  const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(5, 0.0, 20.0);
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(5);
  CHECK_THROWS(smooth(b, w, t, 0.0));
  CHECK_THROWS(smooth(b, w, t, -1.0));
}

TEST_CASE("spline_features smooths each channel independently") {
  const auto b = SplineBasis::make(4, 10, 0.0, 20.0);
  const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(300, 0.0, 20.0);
  Eigen::MatrixXd samples(2, t.size());
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    samples(0, i) = t[i];
    samples(1, i) = 5.0 - 0.2 * t[i];
  }
  LambdaPolicy policy;
  policy.use_gcv = false;
  policy.fixed_lambda = 0.0;
  const Eigen::MatrixXd C = spline_features(b, samples, t, policy);
  const Eigen::MatrixXd Phi = b.eval(t);
  CHECK((Phi * C.row(0).transpose() - samples.row(0).transpose()).norm() < 1e-8);
  CHECK((Phi * C.row(1).transpose() - samples.row(1).transpose()).norm() < 1e-8);
}
