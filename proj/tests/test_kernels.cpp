#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "painmt/kernels.hpp"

using namespace painmt;

TEST_CASE("gamma resolution policies") {
  Eigen::MatrixXd X(4, 3);
  X << 0, 0, 0, 1, 0, 0, 0, 2, 0, 1, 2, 0;
  CHECK(resolve_gamma(GammaPolicy::fixed, X, 0, 0.7) == 0.7);
  CHECK_THROWS(resolve_gamma(GammaPolicy::fixed, X, 0, 0.0));
  CHECK(resolve_gamma(GammaPolicy::inverse_dimension, X, 0) ==
        doctest::Approx(1.0 / 3.0));

  // Six pairwise squared distances: 1,4,5,5,4,1 -> median element 4.
  CHECK(resolve_gamma(GammaPolicy::median_heuristic, X, 0) ==
        doctest::Approx(0.25));

  // All-identical rows fall back to 1/d.
  const Eigen::MatrixXd same = Eigen::MatrixXd::Ones(5, 3);
  CHECK(resolve_gamma(GammaPolicy::median_heuristic, same, 0) ==
        doctest::Approx(1.0 / 3.0));
  CHECK_THROWS(resolve_gamma(GammaPolicy::median_heuristic, X.topRows(1), 0));

  // Subsampled path (n large) stays within the exact distance range.
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd big(60, 2);
  for (Eigen::Index i = 0; i < big.size(); ++i) big.data()[i] = g(rng);
  const double gamma = resolve_gamma(GammaPolicy::median_heuristic, big, 123);
  CHECK(gamma > 0.0);
  CHECK(resolve_gamma(GammaPolicy::median_heuristic, big, 123) == gamma);
}

TEST_CASE("linear and rbf grams against direct formulas") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd X(7, 4), Z(5, 4);
  for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = g(rng);
  for (Eigen::Index i = 0; i < Z.size(); ++i) Z.data()[i] = g(rng);

  const Eigen::MatrixXd L = gram_channel(KernelKind::linear, 0.0, X, Z);
  CHECK(L.isApprox(X * Z.transpose(), 1e-14));

  const double gamma = 0.3;
  const Eigen::MatrixXd R = gram_channel(KernelKind::rbf, gamma, X, Z);
  for (Eigen::Index i = 0; i < 7; ++i)
    for (Eigen::Index j = 0; j < 5; ++j)
      CHECK(R(i, j) == doctest::Approx(std::exp(
                           -gamma * (X.row(i) - Z.row(j)).squaredNorm()))
                           .epsilon(1e-12));

  // Self-gram: symmetric, unit diagonal, entries in (0, 1].
  const Eigen::MatrixXd S = gram_channel(KernelKind::rbf, gamma, X, X);
  CHECK(S.isApprox(S.transpose(), 1e-12));
  for (Eigen::Index i = 0; i < 7; ++i) CHECK(S(i, i) == doctest::Approx(1.0));
  CHECK((S.array() > 0.0).all());
  CHECK((S.array() <= 1.0 + 1e-12).all());

  CHECK_THROWS(gram_channel(KernelKind::rbf, 0.0, X, Z));
  CHECK_THROWS(gram_channel(KernelKind::rbf, gamma, X, Z.leftCols(3)));
}

TEST_CASE("parallel gram matches the serial reference") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g(0.0, 2.0);
  Eigen::MatrixXd X(40, 6), Z(25, 6);
  for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = g(rng);
  for (Eigen::Index i = 0; i < Z.size(); ++i) Z.data()[i] = g(rng);

  for (double gamma : {0.01, 0.5, 3.0}) {
    const Eigen::MatrixXd fast = gram_channel(KernelKind::rbf, gamma, X, Z);
    const Eigen::MatrixXd ref =
        detail::gram_channel_serial(KernelKind::rbf, gamma, X, Z);
    CHECK((fast - ref).cwiseAbs().maxCoeff() < 1e-12);
  }
  CHECK(gram_channel(KernelKind::linear, 0.0, X, Z)
            .isApprox(detail::gram_channel_serial(KernelKind::linear, 0.0, X, Z),
                      1e-14));
}

TEST_CASE("combine forms the weighted kernel sum") {
  std::vector<Eigen::MatrixXd> grams{Eigen::MatrixXd::Identity(3, 3),
                                     Eigen::MatrixXd::Ones(3, 3)};
  Eigen::VectorXd eta(2);
  eta << 0.25, 0.75;
  const Eigen::MatrixXd K = combine(grams, eta);
  CHECK(K(0, 0) == doctest::Approx(1.0));
  CHECK(K(0, 1) == doctest::Approx(0.75));

  CHECK_THROWS(combine({}, eta));
  CHECK_THROWS(combine(grams, Eigen::VectorXd::Ones(3)));
  std::vector<Eigen::MatrixXd> bad{Eigen::MatrixXd::Identity(3, 3),
                                   Eigen::MatrixXd::Ones(2, 2)};
  CHECK_THROWS(combine(bad, eta));
}
