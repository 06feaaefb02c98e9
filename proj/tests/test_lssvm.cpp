#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "painmt/lssvm.hpp"

using namespace painmt;

namespace {

Eigen::MatrixXd random_spd_gram(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd B(n, n + 2);
  for (Eigen::Index i = 0; i < B.size(); ++i) B.data()[i] = g(rng);
  return B * B.transpose() / n;
}

}  // namespace

TEST_CASE("lssvm solution satisfies the KKT system") {
  const int N = 12;
  const Eigen::MatrixXd K = random_spd_gram(N, 31);
  Eigen::VectorXd y(N);
  for (int i = 0; i < N; ++i) y[i] = i % 2 == 0 ? 1.0 : -1.0;
  const double C = 5.0;
  const LssvmDual dual = lssvm_solve(K, y, C);

  // Dense independent solve of the same bordered system.
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(N + 1, N + 1);
  A.block(1, 1, N, N) = K + Eigen::MatrixXd::Identity(N, N) / C;
  A.row(0).tail(N).setOnes();
  A.col(0).tail(N).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(N + 1);
  rhs.tail(N) = y;
  const Eigen::VectorXd ref = A.fullPivLu().solve(rhs);

  CHECK(std::fabs(dual.bias - ref[0]) < 1e-9);
  CHECK((dual.alpha - ref.tail(N)).lpNorm<Eigen::Infinity>() < 1e-9);

  // KKT residual and the equality constraint.
  Eigen::VectorXd sol(N + 1);
  sol[0] = dual.bias;
  sol.tail(N) = dual.alpha;
  CHECK((A * sol - rhs).norm() <= 1e-8 * rhs.norm());
  CHECK(std::fabs(dual.alpha.sum()) < 1e-8);
}

TEST_CASE("lssvm separates trivially separable data") {
  // 1-d points, linear kernel K = x x'.
  Eigen::VectorXd x(6);
  x << -3, -2, -1, 1, 2, 3;
  Eigen::VectorXd y(6);
  y << -1, -1, -1, 1, 1, 1;
  const Eigen::MatrixXd K = x * x.transpose();
  const LssvmDual dual = lssvm_solve(K, y, 100.0);
  const Eigen::VectorXd scores = lssvm_predict(dual, K);
  for (int i = 0; i < 6; ++i) CHECK(score_to_label(scores[i]) == (y[i] > 0 ? 1 : -1));
}

TEST_CASE("lssvm input validation") {
  const Eigen::MatrixXd K = random_spd_gram(4, 1);
  Eigen::VectorXd y(4);
  y << 1, 1, -1, -1;
  CHECK_THROWS(lssvm_solve(K, y, 0.0));
  CHECK_THROWS(lssvm_solve(K, Eigen::VectorXd::Ones(3), 1.0));
  CHECK_THROWS(lssvm_solve(K, Eigen::VectorXd::Ones(4), 1.0));  // one class
  CHECK_THROWS(lssvm_solve(Eigen::MatrixXd::Zero(4, 3), y, 1.0));
  CHECK_THROWS(lssvm_predict(lssvm_solve(K, y, 1.0), Eigen::MatrixXd::Zero(2, 5)));
}

TEST_CASE("score_to_label maps zero to +1") {
  CHECK(score_to_label(0.0) == 1);
  CHECK(score_to_label(1e-12) == 1);
  CHECK(score_to_label(-1e-12) == -1);
}

TEST_CASE("jitter escalation handles a rank-deficient gram") {
  // Rank-1 kernel with tiny C stresses the factorization but the bordered
  // system stays solvable; the solver must not return garbage.
  Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(8, -1.0, 1.0);
  const Eigen::MatrixXd K = v * v.transpose();
  Eigen::VectorXd y(8);
  for (int i = 0; i < 8; ++i) y[i] = v[i] > 0 ? 1.0 : -1.0;
  const LssvmDual dual = lssvm_solve(K, y, 1e8);
  CHECK(dual.alpha.allFinite());
  CHECK(std::fabs(dual.alpha.sum()) < 1e-6);
}
