#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "painmt/mtmkl.hpp"

using namespace painmt;

namespace {

std::vector<Eigen::MatrixXd> random_grams(int n, int m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Eigen::MatrixXd> grams;
  for (int k = 0; k < m; ++k) {
    Eigen::MatrixXd B(n, n + 1);
    for (Eigen::Index i = 0; i < B.size(); ++i) B.data()[i] = g(rng);
    grams.push_back(B * B.transpose() / n);
  }
  return grams;
}

Eigen::VectorXd alternating_labels(int n) {
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = i % 2 == 0 ? 1.0 : -1.0;
  return y;
}

}  // namespace

TEST_CASE("omega values for small hand-checked cases") {
  Eigen::MatrixXd eta(2, 2);
  eta << 1.0, 0.0, 0.0, 1.0;
  // l1: sum over (r,s) of eta_r . eta_s = 1 + 0 + 0 + 1 = 2
  CHECK(omega(eta, Regularizer::l1, 0.5) == doctest::Approx(-1.0));
  // l2: |r-s|^2 summed = 0 + 2 + 2 + 0 = 4
  CHECK(omega(eta, Regularizer::l2, 0.5) == doctest::Approx(-2.0));
  // Identical rows make the l2 coupling vanish.
  eta.row(1) = eta.row(0);
  CHECK(omega(eta, Regularizer::l2, 3.0) == 0.0);
}

TEST_CASE("eta update direction matches central finite differences") {
  // F(eta) = -omega(eta) - 1/2 sum_r eta_r . q_r with the duals held fixed;
  // the update direction must equal the gradient of F row by row.
  const int T = 2, M = 3;
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (auto kind : {Regularizer::l1, Regularizer::l2}) {
    for (int inst = 0; inst < 6; ++inst) {
      Eigen::MatrixXd eta(T, M);
      for (Eigen::Index i = 0; i < eta.size(); ++i) eta.data()[i] = u(rng);
      std::vector<Eigen::VectorXd> q(T);
      for (int r = 0; r < T; ++r) {
        q[r].resize(M);
        for (int m = 0; m < M; ++m) q[r][m] = u(rng);
      }
      const double nu = u(rng);
      auto F = [&](const Eigen::MatrixXd& e) {
        double val = -omega(e, kind, nu);
        for (int r = 0; r < T; ++r) val -= 0.5 * e.row(r).dot(q[r]);
        return val;
      };
      const double h = 1e-6;
      for (int r = 0; r < T; ++r) {
        const Eigen::VectorXd grad =
            objective_grad(omega_grad(eta, kind, nu, r), q[r]);
        for (int m = 0; m < M; ++m) {
          Eigen::MatrixXd ep = eta, em = eta;
          ep(r, m) += h;
          em(r, m) -= h;
          const double fd = (F(ep) - F(em)) / (2.0 * h);
          CHECK(std::fabs(grad[m] - fd) <
                1e-5 * std::max(1.0, std::fabs(fd)));
        }
      }
    }
  }
}

TEST_CASE("simplex projection: known points and optimality") {
  auto proj = [](std::initializer_list<double> v) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double t : v) x[i++] = t;
    return project_simplex(x);
  };
  CHECK(proj({0.5, 0.5}).isApprox(proj({0.5, 0.5})));
  CHECK((proj({2.0, 0.0}) - Eigen::Vector2d(1.0, 0.0)).norm() < 1e-12);
  CHECK((proj({-1.0, -1.0}) - Eigen::Vector2d(0.5, 0.5)).norm() < 1e-12);

  std::mt19937_64 rng(23);
  std::normal_distribution<double> g(0.0, 2.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd v(5);
    for (int i = 0; i < 5; ++i) v[i] = g(rng);
    const Eigen::VectorXd p = project_simplex(v);
    CHECK(std::fabs(p.sum() - 1.0) < 1e-12);
    CHECK(p.minCoeff() >= 0.0);
    CHECK((project_simplex(p) - p).lpNorm<Eigen::Infinity>() < 1e-12);
    // No random simplex point may be closer to v than the projection.
    for (int s = 0; s < 40; ++s) {
      Eigen::VectorXd w(5);
      double tot = 0.0;
      for (int i = 0; i < 5; ++i) {
        w[i] = -std::log(1.0 - u(rng));
        tot += w[i];
      }
      w /= tot;
      CHECK((p - v).squaredNorm() <= (w - v).squaredNorm() + 1e-12);
    }
  }
  Eigen::VectorXd bad(2);
  bad << 1.0, std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS(project_simplex(bad));
}

TEST_CASE("channel quadratic equals the direct bilinear form") {
  const auto grams = random_grams(6, 3, 5);
  Eigen::VectorXd alpha(6);
  alpha << 0.3, -1.2, 0.8, 0.1, -0.4, 0.4;
  const Eigen::VectorXd q = channel_quadratic(grams, alpha);
  for (int m = 0; m < 3; ++m)
    CHECK(q[m] == doctest::Approx(alpha.transpose() * grams[m] * alpha));
}

TEST_CASE("fit keeps eta on the simplex and the trace monotone in delta") {
  std::vector<TaskData> tasks(2);
  for (int r = 0; r < 2; ++r) {
    tasks[r].grams = random_grams(10, 4, 100 + r);
    tasks[r].y = alternating_labels(10);
  }
  MtMklOptions opts;
  opts.max_iter = 60;
  const MtMklModel model = mtmkl_fit(tasks, 2.0, 0.1, Regularizer::l1, opts);
  CHECK(model.eta.rows() == 2);
  CHECK(model.eta.cols() == 4);
  for (int r = 0; r < 2; ++r) {
    CHECK(std::fabs(model.eta.row(r).sum() - 1.0) < 1e-12);
    CHECK(model.eta.row(r).minCoeff() >= 0.0);
  }
  CHECK(!model.trace.empty());
  CHECK(model.trace.size() <= static_cast<size_t>(opts.max_iter));
  // The run either converged or used the whole iteration budget.
  CHECK((model.trace.back().delta_eta_inf < opts.tol ||
         model.trace.size() == static_cast<size_t>(opts.max_iter)));
  CHECK(static_cast<int>(model.duals.size()) == 2);
}

TEST_CASE("nu = 0 decouples the tasks") {
  std::vector<TaskData> tasks(2);
  for (int r = 0; r < 2; ++r) {
    tasks[r].grams = random_grams(8, 3, 200 + 7 * r);
    tasks[r].y = alternating_labels(8);
  }
  MtMklOptions opts;
  opts.max_iter = 80;
  opts.tol = 1e-10;
  const MtMklModel joint = mtmkl_fit(tasks, 3.0, 0.0, Regularizer::l1, opts);
  for (int r = 0; r < 2; ++r) {
    const MtMklModel solo = mtmkl_fit({tasks[r]}, 3.0, 0.0, Regularizer::l1, opts);
    CHECK((joint.eta.row(r) - solo.eta.row(0)).lpNorm<Eigen::Infinity>() < 1e-6);
    CHECK((joint.duals[r].alpha - solo.duals[0].alpha).lpNorm<Eigen::Infinity>() <
          1e-6);
    CHECK(std::fabs(joint.duals[r].bias - solo.duals[0].bias) < 1e-6);
  }
}

TEST_CASE("large l2 coupling drives the rows to consensus") {
  std::vector<TaskData> tasks(3);
  for (int r = 0; r < 3; ++r) {
    tasks[r].grams = random_grams(8, 3, 300 + 11 * r);
    tasks[r].y = alternating_labels(8);
  }
  MtMklOptions opts;
  opts.step_size = 1e-5;  // keeps 1 - 8*step*nu stable at nu = 1e3
  opts.max_iter = 400;
  opts.tol = 1e-9;
  const MtMklModel model = mtmkl_fit(tasks, 2.0, 1e3, Regularizer::l2, opts);
  double spread = 0.0;
  for (int r = 0; r < 3; ++r)
    for (int s = 0; s < 3; ++s)
      spread = std::max(spread,
                        (model.eta.row(r) - model.eta.row(s)).lpNorm<Eigen::Infinity>());
  CHECK(spread < 0.01);
}

TEST_CASE("fit rejects malformed task sets") {
  std::vector<TaskData> tasks(1);
  tasks[0].grams = random_grams(6, 2, 9);
  tasks[0].y = Eigen::VectorXd::Ones(6);  // single class
  CHECK_THROWS(mtmkl_fit(tasks, 1.0, 0.1, Regularizer::l1));
  tasks[0].y = alternating_labels(5);  // shape mismatch
  CHECK_THROWS(mtmkl_fit(tasks, 1.0, 0.1, Regularizer::l1));
  CHECK_THROWS(mtmkl_fit({}, 1.0, 0.1, Regularizer::l1));
}
