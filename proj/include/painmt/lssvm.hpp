#pragma once

#include <Eigen/Core>

namespace painmt {

struct LssvmDual {
  Eigen::VectorXd alpha;
  double bias = 0.0;
  double C = 1.0;
};

// Solves the bordered KKT system [[0, 1'], [1, K + I/C]] [b; alpha] = [0; y].
// Escalating diagonal jitter (1e-10 .. 1e-6) is applied if the factorization
// is numerically singular.
LssvmDual lssvm_solve(const Eigen::MatrixXd& K, const Eigen::VectorXd& y,
                      double C);

// scores = K_test * alpha + b.
Eigen::VectorXd lssvm_predict(const LssvmDual& dual,
                              const Eigen::MatrixXd& K_test);

// sign(score) with 0 mapped to +1.
inline int score_to_label(double score) { return score >= 0.0 ? +1 : -1; }

}  // namespace painmt
