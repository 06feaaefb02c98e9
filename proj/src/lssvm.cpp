#include "painmt/lssvm.hpp"

#include <Eigen/Dense>
#include <stdexcept>

namespace painmt {

LssvmDual lssvm_solve(const Eigen::MatrixXd& K, const Eigen::VectorXd& y,
                      double C) {
  const Eigen::Index N = K.rows();
  if (K.cols() != N) throw std::invalid_argument("lssvm_solve: K must be square");
  if (y.size() != N) throw std::invalid_argument("lssvm_solve: label length mismatch");
  if (N < 2) throw std::invalid_argument("lssvm_solve: need at least 2 points");
  if (C <= 0.0) throw std::invalid_argument("lssvm_solve: C must be positive");
  bool pos = false, neg = false;
  for (Eigen::Index i = 0; i < N; ++i) (y[i] > 0 ? pos : neg) = true;
  if (!pos || !neg)
    throw std::invalid_argument("lssvm_solve: both classes must be present");

  Eigen::MatrixXd A(N + 1, N + 1);
  A(0, 0) = 0.0;
  A.row(0).tail(N).setOnes();
  A.col(0).tail(N).setOnes();
  A.bottomRightCorner(N, N) = K;
  A.bottomRightCorner(N, N).diagonal().array() += 1.0 / C;

  Eigen::VectorXd rhs(N + 1);
  rhs[0] = 0.0;
  rhs.tail(N) = y;

  const double rhs_norm = rhs.norm();
  for (double jitter : {0.0, 1e-10, 1e-8, 1e-6}) {
    Eigen::MatrixXd Aj = A;
    Aj.bottomRightCorner(N, N).diagonal().array() += jitter;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(Aj);
    const Eigen::VectorXd sol = lu.solve(rhs);
    if (!sol.allFinite()) continue;
    if ((Aj * sol - rhs).norm() <= 1e-8 * rhs_norm) {
      LssvmDual dual;
      dual.bias = sol[0];
      dual.alpha = sol.tail(N);
      dual.C = C;
      return dual;
    }
  }
  throw std::runtime_error("lssvm_solve: KKT system singular after jitter escalation");
}

Eigen::VectorXd lssvm_predict(const LssvmDual& dual,
                              const Eigen::MatrixXd& K_test) {
  if (K_test.cols() != dual.alpha.size())
    throw std::invalid_argument("lssvm_predict: cross-Gram column count mismatch");
  return (K_test * dual.alpha).array() + dual.bias;
}

}  // namespace painmt
