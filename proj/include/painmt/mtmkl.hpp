#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>
#include <vector>

#include "painmt/lssvm.hpp"

namespace painmt {

enum class Regularizer { l1, l2 };

const char* to_string(Regularizer r);
Regularizer regularizer_from_string(const std::string& s);

// Task-coupling regularizer over the T x M matrix of per-task kernel weights.
// l1: -nu sum_rs eta_r . eta_s; l2: -nu sum_rs |eta_r - eta_s|^2.
double omega(const Eigen::MatrixXd& eta, Regularizer kind, double nu);

// Per-row regularizer gradient (the half-sum convention, so that
// -2 * omega_grad is the exact gradient of -omega).
Eigen::VectorXd omega_grad(const Eigen::MatrixXd& eta, Regularizer kind,
                           double nu, int row);

// q_m = alpha' K_m alpha for each channel Gram.
Eigen::VectorXd channel_quadratic(const std::vector<Eigen::MatrixXd>& grams,
                                  const Eigen::VectorXd& alpha);

// Component m of the eta update direction: -2 * omega_grad_m - q_m / 2.
Eigen::VectorXd objective_grad(const Eigen::VectorXd& omega_gradient,
                               const Eigen::VectorXd& channel_quad);

// Euclidean projection onto {v : sum v = 1, v >= 0} (sort and threshold).
Eigen::VectorXd project_simplex(const Eigen::VectorXd& v);

struct MtMklOptions {
  double step_size = 0.01;
  int max_iter = 200;
  double tol = 1e-4;  // on the max-norm of the eta change
  // Observes eta after each projected-gradient update (diagnostics/tests).
  std::function<void(const Eigen::MatrixXd&)> on_iteration;
};

// One task's training data: per-channel Gram matrices plus labels.
struct TaskData {
  std::vector<Eigen::MatrixXd> grams;  // M matrices, N_r x N_r
  Eigen::VectorXd y;                   // +-1
};

struct IterationRecord {
  double objective = 0.0;      // diagnostic only
  double delta_eta_inf = 0.0;
};

struct MtMklModel {
  int n_tasks = 0;
  int n_channels = 0;
  Eigen::MatrixXd eta;  // T x M, each row on the simplex
  std::vector<LssvmDual> duals;
  double C = 1.0;
  double nu = 0.0;
  Regularizer reg = Regularizer::l1;
  std::vector<IterationRecord> trace;
};

// Alternating optimization: combine kernels per task, solve the LSSVM,
// projected-gradient step on each eta row. Deterministic.
MtMklModel mtmkl_fit(const std::vector<TaskData>& tasks, double C, double nu,
                     Regularizer kind, const MtMklOptions& opts = {});

}  // namespace painmt
