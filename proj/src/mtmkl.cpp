#include "painmt/mtmkl.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "painmt/kernels.hpp"

namespace painmt {

const char* to_string(Regularizer r) { return r == Regularizer::l1 ? "l1" : "l2"; }

Regularizer regularizer_from_string(const std::string& s) {
  if (s == "l1") return Regularizer::l1;
  if (s == "l2") return Regularizer::l2;
  throw std::invalid_argument("unknown regularizer: " + s);
}

double omega(const Eigen::MatrixXd& eta, Regularizer kind, double nu) {
  const Eigen::Index T = eta.rows();
  double acc = 0.0;
  for (Eigen::Index r = 0; r < T; ++r)
    for (Eigen::Index s = 0; s < T; ++s) {
      if (kind == Regularizer::l1)
        acc += eta.row(r).dot(eta.row(s));
      else
        acc += (eta.row(r) - eta.row(s)).squaredNorm();
    }
  return -nu * acc;
}

Eigen::VectorXd omega_grad(const Eigen::MatrixXd& eta, Regularizer kind,
                           double nu, int row) {
  const Eigen::Index T = eta.rows();
  if (row < 0 || row >= T) throw std::invalid_argument("omega_grad: row out of range");
  Eigen::VectorXd g = Eigen::VectorXd::Zero(eta.cols());
  for (Eigen::Index s = 0; s < T; ++s) {
    if (kind == Regularizer::l1)
      g += eta.row(s).transpose();
    else
      g += 2.0 * (eta.row(row) - eta.row(s)).transpose();
  }
  return -nu * g;
}

Eigen::VectorXd channel_quadratic(const std::vector<Eigen::MatrixXd>& grams,
                                  const Eigen::VectorXd& alpha) {
  Eigen::VectorXd q(static_cast<Eigen::Index>(grams.size()));
  for (size_t m = 0; m < grams.size(); ++m)
    q[static_cast<Eigen::Index>(m)] = alpha.dot(grams[m] * alpha);
  return q;
}

Eigen::VectorXd objective_grad(const Eigen::VectorXd& omega_gradient,
                               const Eigen::VectorXd& channel_quad) {
  if (omega_gradient.size() != channel_quad.size())
    throw std::invalid_argument("objective_grad: length mismatch");
  return -2.0 * omega_gradient - 0.5 * channel_quad;
}

Eigen::VectorXd project_simplex(const Eigen::VectorXd& v) {
  const Eigen::Index M = v.size();
  if (!v.allFinite()) throw std::invalid_argument("project_simplex: non-finite input");
  std::vector<double> u(v.data(), v.data() + M);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cssv = 0.0, theta = 0.0;
  int rho = 0;
  for (Eigen::Index j = 0; j < M; ++j) {
    cssv += u[j];
    const double t = (cssv - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) {
      rho = static_cast<int>(j + 1);
      theta = t;
    }
  }
  (void)rho;
  return (v.array() - theta).max(0.0);
}

MtMklModel mtmkl_fit(const std::vector<TaskData>& tasks, double C, double nu,
                     Regularizer kind, const MtMklOptions& opts) {
  const int T = static_cast<int>(tasks.size());
  if (T < 1) throw std::invalid_argument("mtmkl_fit: no tasks");
  const int M = static_cast<int>(tasks[0].grams.size());
  for (const auto& task : tasks) {
    if (static_cast<int>(task.grams.size()) != M)
      throw std::invalid_argument("mtmkl_fit: channel count differs across tasks");
    if (task.y.size() < 2 || task.grams[0].rows() != task.y.size())
      throw std::invalid_argument("mtmkl_fit: task data shape mismatch");
    bool pos = false, neg = false;
    for (Eigen::Index i = 0; i < task.y.size(); ++i)
      (task.y[i] > 0 ? pos : neg) = true;
    if (!pos || !neg)
      throw std::invalid_argument("mtmkl_fit: a task has a single class");
  }

  MtMklModel model;
  model.n_tasks = T;
  model.n_channels = M;
  model.C = C;
  model.nu = nu;
  model.reg = kind;
  model.eta = Eigen::MatrixXd::Constant(T, M, 1.0 / M);
  model.duals.resize(T);

  // Inner solves run under OpenMP; failures are carried out of the region.
  std::vector<Eigen::VectorXd> quads(T);
  auto solve_all = [&]() {
    std::string error;
#pragma omp parallel for schedule(dynamic)
    for (int r = 0; r < T; ++r) {
      try {
        const Eigen::MatrixXd K =
            combine(tasks[r].grams, model.eta.row(r).transpose());
        model.duals[r] = lssvm_solve(K, tasks[r].y, C);
        quads[r] = channel_quadratic(tasks[r].grams, model.duals[r].alpha);
      } catch (const std::exception& e) {
#pragma omp critical
        error = e.what();
      }
    }
    if (!error.empty()) throw std::runtime_error("mtmkl_fit: " + error);
  };

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    double objective = omega(model.eta, kind, nu);
    solve_all();
    for (int r = 0; r < T; ++r) {
      const auto& d = model.duals[r];
      objective += d.alpha.dot(tasks[r].y) -
                   0.5 * (model.eta.row(r).dot(quads[r]) +
                          d.alpha.squaredNorm() / C);
    }
    if (!std::isfinite(objective))
      throw std::runtime_error("mtmkl_fit: non-finite objective at iteration " +
                               std::to_string(iter));

    // Gradient step on every row, then back to the simplex. The rows are
    // updated from a snapshot so the coupling term sees one consistent state.
    const Eigen::MatrixXd eta_prev = model.eta;
    double delta = 0.0;
    for (int r = 0; r < T; ++r) {
      const Eigen::VectorXd g = objective_grad(
          omega_grad(eta_prev, kind, nu, r), quads[r]);
      const Eigen::VectorXd next =
          project_simplex(eta_prev.row(r).transpose() - opts.step_size * g);
      delta = std::max(delta,
                       (next - eta_prev.row(r).transpose()).lpNorm<Eigen::Infinity>());
      model.eta.row(r) = next.transpose();
    }
    model.trace.push_back({objective, delta});
    if (opts.on_iteration) opts.on_iteration(model.eta);
    if (delta < opts.tol) break;
  }

  // Duals correspond to the eta used in the last inner solve; refresh them
  // so the returned model is self-consistent.
  solve_all();
  return model;
}

}  // namespace painmt
