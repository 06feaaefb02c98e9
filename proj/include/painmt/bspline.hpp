#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

namespace painmt {

// Clamped b-spline basis with equally spaced interior knots on [t_min, t_max].
// K = order + n_subintervals - 1 coefficients.
class SplineBasis {
 public:
  // order m >= 1, K >= m.
  static SplineBasis make(int order, int n_coeffs, double t_min, double t_max);

  int order() const { return order_; }
  int n_coeffs() const { return n_coeffs_; }
  int n_subintervals() const { return n_coeffs_ - order_ + 1; }
  double t_min() const { return t_min_; }
  double t_max() const { return t_max_; }
  const Eigen::VectorXd& knots() const { return knots_; }

  // All K basis values (or deriv-th derivatives) at one point.
  Eigen::VectorXd eval_row(double t, int deriv = 0) const;

  // |t| x K design matrix of deriv-th derivatives.
  Eigen::MatrixXd eval(const Eigen::VectorXd& t, int deriv = 0) const;

  // K x K curvature Gram matrix R_jk = integral of B_j'' B_k''.
  // Requires order >= 3.
  Eigen::MatrixXd roughness_matrix() const;

 private:
  int order_ = 0;
  int n_coeffs_ = 0;
  double t_min_ = 0.0, t_max_ = 0.0;
  Eigen::VectorXd knots_;  // size K + order, boundary multiplicity = order
};

struct SmoothFit {
  Eigen::VectorXd coeffs;
  double lambda = 0.0;
  double sse = 0.0;
  double df = 0.0;
  double gcv = 0.0;  // +inf sentinel when df >= W
};

// Penalized least-squares fit: c = (Phi'Phi + lambda R)^-1 Phi' w.
SmoothFit smooth(const SplineBasis& basis, const Eigen::VectorXd& w,
                 const Eigen::VectorXd& t, double lambda);

// GCV grid minimizer; ties (within 1e-12) go to the larger lambda.
std::pair<double, SmoothFit> select_lambda(const SplineBasis& basis,
                                           const Eigen::VectorXd& w,
                                           const Eigen::VectorXd& t,
                                           const std::vector<double>& grid);

struct LambdaPolicy {
  bool use_gcv = true;
  double fixed_lambda = 0.0;            // used when use_gcv is false
  std::vector<double> grid = default_grid();

  static std::vector<double> default_grid();
};

// Row m = smoothed coefficients of channel m. samples is M x W; t has W
// entries (the window's sample times).
Eigen::MatrixXd spline_features(const SplineBasis& basis,
                                const Eigen::MatrixXd& samples,
                                const Eigen::VectorXd& t,
                                const LambdaPolicy& policy);

}  // namespace painmt
