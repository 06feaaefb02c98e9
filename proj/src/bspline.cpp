#include "painmt/bspline.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace painmt {

SplineBasis SplineBasis::make(int order, int n_coeffs, double t_min,
                              double t_max) {
  if (order < 1) throw std::invalid_argument("SplineBasis: order must be >= 1");
  if (n_coeffs < order)
    throw std::invalid_argument("SplineBasis: n_coeffs must be >= order");
  if (!(t_max > t_min))
    throw std::invalid_argument("SplineBasis: t_max must exceed t_min");

  SplineBasis b;
  b.order_ = order;
  b.n_coeffs_ = n_coeffs;
  b.t_min_ = t_min;
  b.t_max_ = t_max;

  const int L = n_coeffs - order + 1;  // subintervals
  b.knots_.resize(n_coeffs + order);
  const double h = (t_max - t_min) / L;
  for (int i = 0; i < order; ++i) b.knots_[i] = t_min;
  for (int i = 1; i < L; ++i) b.knots_[order - 1 + i] = t_min + i * h;
  for (int i = 0; i < order; ++i) b.knots_[n_coeffs + i] = t_max;
  return b;
}

Eigen::VectorXd SplineBasis::eval_row(double t, int deriv) const {
  if (t < t_min_ - 1e-12 || t > t_max_ + 1e-12)
    throw std::invalid_argument("SplineBasis: evaluation point outside domain");
  t = std::min(std::max(t, t_min_), t_max_);
  if (deriv < 0) throw std::invalid_argument("SplineBasis: negative derivative order");
  if (deriv >= order_) return Eigen::VectorXd::Zero(n_coeffs_);

  const auto& tau = knots_;
  const int n_knots = static_cast<int>(tau.size());
  const int q0 = order_ - deriv;

  // Order-1 indicators; the right boundary belongs to the last nonempty span.
  std::vector<double> vals(n_knots - 1, 0.0);
  if (t >= t_max_) {
    for (int j = n_knots - 2; j >= 0; --j)
      if (tau[j + 1] > tau[j]) { vals[j] = 1.0; break; }
  } else {
    for (int j = 0; j + 1 < n_knots; ++j)
      if (t >= tau[j] && t < tau[j + 1]) { vals[j] = 1.0; break; }
  }

  // Cox-de Boor up to order q0.
  for (int q = 2; q <= q0; ++q) {
    const int n_funcs = n_knots - q;
    for (int j = 0; j < n_funcs; ++j) {
      double v = 0.0;
      const double d1 = tau[j + q - 1] - tau[j];
      if (d1 > 0.0) v += (t - tau[j]) / d1 * vals[j];
      const double d2 = tau[j + q] - tau[j + 1];
      if (d2 > 0.0) v += (tau[j + q] - t) / d2 * vals[j + 1];
      vals[j] = v;
    }
  }

  // Derivative ladder: raise the order, differentiating once per step.
  for (int q = q0 + 1; q <= order_; ++q) {
    const int n_funcs = n_knots - q;
    for (int j = 0; j < n_funcs; ++j) {
      double v = 0.0;
      const double d1 = tau[j + q - 1] - tau[j];
      if (d1 > 0.0) v += vals[j] / d1;
      const double d2 = tau[j + q] - tau[j + 1];
      if (d2 > 0.0) v -= vals[j + 1] / d2;
      vals[j] = (q - 1) * v;
    }
  }

  Eigen::VectorXd row(n_coeffs_);
  for (int j = 0; j < n_coeffs_; ++j) row[j] = vals[j];
  return row;
}

Eigen::MatrixXd SplineBasis::eval(const Eigen::VectorXd& t, int deriv) const {
  Eigen::MatrixXd Phi(t.size(), n_coeffs_);
  for (Eigen::Index i = 0; i < t.size(); ++i)
    Phi.row(i) = eval_row(t[i], deriv).transpose();
  return Phi;
}

Eigen::MatrixXd SplineBasis::roughness_matrix() const {
  if (order_ < 3)
    throw std::invalid_argument(
        "roughness_matrix: order must be >= 3 for a curvature penalty");

  // Gauss-Legendre nodes per subinterval; order_ points are exact well
  // beyond the piecewise-polynomial degree of B'' products.
  const int npts = order_;
  Eigen::VectorXd nodes(npts), weights(npts);
  {
    // Golub-Welsch on the Jacobi matrix for Legendre polynomials.
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(npts, npts);
    for (int i = 1; i < npts; ++i) {
      const double b = i / std::sqrt(4.0 * i * i - 1.0);
      J(i, i - 1) = J(i - 1, i) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    nodes = es.eigenvalues();
    for (int i = 0; i < npts; ++i)
      weights[i] = 2.0 * es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
  }

  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(n_coeffs_, n_coeffs_);
  const int L = n_subintervals();
  const double h = (t_max_ - t_min_) / L;
  for (int seg = 0; seg < L; ++seg) {
    const double a = t_min_ + seg * h;
    for (int q = 0; q < npts; ++q) {
      const double tq = a + 0.5 * h * (nodes[q] + 1.0);
      const Eigen::VectorXd d2 = eval_row(tq, 2);
      R.noalias() += (0.5 * h * weights[q]) * d2 * d2.transpose();
    }
  }
  return 0.5 * (R + R.transpose());
}

SmoothFit smooth(const SplineBasis& basis, const Eigen::VectorXd& w,
                 const Eigen::VectorXd& t, double lambda) {
  if (w.size() != t.size())
    throw std::invalid_argument("smooth: w and t length mismatch");
  if (lambda < 0.0) throw std::invalid_argument("smooth: lambda must be >= 0");
  const Eigen::Index W = w.size();
  const int K = basis.n_coeffs();

  const Eigen::MatrixXd Phi = basis.eval(t);
  const Eigen::MatrixXd A = Phi.transpose() * Phi;
  Eigen::MatrixXd Mn = A;
  if (lambda > 0.0) Mn += lambda * basis.roughness_matrix();

  Eigen::LDLT<Eigen::MatrixXd> ldlt(Mn);
  if (ldlt.info() != Eigen::Success)
    throw std::runtime_error("smooth: singular normal matrix");
  const Eigen::VectorXd rhs = Phi.transpose() * w;
  const Eigen::VectorXd c = ldlt.solve(rhs);
  // Reject a numerically singular system (e.g., W < K at lambda = 0).
  const double res = (Mn * c - rhs).norm();
  const double scale = Mn.norm() * c.norm() + rhs.norm();
  if (!c.allFinite() || res > 1e-8 * std::max(1.0, scale))
    throw std::runtime_error("smooth: normal equations singular or ill-conditioned");

  SmoothFit fit;
  fit.coeffs = c;
  fit.lambda = lambda;
  fit.sse = (w - Phi * c).squaredNorm();
  fit.df = ldlt.solve(A).trace();
  const double denom = static_cast<double>(W) - fit.df;
  if (denom <= 1e-9 * static_cast<double>(W)) {
    fit.gcv = std::numeric_limits<double>::infinity();
  } else {
    fit.gcv = (static_cast<double>(W) / denom) * (fit.sse / denom);
  }
  (void)K;
  return fit;
}

std::pair<double, SmoothFit> select_lambda(const SplineBasis& basis,
                                           const Eigen::VectorXd& w,
                                           const Eigen::VectorXd& t,
                                           const std::vector<double>& grid) {
  if (grid.empty()) throw std::invalid_argument("select_lambda: empty grid");
  bool have = false;
  double best_lambda = 0.0;
  SmoothFit best;
  for (double lam : grid) {
    SmoothFit fit = smooth(basis, w, t, lam);
    if (std::isinf(fit.gcv)) continue;
    if (!have || fit.gcv < best.gcv - 1e-12 ||
        (fit.gcv <= best.gcv + 1e-12 && lam > best_lambda)) {
      have = true;
      best_lambda = lam;
      best = fit;
    }
  }
  if (!have)
    throw std::runtime_error("select_lambda: GCV infinite on the whole grid");
  return {best_lambda, best};
}

std::vector<double> LambdaPolicy::default_grid() {
  std::vector<double> g{0.0};
  for (int k = -6; k <= 4; ++k) g.push_back(std::pow(10.0, k));
  return g;
}

Eigen::MatrixXd spline_features(const SplineBasis& basis,
                                const Eigen::MatrixXd& samples,
                                const Eigen::VectorXd& t,
                                const LambdaPolicy& policy) {
  const Eigen::Index M = samples.rows();
  Eigen::MatrixXd C(M, basis.n_coeffs());
  for (Eigen::Index m = 0; m < M; ++m) {
    const Eigen::VectorXd w = samples.row(m).transpose();
    if (policy.use_gcv) {
      C.row(m) = select_lambda(basis, w, t, policy.grid).second.coeffs.transpose();
    } else {
      C.row(m) = smooth(basis, w, t, policy.fixed_lambda).coeffs.transpose();
    }
  }
  return C;
}

}  // namespace painmt
