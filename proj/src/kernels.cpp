#include "painmt/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>
#include <vector>

namespace painmt {

const char* to_string(KernelKind k) {
  return k == KernelKind::linear ? "linear" : "rbf";
}

KernelKind kernel_kind_from_string(const std::string& s) {
  if (s == "linear") return KernelKind::linear;
  if (s == "rbf") return KernelKind::rbf;
  throw std::invalid_argument("unknown kernel kind: " + s);
}

double resolve_gamma(GammaPolicy policy, const Eigen::MatrixXd& X,
                     std::uint64_t seed, double fixed_gamma) {
  const Eigen::Index n = X.rows();
  const Eigen::Index d = X.cols();
  switch (policy) {
    case GammaPolicy::fixed:
      if (fixed_gamma <= 0.0)
        throw std::invalid_argument("resolve_gamma: fixed gamma must be positive");
      return fixed_gamma;
    case GammaPolicy::inverse_dimension:
      return 1.0 / static_cast<double>(d);
    case GammaPolicy::median_heuristic: {
      if (n < 2)
        throw std::invalid_argument("resolve_gamma: median heuristic needs >= 2 rows");
      const Eigen::Index n_pairs = n * (n - 1) / 2;
      std::vector<double> d2;
      if (n_pairs <= 1000) {
        d2.reserve(n_pairs);
        for (Eigen::Index i = 0; i < n; ++i)
          for (Eigen::Index j = i + 1; j < n; ++j)
            d2.push_back((X.row(i) - X.row(j)).squaredNorm());
      } else {
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
        d2.reserve(1000);
        while (d2.size() < 1000) {
          const Eigen::Index i = pick(rng);
          const Eigen::Index j = pick(rng);
          if (i == j) continue;
          d2.push_back((X.row(i) - X.row(j)).squaredNorm());
        }
      }
      std::nth_element(d2.begin(), d2.begin() + d2.size() / 2, d2.end());
      const double med = d2[d2.size() / 2];
      if (med <= 0.0) {
        std::fprintf(stderr,
                     "resolve_gamma: all pairwise distances zero; "
                     "falling back to 1/d\n");
        return 1.0 / static_cast<double>(d);
      }
      return 1.0 / med;
    }
  }
  throw std::logic_error("resolve_gamma: unreachable");
}

namespace detail {

Eigen::MatrixXd gram_channel_serial(KernelKind kind, double gamma,
                                    const Eigen::MatrixXd& X,
                                    const Eigen::MatrixXd& Z) {
  if (X.cols() != Z.cols())
    throw std::invalid_argument("gram_channel: block dimension mismatch");
  if (kind == KernelKind::linear) return X * Z.transpose();
  if (gamma <= 0.0)
    throw std::invalid_argument("gram_channel: rbf gamma not resolved");
  Eigen::MatrixXd G(X.rows(), Z.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index j = 0; j < Z.rows(); ++j)
      G(i, j) = std::exp(-gamma * (X.row(i) - Z.row(j)).squaredNorm());
  return G;
}

}  // namespace detail

Eigen::MatrixXd gram_channel(KernelKind kind, double gamma,
                             const Eigen::MatrixXd& X, const Eigen::MatrixXd& Z) {
  if (X.cols() != Z.cols())
    throw std::invalid_argument("gram_channel: block dimension mismatch");
  if (kind == KernelKind::linear) return X * Z.transpose();
  if (gamma <= 0.0)
    throw std::invalid_argument("gram_channel: rbf gamma not resolved");

  // exp(-gamma * (|x|^2 + |z|^2 - 2 x.z)), row-parallel.
  const Eigen::VectorXd xn = X.rowwise().squaredNorm();
  const Eigen::VectorXd zn = Z.rowwise().squaredNorm();
  Eigen::MatrixXd G = X * Z.transpose();
  const Eigen::Index nr = G.rows();
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < nr; ++i) {
    for (Eigen::Index j = 0; j < G.cols(); ++j) {
      const double d2 = std::max(0.0, xn[i] + zn[j] - 2.0 * G(i, j));
      G(i, j) = std::exp(-gamma * d2);
    }
  }
  return G;
}

Eigen::MatrixXd combine(const std::vector<Eigen::MatrixXd>& grams,
                        const Eigen::VectorXd& eta) {
  if (grams.empty()) throw std::invalid_argument("combine: no gram matrices");
  if (static_cast<Eigen::Index>(grams.size()) != eta.size())
    throw std::invalid_argument("combine: eta length does not match gram count");
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(grams[0].rows(), grams[0].cols());
  for (size_t m = 0; m < grams.size(); ++m) {
    if (grams[m].rows() != K.rows() || grams[m].cols() != K.cols())
      throw std::invalid_argument("combine: gram shape mismatch at channel " +
                                  std::to_string(m));
    K.noalias() += eta[static_cast<Eigen::Index>(m)] * grams[m];
  }
  return K;
}

}  // namespace painmt
