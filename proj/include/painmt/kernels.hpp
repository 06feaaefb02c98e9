#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace painmt {

enum class KernelKind { linear, rbf };

const char* to_string(KernelKind k);
KernelKind kernel_kind_from_string(const std::string& s);

enum class GammaPolicy { fixed, median_heuristic, inverse_dimension };

struct KernelSpec {
  KernelKind kind = KernelKind::rbf;
  GammaPolicy policy = GammaPolicy::median_heuristic;
  double gamma = 0.0;  // used when policy == fixed
};

// Median-heuristic gamma = 1 / median pairwise squared distance (up to 1000
// subsampled pairs, seeded). Falls back to 1/d when all distances are zero.
double resolve_gamma(GammaPolicy policy, const Eigen::MatrixXd& X,
                     std::uint64_t seed, double fixed_gamma = 0.0);

// N x N' Gram between the rows of X and Z for one channel block.
Eigen::MatrixXd gram_channel(KernelKind kind, double gamma,
                             const Eigen::MatrixXd& X, const Eigen::MatrixXd& Z);

namespace detail {
// Serial reference for the OpenMP path above; kept for testing/benchmarks.
Eigen::MatrixXd gram_channel_serial(KernelKind kind, double gamma,
                                    const Eigen::MatrixXd& X,
                                    const Eigen::MatrixXd& Z);
}  // namespace detail

// Sum of eta_m * K_m over channels.
Eigen::MatrixXd combine(const std::vector<Eigen::MatrixXd>& grams,
                        const Eigen::VectorXd& eta);

}  // namespace painmt
