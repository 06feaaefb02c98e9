#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "painmt/features.hpp"

namespace painmt {

struct SimilarityGraph {
  Eigen::MatrixXd W;        // S x S RBF similarities, w_ii = 1
  Eigen::VectorXd degrees;  // row sums (self-loops included)
  double gamma = 0.10;
  std::vector<std::string> session_ids;
};

SimilarityGraph build_similarity(const std::vector<SessionDescriptor>& descriptors,
                                 double gamma);

struct SpectralEmbedding {
  Eigen::MatrixXd U;            // S x T random-walk eigenvectors
  Eigen::VectorXd eigenvalues;  // T smallest, ascending
};

// Eigenvectors of L = I - D^-1 W for the T smallest eigenvalues, computed
// through the symmetric form and mapped back by D^-1/2.
SpectralEmbedding spectral_embed(const SimilarityGraph& graph, int n_tasks);

struct TaskAssignment {
  int n_tasks = 1;
  std::map<std::string, int> map;  // session_id -> task index

  int task_of(const std::string& session_id) const;
};

struct KmeansResult {
  Eigen::VectorXi labels;
  Eigen::MatrixXd centroids;
  double wcss = 0.0;
};

// Lloyd's algorithm with distance-proportional seeding, best of n_restarts
// by within-cluster sum of squares; deterministic given seed.
KmeansResult kmeans(const Eigen::MatrixXd& points, int n_clusters,
                    std::uint64_t seed, int n_restarts = 10);

struct ClusterResult {
  TaskAssignment assignment;
  Eigen::VectorXd eigenvalues;
  std::vector<std::string> permuted_order;   // sessions grouped by cluster
  Eigen::MatrixXd permuted_similarity;       // W reordered for heatmaps
};

ClusterResult assign_tasks(const std::vector<SessionDescriptor>& descriptors,
                           int n_tasks, double gamma, std::uint64_t seed,
                           int n_restarts = 10);

}  // namespace painmt
