#include "painmt/cluster.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace painmt {

SimilarityGraph build_similarity(const std::vector<SessionDescriptor>& descriptors,
                                 double gamma) {
  if (descriptors.empty())
    throw std::invalid_argument("build_similarity: no descriptors");
  if (gamma <= 0.0)
    throw std::invalid_argument("build_similarity: gamma must be positive");
  const int S = static_cast<int>(descriptors.size());

  SimilarityGraph g;
  g.gamma = gamma;
  g.W.resize(S, S);
  g.session_ids.reserve(S);
  for (const auto& d : descriptors) g.session_ids.push_back(d.session_id);
  for (int i = 0; i < S; ++i) {
    g.W(i, i) = 1.0;
    for (int j = i + 1; j < S; ++j) {
      const double d2 = (descriptors[i].p - descriptors[j].p).squaredNorm();
      g.W(i, j) = g.W(j, i) = std::exp(-gamma * d2);
    }
  }
  g.degrees = g.W.rowwise().sum();
  return g;
}

SpectralEmbedding spectral_embed(const SimilarityGraph& graph, int n_tasks) {
  const int S = static_cast<int>(graph.W.rows());
  if (n_tasks < 1 || n_tasks > S)
    throw std::invalid_argument("spectral_embed: n_tasks must lie in [1, S]");

  // Symmetric normalized Laplacian; eigenvalues match I - D^-1 W.
  const Eigen::VectorXd dinv_sqrt = graph.degrees.array().rsqrt();
  Eigen::MatrixXd Lsym =
      dinv_sqrt.asDiagonal() * graph.W * dinv_sqrt.asDiagonal();
  Lsym = -Lsym;
  Lsym.diagonal().array() += 1.0;
  Lsym = 0.5 * (Lsym + Lsym.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Lsym);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("spectral_embed: eigensolver failed to converge");

  SpectralEmbedding emb;
  emb.eigenvalues = es.eigenvalues().head(n_tasks);
  emb.U = dinv_sqrt.asDiagonal() * es.eigenvectors().leftCols(n_tasks);
  return emb;
}

int TaskAssignment::task_of(const std::string& session_id) const {
  auto it = map.find(session_id);
  if (it == map.end())
    throw std::invalid_argument("unknown session in task assignment: " + session_id);
  return it->second;
}

namespace {

double wcss_of(const Eigen::MatrixXd& pts, const Eigen::VectorXi& labels,
               const Eigen::MatrixXd& centroids) {
  double w = 0.0;
  for (Eigen::Index i = 0; i < pts.rows(); ++i)
    w += (pts.row(i) - centroids.row(labels[i])).squaredNorm();
  return w;
}

bool lloyd(const Eigen::MatrixXd& pts, int k, std::mt19937_64& rng,
           KmeansResult& out) {
  const Eigen::Index S = pts.rows();

  // Seeding with probability proportional to squared distance.
  Eigen::MatrixXd centroids(k, pts.cols());
  std::uniform_int_distribution<Eigen::Index> first(0, S - 1);
  centroids.row(0) = pts.row(first(rng));
  Eigen::VectorXd d2 = (pts.rowwise() - centroids.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double r = u(rng), acc = 0.0;
      for (Eigen::Index i = 0; i < S; ++i) {
        acc += d2[i];
        if (r <= acc) { pick = i; break; }
      }
    } else {
      pick = first(rng);
    }
    centroids.row(c) = pts.row(pick);
    d2 = d2.cwiseMin((pts.rowwise() - centroids.row(c)).rowwise().squaredNorm());
  }

  Eigen::VectorXi labels = Eigen::VectorXi::Constant(S, -1);
  for (int iter = 0; iter < 200; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < S; ++i) {
      int best = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = (pts.row(i) - centroids.row(c)).squaredNorm();
        if (d < bd) { bd = d; best = c; }
      }
      if (labels[i] != best) { labels[i] = best; changed = true; }
    }
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, pts.cols());
    Eigen::VectorXi counts = Eigen::VectorXi::Zero(k);
    for (Eigen::Index i = 0; i < S; ++i) {
      sums.row(labels[i]) += pts.row(i);
      counts[labels[i]] += 1;
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] == 0) return false;  // dead cluster, restart invalid
      centroids.row(c) = sums.row(c) / counts[c];
    }
    if (!changed) break;
  }
  out.labels = labels;
  out.centroids = centroids;
  out.wcss = wcss_of(pts, labels, centroids);
  return true;
}

}  // namespace

KmeansResult kmeans(const Eigen::MatrixXd& points, int n_clusters,
                    std::uint64_t seed, int n_restarts) {
  const Eigen::Index S = points.rows();
  if (n_clusters < 1 || static_cast<Eigen::Index>(n_clusters) > S)
    throw std::invalid_argument("kmeans: need 1 <= k <= n_points");
  if (n_restarts < 1) throw std::invalid_argument("kmeans: n_restarts must be >= 1");

  KmeansResult best;
  bool have = false;
  for (int r = 0; r < n_restarts; ++r) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(r));
    KmeansResult res;
    if (!lloyd(points, n_clusters, rng, res)) continue;
    if (!have || res.wcss < best.wcss) {  // ties keep the lowest restart index
      best = res;
      have = true;
    }
  }
  if (!have)
    throw std::runtime_error("kmeans: every restart ended with an empty cluster");
  return best;
}

ClusterResult assign_tasks(const std::vector<SessionDescriptor>& descriptors,
                           int n_tasks, double gamma, std::uint64_t seed,
                           int n_restarts) {
  const SimilarityGraph graph = build_similarity(descriptors, gamma);
  const SpectralEmbedding emb = spectral_embed(graph, n_tasks);
  const KmeansResult km = kmeans(emb.U, n_tasks, seed, n_restarts);
  const int S = static_cast<int>(descriptors.size());

  ClusterResult res;
  res.assignment.n_tasks = n_tasks;
  res.eigenvalues = emb.eigenvalues;
  for (int i = 0; i < S; ++i)
    res.assignment.map[graph.session_ids[i]] = km.labels[i];

  std::vector<int> order(S);
  for (int i = 0; i < S; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return km.labels[a] < km.labels[b]; });
  res.permuted_order.reserve(S);
  res.permuted_similarity.resize(S, S);
  for (int i = 0; i < S; ++i) {
    res.permuted_order.push_back(graph.session_ids[order[i]]);
    for (int j = 0; j < S; ++j)
      res.permuted_similarity(i, j) = graph.W(order[i], order[j]);
  }
  return res;
}

}  // namespace painmt
