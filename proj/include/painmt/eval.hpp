#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "painmt/cluster.hpp"
#include "painmt/features.hpp"
#include "painmt/kernels.hpp"
#include "painmt/mtmkl.hpp"
#include "painmt/signal.hpp"
#include "painmt/synth.hpp"

namespace painmt {

struct MetricsResult {
  double accuracy = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  double f_score = 0.0;
  bool degenerate = false;  // some ratio had a zero denominator
};

MetricsResult compute_metrics(const std::vector<int>& y_true,
                              const std::vector<int>& y_pred);

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
  bool degenerate = false;  // zero-variance differences
};

// Paired two-tailed t-test on fold-wise differences, df = n - 1.
TTestResult paired_ttest(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

double student_t_cdf(double x, double dof);
double regularized_incomplete_beta(double a, double b, double x);

// Indices of windows kept after downsampling the over-represented class.
std::vector<int> balance(const std::vector<FeatureVector>& vectors,
                         std::uint64_t seed);

// Stratified fold index lists; strata are (label, session) pairs.
std::vector<std::vector<int>> make_folds(const std::vector<FeatureVector>& vectors,
                                         int n_folds, std::uint64_t seed);

struct ExperimentConfig {
  // ingestion
  double window_len_s = 20.0;
  int n_baseline_windows = 6;
  bool lowpass = false;
  double lowpass_cutoff_hz = 0.5;
  int lowpass_order = 3;
  bool detrend = false;
  int detrend_degree = 3;
  // features
  FeatureSet feature_set = FeatureSet::spline;
  int spline_order = 4;
  int n_spline_coeffs = 10;
  LambdaPolicy lambda_policy;
  // clustering
  std::vector<int> n_tasks_values = {1, 3};
  double cluster_gamma = 0.10;
  bool descriptor_positive_only = true;
  bool descriptor_l1 = false;
  int kmeans_restarts = 10;
  // model
  std::vector<KernelKind> kernels = {KernelKind::rbf};
  std::vector<Regularizer> regularizers = {Regularizer::l1};
  GammaPolicy gamma_policy = GammaPolicy::median_heuristic;
  double fixed_gamma = 0.0;
  std::vector<double> c_grid = default_power_grid();
  std::vector<double> nu_grid = default_power_grid();
  MtMklOptions optimizer;
  // protocol
  int outer_folds = 10;
  int inner_folds = 5;
  bool session_level_folds = false;
  std::uint64_t seed = 0;

  static std::vector<double> default_power_grid();  // 10^-4 .. 10^3
};

struct FoldResult {
  int fold = 0;
  double chosen_C = 0.0;
  double chosen_nu = 0.0;
  MetricsResult metrics;
  std::vector<double> per_cluster_accuracy;
  std::vector<int> per_cluster_count;
  Eigen::MatrixXd eta;       // T x M learned weights
  std::string model_hash;    // digest of the trained model (leakage audit)
};

struct VariantResult {
  KernelKind kernel = KernelKind::rbf;
  Regularizer reg = Regularizer::l1;
  int n_tasks = 1;
  std::vector<FoldResult> folds;
  double mean_accuracy = 0.0;
  double mean_sensitivity = 0.0;
  double mean_specificity = 0.0;
  double mean_f_score = 0.0;
};

struct ComparisonResult {
  KernelKind kernel = KernelKind::rbf;
  Regularizer reg = Regularizer::l1;
  int n_tasks_a = 1;
  int n_tasks_b = 1;
  TTestResult ttest;
};

struct EvalReport {
  std::vector<VariantResult> variants;
  std::vector<ComparisonResult> comparisons;  // each T>1 vs T=1 per kernel/reg
  int n_windows = 0;
  int feature_dim = 0;
};

// Full protocol: windowing, features, per-fold descriptors/clustering,
// inner-CV hyperparameter search, MT-MKL training, metrics and t-tests.
// poison_test, when set, overwrites test-fold feature vectors with a
// sentinel before training (leakage audit support).
EvalReport run_experiment(const std::vector<Session>& sessions,
                          const ExperimentConfig& config,
                          bool poison_test = false);

// Assembled, unscaled feature vectors for all windows of all sessions.
std::vector<FeatureVector> extract_features(const std::vector<Session>& sessions,
                                            const ExperimentConfig& config);

// Human-readable results table (rows: kernel x regularizer x T).
std::string format_report_table(const EvalReport& report,
                                const ExperimentConfig& config);

}  // namespace painmt
