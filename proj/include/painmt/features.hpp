#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "painmt/bspline.hpp"
#include "painmt/signal.hpp"

namespace painmt {

enum class FeatureSet { spline, stats, combined };

const char* to_string(FeatureSet set);
FeatureSet feature_set_from_string(const std::string& s);

// Per-channel feature dimension: 10 spline, 11 stats, 21 combined.
int block_dim(FeatureSet set, int n_spline_coeffs);

struct FeatureVector {
  std::string session_id;
  int label = 0;
  Eigen::VectorXd x;  // channel-major concatenation of M blocks
  int n_channels = 0;
  int dim_per_channel = 0;
  FeatureSet set = FeatureSet::spline;
};

// (mean, sample std, max, min, range, slope vs time, argmax, argmin,
//  excess kurtosis, skewness, trapezoid AUC). Zero-variance series get
// std = kurtosis = skewness = 0.
Eigen::VectorXd stat_features(const Eigen::VectorXd& series, double dt);

FeatureVector assemble(const LabeledWindow& window, FeatureSet set,
                       const SplineBasis& basis, const LambdaPolicy& policy,
                       double sample_rate_hz);

struct Scaler {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;  // 0 marks a zero-variance dimension (maps to 0)

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  Eigen::VectorXd invert(const Eigen::VectorXd& z) const;
};

// Per-dimension zero-mean unit-variance transform fit on train.
Scaler fit_scaler(const std::vector<FeatureVector>& train);
void apply_scaler(const Scaler& s, std::vector<FeatureVector>& vectors);

struct SessionDescriptor {
  std::string session_id;
  Eigen::VectorXd p;
  bool normalized = false;
};

// Mean feature vector over the session's vectors (label +1 only when
// positive_only), normalized to sum 1 (or unit L1 norm when l1_norm).
SessionDescriptor session_descriptor(const std::vector<FeatureVector>& vectors,
                                     const std::string& session_id,
                                     bool positive_only, bool l1_norm);

}  // namespace painmt
