#include "painmt/features.hpp"

#include <cmath>
#include <stdexcept>

namespace painmt {

const char* to_string(FeatureSet set) {
  switch (set) {
    case FeatureSet::spline: return "spline";
    case FeatureSet::stats: return "stats";
    case FeatureSet::combined: return "combined";
  }
  return "?";
}

FeatureSet feature_set_from_string(const std::string& s) {
  if (s == "spline") return FeatureSet::spline;
  if (s == "stats") return FeatureSet::stats;
  if (s == "combined") return FeatureSet::combined;
  throw std::invalid_argument("unknown feature set: " + s);
}

int block_dim(FeatureSet set, int n_spline_coeffs) {
  switch (set) {
    case FeatureSet::spline: return n_spline_coeffs;
    case FeatureSet::stats: return 11;
    case FeatureSet::combined: return n_spline_coeffs + 11;
  }
  return 0;
}

Eigen::VectorXd stat_features(const Eigen::VectorXd& w, double dt) {
  const Eigen::Index n = w.size();
  if (n < 2) throw std::invalid_argument("stat_features: need at least 2 samples");
  if (dt <= 0.0) throw std::invalid_argument("stat_features: dt must be positive");

  const double mean = w.mean();
  const Eigen::VectorXd d = w.array() - mean;
  const double m2 = d.squaredNorm() / n;
  const double m3 = d.array().cube().sum() / n;
  const double m4 = d.array().pow(4).sum() / n;
  const bool degenerate = m2 <= 1e-20 * (1.0 + mean * mean);

  const double sd = degenerate ? 0.0 : std::sqrt(d.squaredNorm() / (n - 1));
  Eigen::Index argmax = 0, argmin = 0;
  const double mx = w.maxCoeff(&argmax);
  const double mn = w.minCoeff(&argmin);

  // Slope of the least-squares line against t_i = i*dt.
  double slope = 0.0;
  {
    const double tbar = dt * (n - 1) / 2.0;
    double sxy = 0.0, sxx = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double x = i * dt - tbar;
      sxy += x * d[i];
      sxx += x * x;
    }
    slope = sxx > 0.0 ? sxy / sxx : 0.0;
  }

  const double kurt = degenerate ? 0.0 : m4 / (m2 * m2) - 3.0;
  const double skew = degenerate ? 0.0 : m3 / std::pow(m2, 1.5);

  double auc = 0.0;
  for (Eigen::Index i = 0; i + 1 < n; ++i) auc += 0.5 * dt * (w[i] + w[i + 1]);

  Eigen::VectorXd f(11);
  f << mean, sd, mx, mn, mx - mn, slope, static_cast<double>(argmax),
      static_cast<double>(argmin), kurt, skew, auc;
  return f;
}

FeatureVector assemble(const LabeledWindow& window, FeatureSet set,
                       const SplineBasis& basis, const LambdaPolicy& policy,
                       double sample_rate_hz) {
  const Eigen::Index M = window.samples.rows();
  const Eigen::Index W = window.samples.cols();
  const double dt = 1.0 / sample_rate_hz;
  const int K = basis.n_coeffs();
  const int dm = block_dim(set, K);

  FeatureVector fv;
  fv.session_id = window.session_id;
  fv.label = window.label;
  fv.n_channels = static_cast<int>(M);
  fv.dim_per_channel = dm;
  fv.set = set;
  fv.x.resize(M * dm);

  Eigen::MatrixXd C;
  if (set != FeatureSet::stats) {
    // Sample times mapped onto the basis domain.
    Eigen::VectorXd t(W);
    const double span = basis.t_max() - basis.t_min();
    for (Eigen::Index i = 0; i < W; ++i)
      t[i] = basis.t_min() + span * static_cast<double>(i) / (W - 1);
    C = spline_features(basis, window.samples, t, policy);
  }

  for (Eigen::Index m = 0; m < M; ++m) {
    Eigen::Index off = m * dm;
    if (set != FeatureSet::stats) {
      fv.x.segment(off, K) = C.row(m).transpose();
      off += K;
    }
    if (set != FeatureSet::spline)
      fv.x.segment(off, 11) = stat_features(window.samples.row(m).transpose(), dt);
  }
  if (!fv.x.allFinite())
    throw std::runtime_error("assemble: non-finite feature values for session " +
                             window.session_id);
  return fv;
}

Eigen::VectorXd Scaler::apply(const Eigen::VectorXd& x) const {
  Eigen::VectorXd z(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i)
    z[i] = scale[i] > 0.0 ? (x[i] - mean[i]) / scale[i] : 0.0;
  return z;
}

Eigen::VectorXd Scaler::invert(const Eigen::VectorXd& z) const {
  Eigen::VectorXd x(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i)
    x[i] = scale[i] > 0.0 ? z[i] * scale[i] + mean[i] : mean[i];
  return x;
}

Scaler fit_scaler(const std::vector<FeatureVector>& train) {
  if (train.empty()) throw std::invalid_argument("fit_scaler: empty training set");
  const Eigen::Index D = train.front().x.size();
  const double n = static_cast<double>(train.size());
  Scaler s;
  s.mean = Eigen::VectorXd::Zero(D);
  for (const auto& fv : train) s.mean += fv.x;
  s.mean /= n;
  Eigen::VectorXd var = Eigen::VectorXd::Zero(D);
  for (const auto& fv : train) var += (fv.x - s.mean).cwiseAbs2();
  var /= n;
  s.scale.resize(D);
  for (Eigen::Index i = 0; i < D; ++i)
    s.scale[i] = var[i] > 1e-24 ? std::sqrt(var[i]) : 0.0;
  return s;
}

void apply_scaler(const Scaler& s, std::vector<FeatureVector>& vectors) {
  for (auto& fv : vectors) fv.x = s.apply(fv.x);
}

SessionDescriptor session_descriptor(const std::vector<FeatureVector>& vectors,
                                     const std::string& session_id,
                                     bool positive_only, bool l1_norm) {
  Eigen::VectorXd p;
  int count = 0;
  for (const auto& fv : vectors) {
    if (fv.session_id != session_id) continue;
    if (positive_only && fv.label != +1) continue;
    if (count == 0) p = Eigen::VectorXd::Zero(fv.x.size());
    p += fv.x;
    ++count;
  }
  if (count == 0)
    throw std::invalid_argument("session_descriptor: no matching vectors for session " +
                                session_id);
  p /= static_cast<double>(count);

  const double denom = l1_norm ? p.lpNorm<1>() : p.sum();
  if (std::abs(denom) < 1e-9)
    throw std::runtime_error(
        "session_descriptor: session " + session_id +
        ": normalizer near zero; consider the L1 normalization mode");
  return {session_id, p / denom, true};
}

}  // namespace painmt
