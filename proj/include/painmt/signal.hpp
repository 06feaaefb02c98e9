#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace painmt {

struct StimEvent {
  double onset_s = 0.0;
  int rating = 0;  // 0..10 subjective scale
};

// One recording: per-channel HbO time series plus stimulus events.
struct Session {
  std::string id;
  std::string subject_id;
  double sample_rate_hz = 25.0;
  Eigen::MatrixXd channels;  // M x n_samples, micromolar
  std::vector<StimEvent> events;
  std::pair<double, double> baseline_span_s{0.0, 0.0};

  int n_channels() const { return static_cast<int>(channels.rows()); }
  Eigen::Index n_samples() const { return channels.cols(); }
  double duration_s() const {
    return static_cast<double>(n_samples()) / sample_rate_hz;
  }

  // Throws std::invalid_argument on any violated invariant.
  void validate() const;
};

struct LabeledWindow {
  std::string session_id;
  int label = 0;             // +1 pain, -1 no-pain
  Eigen::MatrixXd samples;   // M x W
  double onset_s = 0.0;
};

// Zero-phase Butterworth low-pass (forward-backward biquad cascade).
// Requires 0 < cutoff_hz < sample_rate_hz/2, order >= 1,
// series.size() >= 3*order.
Eigen::VectorXd lowpass_filter(const Eigen::VectorXd& series,
                               double sample_rate_hz, double cutoff_hz,
                               int order);

// Residual after least-squares polynomial fit of the given degree.
Eigen::VectorXd detrend_poly(const Eigen::VectorXd& series, int degree);

// One +1 window per rating-7 event (starting at onset) plus n_baseline
// -1 windows sampled from the baseline span. Deterministic given seed.
std::vector<LabeledWindow> extract_windows(const Session& session,
                                           double window_len_s,
                                           int n_baseline, std::uint64_t seed);

}  // namespace painmt
