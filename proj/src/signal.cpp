#include "painmt/signal.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>

namespace painmt {

void Session::validate() const {
  if (id.empty()) throw std::invalid_argument("session: empty id");
  if (sample_rate_hz <= 0.0)
    throw std::invalid_argument("session " + id + ": sample_rate_hz must be positive");
  if (n_channels() < 1)
    throw std::invalid_argument("session " + id + ": needs at least one channel");
  if (n_samples() < 1)
    throw std::invalid_argument("session " + id + ": empty channel series");
  if (!channels.allFinite())
    throw std::invalid_argument("session " + id + ": non-finite sample values");
  const double dur = duration_s();
  for (const auto& ev : events) {
    if (ev.onset_s < 0.0 || ev.onset_s > dur)
      throw std::invalid_argument("session " + id + ": event onset " +
                                  std::to_string(ev.onset_s) +
                                  " outside recording [0, " + std::to_string(dur) + "]");
  }
  if (baseline_span_s.second < baseline_span_s.first ||
      baseline_span_s.first < 0.0 || baseline_span_s.second > dur)
    throw std::invalid_argument("session " + id + ": invalid baseline span");
}

namespace {

// One second-order (or first-order, b2=a2=0) section, direct form II transposed.
struct Biquad {
  double b0, b1, b2, a1, a2;  // a0 normalized to 1

  // Runs the section over x in place, starting from the steady state
  // for a constant input equal to x[0]; keeps transients off DC.
  void run(Eigen::VectorXd& x) const {
    const double x0 = x[0];
    double s1 = (1.0 - b0) * x0;
    double s2 = (b2 - a2) * x0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double xi = x[i];
      const double yi = b0 * xi + s1;
      s1 = b1 * xi - a1 * yi + s2;
      s2 = b2 * xi - a2 * yi;
      x[i] = yi;
    }
  }
};

// Butterworth low-pass as a cascade of bilinear-transformed sections,
// with frequency prewarping. Each section has exact unit DC gain.
std::vector<Biquad> butterworth_sections(double sample_rate_hz,
                                         double cutoff_hz, int order) {
  const double w = std::tan(M_PI * cutoff_hz / sample_rate_hz);  // prewarped, /(2fs)
  std::vector<Biquad> sections;
  const int n_pairs = order / 2;
  for (int k = 1; k <= n_pairs; ++k) {
    // Analog pole pair at angle theta off the negative real axis.
    const double theta = M_PI * (2.0 * k + order - 1.0) / (2.0 * order);
    const double a1n = -2.0 * w * std::cos(theta);  // cos(theta) < 0
    const double a0n = w * w;
    const double d = 1.0 + a1n + a0n;
    sections.push_back(Biquad{a0n / d, 2.0 * a0n / d, a0n / d,
                              (-2.0 + 2.0 * a0n) / d, (1.0 - a1n + a0n) / d});
  }
  if (order % 2 == 1) {
    const double d = 1.0 + w;
    sections.push_back(Biquad{w / d, w / d, 0.0, -(1.0 - w) / d, 0.0});
  }
  return sections;
}

}  // namespace

Eigen::VectorXd lowpass_filter(const Eigen::VectorXd& series,
                               double sample_rate_hz, double cutoff_hz,
                               int order) {
  if (order < 1) throw std::invalid_argument("lowpass_filter: order must be >= 1");
  if (cutoff_hz <= 0.0 || cutoff_hz >= sample_rate_hz / 2.0)
    throw std::invalid_argument("lowpass_filter: cutoff must lie in (0, Nyquist)");
  const Eigen::Index n = series.size();
  if (n < 3 * static_cast<Eigen::Index>(order))
    throw std::invalid_argument("lowpass_filter: series shorter than 3x order");

  // Reflective padding (odd reflection about the end samples).
  const Eigen::Index pad = 3 * static_cast<Eigen::Index>(order);
  Eigen::VectorXd x(n + 2 * pad);
  for (Eigen::Index i = 0; i < pad; ++i)
    x[i] = 2.0 * series[0] - series[pad - i];
  x.segment(pad, n) = series;
  for (Eigen::Index i = 0; i < pad; ++i)
    x[pad + n + i] = 2.0 * series[n - 1] - series[n - 2 - i];

  const auto sections = butterworth_sections(sample_rate_hz, cutoff_hz, order);
  for (const auto& s : sections) s.run(x);
  x.reverseInPlace();
  for (const auto& s : sections) s.run(x);
  x.reverseInPlace();
  return x.segment(pad, n);
}

Eigen::VectorXd detrend_poly(const Eigen::VectorXd& series, int degree) {
  if (degree < 0) throw std::invalid_argument("detrend_poly: degree must be >= 0");
  const Eigen::Index n = series.size();
  if (n <= static_cast<Eigen::Index>(degree) + 1)
    throw std::invalid_argument("detrend_poly: series too short for degree " +
                                std::to_string(degree));
  // Time mapped to [-1, 1] for conditioning; residual is unaffected.
  Eigen::MatrixXd V(n, degree + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = n > 1 ? -1.0 + 2.0 * static_cast<double>(i) / (n - 1) : 0.0;
    double p = 1.0;
    for (int d = 0; d <= degree; ++d) {
      V(i, d) = p;
      p *= t;
    }
  }
  Eigen::VectorXd coef = V.colPivHouseholderQr().solve(series);
  return series - V * coef;
}

std::vector<LabeledWindow> extract_windows(const Session& session,
                                           double window_len_s,
                                           int n_baseline, std::uint64_t seed) {
  session.validate();
  if (window_len_s <= 0.0)
    throw std::invalid_argument("extract_windows: window length must be positive");
  if (n_baseline < 0)
    throw std::invalid_argument("extract_windows: n_baseline must be >= 0");

  const double fs = session.sample_rate_hz;
  const Eigen::Index W = static_cast<Eigen::Index>(std::llround(window_len_s * fs));
  const Eigen::Index n = session.n_samples();

  std::vector<LabeledWindow> out;
  std::vector<std::pair<double, double>> stim_epochs;
  for (const auto& ev : session.events) {
    if (ev.rating != 7) continue;  // innocuous (rating-3) epochs excluded from both classes
    const Eigen::Index start = static_cast<Eigen::Index>(std::llround(ev.onset_s * fs));
    if (start + W > n)
      throw std::invalid_argument("extract_windows: session " + session.id +
                                  ": event at " + std::to_string(ev.onset_s) +
                                  "s has less than " + std::to_string(window_len_s) +
                                  "s of signal after onset");
    out.push_back({session.id, +1, session.channels.middleCols(start, W), ev.onset_s});
    stim_epochs.emplace_back(ev.onset_s, ev.onset_s + window_len_s);
  }

  if (n_baseline > 0) {
    const double b0 = session.baseline_span_s.first;
    const double b1 = session.baseline_span_s.second;
    if (b1 - b0 < window_len_s)
      throw std::invalid_argument("extract_windows: session " + session.id +
                                  ": baseline span shorter than window length");
    const Eigen::Index i0 = static_cast<Eigen::Index>(std::llround(b0 * fs));
    const Eigen::Index i1 = static_cast<Eigen::Index>(std::llround(b1 * fs)) - W;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<Eigen::Index> pick(i0, i1);
    const int max_attempts = 1000 * std::max(1, n_baseline);
    int placed = 0;
    for (int attempt = 0; attempt < max_attempts && placed < n_baseline; ++attempt) {
      const Eigen::Index start = pick(rng);
      const double t0 = static_cast<double>(start) / fs;
      const double t1 = t0 + window_len_s;
      bool hits_stim = false;
      for (const auto& [s0, s1] : stim_epochs)
        if (t0 < s1 && s0 < t1) { hits_stim = true; break; }
      if (hits_stim) continue;
      out.push_back({session.id, -1, session.channels.middleCols(start, W), t0});
      ++placed;
    }
    if (placed < n_baseline)
      throw std::runtime_error("extract_windows: session " + session.id +
                               ": could not place " + std::to_string(n_baseline) +
                               " baseline windows clear of stimulus epochs");
  }
  return out;
}

}  // namespace painmt
