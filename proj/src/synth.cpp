#include "painmt/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

namespace painmt {

Eigen::VectorXd hemodynamic_bump(const Eigen::VectorXd& t, double peak_s,
                                 double width_s, double amplitude) {
  if (peak_s <= 0.0 || width_s <= 0.0)
    throw std::invalid_argument("hemodynamic_bump: peak and width must be positive");
  // Gamma density with scale = width and shape chosen so the mode sits at
  // peak_s; defaults (6 s, 2 s) give shape 4.
  const double theta = width_s;
  const double k = 1.0 + peak_s / theta;
  const double log_peak = (k - 1.0) * std::log(peak_s) - peak_s / theta;
  Eigen::VectorXd out(t.size());
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    const double ti = t[i];
    out[i] = ti <= 0.0 ? 0.0
                       : amplitude * std::exp((k - 1.0) * std::log(ti) -
                                              ti / theta - log_peak);
  }
  return out;
}

Session generate_session(const ProfileSpec& profile, const std::string& session_id,
                         int n_pain_events, int n_innocuous_events,
                         std::uint64_t seed, const SynthLayout& layout) {
  const int M = static_cast<int>(profile.channel_gain.size());
  if (M < 1) throw std::invalid_argument("generate_session: empty channel gains");
  if (profile.channel_gain.minCoeff() < 0.0)
    throw std::invalid_argument("generate_session: channel gains must be >= 0");
  if (profile.channel_gain.maxCoeff() <= 0.0)
    throw std::invalid_argument("generate_session: at least one channel must respond");
  if (profile.noise.ar1_coeff < 0.0 || profile.noise.ar1_coeff >= 1.0)
    throw std::invalid_argument("generate_session: ar1 coefficient must be in [0, 1)");

  const double fs = layout.sample_rate_hz;
  const int n_events = n_pain_events + n_innocuous_events;
  const double stim_start = layout.baseline_len_s + 5.0;
  const double duration = stim_start + n_events * layout.stim_spacing_s +
                          layout.window_len_s;
  const Eigen::Index n = static_cast<Eigen::Index>(std::llround(duration * fs));

  std::mt19937_64 rng(seed);

  Session s;
  s.id = session_id;
  s.subject_id = session_id;
  s.sample_rate_hz = fs;
  s.baseline_span_s = {0.0, layout.baseline_len_s};
  s.channels.setZero(M, n);

  // Randomized event order, fixed 25 s spacing.
  std::vector<int> ratings(n_pain_events, 7);
  ratings.insert(ratings.end(), n_innocuous_events, 3);
  std::shuffle(ratings.begin(), ratings.end(), rng);
  for (int e = 0; e < n_events; ++e) {
    const double onset = stim_start + e * layout.stim_spacing_s;
    s.events.push_back({onset, ratings[e]});
    if (ratings[e] != 7) continue;
    // Evoked response over the post-onset window, gain-weighted per channel.
    const Eigen::Index i0 = static_cast<Eigen::Index>(std::llround(onset * fs));
    const Eigen::Index len = std::min<Eigen::Index>(
        static_cast<Eigen::Index>(std::llround(layout.window_len_s * fs)), n - i0);
    Eigen::VectorXd t(len);
    for (Eigen::Index i = 0; i < len; ++i) t[i] = static_cast<double>(i) / fs;
    const Eigen::VectorXd bump = hemodynamic_bump(
        t, profile.response_peak_s, profile.response_width_s, profile.amplitude);
    for (int m = 0; m < M; ++m)
      if (profile.channel_gain[m] > 0.0)
        s.channels.row(m).segment(i0, len) +=
            profile.channel_gain[m] * bump.transpose();
  }

  // AR(1) noise (innovations scaled for the requested stationary sd) plus a
  // cardiac sinusoid with a random phase per channel.
  const double a = profile.noise.ar1_coeff;
  const double innov_sd = profile.noise.noise_sd * std::sqrt(1.0 - a * a);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * M_PI);
  for (int m = 0; m < M; ++m) {
    const double phase = phase_dist(rng);
    double x = profile.noise.noise_sd > 0.0 ? gauss(rng) * profile.noise.noise_sd : 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      s.channels(m, i) += x + profile.noise.cardiac_amp *
                                  std::sin(2.0 * M_PI * profile.noise.cardiac_hz *
                                               (static_cast<double>(i) / fs) +
                                           phase);
      x = a * x + innov_sd * gauss(rng);
    }
  }
  s.validate();
  return s;
}

Cohort generate_cohort(const std::vector<ProfileSpec>& profiles,
                       const std::vector<int>& sessions_per_profile,
                       std::uint64_t seed, int n_pain_events,
                       int n_innocuous_events, const SynthLayout& layout) {
  if (profiles.empty()) throw std::invalid_argument("generate_cohort: no profiles");
  if (profiles.size() != sessions_per_profile.size())
    throw std::invalid_argument("generate_cohort: profile/count length mismatch");

  Cohort cohort;
  int session_no = 0;
  for (size_t p = 0; p < profiles.size(); ++p) {
    for (int i = 0; i < sessions_per_profile[p]; ++i) {
      ++session_no;
      char id[16];
      std::snprintf(id, sizeof(id), "s%03d", session_no);
      cohort.sessions.push_back(generate_session(
          profiles[p], id, n_pain_events, n_innocuous_events,
          seed + static_cast<std::uint64_t>(session_no) * 1000003ULL, layout));
      cohort.ground_truth.emplace_back(id, profiles[p].profile_id);
    }
  }
  return cohort;
}

std::vector<ProfileSpec> default_profiles(int n_channels, double noise_sd) {
  const int block_lo = 8, block_hi = 16;  // 0-based [8, 16): channels 9-16
  NoiseSpec noise;
  noise.noise_sd = noise_sd;

  ProfileSpec p1;
  p1.profile_id = "p1";
  p1.channel_gain = Eigen::VectorXd::Zero(n_channels);
  for (int m = block_lo; m < block_hi && m < n_channels; ++m)
    p1.channel_gain[m] = 1.0;
  p1.response_peak_s = 6.0;
  p1.response_width_s = 2.0;
  p1.amplitude = 1.0;
  p1.noise = noise;

  // Same informative block, negative-going (deactivation) response.
  ProfileSpec p2 = p1;
  p2.profile_id = "p2";
  p2.amplitude = -1.0;
  p2.response_peak_s = 7.0;

  // Rising gain ramp across the block, later and weaker response.
  ProfileSpec p3 = p1;
  p3.profile_id = "p3";
  p3.amplitude = 0.7;
  p3.response_peak_s = 9.0;
  p3.response_width_s = 3.0;
  for (int m = block_lo; m < block_hi && m < n_channels; ++m)
    p3.channel_gain[m] = 0.5 + 1.5 * (m - block_lo) / double(block_hi - block_lo - 1);

  return {p1, p2, p3};
}

std::vector<int> default_session_counts() { return {13, 13, 12}; }

}  // namespace painmt
