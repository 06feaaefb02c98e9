#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "painmt/signal.hpp"

namespace painmt {

struct NoiseSpec {
  double ar1_coeff = 0.9;   // in [0, 1)
  double noise_sd = 0.25;   // stationary AR(1) standard deviation
  double cardiac_hz = 1.2;
  double cardiac_amp = 0.05;
};

struct ProfileSpec {
  std::string profile_id;
  Eigen::VectorXd channel_gain;  // M entries >= 0
  double response_peak_s = 6.0;
  double response_width_s = 2.0;
  double amplitude = 1.0;        // micromolar; may be negative (deactivation)
  NoiseSpec noise;
};

// Gamma-density-shaped evoked response: zero at t = 0, unimodal, scaled
// so the peak value equals amplitude.
Eigen::VectorXd hemodynamic_bump(const Eigen::VectorXd& t, double peak_s,
                                 double width_s, double amplitude);

struct SynthLayout {
  double sample_rate_hz = 25.0;
  double baseline_len_s = 185.0;
  double stim_spacing_s = 25.0;
  double window_len_s = 20.0;
};

Session generate_session(const ProfileSpec& profile, const std::string& session_id,
                         int n_pain_events, int n_innocuous_events,
                         std::uint64_t seed, const SynthLayout& layout = {});

struct Cohort {
  std::vector<Session> sessions;
  std::vector<std::pair<std::string, std::string>> ground_truth;  // session -> profile
};

// sessions_per_profile[i] sessions drawn from profiles[i].
Cohort generate_cohort(const std::vector<ProfileSpec>& profiles,
                       const std::vector<int>& sessions_per_profile,
                       std::uint64_t seed, int n_pain_events = 6,
                       int n_innocuous_events = 6, const SynthLayout& layout = {});

// Three planted profiles, 13/13/12 sessions, informative channels 9-16
// (0-based 8..15) with profile-specific response sign, latency and gains.
std::vector<ProfileSpec> default_profiles(int n_channels = 24,
                                          double noise_sd = 0.25);

std::vector<int> default_session_counts();  // {13, 13, 12}

}  // namespace painmt
