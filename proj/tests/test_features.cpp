#include <doctest.h>

#include <cmath>

#include "painmt/features.hpp"

using namespace painmt;

TEST_CASE("feature set names and block dimensions") {
  CHECK(feature_set_from_string("spline") == FeatureSet::spline);
  CHECK(feature_set_from_string("stats") == FeatureSet::stats);
  CHECK(feature_set_from_string("combined") == FeatureSet::combined);
  CHECK_THROWS(feature_set_from_string("wavelet"));
  CHECK(block_dim(FeatureSet::spline, 10) == 10);
  CHECK(block_dim(FeatureSet::stats, 10) == 11);
  CHECK(block_dim(FeatureSet::combined, 10) == 21);
}

TEST_CASE("statistical features against hand-computed values") {
  Eigen::VectorXd w(4);
  w << 1.0, 3.0, 2.0, 6.0;
  const Eigen::VectorXd f = stat_features(w, 0.5);
  CHECK(f[0] == doctest::Approx(3.0));                     // mean
  CHECK(f[1] == doctest::Approx(std::sqrt(14.0 / 3.0)));   // sample sd
  CHECK(f[2] == doctest::Approx(6.0));                     // max
  CHECK(f[3] == doctest::Approx(1.0));                     // min
  CHECK(f[4] == doctest::Approx(5.0));                     // range
  // slope: t = (0,.5,1,1.5); Sxy = sum (t-0.75)(w-3) = 3.5; Sxx = 1.25
  CHECK(f[5] == doctest::Approx(3.5 / 1.25));
  CHECK(f[6] == doctest::Approx(3.0));                     // argmax
  CHECK(f[7] == doctest::Approx(0.0));                     // argmin
  // central moments: m2=3.5, m3=4.5, m4=24.5
  CHECK(f[8] == doctest::Approx(24.5 / (3.5 * 3.5) - 3.0));  // excess kurtosis
  CHECK(f[9] == doctest::Approx(4.5 / std::pow(3.5, 1.5)));  // skewness
  // trapezoid AUC with dt=0.5: 0.5*(0.5)*(1+3 + 3+2 + 2+6) = 4.25
  CHECK(f[10] == doctest::Approx(4.25));
}

TEST_CASE("degenerate series map higher moments to zero") {
  const Eigen::VectorXd w = Eigen::VectorXd::Constant(50, 2.5);
  const Eigen::VectorXd f = stat_features(w, 0.04);
  CHECK(f[1] == 0.0);
  CHECK(f[8] == 0.0);
  CHECK(f[9] == 0.0);
  CHECK(f[4] == 0.0);
  CHECK(f[5] == 0.0);

  CHECK_THROWS(stat_features(Eigen::VectorXd::Zero(1), 0.04));
  CHECK_THROWS(stat_features(w, 0.0));
}

TEST_CASE("argmax and argmin take the first occurrence") {
  Eigen::VectorXd w(5);
  w << 0.0, 4.0, 4.0, -1.0, -1.0;
  const Eigen::VectorXd f = stat_features(w, 1.0);
  CHECK(f[6] == 1.0);
  CHECK(f[7] == 3.0);
}

TEST_CASE("assemble lays features out channel-major") {
  const auto basis = SplineBasis::make(4, 10, 0.0, 20.0);
  LambdaPolicy policy;
  policy.use_gcv = false;
  policy.fixed_lambda = 1e-4;

  LabeledWindow win;
  win.session_id = "sX";
  win.label = +1;
  win.samples.resize(2, 500);
  for (Eigen::Index i = 0; i < 500; ++i) {
    win.samples(0, i) = std::sin(i / 40.0);
    win.samples(1, i) = 7.0;  // constant channel
  }

  const FeatureVector combined =
      assemble(win, FeatureSet::combined, basis, policy, 25.0);
  CHECK(combined.x.size() == 2 * 21);
  CHECK(combined.n_channels == 2);
  CHECK(combined.dim_per_channel == 21);

  const FeatureVector spline =
      assemble(win, FeatureSet::spline, basis, policy, 25.0);
  const FeatureVector stats =
      assemble(win, FeatureSet::stats, basis, policy, 25.0);
  // The combined block is the spline block then the stat block, per channel.
  for (int m = 0; m < 2; ++m) {
    CHECK(combined.x.segment(21 * m, 10).isApprox(spline.x.segment(10 * m, 10)));
    CHECK(combined.x.segment(21 * m + 10, 11).isApprox(stats.x.segment(11 * m, 11)));
  }
  // Constant channel: spline coefficients all equal the constant.
  CHECK((spline.x.segment(10, 10).array() - 7.0).abs().maxCoeff() < 1e-6);
}

TEST_CASE("scaler normalizes train data and is invertible") {
  std::vector<FeatureVector> train;
  for (int i = 0; i < 8; ++i) {
    FeatureVector fv;
    fv.x.resize(3);
    fv.x << i, 2.0 * i - 3.0, 5.0;  // third dimension constant
    train.push_back(fv);
  }
  const Scaler s = fit_scaler(train);
  CHECK(s.scale[2] == 0.0);

  auto scaled = train;
  apply_scaler(s, scaled);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(3), var = Eigen::VectorXd::Zero(3);
  for (const auto& fv : scaled) mean += fv.x;
  mean /= 8.0;
  for (const auto& fv : scaled) var += (fv.x - mean).cwiseAbs2();
  var /= 8.0;
  CHECK(mean.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(std::fabs(var[0] - 1.0) < 1e-12);
  CHECK(std::fabs(var[1] - 1.0) < 1e-12);
  CHECK(var[2] == 0.0);

  const Eigen::VectorXd back = s.invert(s.apply(train[3].x));
  CHECK(back.isApprox(train[3].x, 1e-12));

  CHECK_THROWS(fit_scaler({}));
}

TEST_CASE("session descriptors average and normalize") {
  std::vector<FeatureVector> vecs;
  auto push = [&](const std::string& sid, int label, double a, double b) {
    FeatureVector fv;
    fv.session_id = sid;
    fv.label = label;
    fv.x.resize(2);
    fv.x << a, b;
    vecs.push_back(fv);
  };
  push("sA", +1, 1.0, 3.0);
  push("sA", +1, 3.0, 5.0);
  push("sA", -1, 100.0, 100.0);
  push("sB", +1, 2.0, -2.0);

  const SessionDescriptor d = session_descriptor(vecs, "sA", true, false);
  // mean of positives = (2, 4); sum-normalized -> (1/3, 2/3)
  CHECK(d.p[0] == doctest::Approx(1.0 / 3.0));
  CHECK(d.p[1] == doctest::Approx(2.0 / 3.0));

  // Mixed-sign mean breaks sum normalization; the L1 mode handles it.
  CHECK_THROWS(session_descriptor(vecs, "sB", true, false));
  const SessionDescriptor dl1 = session_descriptor(vecs, "sB", true, true);
  CHECK(dl1.p.lpNorm<1>() == doctest::Approx(1.0));
  CHECK(dl1.p[0] == doctest::Approx(0.5));
  CHECK(dl1.p[1] == doctest::Approx(-0.5));

  CHECK_THROWS(session_descriptor(vecs, "missing", true, false));
}
