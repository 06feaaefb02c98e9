#include "painmt/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "painmt/io.hpp"

namespace painmt {

MetricsResult compute_metrics(const std::vector<int>& y_true,
                              const std::vector<int>& y_pred) {
  if (y_true.size() != y_pred.size())
    throw std::invalid_argument("compute_metrics: length mismatch");
  if (y_true.empty())
    throw std::invalid_argument("compute_metrics: empty inputs");
  double tp = 0, tn = 0, fp = 0, fn = 0;
  for (size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] > 0)
      (y_pred[i] > 0 ? tp : fn) += 1;
    else
      (y_pred[i] > 0 ? fp : tn) += 1;
  }
  MetricsResult m;
  m.accuracy = (tp + tn) / static_cast<double>(y_true.size());
  auto ratio = [&m](double num, double den) {
    if (den <= 0) {
      m.degenerate = true;
      return 0.0;
    }
    return num / den;
  };
  m.sensitivity = ratio(tp, tp + fn);
  m.specificity = ratio(tn, tn + fp);
  m.f_score = ratio(2 * tp, 2 * tp + fp + fn);
  return m;
}

double regularized_incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  // Continued fraction (modified Lentz), with the symmetry switch for
  // convergence.
  auto betacf = [](double a, double b, double x) {
    const double tiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 300; ++m) {
      const int m2 = 2 * m;
      double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
      d = 1.0 + aa * d;
      if (std::fabs(d) < tiny) d = tiny;
      c = 1.0 + aa / c;
      if (std::fabs(c) < tiny) c = tiny;
      d = 1.0 / d;
      h *= d * c;
      aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
      d = 1.0 + aa * d;
      if (std::fabs(d) < tiny) d = tiny;
      c = 1.0 + aa / c;
      if (std::fabs(c) < tiny) c = tiny;
      d = 1.0 / d;
      const double del = d * c;
      h *= del;
      if (std::fabs(del - 1.0) < 1e-14) break;
    }
    return h;
  };
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  if (x < (a + 1.0) / (a + b + 2.0))
    return std::exp(ln_front) * betacf(a, b, x) / a;
  return 1.0 - std::exp(ln_front) * betacf(b, a, 1.0 - x) / b;
}

double student_t_cdf(double x, double dof) {
  if (dof <= 0.0) throw std::invalid_argument("student_t_cdf: dof must be positive");
  const double ib =
      regularized_incomplete_beta(dof / 2.0, 0.5, dof / (dof + x * x));
  return x >= 0.0 ? 1.0 - 0.5 * ib : 0.5 * ib;
}

TTestResult paired_ttest(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("paired_ttest: length mismatch");
  const Eigen::Index n = a.size();
  if (n < 2) throw std::invalid_argument("paired_ttest: need at least 2 pairs");
  const Eigen::VectorXd d = a - b;
  const double mean = d.mean();
  const double var = (d.array() - mean).square().sum() / (n - 1);
  TTestResult res;
  if (var <= 0.0) {
    res.degenerate = true;
    if (mean == 0.0) {
      res.t = 0.0;
      res.p = 1.0;
    } else {
      res.t = mean > 0 ? std::numeric_limits<double>::infinity()
                       : -std::numeric_limits<double>::infinity();
      res.p = 0.0;
    }
    return res;
  }
  res.t = mean / std::sqrt(var / n);
  const double dof = static_cast<double>(n - 1);
  res.p = 2.0 * (1.0 - student_t_cdf(std::fabs(res.t), dof));
  return res;
}

std::vector<int> balance(const std::vector<FeatureVector>& vectors,
                         std::uint64_t seed) {
  std::vector<int> pos, neg;
  for (int i = 0; i < static_cast<int>(vectors.size()); ++i)
    (vectors[i].label > 0 ? pos : neg).push_back(i);
  if (pos.empty() || neg.empty())
    throw std::invalid_argument("balance: a class is empty");
  auto downsample = [&](std::vector<int>& v, size_t target) {
    std::vector<int> shuffled = v;
    std::mt19937_64 rng(seed);
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    shuffled.resize(target);
    std::sort(shuffled.begin(), shuffled.end());  // stable original order
    v = shuffled;
  };
  const size_t target = std::min(pos.size(), neg.size());
  if (pos.size() > target) downsample(pos, target);
  if (neg.size() > target) downsample(neg, target);
  std::vector<int> keep;
  keep.reserve(2 * target);
  keep.insert(keep.end(), pos.begin(), pos.end());
  keep.insert(keep.end(), neg.begin(), neg.end());
  std::sort(keep.begin(), keep.end());
  return keep;
}

namespace {

// Stratified fold assignment over arbitrary (label, session) keys.
std::vector<std::vector<int>> stratified_folds(
    const std::vector<std::pair<int, std::string>>& keys, int n_folds,
    std::uint64_t seed) {
  if (n_folds < 2) throw std::invalid_argument("folds: need at least 2 folds");
  if (static_cast<int>(keys.size()) < n_folds)
    throw std::invalid_argument("folds: fewer windows than folds");
  std::map<std::pair<std::string, int>, std::vector<int>> strata;
  for (int i = 0; i < static_cast<int>(keys.size()); ++i)
    strata[{keys[i].second, keys[i].first}].push_back(i);
  std::vector<std::vector<int>> folds(n_folds);
  std::mt19937_64 rng(seed);
  int next = 0;  // round-robin cursor carries across strata to even sizes
  for (auto& [key, idx] : strata) {
    std::shuffle(idx.begin(), idx.end(), rng);
    for (int i : idx) {
      folds[next % n_folds].push_back(i);
      ++next;
    }
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

}  // namespace

std::vector<std::vector<int>> make_folds(const std::vector<FeatureVector>& vectors,
                                         int n_folds, std::uint64_t seed) {
  std::vector<std::pair<int, std::string>> keys;
  keys.reserve(vectors.size());
  for (const auto& fv : vectors) keys.emplace_back(fv.label, fv.session_id);
  return stratified_folds(keys, n_folds, seed);
}

std::vector<double> ExperimentConfig::default_power_grid() {
  std::vector<double> g;
  for (int k = -4; k <= 3; ++k) g.push_back(std::pow(10.0, k));
  return g;
}

std::vector<FeatureVector> extract_features(const std::vector<Session>& sessions,
                                            const ExperimentConfig& config) {
  const SplineBasis basis = SplineBasis::make(
      config.spline_order, config.n_spline_coeffs, 0.0, config.window_len_s);

  std::vector<std::vector<FeatureVector>> per_session(sessions.size());
  std::string error;
#pragma omp parallel for schedule(dynamic)
  for (int si = 0; si < static_cast<int>(sessions.size()); ++si) {
    try {
      Session s = sessions[si];
      if (config.lowpass || config.detrend) {
        for (int m = 0; m < s.n_channels(); ++m) {
          Eigen::VectorXd ch = s.channels.row(m).transpose();
          if (config.lowpass)
            ch = lowpass_filter(ch, s.sample_rate_hz, config.lowpass_cutoff_hz,
                                config.lowpass_order);
          if (config.detrend) ch = detrend_poly(ch, config.detrend_degree);
          s.channels.row(m) = ch.transpose();
        }
      }
      const auto windows =
          extract_windows(s, config.window_len_s, config.n_baseline_windows,
                          config.seed ^ fnv1a(s.id));
      for (const auto& w : windows)
        per_session[si].push_back(assemble(w, config.feature_set, basis,
                                           config.lambda_policy,
                                           s.sample_rate_hz));
    } catch (const std::exception& e) {
#pragma omp critical
      error = sessions[si].id + ": " + e.what();
    }
  }
  if (!error.empty()) throw std::runtime_error("extract_features: " + error);

  std::vector<FeatureVector> all;
  for (auto& v : per_session)
    for (auto& fv : v) all.push_back(std::move(fv));
  return all;
}

namespace {

std::string serialize_model(const MtMklModel& model, const Scaler& scaler,
                            const std::vector<double>& gammas) {
  std::ostringstream out;
  out.precision(17);
  out << model.n_tasks << ' ' << model.n_channels << ' ' << model.C << ' '
      << model.nu << ' ' << to_string(model.reg) << '\n';
  for (Eigen::Index r = 0; r < model.eta.rows(); ++r)
    for (Eigen::Index m = 0; m < model.eta.cols(); ++m)
      out << model.eta(r, m) << ' ';
  for (const auto& d : model.duals) {
    out << '\n' << d.bias << ' ';
    for (Eigen::Index i = 0; i < d.alpha.size(); ++i) out << d.alpha[i] << ' ';
  }
  out << '\n';
  for (double g : gammas) out << g << ' ';
  out << '\n';
  for (Eigen::Index i = 0; i < scaler.mean.size(); ++i)
    out << scaler.mean[i] << ' ' << scaler.scale[i] << ' ';
  return out.str();
}

Eigen::MatrixXd slice(const Eigen::MatrixXd& G, const std::vector<int>& rows,
                      const std::vector<int>& cols) {
  Eigen::MatrixXd out(rows.size(), cols.size());
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < cols.size(); ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          G(rows[i], cols[j]);
  return out;
}

struct FoldContext {
  std::vector<int> train_idx;  // balanced train window indices
  std::vector<int> test_idx;
  std::vector<FeatureVector> train_vecs;  // standardized
  std::vector<FeatureVector> test_vecs;   // standardized
  Scaler scaler;
  int n_channels = 0;
  int dim_per_channel = 0;
  std::vector<double> gammas;  // per channel, rbf only
  // Per kernel kind: M train Grams (Ntr x Ntr) and test-to-train cross Grams.
  std::map<KernelKind, std::vector<Eigen::MatrixXd>> train_grams;
  std::map<KernelKind, std::vector<Eigen::MatrixXd>> cross_grams;
  std::vector<SessionDescriptor> descriptors;  // from train, one per session
  std::map<int, ClusterResult> clusterings;    // per T
};

Eigen::MatrixXd channel_block(const std::vector<FeatureVector>& vecs, int m,
                              int dm) {
  Eigen::MatrixXd X(vecs.size(), dm);
  for (size_t i = 0; i < vecs.size(); ++i)
    X.row(static_cast<Eigen::Index>(i)) =
        vecs[i].x.segment(static_cast<Eigen::Index>(m) * dm, dm).transpose();
  return X;
}

// Groups balanced-train rows (relative indices) by task.
std::vector<std::vector<int>> rows_by_task(
    const std::vector<FeatureVector>& train_vecs, const TaskAssignment& tasks,
    const std::vector<int>& subset) {
  std::vector<std::vector<int>> groups(tasks.n_tasks);
  for (int row : subset)
    groups[tasks.task_of(train_vecs[row].session_id)].push_back(row);
  return groups;
}

struct FittedModel {
  MtMklModel core;
  std::vector<std::vector<int>> task_rows;  // balanced-train rows per task
};

FittedModel fit_subset(const FoldContext& ctx, KernelKind kind, Regularizer reg,
                       const TaskAssignment& tasks, const std::vector<int>& subset,
                       double C, double nu, const MtMklOptions& opts) {
  const auto groups = rows_by_task(ctx.train_vecs, tasks, subset);
  std::vector<TaskData> data;
  std::vector<std::vector<int>> used_rows;
  const auto& grams = ctx.train_grams.at(kind);
  for (const auto& rows : groups) {
    if (rows.empty()) continue;  // a task can be absent from an inner split
    TaskData td;
    td.y.resize(rows.size());
    for (size_t i = 0; i < rows.size(); ++i)
      td.y[static_cast<Eigen::Index>(i)] = ctx.train_vecs[rows[i]].label;
    td.grams.reserve(grams.size());
    for (const auto& G : grams) td.grams.push_back(slice(G, rows, rows));
    data.push_back(std::move(td));
    used_rows.push_back(rows);
  }
  FittedModel fm;
  fm.core = mtmkl_fit(data, C, nu, reg, opts);
  fm.task_rows = used_rows;
  return fm;
}

// Task index for each evaluation window; sessions absent from the
// assignment are routed to the nearest descriptor centroid's task.
int route_task(const FoldContext& ctx, const TaskAssignment& tasks,
               const std::vector<FeatureVector>& eval_vecs,
               const std::string& session_id, bool descriptor_l1) {
  auto it = tasks.map.find(session_id);
  if (it != tasks.map.end()) return it->second;

  // Cluster centroids over the training descriptors.
  const Eigen::Index D = ctx.descriptors.front().p.size();
  Eigen::MatrixXd centroid = Eigen::MatrixXd::Zero(tasks.n_tasks, D);
  Eigen::VectorXi counts = Eigen::VectorXi::Zero(tasks.n_tasks);
  for (const auto& d : ctx.descriptors) {
    const int t = tasks.task_of(d.session_id);
    centroid.row(t) += d.p.transpose();
    counts[t] += 1;
  }
  for (int t = 0; t < tasks.n_tasks; ++t)
    if (counts[t] > 0) centroid.row(t) /= counts[t];

  const SessionDescriptor desc =
      session_descriptor(eval_vecs, session_id, /*positive_only=*/false,
                         descriptor_l1);
  int best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (int t = 0; t < tasks.n_tasks; ++t) {
    if (counts[t] == 0) continue;
    const double d = (centroid.row(t).transpose() - desc.p).squaredNorm();
    if (d < bd) {
      bd = d;
      best = t;
    }
  }
  return best;
}

// Scores for eval windows given cross Grams (eval rows x all balanced-train
// columns) and a per-window task routing.
std::vector<double> predict_scores(const FoldContext& ctx, KernelKind kind,
                                   const FittedModel& fm,
                                   const std::vector<Eigen::MatrixXd>& eval_grams,
                                   const std::vector<int>& eval_task) {
  const size_t n = eval_task.size();
  std::vector<double> scores(n, 0.0);
  for (size_t j = 0; j < n; ++j) {
    const int t = eval_task[j];
    const auto& rows = fm.task_rows[t];
    const auto& dual = fm.core.duals[t];
    double s = dual.bias;
    for (int m = 0; m < ctx.n_channels; ++m) {
      const double w = fm.core.eta(t, m);
      if (w == 0.0) continue;
      double acc = 0.0;
      for (size_t i = 0; i < rows.size(); ++i)
        acc += eval_grams[m](static_cast<Eigen::Index>(j), rows[i]) *
               dual.alpha[static_cast<Eigen::Index>(i)];
      s += w * acc;
    }
    scores[j] = s;
  }
  return scores;
}

struct GridChoice {
  double C = 0.0, nu = 0.0;
};

GridChoice grid_search(const FoldContext& ctx, KernelKind kind, Regularizer reg,
                       const TaskAssignment& tasks,
                       const ExperimentConfig& config, std::uint64_t seed) {
  // Inner stratified folds over the balanced training windows.
  std::vector<std::vector<int>> inner =
      make_folds(ctx.train_vecs, config.inner_folds, seed);

  GridChoice best;
  double best_acc = -1.0;
  for (double nu : config.nu_grid) {
    for (double C : config.c_grid) {
      double acc_sum = 0.0;
      int acc_n = 0;
      for (const auto& hold : inner) {
        std::vector<char> held(ctx.train_vecs.size(), 0);
        for (int i : hold) held[i] = 1;
        std::vector<int> subset;
        for (int i = 0; i < static_cast<int>(ctx.train_vecs.size()); ++i)
          if (!held[i]) subset.push_back(i);
        try {
          const FittedModel fm = fit_subset(ctx, kind, reg, tasks, subset, C, nu,
                                            config.optimizer);
          // Task routing for held-out rows; their sessions are in the
          // assignment by construction.
          std::vector<int> eval_task;
          std::vector<int> y_true;
          std::vector<int> compact;  // remap task index to fm.task_rows slot
          {
            // fit_subset may have dropped empty tasks; rebuild the map.
            compact.assign(tasks.n_tasks, -1);
            int slot = 0;
            const auto groups = rows_by_task(ctx.train_vecs, tasks, subset);
            for (int t = 0; t < tasks.n_tasks; ++t)
              if (!groups[t].empty()) compact[t] = slot++;
          }
          std::vector<int> rows_ok;
          for (int i : hold) {
            const int t = tasks.task_of(ctx.train_vecs[i].session_id);
            if (compact[t] < 0) continue;  // task unseen in this split
            eval_task.push_back(compact[t]);
            y_true.push_back(ctx.train_vecs[i].label);
            rows_ok.push_back(i);
          }
          if (rows_ok.empty()) continue;
          // Cross grams: held rows vs balanced train = slices of train grams.
          std::vector<Eigen::MatrixXd> eval_grams;
          std::vector<int> all_cols(ctx.train_vecs.size());
          std::iota(all_cols.begin(), all_cols.end(), 0);
          for (const auto& G : ctx.train_grams.at(kind))
            eval_grams.push_back(slice(G, rows_ok, all_cols));
          const auto scores = predict_scores(ctx, kind, fm, eval_grams, eval_task);
          std::vector<int> y_pred;
          for (double s : scores) y_pred.push_back(score_to_label(s));
          acc_sum += compute_metrics(y_true, y_pred).accuracy;
          ++acc_n;
        } catch (const std::exception& e) {
          std::fprintf(stderr,
                       "grid_search: cell C=%g nu=%g failed (%s); counted as 0\n",
                       C, nu, e.what());
          ++acc_n;  // counts as accuracy 0
        }
      }
      const double acc = acc_n > 0 ? acc_sum / acc_n : 0.0;
      if (acc > best_acc + 1e-12) {  // ties keep smaller nu, then smaller C
        best_acc = acc;
        best = {C, nu};
      }
    }
  }
  return best;
}

}  // namespace

EvalReport run_experiment(const std::vector<Session>& sessions,
                          const ExperimentConfig& config, bool poison_test) {
  std::vector<FeatureVector> all = extract_features(sessions, config);
  if (all.empty()) throw std::runtime_error("run_experiment: no windows");
  const int M = all.front().n_channels;
  const int dm = all.front().dim_per_channel;

  EvalReport report;
  report.n_windows = static_cast<int>(all.size());
  report.feature_dim = static_cast<int>(all.front().x.size());

  // Outer folds (window-level by default, session-level holdout optional).
  std::vector<std::vector<int>> folds;
  if (config.session_level_folds) {
    std::vector<std::string> ids;
    for (const auto& s : sessions) ids.push_back(s.id);
    std::mt19937_64 rng(config.seed);
    std::shuffle(ids.begin(), ids.end(), rng);
    std::map<std::string, int> fold_of;
    for (size_t i = 0; i < ids.size(); ++i)
      fold_of[ids[i]] = static_cast<int>(i) % config.outer_folds;
    folds.assign(config.outer_folds, {});
    for (int i = 0; i < static_cast<int>(all.size()); ++i)
      folds[fold_of.at(all[i].session_id)].push_back(i);
  } else {
    folds = make_folds(all, config.outer_folds, config.seed);
  }

  const int n_folds = static_cast<int>(folds.size());
  std::vector<FoldContext> contexts(n_folds);
  std::string fold_error;

#pragma omp parallel for schedule(dynamic)
  for (int f = 0; f < n_folds; ++f) {
    try {
      FoldContext& ctx = contexts[f];
      ctx.n_channels = M;
      ctx.dim_per_channel = dm;
      std::vector<char> in_test(all.size(), 0);
      for (int i : folds[f]) in_test[i] = 1;
      std::vector<int> train_raw;
      for (int i = 0; i < static_cast<int>(all.size()); ++i)
        if (!in_test[i]) train_raw.push_back(i);
      ctx.test_idx = folds[f];

      // Balance, then standardize on the balanced training set.
      std::vector<FeatureVector> train_unbal;
      for (int i : train_raw) train_unbal.push_back(all[i]);
      const std::vector<int> keep = balance(train_unbal, config.seed + 1000 + f);
      for (int k : keep) {
        ctx.train_idx.push_back(train_raw[k]);
        ctx.train_vecs.push_back(train_unbal[k]);
      }
      ctx.scaler = fit_scaler(ctx.train_vecs);
      apply_scaler(ctx.scaler, ctx.train_vecs);
      for (int i : ctx.test_idx) {
        ctx.test_vecs.push_back(all[i]);
        // Leakage audit: each fold's own held-out copies get the sentinel.
        // Training touches only train vectors, so the models must not change.
        if (poison_test) ctx.test_vecs.back().x.setConstant(1e6);
        ctx.test_vecs.back().x = ctx.scaler.apply(ctx.test_vecs.back().x);
      }

      // Per-channel gamma on training data only.
      ctx.gammas.resize(M, 0.0);
      bool need_rbf = false;
      for (auto k : config.kernels) need_rbf |= (k == KernelKind::rbf);
      if (need_rbf) {
        for (int m = 0; m < M; ++m)
          ctx.gammas[m] = resolve_gamma(config.gamma_policy,
                                        channel_block(ctx.train_vecs, m, dm),
                                        config.seed + 2000 + m, config.fixed_gamma);
      }

      // Gram caches.
      for (auto kind : config.kernels) {
        if (ctx.train_grams.count(kind)) continue;
        std::vector<Eigen::MatrixXd> tg, cg;
        for (int m = 0; m < M; ++m) {
          const Eigen::MatrixXd Xm = channel_block(ctx.train_vecs, m, dm);
          const Eigen::MatrixXd Zm = channel_block(ctx.test_vecs, m, dm);
          tg.push_back(gram_channel(kind, ctx.gammas[m], Xm, Xm));
          cg.push_back(gram_channel(kind, ctx.gammas[m], Zm, Xm));
        }
        ctx.train_grams[kind] = std::move(tg);
        ctx.cross_grams[kind] = std::move(cg);
      }

      // Session descriptors from training windows; clustering per T.
      {
        std::map<std::string, char> seen;
        for (const auto& fv : ctx.train_vecs)
          if (config.descriptor_positive_only ? fv.label > 0 : true)
            seen[fv.session_id] = 1;
        for (const auto& [sid, _] : seen)
          ctx.descriptors.push_back(
              session_descriptor(ctx.train_vecs, sid,
                                 config.descriptor_positive_only,
                                 config.descriptor_l1));
      }
      for (int T : config.n_tasks_values) {
        if (T == 1) {
          ClusterResult res;
          res.assignment.n_tasks = 1;
          for (const auto& d : ctx.descriptors) res.assignment.map[d.session_id] = 0;
          ctx.clusterings[1] = std::move(res);
        } else {
          ctx.clusterings[T] =
              assign_tasks(ctx.descriptors, T, config.cluster_gamma,
                           config.seed + 3000 + f, config.kmeans_restarts);
        }
      }
    } catch (const std::exception& e) {
#pragma omp critical
      fold_error = "fold " + std::to_string(f) + ": " + e.what();
    }
  }
  if (!fold_error.empty())
    throw std::runtime_error("run_experiment: " + fold_error);

  // Variants, evaluated over the shared per-fold contexts.
  for (auto kind : config.kernels) {
    for (auto reg : config.regularizers) {
      for (int T : config.n_tasks_values) {
        VariantResult var;
        var.kernel = kind;
        var.reg = reg;
        var.n_tasks = T;
        var.folds.resize(n_folds);
        std::string var_error;

#pragma omp parallel for schedule(dynamic)
        for (int f = 0; f < n_folds; ++f) {
          try {
            FoldContext& ctx = contexts[f];
            const TaskAssignment& tasks = ctx.clusterings.at(T).assignment;
            const GridChoice choice =
                grid_search(ctx, kind, reg, tasks, config,
                            config.seed + 4000 + f);
            std::vector<int> full(ctx.train_vecs.size());
            std::iota(full.begin(), full.end(), 0);
            const FittedModel fm =
                fit_subset(ctx, kind, reg, tasks, full, choice.C, choice.nu,
                           config.optimizer);

            // fit_subset drops tasks with no training rows; remap indices.
            std::vector<int> compact(tasks.n_tasks, -1);
            {
              int slot = 0;
              const auto groups = rows_by_task(ctx.train_vecs, tasks, full);
              for (int t = 0; t < tasks.n_tasks; ++t)
                if (!groups[t].empty()) compact[t] = slot++;
            }
            std::vector<int> eval_task;
            for (const auto& fv : ctx.test_vecs) {
              const int t = route_task(ctx, tasks, ctx.test_vecs, fv.session_id,
                                       config.descriptor_l1);
              eval_task.push_back(compact[t] >= 0 ? compact[t] : 0);
            }
            const auto scores = predict_scores(ctx, kind, fm,
                                               ctx.cross_grams.at(kind),
                                               eval_task);
            std::vector<int> y_true, y_pred;
            for (const auto& fv : ctx.test_vecs) y_true.push_back(fv.label);
            for (double s : scores) y_pred.push_back(score_to_label(s));

            FoldResult& fr = var.folds[f];
            fr.fold = f;
            fr.chosen_C = choice.C;
            fr.chosen_nu = choice.nu;
            fr.metrics = compute_metrics(y_true, y_pred);
            fr.eta = fm.core.eta;
            fr.model_hash = fnv1a_hex(
                serialize_model(fm.core, ctx.scaler, ctx.gammas));
            fr.per_cluster_accuracy.assign(fm.core.n_tasks, 0.0);
            fr.per_cluster_count.assign(fm.core.n_tasks, 0);
            std::vector<int> correct(fm.core.n_tasks, 0);
            for (size_t j = 0; j < y_true.size(); ++j) {
              fr.per_cluster_count[eval_task[j]] += 1;
              if (y_true[j] == y_pred[j]) correct[eval_task[j]] += 1;
            }
            for (int t = 0; t < fm.core.n_tasks; ++t)
              if (fr.per_cluster_count[t] > 0)
                fr.per_cluster_accuracy[t] =
                    static_cast<double>(correct[t]) / fr.per_cluster_count[t];
          } catch (const std::exception& e) {
#pragma omp critical
            var_error = "fold " + std::to_string(f) + ": " + e.what();
          }
        }
        if (!var_error.empty())
          throw std::runtime_error("run_experiment: variant " +
                                   std::string(to_string(kind)) + "/" +
                                   to_string(reg) + "/T=" + std::to_string(T) +
                                   ": " + var_error);

        for (const auto& fr : var.folds) {
          var.mean_accuracy += fr.metrics.accuracy;
          var.mean_sensitivity += fr.metrics.sensitivity;
          var.mean_specificity += fr.metrics.specificity;
          var.mean_f_score += fr.metrics.f_score;
        }
        var.mean_accuracy /= n_folds;
        var.mean_sensitivity /= n_folds;
        var.mean_specificity /= n_folds;
        var.mean_f_score /= n_folds;
        report.variants.push_back(std::move(var));
      }
    }
  }

  // Paired t-tests: each T > 1 against the T = 1 variant of the same
  // kernel/regularizer pair.
  auto fold_acc = [n_folds](const VariantResult& v) {
    Eigen::VectorXd a(n_folds);
    for (int f = 0; f < n_folds; ++f) a[f] = v.folds[f].metrics.accuracy;
    return a;
  };
  for (const auto& base : report.variants) {
    if (base.n_tasks != 1) continue;
    for (const auto& other : report.variants) {
      if (other.n_tasks == 1 || other.kernel != base.kernel ||
          other.reg != base.reg)
        continue;
      ComparisonResult cmp;
      cmp.kernel = base.kernel;
      cmp.reg = base.reg;
      cmp.n_tasks_a = other.n_tasks;
      cmp.n_tasks_b = 1;
      cmp.ttest = paired_ttest(fold_acc(other), fold_acc(base));
      report.comparisons.push_back(cmp);
    }
  }
  return report;
}

std::string format_report_table(const EvalReport& report,
                                const ExperimentConfig& config) {
  std::ostringstream out;
  char line[160];
  out << "feature set: " << to_string(config.feature_set)
      << "  (windows: " << report.n_windows << ", D: " << report.feature_dim
      << ")\n";
  std::snprintf(line, sizeof(line), "%-8s %-4s %-3s %9s %12s %12s %9s\n",
                "kernel", "reg", "T", "accuracy", "sensitivity", "specificity",
                "f-score");
  out << line;
  for (const auto& v : report.variants) {
    std::snprintf(line, sizeof(line), "%-8s %-4s %-3d %9.4f %12.4f %12.4f %9.4f\n",
                  to_string(v.kernel), to_string(v.reg), v.n_tasks,
                  v.mean_accuracy, v.mean_sensitivity, v.mean_specificity,
                  v.mean_f_score);
    out << line;
  }
  if (!report.comparisons.empty()) {
    out << "\npaired t-tests (accuracy, vs T=1):\n";
    for (const auto& c : report.comparisons) {
      std::snprintf(line, sizeof(line), "%-8s %-4s T=%d vs T=1: t=%.4f p=%.4g%s\n",
                    to_string(c.kernel), to_string(c.reg), c.n_tasks_a,
                    c.ttest.t, c.ttest.p,
                    c.ttest.degenerate ? " (degenerate)" : "");
      out << line;
    }
  }
  return out.str();
}

}  // namespace painmt
