// painmt command line: synth | features | cluster | train | evaluate | report
//
// All subcommands read an optional JSON config (--config) whose fields mirror
// the defaults below; individual flags override the file. A hash of the
// resolved config is embedded in every output file header so artifacts can be
// traced back to the run that produced them.

#include <omp.h>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "painmt/cluster.hpp"
#include "painmt/eval.hpp"
#include "painmt/io.hpp"
#include "painmt/synth.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace painmt;

namespace {

constexpr const char* kFormatVersion = "1";

json default_config() {
  ExperimentConfig c;
  json j;
  j["seed"] = c.seed;
  j["window_len_s"] = c.window_len_s;
  j["n_baseline_windows"] = c.n_baseline_windows;
  j["lowpass"] = c.lowpass;
  j["lowpass_cutoff_hz"] = c.lowpass_cutoff_hz;
  j["lowpass_order"] = c.lowpass_order;
  j["detrend"] = c.detrend;
  j["detrend_degree"] = c.detrend_degree;
  j["feature_set"] = to_string(c.feature_set);
  j["spline_order"] = c.spline_order;
  j["n_spline_coeffs"] = c.n_spline_coeffs;
  j["lambda_use_gcv"] = c.lambda_policy.use_gcv;
  j["fixed_lambda"] = c.lambda_policy.fixed_lambda;
  j["n_tasks_values"] = c.n_tasks_values;
  j["cluster_gamma"] = c.cluster_gamma;
  j["descriptor_positive_only"] = c.descriptor_positive_only;
  j["descriptor_l1"] = c.descriptor_l1;
  j["kmeans_restarts"] = c.kmeans_restarts;
  j["kernels"] = json::array({to_string(KernelKind::rbf)});
  j["regularizers"] = json::array({to_string(Regularizer::l1)});
  j["gamma_policy"] = "median";
  j["fixed_gamma"] = c.fixed_gamma;
  j["c_grid"] = c.c_grid;
  j["nu_grid"] = c.nu_grid;
  j["step_size"] = c.optimizer.step_size;
  j["max_iter"] = c.optimizer.max_iter;
  j["tol"] = c.optimizer.tol;
  j["outer_folds"] = c.outer_folds;
  j["inner_folds"] = c.inner_folds;
  j["session_level_folds"] = c.session_level_folds;
  // synth-only knobs
  j["synth_channels"] = 24;
  j["synth_noise_sd"] = 0.25;
  j["synth_pain_events"] = 6;
  j["synth_innocuous_events"] = 6;
  j["region_size"] = 8;  // channels per region in the eta bar summary
  return j;
}

json load_config(const std::string& path) {
  json cfg = default_config();
  if (path.empty()) return cfg;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  json user = json::parse(in);
  for (auto& [key, value] : user.items()) {
    if (!cfg.contains(key))
      throw std::runtime_error("unknown config key: " + key);
    cfg[key] = value;
  }
  return cfg;
}

std::string config_hash(const json& cfg) { return fnv1a_hex(cfg.dump()); }

ExperimentConfig to_experiment_config(const json& j) {
  ExperimentConfig c;
  c.seed = j.at("seed").get<std::uint64_t>();
  c.window_len_s = j.at("window_len_s").get<double>();
  c.n_baseline_windows = j.at("n_baseline_windows").get<int>();
  c.lowpass = j.at("lowpass").get<bool>();
  c.lowpass_cutoff_hz = j.at("lowpass_cutoff_hz").get<double>();
  c.lowpass_order = j.at("lowpass_order").get<int>();
  c.detrend = j.at("detrend").get<bool>();
  c.detrend_degree = j.at("detrend_degree").get<int>();
  c.feature_set = feature_set_from_string(j.at("feature_set").get<std::string>());
  c.spline_order = j.at("spline_order").get<int>();
  c.n_spline_coeffs = j.at("n_spline_coeffs").get<int>();
  c.lambda_policy.use_gcv = j.at("lambda_use_gcv").get<bool>();
  c.lambda_policy.fixed_lambda = j.at("fixed_lambda").get<double>();
  c.n_tasks_values = j.at("n_tasks_values").get<std::vector<int>>();
  for (int t : c.n_tasks_values)
    if (t < 1) throw std::runtime_error("config: n_tasks_values must be >= 1");
  c.cluster_gamma = j.at("cluster_gamma").get<double>();
  c.descriptor_positive_only = j.at("descriptor_positive_only").get<bool>();
  c.descriptor_l1 = j.at("descriptor_l1").get<bool>();
  c.kmeans_restarts = j.at("kmeans_restarts").get<int>();
  c.kernels.clear();
  for (const auto& k : j.at("kernels"))
    c.kernels.push_back(kernel_kind_from_string(k.get<std::string>()));
  c.regularizers.clear();
  for (const auto& r : j.at("regularizers"))
    c.regularizers.push_back(regularizer_from_string(r.get<std::string>()));
  const std::string gp = j.at("gamma_policy").get<std::string>();
  if (gp == "median")
    c.gamma_policy = GammaPolicy::median_heuristic;
  else if (gp == "fixed")
    c.gamma_policy = GammaPolicy::fixed;
  else if (gp == "inverse_dimension")
    c.gamma_policy = GammaPolicy::inverse_dimension;
  else
    throw std::runtime_error("config: unknown gamma_policy " + gp);
  c.fixed_gamma = j.at("fixed_gamma").get<double>();
  c.c_grid = j.at("c_grid").get<std::vector<double>>();
  c.nu_grid = j.at("nu_grid").get<std::vector<double>>();
  c.optimizer.step_size = j.at("step_size").get<double>();
  c.optimizer.max_iter = j.at("max_iter").get<int>();
  c.optimizer.tol = j.at("tol").get<double>();
  c.outer_folds = j.at("outer_folds").get<int>();
  c.inner_folds = j.at("inner_folds").get<int>();
  c.session_level_folds = j.at("session_level_folds").get<bool>();
  return c;
}

std::vector<Session> load_sessions_dir(const std::string& dir) {
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string p = entry.path().string();
    if (entry.path().extension() == ".csv" &&
        p.find(".events.csv") == std::string::npos &&
        entry.path().filename() != "ground_truth.csv")
      paths.push_back(p);
  }
  std::sort(paths.begin(), paths.end());
  if (paths.empty()) throw std::runtime_error("no session files in " + dir);
  std::vector<Session> sessions;
  for (const auto& p : paths) sessions.push_back(load_session(p));
  return sessions;
}

int cmd_synth(const json& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const auto profiles = default_profiles(cfg.at("synth_channels").get<int>(),
                                         cfg.at("synth_noise_sd").get<double>());
  const Cohort cohort = generate_cohort(
      profiles, default_session_counts(), cfg.at("seed").get<std::uint64_t>(),
      cfg.at("synth_pain_events").get<int>(),
      cfg.at("synth_innocuous_events").get<int>());
  const std::string header = "config " + config_hash(cfg);
  for (const auto& s : cohort.sessions) save_session(s, out_dir, header);
  std::ostringstream truth;
  truth << "# " << header << "\nsession_id,true_profile\n";
  for (const auto& [sid, pid] : cohort.ground_truth)
    truth << sid << ',' << pid << '\n';
  atomic_write(out_dir + "/ground_truth.csv", truth.str());
  std::printf("wrote %zu sessions (%d channels) to %s\n",
              cohort.sessions.size(), cfg.at("synth_channels").get<int>(),
              out_dir.c_str());
  return 0;
}

int cmd_features(const json& cfg, const std::string& data_dir,
                 const std::string& out_path) {
  const auto sessions = load_sessions_dir(data_dir);
  const ExperimentConfig config = to_experiment_config(cfg);
  const auto vectors = extract_features(sessions, config);
  save_feature_matrix(vectors, out_path, "config " + config_hash(cfg));
  std::printf("wrote %zu windows, D=%d, to %s\n", vectors.size(),
              static_cast<int>(vectors.front().x.size()), out_path.c_str());
  return 0;
}

int cmd_cluster(const json& cfg, const std::string& features_path,
                const std::string& out_dir, int n_tasks,
                const std::string& truth_path) {
  fs::create_directories(out_dir);
  const auto vectors = load_feature_matrix(features_path);
  std::map<std::string, char> seen;
  for (const auto& fv : vectors) seen[fv.session_id] = 1;
  const bool pos_only = cfg.at("descriptor_positive_only").get<bool>();
  const bool l1 = cfg.at("descriptor_l1").get<bool>();
  std::vector<SessionDescriptor> descriptors;
  for (const auto& [sid, _] : seen)
    descriptors.push_back(session_descriptor(vectors, sid, pos_only, l1));
  const ClusterResult res =
      assign_tasks(descriptors, n_tasks, cfg.at("cluster_gamma").get<double>(),
                   cfg.at("seed").get<std::uint64_t>(),
                   cfg.at("kmeans_restarts").get<int>());
  const std::string header = "config " + config_hash(cfg);
  save_assignment(res.assignment, out_dir + "/assignment.csv", header);
  atomic_write(out_dir + "/similarity.svg", heatmap_svg(res.permuted_similarity));
  std::printf("assigned %zu sessions to %d tasks; wrote %s/assignment.csv\n",
              descriptors.size(), n_tasks, out_dir.c_str());
  if (!truth_path.empty()) {
    // Best-case agreement over task-to-profile relabelings (brute force,
    // fine for small T).
    std::map<std::string, std::string> truth;
    std::istringstream in(read_file(truth_path));
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#' || line.rfind("session_id", 0) == 0)
        continue;
      const auto comma = line.find(',');
      truth[line.substr(0, comma)] = line.substr(comma + 1);
    }
    std::map<std::string, int> profile_index;
    for (const auto& [sid, pid] : truth)
      profile_index.emplace(pid, static_cast<int>(profile_index.size()));
    std::vector<int> perm(n_tasks);
    std::iota(perm.begin(), perm.end(), 0);
    int best = 0;
    do {
      int agree = 0;
      for (const auto& d : descriptors) {
        const int t = res.assignment.task_of(d.session_id);
        auto it = truth.find(d.session_id);
        if (it != truth.end() &&
            perm[t % n_tasks] == profile_index.at(it->second) % n_tasks)
          ++agree;
      }
      best = std::max(best, agree);
    } while (std::next_permutation(perm.begin(), perm.end()));
    std::printf("ground-truth agreement: %d/%zu\n", best, descriptors.size());
  }
  return 0;
}

json metrics_json(const MetricsResult& m) {
  json j;
  j["accuracy"] = m.accuracy;
  j["sensitivity"] = m.sensitivity;
  j["specificity"] = m.specificity;
  j["f_score"] = m.f_score;
  j["degenerate"] = m.degenerate;
  return j;
}

json report_json(const EvalReport& report, const json& cfg) {
  json j;
  j["format_version"] = kFormatVersion;
  j["config_hash"] = config_hash(cfg);
  j["n_windows"] = report.n_windows;
  j["feature_dim"] = report.feature_dim;
  j["variants"] = json::array();
  for (const auto& v : report.variants) {
    json jv;
    jv["kernel"] = to_string(v.kernel);
    jv["regularizer"] = to_string(v.reg);
    jv["n_tasks"] = v.n_tasks;
    jv["mean"] = {{"accuracy", v.mean_accuracy},
                  {"sensitivity", v.mean_sensitivity},
                  {"specificity", v.mean_specificity},
                  {"f_score", v.mean_f_score}};
    jv["folds"] = json::array();
    for (const auto& f : v.folds) {
      json jf;
      jf["fold"] = f.fold;
      jf["C"] = f.chosen_C;
      jf["nu"] = f.chosen_nu;
      jf["metrics"] = metrics_json(f.metrics);
      jf["per_cluster_accuracy"] = f.per_cluster_accuracy;
      jf["per_cluster_count"] = f.per_cluster_count;
      jf["model_hash"] = f.model_hash;
      std::vector<std::vector<double>> eta(f.eta.rows());
      for (Eigen::Index r = 0; r < f.eta.rows(); ++r)
        for (Eigen::Index m = 0; m < f.eta.cols(); ++m)
          eta[r].push_back(f.eta(r, m));
      jf["eta"] = eta;
      jv["folds"].push_back(std::move(jf));
    }
    j["variants"].push_back(std::move(jv));
  }
  j["comparisons"] = json::array();
  for (const auto& c : report.comparisons) {
    json jc;
    jc["kernel"] = to_string(c.kernel);
    jc["regularizer"] = to_string(c.reg);
    jc["n_tasks"] = c.n_tasks_a;
    jc["baseline_n_tasks"] = c.n_tasks_b;
    jc["t"] = c.ttest.t;
    jc["p"] = c.ttest.p;
    jc["degenerate"] = c.ttest.degenerate;
    j["comparisons"].push_back(std::move(jc));
  }
  return j;
}

std::string bar_svg(const Eigen::VectorXd& values,
                    const std::vector<std::string>& labels) {
  const int bar_w = 48, gap = 8, h = 160, pad = 24;
  const int w = pad * 2 + static_cast<int>(values.size()) * (bar_w + gap);
  const double vmax = std::max(values.maxCoeff(), 1e-12);
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
      << "\" height=\"" << h + 40 << "\">\n";
  char buf[256];
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const int bh = static_cast<int>(std::lround(h * values[i] / vmax));
    const int x = pad + static_cast<int>(i) * (bar_w + gap);
    std::snprintf(buf, sizeof(buf),
                  "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"%d\" "
                  "fill=\"#444\"/>\n<text x=\"%d\" y=\"%d\" font-size=\"12\" "
                  "text-anchor=\"middle\">%s</text>\n",
                  x, pad + h - bh, bar_w, bh, x + bar_w / 2, pad + h + 16,
                  labels[static_cast<size_t>(i)].c_str());
    out << buf;
  }
  out << "</svg>\n";
  return out.str();
}

void emit_figures(const json& jreport, const json& cfg,
                  const std::string& out_dir) {
  // Winning variant = highest mean accuracy; its fold-mean eta drives the
  // heatmap and per-region bars.
  const json* best = nullptr;
  for (const auto& v : jreport.at("variants"))
    if (!best ||
        v.at("mean").at("accuracy").get<double>() >
            best->at("mean").at("accuracy").get<double>())
      best = &v;
  if (!best) return;
  const auto& folds = best->at("folds");
  const auto first_eta = folds.at(0).at("eta");
  const int T = static_cast<int>(first_eta.size());
  const int M = static_cast<int>(first_eta.at(0).size());
  Eigen::MatrixXd eta = Eigen::MatrixXd::Zero(T, M);
  int n_used = 0;
  for (const auto& f : folds) {
    const auto& fe = f.at("eta");
    if (static_cast<int>(fe.size()) != T) continue;  // dropped-task fold
    for (int r = 0; r < T; ++r)
      for (int m = 0; m < M; ++m) eta(r, m) += fe.at(r).at(m).get<double>();
    ++n_used;
  }
  if (n_used > 0) eta /= n_used;
  atomic_write(out_dir + "/eta_heatmap.svg", heatmap_svg(eta));

  const int region = std::max(1, cfg.at("region_size").get<int>());
  const int n_regions = (M + region - 1) / region;
  Eigen::VectorXd region_mean = Eigen::VectorXd::Zero(n_regions);
  std::vector<std::string> labels;
  for (int g = 0; g < n_regions; ++g) {
    const int lo = g * region, hi = std::min(M, lo + region);
    region_mean[g] = eta.middleCols(lo, hi - lo).mean();
    labels.push_back("ch" + std::to_string(lo + 1) + "-" + std::to_string(hi));
  }
  atomic_write(out_dir + "/eta_regions.svg", bar_svg(region_mean, labels));
}

int cmd_evaluate(const json& cfg, const std::string& data_dir,
                 const std::string& out_dir) {
  fs::create_directories(out_dir);
  const auto sessions = load_sessions_dir(data_dir);
  const ExperimentConfig config = to_experiment_config(cfg);
  const EvalReport report = run_experiment(sessions, config);
  const json jreport = report_json(report, cfg);
  atomic_write(out_dir + "/report.json", jreport.dump(2) + "\n");
  atomic_write(out_dir + "/report.txt",
               "# config " + config_hash(cfg) + "\n" +
                   format_report_table(report, config));
  emit_figures(jreport, cfg, out_dir);
  std::fputs(format_report_table(report, config).c_str(), stdout);
  return 0;
}

int cmd_train(const json& cfg, const std::string& data_dir,
              const std::string& out_dir) {
  // Same protocol as evaluate; additionally records per-fold model hashes so
  // trained models can be compared across runs.
  const int rc = cmd_evaluate(cfg, data_dir, out_dir);
  if (rc != 0) return rc;
  const json jreport = json::parse(read_file(out_dir + "/report.json"));
  std::ostringstream out;
  out << "# config " << config_hash(cfg) << "\nvariant,fold,model_hash\n";
  for (const auto& v : jreport.at("variants"))
    for (const auto& f : v.at("folds"))
      out << v.at("kernel").get<std::string>() << '/'
          << v.at("regularizer").get<std::string>() << "/T="
          << v.at("n_tasks").get<int>() << ',' << f.at("fold").get<int>() << ','
          << f.at("model_hash").get<std::string>() << '\n';
  atomic_write(out_dir + "/models.csv", out.str());
  return 0;
}

int cmd_report(const json& cfg, const std::string& report_path,
               const std::string& out_dir) {
  fs::create_directories(out_dir);
  const json jreport = json::parse(read_file(report_path));
  emit_figures(jreport, cfg, out_dir);
  char line[160];
  std::printf("%-8s %-4s %-3s %9s\n", "kernel", "reg", "T", "accuracy");
  for (const auto& v : jreport.at("variants")) {
    std::snprintf(line, sizeof(line), "%-8s %-4s %-3d %9.4f\n",
                  v.at("kernel").get<std::string>().c_str(),
                  v.at("regularizer").get<std::string>().c_str(),
                  v.at("n_tasks").get<int>(),
                  v.at("mean").at("accuracy").get<double>());
    std::fputs(line, stdout);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"personalized fNIRS pain recognition pipeline"};
  app.set_version_flag("--version", std::string("painmt ") + PAINMT_VERSION +
                                        " (format " + kFormatVersion + ")");
  std::string config_path, data_dir = "data", out = "out",
              features_path = "features.csv", truth_path, report_path;
  int jobs = 0, n_tasks = 3;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--jobs", jobs, "max worker threads (0 = all cores)");
  app.require_subcommand(1);

  auto* synth = app.add_subcommand("synth", "generate a synthetic cohort");
  synth->add_option("--out", out, "output directory");
  auto* features = app.add_subcommand("features", "extract window features");
  features->add_option("--data", data_dir, "session directory");
  features->add_option("--out", features_path, "output feature CSV");
  auto* cluster = app.add_subcommand("cluster", "spectral task assignment");
  cluster->add_option("--features", features_path, "feature CSV");
  cluster->add_option("--tasks", n_tasks, "number of tasks T");
  cluster->add_option("--truth", truth_path, "ground-truth CSV (optional)");
  cluster->add_option("--out", out, "output directory");
  auto* train = app.add_subcommand("train", "run the protocol, keep models");
  train->add_option("--data", data_dir, "session directory");
  train->add_option("--out", out, "output directory");
  auto* evaluate = app.add_subcommand("evaluate", "run the full protocol");
  evaluate->add_option("--data", data_dir, "session directory");
  evaluate->add_option("--out", out, "output directory");
  auto* report = app.add_subcommand("report", "re-emit table and figures");
  report->add_option("--report", report_path, "report.json path")->required();
  report->add_option("--out", out, "output directory");

  CLI11_PARSE(app, argc, argv);
  try {
    const json cfg = load_config(config_path);
    if (jobs > 0) omp_set_num_threads(jobs);
    if (synth->parsed()) return cmd_synth(cfg, out);
    if (features->parsed()) return cmd_features(cfg, data_dir, features_path);
    if (cluster->parsed())
      return cmd_cluster(cfg, features_path, out, n_tasks, truth_path);
    if (train->parsed()) return cmd_train(cfg, data_dir, out);
    if (evaluate->parsed()) return cmd_evaluate(cfg, data_dir, out);
    if (report->parsed()) return cmd_report(cfg, report_path, out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
