#include "painmt/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace painmt {

namespace fs = std::filesystem;

std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string fnv1a_hex(const std::string& data) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(data)));
  return buf;
}

void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + tmp);
  }
  fs::rename(tmp, path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_double(const std::string& s, const std::string& path, int line_no) {
  double v = 0.0;
  const auto* begin = s.data();
  const auto* end = begin + s.size();
  auto [p, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc{} || p != end || !std::isfinite(v))
    throw std::runtime_error(path + ": row " + std::to_string(line_no) +
                             ": bad numeric field '" + s + "'");
  return v;
}

std::string strip_suffix(const std::string& s, const std::string& suffix) {
  if (s.size() >= suffix.size() &&
      s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0)
    return s.substr(0, s.size() - suffix.size());
  return s;
}

}  // namespace

void save_session(const Session& session, const std::string& dir,
                  const std::string& header_comment) {
  session.validate();
  fs::create_directories(dir);
  const std::string base = dir + "/" + session.id;
  const int M = session.n_channels();

  std::ostringstream data;
  if (!header_comment.empty()) data << "# " << header_comment << "\n";
  data << "time_s";
  for (int m = 1; m <= M; ++m) {
    char ch[8];
    std::snprintf(ch, sizeof(ch), "ch%02d", m);
    data << ',' << ch;
  }
  data << '\n';
  for (Eigen::Index i = 0; i < session.n_samples(); ++i) {
    data << fmt(static_cast<double>(i) / session.sample_rate_hz);
    for (int m = 0; m < M; ++m) data << ',' << fmt(session.channels(m, i));
    data << '\n';
  }
  atomic_write(base + ".csv", data.str());

  std::ostringstream events;
  if (!header_comment.empty()) events << "# " << header_comment << "\n";
  events << "onset_s,rating\n";
  for (const auto& ev : session.events)
    events << fmt(ev.onset_s) << ',' << ev.rating << '\n';
  atomic_write(base + ".events.csv", events.str());

  std::ostringstream meta;
  if (!header_comment.empty()) meta << "# " << header_comment << "\n";
  meta << "sample_rate_hz=" << fmt(session.sample_rate_hz) << '\n'
       << "baseline_start_s=" << fmt(session.baseline_span_s.first) << '\n'
       << "baseline_end_s=" << fmt(session.baseline_span_s.second) << '\n'
       << "subject_id=" << session.subject_id << '\n';
  atomic_write(base + ".meta", meta.str());
}

Session load_session(const std::string& data_csv_path) {
  const std::string base = strip_suffix(data_csv_path, ".csv");

  Session s;
  s.id = fs::path(base).filename().string();

  // metadata
  {
    const std::string meta_path = base + ".meta";
    std::ifstream in(meta_path);
    if (!in) throw std::runtime_error("missing metadata file: " + meta_path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty() || line[0] == '#') continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw std::runtime_error(meta_path + ": row " + std::to_string(line_no) +
                                 ": expected key=value");
      const std::string key = line.substr(0, eq);
      const std::string val = line.substr(eq + 1);
      if (key == "sample_rate_hz")
        s.sample_rate_hz = parse_double(val, meta_path, line_no);
      else if (key == "baseline_start_s")
        s.baseline_span_s.first = parse_double(val, meta_path, line_no);
      else if (key == "baseline_end_s")
        s.baseline_span_s.second = parse_double(val, meta_path, line_no);
      else if (key == "subject_id")
        s.subject_id = val;
    }
  }

  // channel data
  {
    std::ifstream in(data_csv_path);
    if (!in) throw std::runtime_error("cannot open: " + data_csv_path);
    std::string line;
    int line_no = 0;
    int n_cols = -1;
    std::vector<std::vector<double>> rows;
    bool header_seen = false;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty() || line[0] == '#') continue;
      const auto fields = split_csv(line);
      if (!header_seen) {
        if (fields.empty() || fields[0] != "time_s")
          throw std::runtime_error(data_csv_path + ": row " +
                                   std::to_string(line_no) +
                                   ": malformed header (expected time_s,ch01,...)");
        n_cols = static_cast<int>(fields.size());
        if (n_cols < 2)
          throw std::runtime_error(data_csv_path + ": header has no channels");
        header_seen = true;
        continue;
      }
      if (static_cast<int>(fields.size()) != n_cols)
        throw std::runtime_error(data_csv_path + ": row " +
                                 std::to_string(line_no) + ": expected " +
                                 std::to_string(n_cols) + " fields, got " +
                                 std::to_string(fields.size()));
      std::vector<double> row(n_cols - 1);
      for (int c = 1; c < n_cols; ++c)
        row[c - 1] = parse_double(fields[c], data_csv_path, line_no);
      rows.push_back(std::move(row));
    }
    if (!header_seen)
      throw std::runtime_error(data_csv_path + ": empty file (no header)");
    if (rows.empty())
      throw std::runtime_error(data_csv_path + ": no samples");
    const int M = n_cols - 1;
    s.channels.resize(M, static_cast<Eigen::Index>(rows.size()));
    for (size_t i = 0; i < rows.size(); ++i)
      for (int m = 0; m < M; ++m)
        s.channels(m, static_cast<Eigen::Index>(i)) = rows[i][m];
  }

  // events
  {
    const std::string events_path = base + ".events.csv";
    std::ifstream in(events_path);
    if (!in) throw std::runtime_error("missing events file: " + events_path);
    std::string line;
    int line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty() || line[0] == '#') continue;
      if (!header_seen) {
        header_seen = true;  // onset_s,rating
        continue;
      }
      const auto fields = split_csv(line);
      if (fields.size() != 2)
        throw std::runtime_error(events_path + ": row " + std::to_string(line_no) +
                                 ": expected 2 fields");
      StimEvent ev;
      ev.onset_s = parse_double(fields[0], events_path, line_no);
      ev.rating = static_cast<int>(parse_double(fields[1], events_path, line_no));
      s.events.push_back(ev);
    }
  }

  s.validate();
  return s;
}

void save_feature_matrix(const std::vector<FeatureVector>& vectors,
                         const std::string& path,
                         const std::string& header_comment) {
  if (vectors.empty())
    throw std::invalid_argument("save_feature_matrix: nothing to save");
  const Eigen::Index D = vectors.front().x.size();
  std::ostringstream out;
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  out << "session_id,label";
  for (Eigen::Index i = 1; i <= D; ++i) {
    char col[12];
    std::snprintf(col, sizeof(col), "f_%04lld", static_cast<long long>(i));
    out << ',' << col;
  }
  out << '\n';
  for (const auto& fv : vectors) {
    out << fv.session_id << ',' << fv.label;
    for (Eigen::Index i = 0; i < D; ++i) out << ',' << fmt(fv.x[i]);
    out << '\n';
  }
  atomic_write(path, out.str());
}

std::vector<FeatureVector> load_feature_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::vector<FeatureVector> vectors;
  std::string line;
  int line_no = 0, n_cols = -1;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_csv(line);
    if (!header_seen) {
      n_cols = static_cast<int>(fields.size());
      if (n_cols < 3 || fields[0] != "session_id")
        throw std::runtime_error(path + ": malformed header");
      header_seen = true;
      continue;
    }
    if (static_cast<int>(fields.size()) != n_cols)
      throw std::runtime_error(path + ": row " + std::to_string(line_no) +
                               ": field count mismatch");
    FeatureVector fv;
    fv.session_id = fields[0];
    fv.label = static_cast<int>(parse_double(fields[1], path, line_no));
    fv.x.resize(n_cols - 2);
    for (int c = 2; c < n_cols; ++c)
      fv.x[c - 2] = parse_double(fields[c], path, line_no);
    vectors.push_back(std::move(fv));
  }
  return vectors;
}

void save_scaler(const Scaler& scaler, const std::string& path) {
  std::ostringstream out;
  out << "dims=" << scaler.mean.size() << '\n';
  for (Eigen::Index i = 0; i < scaler.mean.size(); ++i)
    out << "mean_" << i << '=' << fmt(scaler.mean[i]) << '\n'
        << "scale_" << i << '=' << fmt(scaler.scale[i]) << '\n';
  atomic_write(path, out.str());
}

Scaler load_scaler(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string line;
  Eigen::Index dims = -1;
  Scaler s;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ": row " + std::to_string(line_no) +
                               ": expected key=value");
    const std::string key = line.substr(0, eq);
    const std::string val = line.substr(eq + 1);
    if (key == "dims") {
      dims = static_cast<Eigen::Index>(parse_double(val, path, line_no));
      s.mean.setZero(dims);
      s.scale.setZero(dims);
    } else if (key.rfind("mean_", 0) == 0) {
      s.mean[std::stol(key.substr(5))] = parse_double(val, path, line_no);
    } else if (key.rfind("scale_", 0) == 0) {
      s.scale[std::stol(key.substr(6))] = parse_double(val, path, line_no);
    }
  }
  if (dims < 0) throw std::runtime_error(path + ": missing dims entry");
  return s;
}

void save_assignment(const TaskAssignment& assignment, const std::string& path,
                     const std::string& header_comment) {
  std::ostringstream out;
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  out << "session_id,task\n";
  for (const auto& [id, task] : assignment.map) out << id << ',' << task << '\n';
  atomic_write(path, out.str());
}

TaskAssignment load_assignment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  TaskAssignment a;
  a.n_tasks = 0;
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    const auto fields = split_csv(line);
    if (fields.size() != 2)
      throw std::runtime_error(path + ": row " + std::to_string(line_no) +
                               ": expected 2 fields");
    const int task = static_cast<int>(parse_double(fields[1], path, line_no));
    a.map[fields[0]] = task;
    a.n_tasks = std::max(a.n_tasks, task + 1);
  }
  return a;
}

void save_matrix_csv(const Eigen::MatrixXd& m, const std::string& path,
                     const std::string& header_comment) {
  std::ostringstream out;
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << fmt(m(i, j));
    }
    out << '\n';
  }
  atomic_write(path, out.str());
}

std::string heatmap_svg(const Eigen::MatrixXd& values, int cell_px) {
  const Eigen::Index R = values.rows(), C = values.cols();
  const double lo = values.minCoeff();
  const double hi = values.maxCoeff();
  const double span = hi > lo ? hi - lo : 1.0;
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << C * cell_px
      << "\" height=\"" << R * cell_px << "\">\n";
  for (Eigen::Index i = 0; i < R; ++i) {
    for (Eigen::Index j = 0; j < C; ++j) {
      // darker = larger
      const int shade =
          static_cast<int>(std::lround(255.0 * (1.0 - (values(i, j) - lo) / span)));
      out << "<rect x=\"" << j * cell_px << "\" y=\"" << i * cell_px
          << "\" width=\"" << cell_px << "\" height=\"" << cell_px
          << "\" fill=\"rgb(" << shade << ',' << shade << ',' << shade
          << ")\"/>\n";
    }
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace painmt
