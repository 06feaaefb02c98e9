#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "painmt/cluster.hpp"
#include "painmt/features.hpp"
#include "painmt/signal.hpp"

namespace painmt {

// FNV-1a 64-bit digest, hex-encoded.
std::uint64_t fnv1a(const std::string& data);
std::string fnv1a_hex(const std::string& data);

// Write-temp-then-rename.
void atomic_write(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

// Session files: <id>.csv (time_s,ch01,...), <id>.events.csv
// (onset_s,rating), <id>.meta (key=value). Lines starting with '#' are
// comments and may carry the config hash.
void save_session(const Session& session, const std::string& dir,
                  const std::string& header_comment = "");
Session load_session(const std::string& data_csv_path);

void save_feature_matrix(const std::vector<FeatureVector>& vectors,
                         const std::string& path,
                         const std::string& header_comment = "");
std::vector<FeatureVector> load_feature_matrix(const std::string& path);

void save_scaler(const Scaler& scaler, const std::string& path);
Scaler load_scaler(const std::string& path);

void save_assignment(const TaskAssignment& assignment, const std::string& path,
                     const std::string& header_comment = "");
TaskAssignment load_assignment(const std::string& path);

void save_matrix_csv(const Eigen::MatrixXd& m, const std::string& path,
                     const std::string& header_comment = "");

// Grayscale heatmap (darker = larger) with optional row/column counts
// drawn as an S x S (or R x C) cell grid.
std::string heatmap_svg(const Eigen::MatrixXd& values, int cell_px = 16);

}  // namespace painmt
