#pragma once

#include <string>

#include <Eigen/Dense>

#include "qig/gaussian_score.hpp"

namespace qig {

// CSV with a header row of variable names; returns the data in `columns` order when given.
Eigen::MatrixXd read_csv(const std::string& path, std::vector<std::string>& header);
void write_csv(const std::string& path, const std::vector<std::string>& header, const Eigen::MatrixXd& data);

// Manifest: {"observational": path, "interventions": [{"target": name, "path": path}, ...]}.
// Relative paths resolve against the manifest's directory.
InterventionalDataset load_manifest(const std::string& path);
// Writes one CSV per context plus manifest.json into dir; returns the manifest path.
std::string write_dataset(const InterventionalDataset& ds, const std::string& dir);

// Subtracts each column's mean, per context.
InterventionalDataset centered(const InterventionalDataset& ds);

}  // namespace qig
