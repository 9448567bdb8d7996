// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>

#include <filesystem>

namespace l2m {

/// Pixel correspondences (u1, v1) <-> (u2, v2) with optional confidence.
struct MatchSet {
  Eigen::Matrix<double, Eigen::Dynamic, 4> pairs;
  Eigen::VectorXd confidence;  // empty, or one value in [0,1] per match

  Eigen::Index size() const { return pairs.rows(); }
  bool has_confidence() const { return confidence.size() == pairs.rows(); }
};

/// Text format: one match per line "u1 v1 u2 v2 [confidence]",
/// '#' starts a comment.
MatchSet read_matches(const std::filesystem::path& path);
void write_matches(const std::filesystem::path& path, const MatchSet& matches);

}  // namespace l2m
