// SPDX-License-Identifier: Apache-2.0
#include "l2m/eval/matches.hpp"

#include <array>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace l2m {

MatchSet read_matches(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path.string() + ": cannot open");
  std::vector<std::array<double, 5>> rows;
  bool any_confidence = false;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::array<double, 5> row{};
    if (!(ss >> row[0] >> row[1] >> row[2] >> row[3])) {
      std::string leftover;
      if (ss.clear(), ss >> leftover) {
        throw std::runtime_error(path.string() + ":" +
                                 std::to_string(line_no) + ": malformed match");
      }
      continue;  // blank or comment-only line
    }
    if (ss >> row[4]) {
      any_confidence = true;
    } else {
      row[4] = 1.0;
    }
    rows.push_back(row);
  }
  MatchSet matches;
  matches.pairs.resize(static_cast<Eigen::Index>(rows.size()), 4);
  if (any_confidence) {
    matches.confidence.resize(static_cast<Eigen::Index>(rows.size()));
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Eigen::Index r = static_cast<Eigen::Index>(i);
    for (int c = 0; c < 4; ++c) matches.pairs(r, c) = rows[i][c];
    if (any_confidence) matches.confidence(r) = rows[i][4];
  }
  return matches;
}

void write_matches(const std::filesystem::path& path,
                   const MatchSet& matches) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for write");
  out << "# u1 v1 u2 v2" << (matches.has_confidence() ? " confidence" : "")
      << "\n";
  out.precision(10);
  for (Eigen::Index i = 0; i < matches.size(); ++i) {
    out << matches.pairs(i, 0) << " " << matches.pairs(i, 1) << " "
        << matches.pairs(i, 2) << " " << matches.pairs(i, 3);
    if (matches.has_confidence()) out << " " << matches.confidence(i);
    out << "\n";
  }
}

}  // namespace l2m
