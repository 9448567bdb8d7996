// SPDX-License-Identifier: Apache-2.0
#include "l2m/gaussians/render.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace l2m {

namespace {

constexpr int kTile = 16;

struct Projected {
  int index;          // into the input set
  Eigen::Vector2d c;  // footprint center, pixels
  double inv_a, inv_b, inv_d;  // inverse covariance [[a, b], [b, d]]
  double depth;
  double opacity;
  int x0, x1, y0, y1;  // 3-sigma pixel bounds, inclusive
};

/// Projects, culls, sorts front-to-back, and tiles the footprints.
struct Binned {
  std::vector<Projected> splats;                 // sorted by (depth, index)
  std::vector<std::vector<int>> tiles;           // indices into splats
  int tiles_x = 0, tiles_y = 0;
};

Binned bin_gaussians(const std::vector<Gaussian3D>& gaussians,
                     const Intrinsicsd& k, const Posed& pose, int width,
                     int height, const FeatureRenderOptions& opts) {
  Binned binned;
  binned.splats.reserve(gaussians.size());
  const double r = std::sqrt(opts.cutoff_mahalanobis_sq);
  for (std::size_t i = 0; i < gaussians.size(); ++i) {
    const SplatFootprint fp = project_gaussian(gaussians[i], k, pose);
    if (fp.culled) continue;
    const double det = fp.covariance(0, 0) * fp.covariance(1, 1) -
                       fp.covariance(0, 1) * fp.covariance(1, 0);
    if (!(det > 0.0)) continue;
    Projected p;
    p.index = static_cast<int>(i);
    p.c = fp.center;
    p.inv_a = fp.covariance(1, 1) / det;
    p.inv_b = -fp.covariance(0, 1) / det;
    p.inv_d = fp.covariance(0, 0) / det;
    p.depth = fp.depth;
    p.opacity = gaussians[i].opacity;
    const double rx = r * std::sqrt(fp.covariance(0, 0));
    const double ry = r * std::sqrt(fp.covariance(1, 1));
    p.x0 = std::max(0, static_cast<int>(std::ceil(fp.center.x() - rx)));
    p.x1 = std::min(width - 1, static_cast<int>(std::floor(fp.center.x() + rx)));
    p.y0 = std::max(0, static_cast<int>(std::ceil(fp.center.y() - ry)));
    p.y1 = std::min(height - 1, static_cast<int>(std::floor(fp.center.y() + ry)));
    if (p.x0 > p.x1 || p.y0 > p.y1) continue;
    binned.splats.push_back(p);
  }
  std::sort(binned.splats.begin(), binned.splats.end(),
            [](const Projected& a, const Projected& b) {
              return a.depth != b.depth ? a.depth < b.depth
                                        : a.index < b.index;
            });

  binned.tiles_x = (width + kTile - 1) / kTile;
  binned.tiles_y = (height + kTile - 1) / kTile;
  binned.tiles.assign(static_cast<std::size_t>(binned.tiles_x) *
                          binned.tiles_y,
                      {});
  for (std::size_t s = 0; s < binned.splats.size(); ++s) {
    const Projected& p = binned.splats[s];
    for (int ty = p.y0 / kTile; ty <= p.y1 / kTile; ++ty) {
      for (int tx = p.x0 / kTile; tx <= p.x1 / kTile; ++tx) {
        binned.tiles[static_cast<std::size_t>(ty) * binned.tiles_x + tx]
            .push_back(static_cast<int>(s));
      }
    }
  }
  return binned;
}

/// Front-to-back walk over one pixel; sink(index, weight) per contribution.
template <typename Sink>
void composite_pixel(const Binned& binned, const std::vector<int>& tile,
                     int px, int py, const FeatureRenderOptions& opts,
                     Sink&& sink) {
  double transmittance = 1.0;
  for (const int s : tile) {
    const Projected& p = binned.splats[s];
    if (px < p.x0 || px > p.x1 || py < p.y0 || py > p.y1) continue;
    const double dx = px - p.c.x();
    const double dy = py - p.c.y();
    const double m =
        p.inv_a * dx * dx + 2.0 * p.inv_b * dx * dy + p.inv_d * dy * dy;
    if (m > opts.cutoff_mahalanobis_sq) continue;
    const double alpha = p.opacity * std::exp(-0.5 * m);
    if (alpha <= 0.0) continue;
    sink(p.index, alpha * transmittance);
    transmittance *= 1.0 - alpha;
    if (transmittance < opts.transmittance_epsilon) break;
  }
}

}  // namespace

FeatureRenderResult render_features(const std::vector<Gaussian3D>& gaussians,
                                    const Intrinsicsd& k, const Posed& pose,
                                    int width, int height,
                                    const FeatureRenderOptions& opts) {
  const int d = gaussians.empty() ? 0 : static_cast<int>(gaussians[0].feature.size());
  for (const Gaussian3D& g : gaussians) {
    if (g.feature.size() != d) {
      throw std::invalid_argument("render_features: mixed feature dimensions");
    }
  }
  FeatureRenderResult out;
  out.features = FeatureMap(width, height, std::max(d, 1), 0.0f);
  out.alpha = RasterF(width, height, 1, 0.0f);
  out.color = ImageRGB(width, height, 3, 0.0f);
  if (gaussians.empty()) return out;

  const Binned binned = bin_gaussians(gaussians, k, pose, width, height, opts);
  for (int py = 0; py < height; ++py) {
    for (int px = 0; px < width; ++px) {
      const auto& tile =
          binned.tiles[static_cast<std::size_t>(py / kTile) * binned.tiles_x +
                       px / kTile];
      if (tile.empty()) continue;
      double acc_alpha = 0.0;
      Eigen::VectorXd feat = Eigen::VectorXd::Zero(d);
      Eigen::Vector3d color = Eigen::Vector3d::Zero();
      composite_pixel(binned, tile, px, py, opts,
                      [&](int index, double weight) {
                        const Gaussian3D& g = gaussians[index];
                        acc_alpha += weight;
                        feat += weight * g.feature.cast<double>();
                        color += weight * g.sh.cast<double>();
                      });
      out.alpha.at(px, py) = static_cast<float>(acc_alpha);
      for (int c = 0; c < d; ++c) {
        out.features.at(px, py, c) = static_cast<float>(feat[c]);
      }
      for (int c = 0; c < 3; ++c) {
        out.color.at(px, py, c) = static_cast<float>(color[c]);
      }
    }
  }
  return out;
}

Eigen::SparseMatrix<double> composite_weights(
    const std::vector<Gaussian3D>& gaussians, const Intrinsicsd& k,
    const Posed& pose, int width, int height,
    const FeatureRenderOptions& opts) {
  const Binned binned = bin_gaussians(gaussians, k, pose, width, height, opts);
  std::vector<Eigen::Triplet<double>> triplets;
  for (int py = 0; py < height; ++py) {
    for (int px = 0; px < width; ++px) {
      const auto& tile =
          binned.tiles[static_cast<std::size_t>(py / kTile) * binned.tiles_x +
                       px / kTile];
      if (tile.empty()) continue;
      const int row = py * width + px;
      composite_pixel(binned, tile, px, py, opts,
                      [&](int index, double weight) {
                        triplets.emplace_back(row, index, weight);
                      });
    }
  }
  Eigen::SparseMatrix<double> weights(
      static_cast<Eigen::Index>(width) * height,
      static_cast<Eigen::Index>(gaussians.size()));
  weights.setFromTriplets(triplets.begin(), triplets.end());
  return weights;
}

}  // namespace l2m
