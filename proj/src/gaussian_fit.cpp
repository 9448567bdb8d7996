// SPDX-License-Identifier: Apache-2.0
#include "l2m/gaussians/fit.hpp"

#include <Eigen/SparseCore>

#include <stdexcept>

namespace l2m {

FitResult fit_features(const std::vector<Gaussian3D>& gaussians,
                       const std::vector<FitTarget>& targets,
                       const FitOptions& opts) {
  if (targets.empty()) {
    throw std::invalid_argument("fit_features: need at least one target");
  }
  const Eigen::Index n_gaussians = static_cast<Eigen::Index>(gaussians.size());
  const int d = gaussians.empty() ? 0 : static_cast<int>(gaussians[0].feature.size());
  for (const FitTarget& t : targets) {
    if (t.features.channels() != d) {
      throw std::invalid_argument("fit_features: target dimension mismatch");
    }
  }

  FitResult result;
  result.features.resize(n_gaussians, d);
  for (Eigen::Index i = 0; i < n_gaussians; ++i) {
    result.features.row(i) = gaussians[i].feature.transpose();
  }
  result.fitted.assign(gaussians.size(), 0);
  if (n_gaussians == 0 || d == 0) return result;

  // Stack the per-view weight matrices and targets.
  Eigen::Index total_rows = 0;
  std::vector<Eigen::SparseMatrix<double>> blocks;
  blocks.reserve(targets.size());
  for (const FitTarget& t : targets) {
    blocks.push_back(composite_weights(gaussians, t.k, t.pose,
                                       t.features.width(), t.features.height(),
                                       opts.render));
    total_rows += blocks.back().rows();
  }
  Eigen::SparseMatrix<double, Eigen::RowMajor> a(total_rows, n_gaussians);
  {
    std::vector<Eigen::Triplet<double>> triplets;
    Eigen::Index row0 = 0;
    for (const auto& block : blocks) {
      for (int outer = 0; outer < block.outerSize(); ++outer) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(block, outer); it;
             ++it) {
          triplets.emplace_back(row0 + it.row(), it.col(), it.value());
        }
      }
      row0 += block.rows();
    }
    a.setFromTriplets(triplets.begin(), triplets.end());
    blocks.clear();
  }

  Eigen::MatrixXd b(total_rows, d);
  {
    Eigen::Index row0 = 0;
    for (const FitTarget& t : targets) {
      b.middleRows(row0, t.features.pixel_count()) =
          t.features.as_matrix().cast<double>();
      row0 += t.features.pixel_count();
    }
  }

  // Jacobi preconditioner = column squared norms; zero-weight Gaussians are
  // flagged and kept out of the solve.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n_gaussians);
  for (int outer = 0; outer < a.outerSize(); ++outer) {
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(a, outer);
         it; ++it) {
      diag[it.col()] += it.value() * it.value();
    }
  }
  Eigen::VectorXd inv_diag = Eigen::VectorXd::Zero(n_gaussians);
  for (Eigen::Index i = 0; i < n_gaussians; ++i) {
    if (diag[i] > 0.0) {
      inv_diag[i] = 1.0 / diag[i];
      result.fitted[i] = 1;
    }
  }

  // CGLS, all channels in lockstep; the recorded residual is the true
  // least-squares one, so the history is the objective itself.
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n_gaussians, d);
  for (Eigen::Index i = 0; i < n_gaussians; ++i) {
    if (result.fitted[i]) x.row(i) = result.features.row(i).cast<double>();
  }

  Eigen::MatrixXd s = b - a * x;                       // pixel-space residual
  Eigen::MatrixXd r = a.transpose() * s;               // normal residual
  r.array().colwise() *= (inv_diag.array() > 0.0).cast<double>();
  Eigen::MatrixXd z = r.array().colwise() * inv_diag.array();
  Eigen::MatrixXd p = z;
  Eigen::VectorXd gamma = (r.array() * z.array()).colwise().sum();

  const double b_norm = b.norm();
  const double denom = b_norm > 0.0 ? b_norm : 1.0;
  double prev_residual = s.norm() / denom;
  result.residual_history.push_back(prev_residual);

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    if (prev_residual < opts.tolerance) break;
    Eigen::MatrixXd q = a * p;
    Eigen::VectorXd q_norm2 = q.colwise().squaredNorm();
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(d);
    bool any_active = false;
    for (int c = 0; c < d; ++c) {
      if (gamma[c] > 0.0 && q_norm2[c] > 0.0) {
        alpha[c] = gamma[c] / q_norm2[c];
        any_active = true;
      }
    }
    if (!any_active) break;

    x += p * alpha.asDiagonal();
    s -= q * alpha.asDiagonal();
    r = a.transpose() * s;
    r.array().colwise() *= (inv_diag.array() > 0.0).cast<double>();
    z = r.array().colwise() * inv_diag.array();
    Eigen::VectorXd gamma_next = (r.array() * z.array()).colwise().sum();
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(d);
    for (int c = 0; c < d; ++c) {
      if (gamma[c] > 0.0) beta[c] = gamma_next[c] / gamma[c];
    }
    gamma = gamma_next;
    p = z + p * beta.asDiagonal();

    const double residual = s.norm() / denom;
    if (residual >= prev_residual) break;  // float-precision floor reached
    result.residual_history.push_back(residual);
    prev_residual = residual;
  }

  for (Eigen::Index i = 0; i < n_gaussians; ++i) {
    if (result.fitted[i]) result.features.row(i) = x.row(i).cast<float>();
  }
  return result;
}

void apply_features(std::vector<Gaussian3D>& gaussians, const FitResult& fit) {
  if (fit.features.rows() != static_cast<Eigen::Index>(gaussians.size())) {
    throw std::invalid_argument("apply_features: size mismatch");
  }
  for (std::size_t i = 0; i < gaussians.size(); ++i) {
    gaussians[i].feature = fit.features.row(static_cast<Eigen::Index>(i));
  }
}

double feature_l1_loss(const FeatureMap& rendered, const FeatureMap& target,
                       const RasterU8& mask) {
  if (!rendered.same_shape(target) || mask.width() != rendered.width() ||
      mask.height() != rendered.height()) {
    throw std::invalid_argument("feature_l1_loss: shape mismatch");
  }
  double sum = 0.0;
  std::size_t count = 0;
  for (int y = 0; y < rendered.height(); ++y) {
    for (int x = 0; x < rendered.width(); ++x) {
      if (!mask.at(x, y)) continue;
      for (int c = 0; c < rendered.channels(); ++c) {
        sum += std::abs(static_cast<double>(rendered.at(x, y, c)) -
                        target.at(x, y, c));
        ++count;
      }
    }
  }
  if (count == 0) {
    throw std::invalid_argument("feature_l1_loss: empty mask");
  }
  return sum / static_cast<double>(count);
}

}  // namespace l2m
