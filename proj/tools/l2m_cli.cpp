// SPDX-License-Identifier: Apache-2.0
//
// Command-line driver: corpus scanning, pair/multiview synthesis, feature
// distillation, standalone rendering, and pose evaluation.

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <thread>

#include "l2m/eval/essential.hpp"
#include "l2m/eval/metrics.hpp"
#include "l2m/gaussians/fit.hpp"
#include "l2m/io/container_io.hpp"
#include "l2m/io/image_io.hpp"
#include "l2m/lift/lift.hpp"
#include "l2m/pipeline/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string inpaint_cmd;
  bool inpaint_set = false;
};

void add_common(CLI::App* cmd, CommonOpts* opts) {
  cmd->add_option("--config", opts->config_path,
                  "Config file (.json, or TOML subset)");
  cmd->add_option("--set", opts->overrides,
                  "Config override key=value (repeatable)");
  cmd->add_option("--seed", opts->seed, "Master seed")
      ->each([opts](const std::string&) { opts->seed_set = true; });
  cmd->add_option("--inpaint-cmd", opts->inpaint_cmd,
                  "Inpaint hook template with {image} {mask} {out}")
      ->each([opts](const std::string&) { opts->inpaint_set = true; });
}

l2m::GenConfig resolve_config(const CommonOpts& opts) {
  l2m::GenConfig cfg;
  if (!opts.config_path.empty()) cfg = l2m::load_config(opts.config_path);
  for (const std::string& kv : opts.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw CLI::ValidationError("--set expects key=value, got: " + kv);
    }
    l2m::apply_config_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (opts.seed_set) cfg.seed = opts.seed;
  if (opts.inpaint_set) {
    cfg.inpaint_cmd = opts.inpaint_cmd;
  } else if (cfg.inpaint_cmd.empty()) {
    if (const char* env = std::getenv("L2M_INPAINT_CMD")) cfg.inpaint_cmd = env;
  }
  cfg.validate();
  return cfg;
}

void write_json_file(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for write");
  out << std::setw(2) << j << "\n";
}

int cmd_scan(const std::vector<std::string>& roots, const std::string& out) {
  std::vector<fs::path> paths(roots.begin(), roots.end());
  const l2m::ScanResult scan = l2m::scan_corpus(paths);
  l2m::write_manifest(out, scan);
  std::cout << "manifest: " << out << " (" << scan.paired.size()
            << " pairs, " << scan.skipped.size() << " skipped)\n";
  if (scan.paired.empty()) {
    std::cerr << "warning: no image/depth pairs found\n";
  }
  return 0;
}

int cmd_generate(const CommonOpts& common, const std::string& manifest_path,
                 const std::string& out, int jobs, bool resume) {
  const l2m::GenConfig cfg = resolve_config(common);
  const auto manifest = l2m::read_manifest(manifest_path);
  const l2m::GenerationSummary summary =
      l2m::run_generation(manifest, cfg, out, {jobs, resume});
  std::cout << "accepted: " << summary.accepted
            << ", skipped: " << summary.skipped_existing << "\n";
  for (const auto& [reason, count] : summary.rejected) {
    std::cout << "rejected (" << reason << "): " << count << "\n";
  }
  for (const auto& [what, count] : summary.failed) {
    std::cerr << "failed (" << what << "): " << count << "\n";
  }
  std::cout << "wall time: " << summary.wall_time_s << " s\n";
  return summary.accepted > 0 || manifest.empty() ? 0 : 1;
}

int cmd_multiview(const CommonOpts& common, const std::string& manifest_path,
                  const std::string& out, int jobs, bool resume, int views) {
  l2m::GenConfig cfg = resolve_config(common);
  if (views > 0) cfg.views_per_image = views;
  const auto manifest = l2m::read_manifest(manifest_path);
  fs::create_directories(out);

  std::atomic<std::size_t> next{0};
  std::atomic<int> accepted{0}, rejected{0}, failed{0}, skipped{0};
  auto worker = [&]() {
    for (std::size_t idx = next.fetch_add(1); idx < manifest.size();
         idx = next.fetch_add(1)) {
      const auto& entry = manifest[idx];
      const std::string id = l2m::sample_id(idx, entry.image);
      const fs::path final_dir = fs::path(out) / id;
      if (resume && fs::exists(final_dir / "meta.json")) {
        ++skipped;
        continue;
      }
      try {
        const l2m::ImageRGB image = l2m::read_image_linear(entry.image);
        const l2m::DepthMap depth = l2m::read_depth(entry.depth);
        l2m::MultiViewSample sample = l2m::generate_multiview(
            image, depth, cfg, l2m::derive_seed(cfg.seed, idx));
        sample.provenance.source = entry.image.string();
        const fs::path tmp_dir = fs::path(out) / (".tmp-" + id);
        fs::remove_all(tmp_dir);
        l2m::write_multiview_sample(tmp_dir, sample);
        fs::remove_all(final_dir);
        fs::rename(tmp_dir, final_dir);
        ++accepted;
      } catch (const l2m::SampleRejected& r) {
        std::cerr << id << ": rejected (" << r.what() << ")\n";
        ++rejected;
      } catch (const std::exception& e) {
        std::cerr << id << ": failed (" << e.what() << ")\n";
        ++failed;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int j = 0; j < std::max(1, jobs); ++j) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::cout << "multiview sets: " << accepted << " written, " << rejected
            << " rejected, " << failed << " failed, " << skipped
            << " skipped\n";
  return failed == 0 ? 0 : 1;
}

int cmd_fit_gaussians(const CommonOpts& common, const std::string& set_dir,
                      const std::string& out_file) {
  const l2m::GenConfig cfg = resolve_config(common);
  const l2m::MultiViewSample sample =
      l2m::read_multiview_sample(set_dir, /*load_views=*/false);

  const l2m::PointCloud cloud =
      l2m::lift_to_pointcloud(sample.source, sample.depth,
                              sample.cameras.at(0).k);

  // Feature maps may be coarser than the views; intrinsics rescale with them.
  std::vector<l2m::FitTarget> targets;
  l2m::FeatureMap first;
  for (std::size_t v = 0; v < sample.cameras.size(); ++v) {
    std::ostringstream name;
    name << "view_" << std::setw(3) << std::setfill('0') << v << ".l2mf";
    const fs::path path = fs::path(set_dir) / name.str();
    if (!fs::exists(path)) {
      throw std::runtime_error("missing feature map: " + path.string() +
                               " (run your extractor over view_*.png first)");
    }
    l2m::FitTarget target;
    target.features = l2m::read_feature_map(path);
    const l2m::Intrinsicsd& k = sample.cameras[v].k;
    const double sx = static_cast<double>(target.features.width()) / k.width;
    const double sy = static_cast<double>(target.features.height()) / k.height;
    target.k = l2m::Intrinsicsd(k.fx * sx, k.fy * sy, k.cx * sx, k.cy * sy,
                                target.features.width(),
                                target.features.height());
    target.pose = sample.cameras[v].pose;
    if (v == 0) first = target.features;
    targets.push_back(std::move(target));
  }

  l2m::FeatureMap seed_features(sample.source.width(), sample.source.height(),
                                targets.at(0).features.channels(), 0.0f);
  l2m::GaussianInitOptions init;
  init.stride = cfg.gaussians.stride;
  init.init_opacity = cfg.gaussians.init_opacity;
  std::vector<l2m::Gaussian3D> gaussians = l2m::init_gaussians_from_cloud(
      cloud, seed_features, sample.cameras.at(0).k, init);

  l2m::FitOptions fit_opts;
  fit_opts.max_iterations = cfg.gaussians.fit_max_iterations;
  fit_opts.tolerance = cfg.gaussians.fit_tolerance;
  const l2m::FitResult fit = l2m::fit_features(gaussians, targets, fit_opts);
  l2m::apply_features(gaussians, fit);
  l2m::write_gaussians(out_file, gaussians);

  int unfitted = 0;
  for (const auto flag : fit.fitted) unfitted += flag == 0;
  const json report = {
      {"gaussians", gaussians.size()},
      {"never_visible", unfitted},
      {"views", targets.size()},
      {"residual_history", fit.residual_history}};
  write_json_file(fs::path(out_file).replace_extension(".fit.json"), report);
  std::cout << "wrote " << out_file << " (" << gaussians.size()
            << " splats, final residual "
            << fit.residual_history.back() << ")\n";
  return 0;
}

int cmd_render(const CommonOpts& common, const std::string& image_path,
               const std::string& depth_path, const std::string& gaussians_path,
               const std::string& camera_path, const std::string& out_dir,
               bool albedo) {
  l2m::GenConfig cfg = resolve_config(common);
  if (albedo) cfg.shading = l2m::Shading::kAlbedo;
  fs::create_directories(out_dir);

  if (!gaussians_path.empty()) {
    // Splat rendering: gaussians + camera sidecar -> feature/color/alpha.
    const auto gaussians = l2m::read_gaussians(gaussians_path);
    std::ifstream in(camera_path);
    if (!in) throw std::runtime_error(camera_path + ": cannot open");
    json j;
    in >> j;
    const auto& ki = j.at("intrinsics");
    const l2m::Intrinsicsd k(ki.at("fx"), ki.at("fy"), ki.at("cx"),
                             ki.at("cy"), ki.at("width"), ki.at("height"));
    const auto& q = j.at("pose").at("q");
    const auto& t = j.at("pose").at("t");
    const l2m::Posed pose(
        Eigen::Quaterniond(q.at(0), q.at(1), q.at(2), q.at(3)).normalized(),
        Eigen::Vector3d(t.at(0), t.at(1), t.at(2)));
    const l2m::FeatureRenderResult result =
        l2m::render_features(gaussians, k, pose, k.width, k.height);
    l2m::write_feature_map(fs::path(out_dir) / "features.l2mf",
                           result.features);
    l2m::write_image_srgb(fs::path(out_dir) / "color.png", result.color);
    l2m::RasterU8 alpha(result.alpha.width(), result.alpha.height(), 1, 0);
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      alpha.data()[i] = static_cast<std::uint8_t>(
          std::lround(std::clamp(result.alpha.data()[i], 0.0f, 1.0f) * 255.0f));
    }
    l2m::write_png(fs::path(out_dir) / "alpha.png", alpha);
    std::cout << "wrote splat render to " << out_dir << "\n";
    return 0;
  }

  // Mesh rendering: lift + relight, the image-2 path in isolation.
  const l2m::ImageRGB image = l2m::read_image_linear(image_path);
  const l2m::DepthMap depth = l2m::read_depth(depth_path);
  l2m::Rng rng(cfg.seed);
  l2m::ImageRGB resized;
  l2m::DepthMap resized_depth;
  l2m::resize_crop(image, depth, cfg.width, cfg.height, &resized,
                   &resized_depth);
  const double a = l2m::log_uniform(rng, cfg.depth_scale_min, cfg.depth_scale_max);
  const double b = l2m::uniform(rng, -cfg.depth_shift_frac,
                                cfg.depth_shift_frac) *
                   resized_depth.median();
  const l2m::DepthMap depth_syn = l2m::scale_shift_depth(
      resized_depth, static_cast<float>(a), static_cast<float>(b));
  const l2m::Intrinsicsd k = l2m::sample_intrinsics(
      rng, cfg.width, cfg.height, cfg.focal_min, cfg.focal_max);
  const l2m::Posed pose = l2m::sample_pose(rng, cfg.pose, depth_syn.median());
  const l2m::TriMesh mesh = l2m::triangulate_depth_grid(
      resized, depth_syn, k, cfg.discontinuity_ratio);
  if (mesh.empty()) throw std::runtime_error("render: empty mesh");

  const l2m::PointCloud cloud = l2m::lift_to_pointcloud(resized, depth_syn, k);
  const Eigen::Vector3d centroid = cloud.points.colwise().mean();
  const auto lights = l2m::sample_lights(
      rng, cfg.lights, centroid,
      Eigen::Vector3d::Constant(cfg.light_box_scale * depth_syn.median()));

  l2m::RenderOptions ropts;
  ropts.shading = cfg.shading;
  ropts.ambient = cfg.ambient;
  ropts.exposure = cfg.exposure;
  const l2m::RenderOutput render = l2m::rasterize(mesh, k, pose, lights, ropts);
  l2m::write_image_srgb(fs::path(out_dir) / "render.png", render.image);
  l2m::write_depth_pfm(fs::path(out_dir) / "render.pfm", render.depth);
  std::cout << "wrote mesh render to " << out_dir << "\n";
  return 0;
}

l2m::MatchSet sample_gt_matches(const l2m::PairSample& sample, int count,
                                l2m::Rng& rng) {
  std::vector<std::pair<int, int>> candidates;
  for (int y = 0; y < sample.warp_1to2.height(); ++y) {
    for (int x = 0; x < sample.warp_1to2.width(); ++x) {
      if (sample.warp_1to2.is_valid(x, y) &&
          sample.certainty.values.at(x, y) >= 1.0f) {
        candidates.emplace_back(x, y);
      }
    }
  }
  l2m::MatchSet matches;
  if (candidates.empty()) return matches;
  const int n = std::min<int>(count, static_cast<int>(candidates.size()));
  matches.pairs.resize(n, 4);
  for (int i = 0; i < n; ++i) {
    const auto [x, y] = candidates[static_cast<std::size_t>(
        l2m::uniform_int(rng, 0, static_cast<std::int64_t>(candidates.size()) - 1))];
    matches.pairs(i, 0) = x;
    matches.pairs(i, 1) = y;
    matches.pairs(i, 2) = sample.warp_1to2.target.at(x, y, 0);
    matches.pairs(i, 3) = sample.warp_1to2.target.at(x, y, 1);
  }
  return matches;
}

int cmd_eval(const CommonOpts& common, const std::string& pairs_dir,
             const std::string& matches_dir, int gt_warp_samples,
             double threshold_px, const std::string& out_file) {
  const l2m::GenConfig cfg = resolve_config(common);
  std::vector<fs::path> sample_dirs;
  for (const auto& entry : fs::directory_iterator(pairs_dir)) {
    if (entry.is_directory() && fs::exists(entry.path() / "meta.json")) {
      sample_dirs.push_back(entry.path());
    }
  }
  std::sort(sample_dirs.begin(), sample_dirs.end());
  if (sample_dirs.empty()) {
    throw std::runtime_error("eval: no generated samples under " + pairs_dir);
  }

  l2m::RansacOptions ropts;
  ropts.threshold_px = threshold_px;

  json per_pair = json::array();
  std::vector<double> errors;
  std::size_t index = 0;
  for (const auto& dir : sample_dirs) {
    const l2m::PairSample sample = l2m::read_pair_sample(dir);
    l2m::MatchSet matches;
    if (!matches_dir.empty()) {
      const fs::path mp = fs::path(matches_dir) / (dir.filename().string() + ".txt");
      matches = l2m::read_matches(mp);
    } else {
      l2m::Rng rng(l2m::derive_seed(cfg.seed, index));
      matches = sample_gt_matches(sample, gt_warp_samples, rng);
    }
    const l2m::Posed gt =
        l2m::relative_pose(sample.camera1.pose, sample.camera2.pose);
    json row = {{"id", dir.filename().string()},
                {"matches", matches.size()}};
    try {
      l2m::Rng rng(l2m::derive_seed(cfg.seed ^ 0x5eedULL, index));
      const l2m::RansacResult ransac = l2m::ransac_essential(
          matches, sample.camera1.k, sample.camera2.k, ropts, rng);
      l2m::MatchSet inliers;
      inliers.pairs.resize(ransac.inlier_count, 4);
      Eigen::Index r = 0;
      for (Eigen::Index i = 0; i < matches.size(); ++i) {
        if (ransac.inliers[i]) inliers.pairs.row(r++) = matches.pairs.row(i);
      }
      const l2m::RelativePoseEstimate estimate = l2m::decompose_essential(
          ransac.essential, inliers, sample.camera1.k, sample.camera2.k);
      const l2m::PoseError err = l2m::pose_error(
          estimate.rotation, estimate.translation, gt.rotation(), gt.t);
      row["rotation_deg"] = err.rotation_deg;
      row["translation_deg"] = err.translation_deg;
      row["combined_deg"] = err.combined_deg;
      row["inliers"] = ransac.inlier_count;
      errors.push_back(err.combined_deg);
    } catch (const std::exception& e) {
      row["error"] = e.what();
      errors.push_back(std::numeric_limits<double>::infinity());
    }
    per_pair.push_back(row);
    ++index;
  }

  const std::vector<double> thresholds = {5.0, 10.0, 20.0};
  const std::vector<double> auc = l2m::pose_auc(errors, thresholds);
  json auc_json;
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    std::ostringstream key;
    key << thresholds[i];
    auc_json[key.str()] = auc[i];
  }
  const json results = {{"pairs", per_pair},
                        {"auc_percent", auc_json},
                        {"ransac_threshold_px", threshold_px}};
  write_json_file(out_file, results);
  std::cout << "evaluated " << errors.size() << " pairs; AUC@5/10/20 = "
            << auc[0] << " / " << auc[1] << " / " << auc[2] << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lifts single RGB+depth views to 3D to synthesize calibrated "
               "training pairs with dense ground-truth labels"};
  app.require_subcommand(1);

  // scan
  auto* scan = app.add_subcommand("scan", "Pair images with depth files");
  std::vector<std::string> scan_roots;
  std::string scan_out = "manifest.txt";
  scan->add_option("roots", scan_roots, "Corpus root directories")->required();
  scan->add_option("--out", scan_out, "Manifest output path");

  // generate
  auto* generate = app.add_subcommand("generate", "Synthesize training pairs");
  CommonOpts gen_common;
  std::string gen_manifest, gen_out = "out";
  int gen_jobs = 1;
  bool gen_resume = false;
  add_common(generate, &gen_common);
  generate->add_option("--manifest", gen_manifest)->required();
  generate->add_option("--out", gen_out, "Output directory");
  generate->add_option("--jobs", gen_jobs, "Worker threads");
  generate->add_flag("--resume", gen_resume, "Skip existing samples");

  // multiview
  auto* multiview =
      app.add_subcommand("multiview", "Synthesize novel-view sets");
  CommonOpts mv_common;
  std::string mv_manifest, mv_out = "out";
  int mv_jobs = 1, mv_views = 0;
  bool mv_resume = false;
  add_common(multiview, &mv_common);
  multiview->add_option("--manifest", mv_manifest)->required();
  multiview->add_option("--out", mv_out, "Output directory");
  multiview->add_option("--jobs", mv_jobs, "Worker threads");
  multiview->add_option("--views", mv_views, "Views per image (overrides config)");
  multiview->add_flag("--resume", mv_resume, "Skip existing samples");

  // fit-gaussians
  auto* fit = app.add_subcommand(
      "fit-gaussians", "Distill feature maps into a splat set");
  CommonOpts fit_common;
  std::string fit_set, fit_out = "gaussians.l2mg";
  add_common(fit, &fit_common);
  fit->add_option("--set", fit_set, "Multiview sample directory")->required();
  fit->add_option("--out", fit_out, "Output .l2mg path");

  // render
  auto* render = app.add_subcommand("render", "Standalone rendering");
  CommonOpts render_common;
  std::string render_image, render_depth, render_gaussians, render_camera;
  std::string render_out = "render_out";
  bool render_albedo = false;
  add_common(render, &render_common);
  render->add_option("--image", render_image, "Source image (mesh mode)");
  render->add_option("--depth", render_depth, "Source depth (mesh mode)");
  render->add_option("--gaussians", render_gaussians, ".l2mg set (splat mode)");
  render->add_option("--camera", render_camera, "Camera JSON (splat mode)");
  render->add_option("--out", render_out, "Output directory");
  render->add_flag("--albedo", render_albedo, "Albedo shading (mesh mode)");

  // eval
  auto* eval = app.add_subcommand("eval", "Relative-pose evaluation");
  CommonOpts eval_common;
  std::string eval_pairs, eval_matches, eval_out = "results.json";
  int eval_gt_samples = 500;
  double eval_threshold = 0.5;
  add_common(eval, &eval_common);
  eval->add_option("--pairs", eval_pairs, "Generated pairs directory")
      ->required();
  eval->add_option("--matches-dir", eval_matches,
                   "Directory of <sample_id>.txt match files");
  eval->add_option("--gt-warp-samples", eval_gt_samples,
                   "Matches sampled from the GT warp when no matches given");
  eval->add_option("--threshold", eval_threshold, "RANSAC threshold, px");
  eval->add_option("--out", eval_out, "Results JSON path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (scan->parsed()) return cmd_scan(scan_roots, scan_out);
    if (generate->parsed()) {
      return cmd_generate(gen_common, gen_manifest, gen_out, gen_jobs,
                          gen_resume);
    }
    if (multiview->parsed()) {
      return cmd_multiview(mv_common, mv_manifest, mv_out, mv_jobs, mv_resume,
                           mv_views);
    }
    if (fit->parsed()) return cmd_fit_gaussians(fit_common, fit_set, fit_out);
    if (render->parsed()) {
      if (render_gaussians.empty() && (render_image.empty() || render_depth.empty())) {
        throw std::runtime_error(
            "render: need --image/--depth (mesh) or --gaussians/--camera (splats)");
      }
      return cmd_render(render_common, render_image, render_depth,
                        render_gaussians, render_camera, render_out,
                        render_albedo);
    }
    if (eval->parsed()) {
      return cmd_eval(eval_common, eval_pairs, eval_matches, eval_gt_samples,
                      eval_threshold, eval_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
