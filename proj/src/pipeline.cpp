// SPDX-License-Identifier: Apache-2.0
#include "l2m/pipeline/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "l2m/io/image_io.hpp"
#include "l2m/io/container_io.hpp"
#include "l2m/lift/lift.hpp"
#include "l2m/warp/inpaint.hpp"

namespace l2m {

using nlohmann::json;

const char* to_string(RejectionReason reason) {
  switch (reason) {
    case RejectionReason::kEmptyGeometry: return "empty_geometry";
    case RejectionReason::kEmptyMesh: return "empty_mesh";
    case RejectionReason::kLowCovisibility: return "low_covisibility";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Resize / crop

namespace {

double src_coord(int out, int resized_size, int in_size, int crop_offset) {
  const double resized = out + crop_offset;
  if (resized_size == 1) return 0.0;
  return resized * static_cast<double>(in_size - 1) / (resized_size - 1);
}

}  // namespace

void resize_crop(const ImageRGB& image, const DepthMap& depth, int out_width,
                 int out_height, ImageRGB* out_image, DepthMap* out_depth) {
  if (image.width() != depth.width() || image.height() != depth.height()) {
    throw std::invalid_argument("resize_crop: image/depth mismatch");
  }
  const int in_w = image.width();
  const int in_h = image.height();
  const double scale = std::max(static_cast<double>(out_width) / in_w,
                                static_cast<double>(out_height) / in_h);
  const int resized_w =
      std::max(out_width, static_cast<int>(std::lround(in_w * scale)));
  const int resized_h =
      std::max(out_height, static_cast<int>(std::lround(in_h * scale)));
  const int off_x = (resized_w - out_width) / 2;
  const int off_y = (resized_h - out_height) / 2;

  *out_image = ImageRGB(out_width, out_height, 3, 0.0f);
  *out_depth = DepthMap(out_width, out_height);
  for (int y = 0; y < out_height; ++y) {
    const double sy = src_coord(y, resized_h, in_h, off_y);
    const int y0 = static_cast<int>(std::floor(sy));
    const int y1 = std::min(y0 + 1, in_h - 1);
    const double fy = sy - y0;
    for (int x = 0; x < out_width; ++x) {
      const double sx = src_coord(x, resized_w, in_w, off_x);
      const int x0 = static_cast<int>(std::floor(sx));
      const int x1 = std::min(x0 + 1, in_w - 1);
      const double fx = sx - x0;
      for (int c = 0; c < 3; ++c) {
        const double top = (1.0 - fx) * image.at(x0, y0, c) +
                           fx * image.at(x1, y0, c);
        const double bot = (1.0 - fx) * image.at(x0, y1, c) +
                           fx * image.at(x1, y1, c);
        out_image->at(x, y, c) =
            static_cast<float>((1.0 - fy) * top + fy * bot);
      }
      double d;
      if (sample_depth_bilinear(depth, sx, sy, &d)) {
        out_depth->set(x, y, static_cast<float>(d));
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Pair / multiview generation

namespace {

struct LiftedScene {
  ImageRGB image;
  DepthMap depth;
  Intrinsicsd k;
  PointCloud cloud;
  double scale_a = 1.0;
  double shift_b = 0.0;
  double median_depth = 0.0;
};

/// Draw order: scale a, shift b, intrinsics.
LiftedScene make_scene(const ImageRGB& source_image,
                       const DepthMap& source_depth, const GenConfig& cfg,
                       Rng& rng) {
  LiftedScene scene;
  resize_crop(source_image, source_depth, cfg.width, cfg.height, &scene.image,
              &scene.depth);
  const double median_raw = scene.depth.median();
  scene.scale_a = log_uniform(rng, cfg.depth_scale_min, cfg.depth_scale_max);
  scene.shift_b = uniform(rng, -cfg.depth_shift_frac, cfg.depth_shift_frac) *
                  median_raw;
  scene.depth = scale_shift_depth(scene.depth,
                                  static_cast<float>(scene.scale_a),
                                  static_cast<float>(scene.shift_b));
  scene.k = sample_intrinsics(rng, cfg.width, cfg.height, cfg.focal_min,
                              cfg.focal_max);
  scene.cloud = lift_to_pointcloud(scene.image, scene.depth, scene.k);
  scene.median_depth = scene.depth.median();
  return scene;
}

struct NovelView {
  ImageRGB image;
  DepthMap depth;
  RasterU8 holes;
  std::string inpaint = "none";
};

NovelView synthesize_view(const LiftedScene& scene, const Posed& pose,
                          const GenConfig& cfg) {
  NovelView view;
  const SplatResult splat =
      splat_points(scene.cloud, scene.k, pose, cfg.splat_radius);
  view.holes = hole_mask(splat, cfg.closing_radius);
  view.depth = splat.depth;
  bool any_hole = false;
  for (std::size_t i = 0; i < view.holes.size(); ++i) {
    any_hole |= view.holes.data()[i] != 0;
  }
  if (!any_hole) {
    view.image = splat.image;
    return view;
  }
  if (!cfg.inpaint_cmd.empty()) {
    try {
      view.image = external_inpaint(splat.image, view.holes, cfg.inpaint_cmd);
      view.inpaint = "external";
      return view;
    } catch (const InpaintHookError&) {
      // fall through to the built-in fill
    }
  }
  InpaintOptions opts;
  opts.max_iterations = cfg.inpaint_max_iterations;
  view.image = naive_inpaint(splat.image, view.holes, opts);
  view.inpaint = "naive";
  return view;
}

}  // namespace

PairSample generate_pair(const ImageRGB& source_image,
                         const DepthMap& source_depth, const GenConfig& cfg,
                         std::uint64_t sample_seed) {
  cfg.validate();
  Rng rng(sample_seed);

  const LiftedScene scene = make_scene(source_image, source_depth, cfg, rng);
  const Posed pose1 = sample_pose(rng, cfg.pose, scene.median_depth);
  const Posed pose2 = cfg.lock_camera2_to_source
                          ? Posed::identity()
                          : sample_pose(rng, cfg.pose, scene.median_depth);
  if (scene.cloud.empty()) {
    throw SampleRejected(RejectionReason::kEmptyGeometry);
  }
  const TriMesh mesh = triangulate_depth_grid(scene.image, scene.depth,
                                              scene.k, cfg.discontinuity_ratio);
  if (mesh.empty()) throw SampleRejected(RejectionReason::kEmptyMesh);

  const Eigen::Vector3d centroid = scene.cloud.points.colwise().mean();
  const Eigen::Vector3d half_extent =
      Eigen::Vector3d::Constant(cfg.light_box_scale * scene.median_depth);
  const std::vector<PointLight> lights =
      sample_lights(rng, cfg.lights, centroid, half_extent);

  PairSample sample;
  const NovelView view1 = synthesize_view(scene, pose1, cfg);
  sample.image1 = view1.image;
  sample.depth1 = view1.depth;
  sample.hole_mask = view1.holes;
  sample.provenance.inpaint = view1.inpaint;

  RenderOptions ropts;
  ropts.shading = cfg.shading;
  ropts.ambient = cfg.ambient;
  ropts.exposure = cfg.exposure;
  const RenderOutput render2 = rasterize(mesh, scene.k, pose2, lights, ropts);
  sample.image2 = render2.image;
  sample.depth2 = render2.depth;

  const Posed pose12 = relative_pose(pose1, pose2);
  auto [warp, certainty] =
      compute_gt_warp(sample.depth1, scene.k, scene.k, pose12, sample.depth2,
                      cfg.occlusion_tolerance);

  const std::size_t denom = sample.depth1.valid_count();
  std::size_t covisible = 0;
  for (std::size_t i = 0; i < certainty.values.size(); ++i) {
    covisible += certainty.values.data()[i] >= 1.0f;
  }
  if (denom == 0 ||
      static_cast<double>(covisible) / static_cast<double>(denom) <
          cfg.min_covisibility) {
    throw SampleRejected(RejectionReason::kLowCovisibility);
  }

  sample.warp_1to2 = std::move(warp);
  sample.certainty = std::move(certainty);
  sample.camera1 = {scene.k, pose1};
  sample.camera2 = {scene.k, pose2};
  sample.lights = lights;
  sample.provenance.seed = sample_seed;
  sample.provenance.scale_a = scene.scale_a;
  sample.provenance.shift_b = scene.shift_b;
  return sample;
}

MultiViewSample generate_multiview(const ImageRGB& source_image,
                                   const DepthMap& source_depth,
                                   const GenConfig& cfg,
                                   std::uint64_t sample_seed) {
  cfg.validate();
  Rng rng(sample_seed);

  const LiftedScene scene = make_scene(source_image, source_depth, cfg, rng);
  if (scene.cloud.empty()) {
    throw SampleRejected(RejectionReason::kEmptyGeometry);
  }

  MultiViewSample sample;
  sample.source = scene.image;
  sample.depth = scene.depth;
  sample.provenance.seed = sample_seed;
  sample.provenance.scale_a = scene.scale_a;
  sample.provenance.shift_b = scene.shift_b;

  for (int v = 0; v < cfg.views_per_image; ++v) {
    const bool identity = cfg.identity_first_view && v == 0;
    const Posed pose = identity
                           ? Posed::identity()
                           : sample_pose(rng, cfg.pose, scene.median_depth);
    NovelView view = synthesize_view(scene, pose, cfg);
    if (view.inpaint != "none") sample.provenance.inpaint = view.inpaint;
    sample.views.push_back(std::move(view.image));
    sample.view_depths.push_back(std::move(view.depth));
    sample.cameras.push_back({scene.k, pose});
  }
  return sample;
}

// ---------------------------------------------------------------------------
// Corpus scan and manifest

namespace {

bool is_png(const std::filesystem::path& p) {
  const std::string ext = p.extension().string();
  return ext == ".png" || ext == ".PNG";
}

std::optional<std::filesystem::path> find_depth_for(
    const std::filesystem::path& image, const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  const std::string stem = image.stem().string();
  const fs::path dir = image.parent_path();
  for (const auto& candidate :
       {dir / (stem + ".pfm"), dir / (stem + "_depth.png")}) {
    if (candidate != image && fs::exists(candidate)) return candidate;
  }
  // Parallel tree: <root>/images/a/b.png -> <root>/depth/a/b.{pfm,png}
  const fs::path rel = fs::relative(image, root);
  auto it = rel.begin();
  if (it != rel.end() && *it == "images") {
    fs::path tail;
    for (++it; it != rel.end(); ++it) tail /= *it;
    for (const char* ext : {".pfm", ".png"}) {
      fs::path candidate = root / "depth" / tail;
      candidate.replace_extension(ext);
      if (fs::exists(candidate)) return candidate;
    }
  }
  return std::nullopt;
}

}  // namespace

ScanResult scan_corpus(const std::vector<std::filesystem::path>& roots) {
  namespace fs = std::filesystem;
  ScanResult result;
  std::vector<fs::path> images;
  for (const auto& root : roots) {
    if (!fs::exists(root) || !fs::is_directory(root)) {
      throw std::runtime_error("scan_corpus: unreadable root " + root.string());
    }
    std::vector<fs::path> local;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
      if (entry.is_regular_file() && is_png(entry.path()) &&
          entry.path().parent_path().filename() != "depth") {
        local.push_back(entry.path());
      }
    }
    std::sort(local.begin(), local.end());
    for (const auto& image : local) {
      if (auto depth = find_depth_for(image, root)) {
        result.paired.push_back({image, *depth});
      } else {
        result.skipped.push_back(image);
      }
    }
  }
  return result;
}

void write_manifest(const std::filesystem::path& path,
                    const ScanResult& scan) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for write");
  for (const auto& entry : scan.paired) {
    out << entry.image.string() << "\t" << entry.depth.string() << "\n";
  }
  if (!scan.skipped.empty()) {
    out << "# skipped (no depth found):\n";
    for (const auto& image : scan.skipped) out << "# " << image.string() << "\n";
  }
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path.string() + ": cannot open");
  std::vector<ManifestEntry> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw std::runtime_error(path.string() + ": malformed manifest line");
    }
    entries.push_back({line.substr(0, tab), line.substr(tab + 1)});
  }
  return entries;
}

// ---------------------------------------------------------------------------
// Sidecar JSON

namespace {

json intrinsics_to_json(const Intrinsicsd& k) {
  return {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx},
          {"cy", k.cy}, {"width", k.width}, {"height", k.height}};
}

Intrinsicsd intrinsics_from_json(const json& j) {
  return Intrinsicsd(j.at("fx"), j.at("fy"), j.at("cx"), j.at("cy"),
                     j.at("width"), j.at("height"));
}

json pose_to_json(const Posed& p) {
  return {{"q", {p.q.w(), p.q.x(), p.q.y(), p.q.z()}},
          {"t", {p.t.x(), p.t.y(), p.t.z()}}};
}

Posed pose_from_json(const json& j) {
  const auto& q = j.at("q");
  const auto& t = j.at("t");
  return Posed(
      Eigen::Quaterniond(q.at(0), q.at(1), q.at(2), q.at(3)).normalized(),
      Eigen::Vector3d(t.at(0), t.at(1), t.at(2)));
}

json camera_to_json(const CameraRecord& cam) {
  return {{"intrinsics", intrinsics_to_json(cam.k)},
          {"pose", pose_to_json(cam.pose)}};
}

CameraRecord camera_from_json(const json& j) {
  return {intrinsics_from_json(j.at("intrinsics")),
          pose_from_json(j.at("pose"))};
}

json lights_to_json(const std::vector<PointLight>& lights) {
  json arr = json::array();
  for (const PointLight& light : lights) {
    arr.push_back(
        {{"position",
          {light.position.x(), light.position.y(), light.position.z()}},
         {"intensity", light.intensity},
         {"color", {light.color.x(), light.color.y(), light.color.z()}}});
  }
  return arr;
}

std::vector<PointLight> lights_from_json(const json& arr) {
  std::vector<PointLight> lights;
  for (const auto& j : arr) {
    PointLight light;
    for (int i = 0; i < 3; ++i) {
      light.position[i] = j.at("position").at(i);
      light.color[i] = j.at("color").at(i).get<float>();
    }
    light.intensity = j.at("intensity");
    lights.push_back(light);
  }
  return lights;
}

json provenance_to_json(const PairSample::Provenance& p) {
  return {{"source", p.source}, {"seed", p.seed}, {"scale", p.scale_a},
          {"shift", p.shift_b}, {"inpaint", p.inpaint}};
}

PairSample::Provenance provenance_from_json(const json& j) {
  PairSample::Provenance p;
  p.source = j.at("source");
  p.seed = j.at("seed");
  p.scale_a = j.at("scale");
  p.shift_b = j.at("shift");
  p.inpaint = j.at("inpaint");
  return p;
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for write");
  out << std::setw(2) << j << "\n";
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path.string() + ": cannot open");
  json j;
  in >> j;
  return j;
}

RasterU8 certainty_to_mask(const CertaintyMap& c) {
  RasterU8 mask(c.width(), c.height(), 1, 0);
  for (std::size_t i = 0; i < c.values.size(); ++i) {
    mask.data()[i] = c.values.data()[i] >= 0.5f ? 1 : 0;
  }
  return mask;
}

}  // namespace

void write_pair_sample(const std::filesystem::path& dir,
                       const PairSample& sample) {
  std::filesystem::create_directories(dir);
  write_image_srgb(dir / "image1.png", sample.image1);
  write_image_srgb(dir / "image2.png", sample.image2);
  write_depth_pfm(dir / "depth1.pfm", sample.depth1);
  write_depth_pfm(dir / "depth2.pfm", sample.depth2);
  write_warp(dir / "warp.l2mw", sample.warp_1to2);
  write_mask(dir / "certainty.png", certainty_to_mask(sample.certainty));
  write_mask(dir / "hole_mask.png", sample.hole_mask);
  const json meta = {{"schema_version", 1},
                     {"camera1", camera_to_json(sample.camera1)},
                     {"camera2", camera_to_json(sample.camera2)},
                     {"lights", lights_to_json(sample.lights)},
                     {"provenance", provenance_to_json(sample.provenance)}};
  write_json_file(dir / "meta.json", meta);
}

PairSample read_pair_sample(const std::filesystem::path& dir) {
  PairSample sample;
  sample.image1 = read_image_linear(dir / "image1.png");
  sample.image2 = read_image_linear(dir / "image2.png");
  sample.depth1 = read_depth(dir / "depth1.pfm");
  sample.depth2 = read_depth(dir / "depth2.pfm");
  sample.warp_1to2 = read_warp(dir / "warp.l2mw");
  const RasterU8 cert = read_mask(dir / "certainty.png");
  sample.certainty = CertaintyMap(cert.width(), cert.height());
  for (std::size_t i = 0; i < cert.size(); ++i) {
    sample.certainty.values.data()[i] = cert.data()[i] ? 1.0f : 0.0f;
  }
  sample.hole_mask = read_mask(dir / "hole_mask.png");
  const json meta = read_json_file(dir / "meta.json");
  sample.camera1 = camera_from_json(meta.at("camera1"));
  sample.camera2 = camera_from_json(meta.at("camera2"));
  sample.lights = lights_from_json(meta.at("lights"));
  sample.provenance = provenance_from_json(meta.at("provenance"));
  return sample;
}

void write_multiview_sample(const std::filesystem::path& dir,
                            const MultiViewSample& sample) {
  std::filesystem::create_directories(dir);
  write_image_srgb(dir / "source.png", sample.source);
  write_depth_pfm(dir / "depth.pfm", sample.depth);
  json cameras = json::array();
  for (std::size_t v = 0; v < sample.views.size(); ++v) {
    std::ostringstream name;
    name << "view_" << std::setw(3) << std::setfill('0') << v;
    write_image_srgb(dir / (name.str() + ".png"), sample.views[v]);
    write_depth_pfm(dir / (name.str() + ".pfm"), sample.view_depths[v]);
    cameras.push_back(camera_to_json(sample.cameras[v]));
  }
  const json meta = {{"schema_version", 1},
                     {"cameras", cameras},
                     {"provenance", provenance_to_json(sample.provenance)}};
  write_json_file(dir / "meta.json", meta);
}

MultiViewSample read_multiview_sample(const std::filesystem::path& dir,
                                      bool load_views) {
  MultiViewSample sample;
  sample.source = read_image_linear(dir / "source.png");
  sample.depth = read_depth(dir / "depth.pfm");
  const json meta = read_json_file(dir / "meta.json");
  std::size_t v = 0;
  for (const auto& cam : meta.at("cameras")) {
    sample.cameras.push_back(camera_from_json(cam));
    if (load_views) {
      std::ostringstream name;
      name << "view_" << std::setw(3) << std::setfill('0') << v;
      sample.views.push_back(read_image_linear(dir / (name.str() + ".png")));
      sample.view_depths.push_back(read_depth(dir / (name.str() + ".pfm")));
    }
    ++v;
  }
  sample.provenance = provenance_from_json(meta.at("provenance"));
  return sample;
}

// ---------------------------------------------------------------------------
// Batch driver

std::string sample_id(std::size_t index, const std::filesystem::path& image) {
  std::ostringstream id;
  id << std::setw(6) << std::setfill('0') << index << "_";
  for (char c : image.stem().string()) {
    id << (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_'
               ? c
               : '_');
  }
  return id.str();
}

GenerationSummary run_generation(const std::vector<ManifestEntry>& manifest,
                                 const GenConfig& cfg,
                                 const std::filesystem::path& out_dir,
                                 const RunOptions& run) {
  namespace fs = std::filesystem;
  cfg.validate();
  if (run.jobs < 1) throw std::invalid_argument("run_generation: jobs >= 1");
  fs::create_directories(out_dir);  // fatal if impossible

  struct Record {
    std::string id;
    std::string status;  // accepted | skipped | rejected:<r> | failed:<what>
  };
  std::vector<Record> records(manifest.size());
  std::atomic<std::size_t> next{0};
  const auto start = std::chrono::steady_clock::now();

  auto worker = [&]() {
    for (std::size_t idx = next.fetch_add(1); idx < manifest.size();
         idx = next.fetch_add(1)) {
      const ManifestEntry& entry = manifest[idx];
      const std::string id = sample_id(idx, entry.image);
      records[idx].id = id;
      const fs::path final_dir = out_dir / id;
      if (run.resume && fs::exists(final_dir / "meta.json")) {
        records[idx].status = "skipped";
        continue;
      }
      try {
        const ImageRGB image = read_image_linear(entry.image);
        DepthMap depth = read_depth(entry.depth);
        PairSample sample =
            generate_pair(image, depth, cfg, derive_seed(cfg.seed, idx));
        sample.provenance.source = entry.image.string();
        const fs::path tmp_dir = out_dir / (".tmp-" + id);
        fs::remove_all(tmp_dir);
        write_pair_sample(tmp_dir, sample);
        fs::remove_all(final_dir);
        fs::rename(tmp_dir, final_dir);
        records[idx].status = "accepted";
      } catch (const SampleRejected& r) {
        records[idx].status = std::string("rejected:") + r.what();
      } catch (const std::exception& e) {
        records[idx].status = std::string("failed:") + e.what();
      }
    }
  };

  std::vector<std::thread> pool;
  const int jobs = std::min<int>(run.jobs, std::max<std::size_t>(manifest.size(), 1));
  for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  GenerationSummary summary;
  json sample_list = json::array();
  for (const Record& rec : records) {
    sample_list.push_back({{"id", rec.id}, {"status", rec.status}});
    if (rec.status == "accepted") {
      ++summary.accepted;
    } else if (rec.status == "skipped") {
      ++summary.skipped_existing;
    } else if (rec.status.rfind("rejected:", 0) == 0) {
      ++summary.rejected[rec.status.substr(9)];
    } else {
      ++summary.failed[rec.status.substr(7)];
    }
  }
  summary.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();

  // wall_time_s varies run to run, so it goes next to, not into, the
  // deterministic sample payload.
  const json summary_json = {{"schema_version", 1},
                             {"accepted", summary.accepted},
                             {"skipped_existing", summary.skipped_existing},
                             {"rejected", summary.rejected},
                             {"failed", summary.failed},
                             {"samples", sample_list},
                             {"wall_time_s", summary.wall_time_s}};
  write_json_file(out_dir / "summary.json", summary_json);
  return summary;
}

}  // namespace l2m
