// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "l2m/pipeline/config.hpp"
#include "l2m/warp/gt_warp.hpp"
#include "l2m/warp/splat.hpp"

namespace l2m {

struct CameraRecord {
  Intrinsicsd k;
  Posed pose;
};

/// One generated training pair with its dense labels.
struct PairSample {
  ImageRGB image1;      // novel view, holes inpainted
  ImageRGB image2;      // relit mesh render
  DepthMap depth1;      // novel-view depth (holes invalid)
  DepthMap depth2;      // render depth
  WarpField warp_1to2;
  CertaintyMap certainty;
  RasterU8 hole_mask;   // 1 = disocclusion in view 1
  CameraRecord camera1;
  CameraRecord camera2;
  std::vector<PointLight> lights;

  struct Provenance {
    std::string source;
    std::uint64_t seed = 0;
    double scale_a = 1.0;
    double shift_b = 0.0;
    std::string inpaint = "none";  // none | naive | external
  } provenance;
};

enum class RejectionReason {
  kEmptyGeometry,
  kEmptyMesh,
  kLowCovisibility,
};

const char* to_string(RejectionReason reason);

/// Raised when a sample is degenerate rather than erroneous; batch drivers
/// record the reason and move on.
struct SampleRejected : std::runtime_error {
  RejectionReason reason;
  explicit SampleRejected(RejectionReason r)
      : std::runtime_error(to_string(r)), reason(r) {}
};

/// Figure-style end-to-end synthesis of one pair; deterministic in
/// (source bytes, cfg, seed). Throws SampleRejected on degenerate geometry.
PairSample generate_pair(const ImageRGB& source_image,
                         const DepthMap& source_depth, const GenConfig& cfg,
                         std::uint64_t sample_seed);

struct MultiViewSample {
  ImageRGB source;      // resized source at target resolution
  DepthMap depth;       // scaled/shifted depth the scene was lifted from
  std::vector<ImageRGB> views;
  std::vector<DepthMap> view_depths;
  std::vector<CameraRecord> cameras;  // one per view
  PairSample::Provenance provenance;
};

/// N novel views of one lifted scene through the splat+inpaint path, for
/// downstream feature extraction and distillation.
MultiViewSample generate_multiview(const ImageRGB& source_image,
                                   const DepthMap& source_depth,
                                   const GenConfig& cfg,
                                   std::uint64_t sample_seed);

/// Shorter-side resize + center crop, bilinear in linear RGB; depth samples
/// become invalid when any contributing tap is invalid.
void resize_crop(const ImageRGB& image, const DepthMap& depth, int out_width,
                 int out_height, ImageRGB* out_image, DepthMap* out_depth);

struct ManifestEntry {
  std::filesystem::path image;
  std::filesystem::path depth;
};

struct ScanResult {
  std::vector<ManifestEntry> paired;
  std::vector<std::filesystem::path> skipped;  // images without depth
};

/// Pairs images (*.png) with depth by stem: sibling "<stem>.pfm" or
/// "<stem>_depth.png", or the same relative path under a parallel "depth"
/// directory. Deterministic lexicographic order.
ScanResult scan_corpus(const std::vector<std::filesystem::path>& roots);

void write_manifest(const std::filesystem::path& path, const ScanResult& scan);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

struct GenerationSummary {
  int accepted = 0;
  int skipped_existing = 0;
  std::map<std::string, int> rejected;  // reason -> count
  std::map<std::string, int> failed;    // error class -> count
  double wall_time_s = 0.0;
};

struct RunOptions {
  int jobs = 1;
  bool resume = false;
};

/// Processes every manifest entry with per-sample seed
/// derive_seed(cfg.seed, index); writes each accepted sample atomically to
/// out_dir/<id>/ and a summary.json at the end. Individual failures never
/// abort the batch.
GenerationSummary run_generation(const std::vector<ManifestEntry>& manifest,
                                 const GenConfig& cfg,
                                 const std::filesystem::path& out_dir,
                                 const RunOptions& run);

/// Sample id for manifest index + source path ("000017_<stem>").
std::string sample_id(std::size_t index, const std::filesystem::path& image);

void write_pair_sample(const std::filesystem::path& dir,
                       const PairSample& sample);
PairSample read_pair_sample(const std::filesystem::path& dir);

void write_multiview_sample(const std::filesystem::path& dir,
                            const MultiViewSample& sample);
MultiViewSample read_multiview_sample(const std::filesystem::path& dir,
                                      bool load_views = true);

}  // namespace l2m
