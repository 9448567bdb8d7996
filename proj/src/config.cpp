// SPDX-License-Identifier: Apache-2.0
#include "l2m/pipeline/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace l2m {

namespace {

using nlohmann::json;

[[noreturn]] void bad_config(const std::string& what) {
  throw std::invalid_argument("config: " + what);
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

/// One TOML scalar or array of scalars.
json parse_toml_value(const std::string& raw) {
  const std::string v = trim(raw);
  if (v.empty()) bad_config("empty value");
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"') bad_config("unterminated string: " + v);
    return v.substr(1, v.size() - 2);
  }
  if (v == "true") return true;
  if (v == "false") return false;
  if (v.front() == '[') {
    if (v.back() != ']') bad_config("unterminated array: " + v);
    json arr = json::array();
    std::string inner = v.substr(1, v.size() - 2);
    std::istringstream ss(inner);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (!item.empty()) arr.push_back(parse_toml_value(item));
    }
    return arr;
  }
  try {
    std::size_t used = 0;
    if (v.find_first_of(".eE") == std::string::npos) {
      const long long i = std::stoll(v, &used);
      if (used == v.size()) return i;
    }
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  bad_config("cannot parse value: " + v);
}

/// Flat TOML subset: [section] headers, key = value, '#' comments.
json parse_toml(std::istream& in) {
  json root = json::object();
  json* section = &root;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    // strip comments outside strings
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') in_string = !in_string;
      if (line[i] == '#' && !in_string) {
        line.erase(i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') bad_config("bad section at line " + std::to_string(line_no));
      const std::string name = trim(line.substr(1, line.size() - 2));
      section = &root[name];
      if (section->is_null()) *section = json::object();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      bad_config("expected key = value at line " + std::to_string(line_no));
    }
    const std::string key = trim(line.substr(0, eq));
    (*section)[key] = parse_toml_value(line.substr(eq + 1));
  }
  return root;
}

void expect_range(const json& v, const char* key, double* lo, double* hi) {
  if (!v.is_array() || v.size() != 2) {
    bad_config(std::string(key) + " must be a [low, high] pair");
  }
  *lo = v[0].get<double>();
  *hi = v[1].get<double>();
}

void apply_lights(GenConfig& cfg, const json& j) {
  for (const auto& [key, value] : j.items()) {
    if (key == "count") {
      double lo, hi;
      expect_range(value, "lights.count", &lo, &hi);
      cfg.lights.count_min = static_cast<int>(lo);
      cfg.lights.count_max = static_cast<int>(hi);
    } else if (key == "intensity") {
      expect_range(value, "lights.intensity", &cfg.lights.intensity_min,
                   &cfg.lights.intensity_max);
    } else if (key == "color") {
      expect_range(value, "lights.color", &cfg.lights.color_min,
                   &cfg.lights.color_max);
    } else if (key == "box_scale") {
      cfg.light_box_scale = value.get<double>();
    } else {
      bad_config("unknown key lights." + key);
    }
  }
}

void apply_gaussians(GenConfig& cfg, const json& j) {
  for (const auto& [key, value] : j.items()) {
    if (key == "stride") {
      cfg.gaussians.stride = value.get<int>();
    } else if (key == "init_opacity") {
      cfg.gaussians.init_opacity = value.get<double>();
    } else if (key == "feature_dim") {
      cfg.gaussians.feature_dim = value.get<int>();
    } else if (key == "fit_max_iterations") {
      cfg.gaussians.fit_max_iterations = value.get<int>();
    } else if (key == "fit_tolerance") {
      cfg.gaussians.fit_tolerance = value.get<double>();
    } else {
      bad_config("unknown key gaussians." + key);
    }
  }
}

void apply_json(GenConfig& cfg, const json& j) {
  for (const auto& [key, value] : j.items()) {
    if (key == "resolution") {
      if (value.is_array()) {
        if (value.size() != 2) bad_config("resolution must be int or [w, h]");
        cfg.width = value[0].get<int>();
        cfg.height = value[1].get<int>();
      } else {
        cfg.width = cfg.height = value.get<int>();
      }
    } else if (key == "focal_range") {
      expect_range(value, "focal_range", &cfg.focal_min, &cfg.focal_max);
    } else if (key == "views_per_image") {
      cfg.views_per_image = value.get<int>();
    } else if (key == "seed") {
      cfg.seed = value.get<std::uint64_t>();
    } else if (key == "max_rotation_deg") {
      cfg.pose.max_rotation_deg = value.get<double>();
    } else if (key == "max_translation_frac") {
      cfg.pose.max_translation_frac = value.get<double>();
    } else if (key == "depth_scale_range") {
      expect_range(value, "depth_scale_range", &cfg.depth_scale_min,
                   &cfg.depth_scale_max);
    } else if (key == "depth_shift_frac") {
      cfg.depth_shift_frac = value.get<double>();
    } else if (key == "discontinuity_ratio") {
      cfg.discontinuity_ratio = value.get<double>();
    } else if (key == "occlusion_tolerance") {
      cfg.occlusion_tolerance = value.get<double>();
    } else if (key == "splat_radius") {
      cfg.splat_radius = value.get<int>();
    } else if (key == "closing_radius") {
      cfg.closing_radius = value.get<int>();
    } else if (key == "min_covisibility") {
      cfg.min_covisibility = value.get<double>();
    } else if (key == "shading") {
      const std::string s = value.get<std::string>();
      if (s == "lit") {
        cfg.shading = Shading::kLit;
      } else if (s == "albedo") {
        cfg.shading = Shading::kAlbedo;
      } else {
        bad_config("shading must be \"lit\" or \"albedo\"");
      }
    } else if (key == "ambient") {
      cfg.ambient = value.get<double>();
    } else if (key == "exposure") {
      cfg.exposure = value.get<double>();
    } else if (key == "light_box_scale") {
      cfg.light_box_scale = value.get<double>();
    } else if (key == "lock_camera2_to_source") {
      cfg.lock_camera2_to_source = value.get<bool>();
    } else if (key == "identity_first_view") {
      cfg.identity_first_view = value.get<bool>();
    } else if (key == "inpaint_cmd") {
      cfg.inpaint_cmd = value.get<std::string>();
    } else if (key == "inpaint_max_iterations") {
      cfg.inpaint_max_iterations = value.get<int>();
    } else if (key == "lights") {
      apply_lights(cfg, value);
    } else if (key == "gaussians") {
      apply_gaussians(cfg, value);
    } else {
      bad_config("unknown key " + key);
    }
  }
}

}  // namespace

void GenConfig::validate() const {
  if (width < 32 || height < 32) bad_config("resolution must be >= 32");
  if (!(focal_min > 0.0) || focal_max < focal_min) {
    bad_config("invalid focal_range");
  }
  if (views_per_image < 1) bad_config("views_per_image must be >= 1");
  if (pose.max_rotation_deg < 0.0 || pose.max_translation_frac < 0.0) {
    bad_config("pose ranges must be non-negative");
  }
  if (!(depth_scale_min > 0.0) || depth_scale_max < depth_scale_min) {
    bad_config("invalid depth_scale_range");
  }
  if (depth_shift_frac < 0.0) bad_config("depth_shift_frac must be >= 0");
  if (!(discontinuity_ratio > 0.0)) {
    bad_config("discontinuity_ratio must be > 0");
  }
  if (occlusion_tolerance < 0.0) {
    bad_config("occlusion_tolerance must be >= 0");
  }
  if (splat_radius < 0 || closing_radius < 0) {
    bad_config("radii must be >= 0");
  }
  if (min_covisibility < 0.0 || min_covisibility > 1.0) {
    bad_config("min_covisibility must be in [0, 1]");
  }
  if (!(exposure > 0.0)) bad_config("exposure must be > 0");
  if (ambient < 0.0) bad_config("ambient must be >= 0");
  if (lights.count_min < 1 || lights.count_max < lights.count_min ||
      !(lights.intensity_min > 0.0) ||
      lights.intensity_max < lights.intensity_min ||
      lights.color_min < 0.0 || lights.color_max > 1.0 ||
      lights.color_max < lights.color_min) {
    bad_config("invalid light ranges");
  }
  if (gaussians.stride < 1) bad_config("gaussians.stride must be >= 1");
  if (gaussians.init_opacity < 0.0 || gaussians.init_opacity > 1.0) {
    bad_config("gaussians.init_opacity must be in [0, 1]");
  }
  if (gaussians.feature_dim < 1) bad_config("gaussians.feature_dim must be >= 1");
}

GenConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) bad_config("cannot open " + path.string());
  GenConfig cfg;
  if (path.extension() == ".json") {
    json j;
    try {
      in >> j;
    } catch (const json::parse_error& e) {
      bad_config(path.string() + ": " + e.what());
    }
    apply_json(cfg, j);
  } else {
    apply_json(cfg, parse_toml(in));
  }
  cfg.validate();
  return cfg;
}

void apply_config_override(GenConfig& cfg, const std::string& key,
                           const std::string& value) {
  json j = json::object();
  const auto dot = key.find('.');
  if (dot == std::string::npos) {
    j[key] = parse_toml_value(value);
  } else {
    j[key.substr(0, dot)][key.substr(dot + 1)] = parse_toml_value(value);
  }
  apply_json(cfg, j);
}

}  // namespace l2m
