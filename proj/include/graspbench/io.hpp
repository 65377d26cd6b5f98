/**
 * @file io.hpp
 * @brief File formats: 16-bit depth PNG (0.1 mm units) with a JSON
 * intrinsics sidecar, ASCII PLY clouds and the grasp JSON record.
 */
#pragma once

#include <png.h>

#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "graspbench/error.hpp"
#include "graspbench/grasp.hpp"
#include "graspbench/mask.hpp"
#include "graspbench/perception.hpp"

namespace graspbench {

inline constexpr double kDepthUnitsPerMeter = 10000.0;

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline void write_gray16_png(const std::filesystem::path& path, int width, int height,
                             const std::vector<std::uint16_t>& pixels) {
  FilePtr fp(std::fopen(path.string().c_str(), "wb"));
  if (!fp) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::IoError, "libpng initialisation failed");
  }
  std::vector<std::uint8_t> row(static_cast<std::size_t>(width) * 2);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::IoError, "failed writing PNG '" + path.string() + "'");
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 16, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  // Fixed compression settings keep the bytes reproducible.
  png_set_compression_level(png, 6);
  png_write_info(png, info);
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) {
      const std::uint16_t q = pixels[static_cast<std::size_t>(v) * width + u];
      row[2 * u] = static_cast<std::uint8_t>(q >> 8);  // PNG samples are big-endian
      row[2 * u + 1] = static_cast<std::uint8_t>(q & 0xff);
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

inline std::vector<std::uint16_t> read_gray16_png(const std::filesystem::path& path, int& width, int& height) {
  FilePtr fp(std::fopen(path.string().c_str(), "rb"));
  if (!fp) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  png_byte header[8];
  if (std::fread(header, 1, 8, fp.get()) != 8 || png_sig_cmp(header, 0, 8) != 0) {
    throw Error(ErrorCode::IoError, "'" + path.string() + "' is not a PNG file");
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::IoError, "libpng initialisation failed");
  }
  std::vector<std::uint16_t> pixels;
  std::vector<std::uint8_t> row;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::IoError, "failed reading PNG '" + path.string() + "'");
  }
  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const auto bit_depth = png_get_bit_depth(png, info);
  const auto color = png_get_color_type(png, info);
  if (bit_depth != 16 || color != PNG_COLOR_TYPE_GRAY) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::IoError, "depth PNG must be 16-bit single channel");
  }
  width = static_cast<int>(png_get_image_width(png, info));
  height = static_cast<int>(png_get_image_height(png, info));
  pixels.resize(static_cast<std::size_t>(width) * height);
  row.resize(static_cast<std::size_t>(width) * 2);
  for (int v = 0; v < height; ++v) {
    png_read_row(png, row.data(), nullptr);
    for (int u = 0; u < width; ++u) {
      pixels[static_cast<std::size_t>(v) * width + u] =
          static_cast<std::uint16_t>((static_cast<unsigned>(row[2 * u]) << 8) | row[2 * u + 1]);
    }
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return pixels;
}

}  // namespace detail

/// Writes depth as 16-bit gray in 0.1 mm units; 0 stays 0 (invalid).
inline void write_depth_png(const std::filesystem::path& path, const DepthImage& image) {
  std::vector<std::uint16_t> px(image.depth.size());
  for (std::size_t k = 0; k < px.size(); ++k) {
    const double d = image.depth[k];
    if (!(d > 0.0)) {
      px[k] = 0;
      continue;
    }
    const auto q = std::llround(d * kDepthUnitsPerMeter);
    if (q > 65535) throw Error(ErrorCode::IoError, "depth beyond 6.5535 m cannot be encoded");
    px[k] = static_cast<std::uint16_t>(q);
  }
  detail::write_gray16_png(path, image.width, image.height, px);
}

inline DepthImage read_depth_png(const std::filesystem::path& path) {
  int w = 0, h = 0;
  const auto px = detail::read_gray16_png(path, w, h);
  DepthImage img(w, h);
  for (std::size_t k = 0; k < px.size(); ++k) img.depth[k] = static_cast<double>(px[k]) / kDepthUnitsPerMeter;
  return img;
}

/// `<stem>.intrinsics.json` next to `<stem>.png`.
inline std::filesystem::path sidecar_path(const std::filesystem::path& depth_png) {
  auto p = depth_png;
  p.replace_extension();
  return p.string() + ".intrinsics.json";
}

inline nlohmann::ordered_json camera_to_json(const CameraIntrinsics& k, const CameraPose& pose) {
  nlohmann::ordered_json j;
  j["fx"] = k.fx;
  j["fy"] = k.fy;
  j["cx"] = k.cx;
  j["cy"] = k.cy;
  j["width"] = k.width;
  j["height"] = k.height;
  j["camera_height"] = pose.height_above_table;
  j["planar_offset"] = {pose.planar_offset.x, pose.planar_offset.y};
  j["yaw"] = pose.yaw;
  return j;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path.string() + "'");
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_intrinsics(const std::filesystem::path& path, const CameraIntrinsics& k, const CameraPose& pose) {
  write_text_file(path, camera_to_json(k, pose).dump(2) + "\n");
}

inline void read_intrinsics(const std::filesystem::path& path, CameraIntrinsics& k, CameraPose& pose) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
    k.fx = j.at("fx").get<double>();
    k.fy = j.at("fy").get<double>();
    k.cx = j.at("cx").get<double>();
    k.cy = j.at("cy").get<double>();
    k.width = j.at("width").get<int>();
    k.height = j.at("height").get<int>();
    pose.height_above_table = j.at("camera_height").get<double>();
    const auto& off = j.at("planar_offset");
    pose.planar_offset = {off.at(0).get<double>(), off.at(1).get<double>()};
    pose.yaw = j.value("yaw", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::IoError, "bad intrinsics file '" + path.string() + "': " + e.what());
  }
  k.validate();
  pose.validate();
}

inline void write_ply(const std::filesystem::path& path, const PointCloud& cloud) {
  std::ostringstream ss;
  ss << "ply\nformat ascii 1.0\nelement vertex " << cloud.size()
     << "\nproperty float x\nproperty float y\nproperty float z\nend_header\n";
  ss.precision(7);
  for (const auto& p : cloud.points) ss << static_cast<float>(p.x) << ' ' << static_cast<float>(p.y) << ' ' << static_cast<float>(p.z) << '\n';
  write_text_file(path, ss.str());
}

inline nlohmann::ordered_json grasp_to_json(const GraspPose& g) {
  nlohmann::ordered_json j;
  j["x"] = g.x;
  j["y"] = g.y;
  j["z"] = g.z;
  j["theta_rad"] = g.theta;
  j["width"] = g.width;
  j["quality"] = g.quality;
  return j;
}

/// Parses {x, y, z, theta_rad, width, quality?}; theta is folded into [0, pi).
inline GraspPose grasp_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::AdapterProtocolError, "grasp record must be a JSON object");
  auto num = [&](const char* key) {
    if (!j.contains(key) || !j.at(key).is_number()) {
      throw Error(ErrorCode::AdapterProtocolError, std::string("grasp record lacks numeric '") + key + "'");
    }
    return j.at(key).get<double>();
  };
  GraspPose g;
  g.x = num("x");
  g.y = num("y");
  g.z = num("z");
  g.theta = num("theta_rad");
  g.width = num("width");
  g.quality = j.contains("quality") ? num("quality") : 0.0;
  if (std::isfinite(g.theta)) g.theta = canonical_theta(g.theta);
  return g;
}

/// Score field as 16-bit gray, valid scores stretched to [0, 65535].
inline void write_score_field_png(const std::filesystem::path& path, const MaskScoreField& field) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t k = 0; k < field.score.size(); ++k) {
    if (!field.valid[k]) continue;
    lo = std::min(lo, field.score[k]);
    hi = std::max(hi, field.score[k]);
  }
  std::vector<std::uint16_t> px(field.score.size(), 0);
  if (hi >= lo) {
    const double span = hi > lo ? hi - lo : 1.0;
    for (std::size_t k = 0; k < px.size(); ++k) {
      if (field.valid[k]) px[k] = static_cast<std::uint16_t>(std::lround((field.score[k] - lo) / span * 65535.0));
    }
  }
  // Row 0 of the image is the top (largest y) of the map.
  std::vector<std::uint16_t> flipped(px.size());
  for (int j = 0; j < field.rows; ++j) {
    std::copy_n(px.begin() + static_cast<std::ptrdiff_t>(field.index(0, j)), field.cols,
                flipped.begin() + static_cast<std::ptrdiff_t>(field.index(0, field.rows - 1 - j)));
  }
  detail::write_gray16_png(path, field.cols, field.rows, flipped);
}

}  // namespace graspbench
