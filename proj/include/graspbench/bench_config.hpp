/**
 * @file bench_config.hpp
 * @brief TOML benchmark configuration.
 *
 * @code
 * seed = 42
 * output_dir = "results"        # relative to the config file
 * workers = 4                   # 0 or absent: available parallelism
 * objects = ["cracker_box", "small_cube"]
 * library = "objects.toml"      # optional
 *
 * [[algorithm]]
 * name = "topsurface"
 * builtin = "topsurface"        # or "mask"
 *
 * [[algorithm]]
 * name = "my_planner"
 * command = "./adapter.py"      # leading relative path resolved against the config file
 * timeout = 30
 * reentrant = false
 *
 * [[pose]]                      # replaces the six default poses
 * x = 0.0
 * y = 0.0
 * yaw_deg = 0
 *
 * [[object_pose.small_cube]]    # per-object pose list
 * x = 0.1
 * y = 0.0
 *
 * [gripper] / [noise] / [physics] / [camera] / [topsurface] / [mask]
 * @endcode
 */
#pragma once

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>

#include "graspbench/bench.hpp"
#include "graspbench/scene_io.hpp"
#include "graspbench/toml_util.hpp"

namespace graspbench {

struct BenchFile {
  BenchmarkConfig config;
  std::optional<std::filesystem::path> output_dir;
};

inline BenchPose parse_bench_pose(const toml::table& t, std::string_view path) {
  cfg::reject_unknown(t, path, {"x", "y", "yaw_deg"});
  return {cfg::get_double(t, path, "x", 0.0), cfg::get_double(t, path, "y", 0.0),
          cfg::get_double(t, path, "yaw_deg", 0.0) * kDegree};
}

inline std::vector<BenchPose> parse_pose_list(const toml::table& t, std::string_view path, std::string_view key) {
  std::vector<BenchPose> out;
  const auto list = cfg::table_array(t, path, key);
  for (std::size_t i = 0; i < list.size(); ++i) {
    out.push_back(parse_bench_pose(*list[i], cfg::index_path(cfg::join(path, key), i)));
  }
  return out;
}

/// Makes a leading `./x` or `dir/x` program path absolute against @p base_dir.
inline std::string resolve_command(const std::string& command, const std::filesystem::path& base_dir) {
  if (base_dir.empty()) return command;
  const auto start = command.find_first_not_of(' ');
  if (start == std::string::npos) return command;
  const auto end = command.find(' ', start);
  const std::string program = command.substr(start, end == std::string::npos ? std::string::npos : end - start);
  if (program.find('/') == std::string::npos || program.front() == '/') return command;
  const auto candidate = base_dir / program;
  if (!std::filesystem::exists(candidate)) return command;
  const std::string rest = end == std::string::npos ? "" : command.substr(end);
  return "'" + std::filesystem::absolute(candidate).lexically_normal().string() + "'" + rest;
}

inline AlgorithmSpec parse_algorithm(const toml::table& t, std::string_view path, const std::filesystem::path& base_dir) {
  cfg::reject_unknown(t, path, {"name", "builtin", "command", "timeout", "reentrant"});
  const auto builtin = cfg::opt_string(t, path, "builtin");
  const auto command = cfg::opt_string(t, path, "command");
  if (builtin.has_value() == command.has_value()) cfg::fail(path, "give exactly one of builtin or command");
  if (builtin) {
    if (t.contains("timeout") || t.contains("reentrant")) {
      cfg::fail(path, "timeout and reentrant apply to command algorithms only");
    }
    const std::string name = cfg::opt_string(t, path, "name").value_or(*builtin);
    if (*builtin == "topsurface") return AlgorithmSpec::topsurface(name);
    if (*builtin == "mask") return AlgorithmSpec::mask(name);
    cfg::fail(cfg::join(path, "builtin"), "expected \"topsurface\" or \"mask\", got \"" + *builtin + "\"");
  }
  const std::string name = cfg::req_string(t, path, "name");
  const double timeout = cfg::get_double(t, path, "timeout", 30.0);
  if (!(timeout > 0.0)) cfg::fail(cfg::join(path, "timeout"), "must be positive");
  if (command->find_first_not_of(' ') == std::string::npos) cfg::fail(cfg::join(path, "command"), "must not be empty");
  return AlgorithmSpec::external(name, resolve_command(*command, base_dir), timeout,
                                 cfg::opt_bool(t, path, "reentrant").value_or(true));
}

inline TopSurfacePipelineParams parse_topsurface_params(const toml::table& t, std::string_view path) {
  cfg::reject_unknown(t, path, {"table_epsilon", "top_band", "resolution", "spacing", "alpha", "force_weight",
                                "moment_weight", "approach_margin"});
  TopSurfacePipelineParams p;
  p.table_epsilon = cfg::get_double(t, path, "table_epsilon", p.table_epsilon);
  p.top_band = cfg::get_double(t, path, "top_band", p.top_band);
  p.resolution = cfg::get_double(t, path, "resolution", p.resolution);
  p.search.spacing = cfg::get_double(t, path, "spacing", p.search.spacing);
  if (auto a = cfg::opt_double(t, path, "alpha")) p.search.alpha = *a;
  p.search.weights.force = cfg::get_double(t, path, "force_weight", p.search.weights.force);
  p.search.weights.moment = cfg::get_double(t, path, "moment_weight", p.search.weights.moment);
  p.search.approach_margin = cfg::get_double(t, path, "approach_margin", p.search.approach_margin);
  for (const char* k : {"table_epsilon", "top_band", "resolution", "spacing"}) {
    if (!(cfg::get_double(t, path, k, 1.0) > 0.0)) cfg::fail(cfg::join(path, k), "must be positive");
  }
  if (p.search.approach_margin < 0.0) cfg::fail(cfg::join(path, "approach_margin"), "must be >= 0");
  return p;
}

inline MaskPipelineParams parse_mask_params(const toml::table& t, std::string_view path) {
  cfg::reject_unknown(t, path, {"resolution", "min_height", "rotation_step_deg", "opening_count", "stride",
                                "symmetry_weight", "centering_weight"});
  MaskPipelineParams p;
  p.resolution = cfg::get_double(t, path, "resolution", p.resolution);
  p.min_height = cfg::get_double(t, path, "min_height", p.min_height);
  if (auto s = cfg::opt_double(t, path, "rotation_step_deg")) p.search.rotation_step = *s * kDegree;
  if (auto n = cfg::opt_int(t, path, "opening_count")) p.search.opening_count = static_cast<int>(*n);
  if (auto n = cfg::opt_int(t, path, "stride")) p.search.stride = static_cast<int>(*n);
  p.search.symmetry_weight = cfg::get_double(t, path, "symmetry_weight", p.search.symmetry_weight);
  p.search.centering_weight = cfg::get_double(t, path, "centering_weight", p.search.centering_weight);
  if (!(p.resolution > 0.0)) cfg::fail(cfg::join(path, "resolution"), "must be positive");
  if (!(p.search.rotation_step > 0.0)) cfg::fail(cfg::join(path, "rotation_step_deg"), "must be positive");
  if (p.search.opening_count < 1) cfg::fail(cfg::join(path, "opening_count"), "must be at least 1");
  if (p.search.stride < 1) cfg::fail(cfg::join(path, "stride"), "must be at least 1");
  return p;
}

/// Seed from GRASPBENCH_SEED when set; a malformed value is a config error.
inline std::optional<std::uint64_t> seed_from_env() {
  const char* s = std::getenv("GRASPBENCH_SEED");
  if (!s || !*s) return std::nullopt;
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(s, &end, 10);
  if (errno != 0 || *end != '\0' || *s == '-') {
    throw Error(ErrorCode::ConfigError, "GRASPBENCH_SEED: expected a non-negative integer, got '" + std::string(s) + "'");
  }
  return v;
}

inline BenchFile parse_bench_config(const toml::table& root, const std::filesystem::path& base_dir = {}) {
  cfg::reject_unknown(root, "", {"seed", "output_dir", "workers", "objects", "library", "workspace_size", "algorithm",
                                 "pose", "object_pose", "gripper", "noise", "physics", "camera", "topsurface", "mask"});
  BenchFile f;
  auto& c = f.config;
  if (auto s = cfg::opt_int(root, "", "seed")) {
    if (*s < 0) cfg::fail("seed", "must be >= 0");
    c.seed = static_cast<std::uint64_t>(*s);
  }
  if (auto o = cfg::opt_string(root, "", "output_dir")) f.output_dir = base_dir / *o;
  if (auto w = cfg::opt_int(root, "", "workers")) {
    if (*w < 0) cfg::fail("workers", "must be >= 0");
    c.workers = static_cast<int>(*w);
  }
  if (auto lib = cfg::opt_string(root, "", "library")) c.library = load_object_library(base_dir / *lib);
  c.workspace_size = cfg::get_double(root, "", "workspace_size", c.workspace_size);
  if (!(c.workspace_size > 0.0)) cfg::fail("workspace_size", "must be positive");

  if (auto ids = cfg::opt_string_list(root, "", "objects")) {
    SceneSpec probe{c.library, {}, c.workspace_size};
    for (std::size_t i = 0; i < ids->size(); ++i) {
      const auto& id = (*ids)[i];
      try {
        (void)probe.object(id);
      } catch (const Error&) {
        cfg::fail(cfg::index_path("objects", i), "unknown object id '" + id + "'");
      }
      for (std::size_t k = 0; k < i; ++k) {
        if ((*ids)[k] == id) cfg::fail(cfg::index_path("objects", i), "object '" + id + "' listed twice");
      }
    }
    if (ids->empty()) cfg::fail("objects", "must not be empty");
    c.objects = *ids;
  }

  const auto algs = cfg::table_array(root, "", "algorithm");
  if (algs.empty()) cfg::fail("algorithm", "at least one [[algorithm]] is required");
  for (std::size_t i = 0; i < algs.size(); ++i) {
    const std::string p = cfg::index_path("algorithm", i);
    auto a = parse_algorithm(*algs[i], p, base_dir);
    for (const auto& other : c.algorithms) {
      if (other.name == a.name) cfg::fail(cfg::join(p, "name"), "duplicate algorithm name '" + a.name + "'");
    }
    c.algorithms.push_back(std::move(a));
  }

  if (root.contains("pose")) {
    c.poses = parse_pose_list(root, "", "pose");
    if (c.poses.empty()) cfg::fail("pose", "must not be empty");
  }
  if (const auto* op = cfg::opt_table(root, "", "object_pose")) {
    const auto ids = c.object_ids();
    for (const auto& [key, node] : *op) {
      const std::string id(key.str());
      const std::string p = cfg::join("object_pose", id);
      if (std::find(ids.begin(), ids.end(), id) == ids.end()) cfg::fail(p, "object '" + id + "' is not benchmarked");
      auto list = parse_pose_list(*op, "object_pose", id);
      if (list.empty()) cfg::fail(p, "must not be empty");
      c.object_poses[id] = std::move(list);
    }
  }

  if (const auto* t = cfg::opt_table(root, "", "gripper")) c.gripper = parse_gripper(*t, "gripper");
  if (const auto* t = cfg::opt_table(root, "", "noise")) c.noise = parse_noise(*t, "noise");
  if (const auto* t = cfg::opt_table(root, "", "physics")) c.physics = parse_physics(*t, "physics");
  if (const auto* t = cfg::opt_table(root, "", "camera")) parse_camera(*t, "camera", c.intrinsics, c.camera);
  if (const auto* t = cfg::opt_table(root, "", "topsurface")) c.topsurface = parse_topsurface_params(*t, "topsurface");
  if (const auto* t = cfg::opt_table(root, "", "mask")) c.mask = parse_mask_params(*t, "mask");

  if (auto s = seed_from_env()) c.seed = *s;
  c.validate();
  return f;
}

inline BenchFile load_bench_config(const std::filesystem::path& file) {
  return parse_bench_config(cfg::parse_file(file), file.parent_path());
}

}  // namespace graspbench
