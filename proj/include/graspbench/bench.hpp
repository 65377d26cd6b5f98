/**
 * @file bench.hpp
 * @brief Benchmark protocol: objects x poses x algorithms, each trial
 * scored 0-3 (lift, yaw, shake) by the grasp oracle.
 *
 * Every (object, pose) scene is rendered once and handed to each algorithm.
 * Trials run on a worker pool but are stored by (algorithm, object, pose)
 * index, so the report never depends on scheduling.
 */
#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <unistd.h>

#include "graspbench/adapter.hpp"
#include "graspbench/error.hpp"
#include "graspbench/grasp.hpp"
#include "graspbench/io.hpp"
#include "graspbench/mask.hpp"
#include "graspbench/perception.hpp"
#include "graspbench/rng.hpp"
#include "graspbench/scene.hpp"
#include "graspbench/topsurface.hpp"

namespace graspbench {

struct BenchPose {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;
  friend bool operator==(const BenchPose&, const BenchPose&) = default;
};

/// Centre, +0.15 m x and +0.15 m y, each at yaw 0 and 45 degrees.
inline std::vector<BenchPose> default_poses() {
  const double q = std::numbers::pi / 4;
  return {{0.0, 0.0, 0.0}, {0.15, 0.0, 0.0}, {0.0, 0.15, 0.0}, {0.0, 0.0, q}, {0.15, 0.0, q}, {0.0, 0.15, q}};
}

inline constexpr std::size_t kStandardPoseCount = 6;

/// What a planner sees for one trial. Custom planners may also peek at the
/// ground truth (scene, object, placement), which is how test oracles work.
struct TrialContext {
  const SceneSpec& scene;
  const ObjectModel& object;
  const ScenePlacement& placement;
  const DepthImage& depth;
  const PointCloud& cloud;
  const CameraIntrinsics& intrinsics;
  const CameraPose& camera;
  const GripperModel& gripper;
  const std::filesystem::path& depth_png;   // empty unless an external algorithm needs files
  const std::filesystem::path& intrinsics_json;
};

using PlannerFn = std::function<GraspPose(const TrialContext&)>;

enum class AlgorithmKind { TopSurface, Mask, External, Custom };

struct AlgorithmSpec {
  std::string name;
  AlgorithmKind kind = AlgorithmKind::TopSurface;
  std::string command;     // External
  double timeout = 30.0;   // External, seconds
  bool reentrant = true;   // External: false serializes calls to this adapter
  PlannerFn custom;        // Custom

  static AlgorithmSpec make(std::string name, AlgorithmKind kind) {
    AlgorithmSpec a;
    a.name = std::move(name);
    a.kind = kind;
    return a;
  }
  static AlgorithmSpec topsurface(std::string name = "topsurface") { return make(std::move(name), AlgorithmKind::TopSurface); }
  static AlgorithmSpec mask(std::string name = "mask") { return make(std::move(name), AlgorithmKind::Mask); }
  static AlgorithmSpec external(std::string name, std::string command, double timeout = 30.0, bool reentrant = true) {
    auto a = make(std::move(name), AlgorithmKind::External);
    a.command = std::move(command);
    a.timeout = timeout;
    a.reentrant = reentrant;
    return a;
  }
  static AlgorithmSpec function(std::string name, PlannerFn fn) {
    auto a = make(std::move(name), AlgorithmKind::Custom);
    a.custom = std::move(fn);
    return a;
  }
};

inline std::string_view to_string(AlgorithmKind k) {
  switch (k) {
    case AlgorithmKind::TopSurface: return "topsurface";
    case AlgorithmKind::Mask: return "mask";
    case AlgorithmKind::External: return "external";
    case AlgorithmKind::Custom: return "custom";
  }
  return "unknown";
}

struct BenchmarkConfig {
  std::vector<ObjectModel> library = default_object_library();
  std::vector<std::string> objects;  // empty: the whole library, in library order
  std::vector<BenchPose> poses = default_poses();
  std::map<std::string, std::vector<BenchPose>> object_poses;  // per-object replacement pose lists
  std::vector<AlgorithmSpec> algorithms;
  GripperModel gripper;
  NoiseModel noise;  // the seed field is ignored; each scene derives its own
  PhysicsParams physics;
  CameraIntrinsics intrinsics;
  CameraPose camera;
  TopSurfacePipelineParams topsurface;
  MaskPipelineParams mask;
  double workspace_size = 0.6;
  std::uint64_t seed = 0;
  int workers = 0;  // 0: hardware concurrency

  std::vector<std::string> object_ids() const {
    if (!objects.empty()) return objects;
    std::vector<std::string> ids;
    for (const auto& o : library) ids.push_back(o.id);
    return ids;
  }

  const std::vector<BenchPose>& poses_for(const std::string& id) const {
    const auto it = object_poses.find(id);
    return it != object_poses.end() ? it->second : poses;
  }

  void validate() const {
    if (algorithms.empty()) throw Error(ErrorCode::ConfigError, "at least one algorithm is required");
    std::set<std::string> names;
    for (const auto& a : algorithms) {
      if (a.name.empty()) throw Error(ErrorCode::ConfigError, "algorithm name must not be empty");
      if (!names.insert(a.name).second) throw Error(ErrorCode::ConfigError, "duplicate algorithm name '" + a.name + "'");
      if (a.kind == AlgorithmKind::External && a.command.empty()) {
        throw Error(ErrorCode::ConfigError, "algorithm '" + a.name + "' has an empty command");
      }
      if (a.kind == AlgorithmKind::External && !(a.timeout > 0.0)) {
        throw Error(ErrorCode::ConfigError, "algorithm '" + a.name + "' timeout must be positive");
      }
      if (a.kind == AlgorithmKind::Custom && !a.custom) {
        throw Error(ErrorCode::ConfigError, "algorithm '" + a.name + "' has no planner function");
      }
    }
    SceneSpec probe{library, {}, workspace_size};
    std::set<std::string> seen;
    for (const auto& id : object_ids()) {
      (void)probe.object(id);
      if (!seen.insert(id).second) throw Error(ErrorCode::ConfigError, "object '" + id + "' listed twice");
      if (poses_for(id).empty()) throw Error(ErrorCode::ConfigError, "object '" + id + "' has no poses");
    }
    for (const auto& [id, list] : object_poses) {
      if (!seen.count(id)) throw Error(ErrorCode::ConfigError, "poses given for object '" + id + "' which is not benchmarked");
    }
    for (const auto& o : library) o.validate();
    gripper.validate();
    noise.validate();
    intrinsics.validate();
    camera.validate();
    if (workers < 0) throw Error(ErrorCode::ConfigError, "workers must be >= 0");
  }
};

struct TrialRecord {
  std::string algorithm;
  std::string object_id;
  int pose_index = 0;
  BenchPose pose;
  std::optional<GraspPose> grasp;
  PickOutcome outcome;
  int score = 0;
  double planner_time = 0.0;   // seconds; kept out of the trial log
  std::string failure_reason = "none";
};

inline int score_trial(const PickOutcome& o) {
  return static_cast<int>(o.lifted) + static_cast<int>(o.yaw_pass) + static_cast<int>(o.shake_pass);
}

struct ObjectScore {
  std::string object_id;
  std::vector<int> pose_scores;
  int score = 0;
  int max_score = 0;
};

struct AlgorithmScore {
  std::string algorithm;
  std::vector<ObjectScore> objects;
  int total = 0;
  int max_total = 0;
};

struct BenchmarkReport {
  std::vector<AlgorithmScore> algorithms;
  std::vector<TrialRecord> trials;
  std::vector<std::string> notes;

  const AlgorithmScore& algorithm(std::string_view name) const {
    for (const auto& a : algorithms) {
      if (a.algorithm == name) return a;
    }
    throw Error(ErrorCode::ConfigError, "no algorithm '" + std::string(name) + "' in report");
  }
  int object_score(std::string_view alg, std::string_view object) const {
    for (const auto& o : algorithm(alg).objects) {
      if (o.object_id == object) return o.score;
    }
    throw Error(ErrorCode::ConfigError, "no object '" + std::string(object) + "' in report");
  }
};

/**
 * Sums trials into per-object and per-algorithm scores. Algorithms and
 * objects keep their order of first appearance. Throws InconsistentTrials
 * on a duplicate (object, pose, algorithm) key, a score that disagrees with
 * the outcome, or a pose index gap.
 */
inline BenchmarkReport aggregate(std::vector<TrialRecord> trials) {
  BenchmarkReport report;
  std::set<std::tuple<std::string, std::string, int>> keys;
  std::map<std::pair<std::string, std::string>, std::map<int, int>> scores;
  std::vector<std::string> alg_order;
  std::map<std::string, std::vector<std::string>> obj_order;
  for (const auto& t : trials) {
    if (!keys.emplace(t.algorithm, t.object_id, t.pose_index).second) {
      throw Error(ErrorCode::InconsistentTrials, "duplicate trial (" + t.object_id + ", pose " +
                                                     std::to_string(t.pose_index) + ", " + t.algorithm + ")");
    }
    if (t.pose_index < 0) throw Error(ErrorCode::InconsistentTrials, "negative pose index");
    if (t.score != score_trial(t.outcome)) {
      throw Error(ErrorCode::InconsistentTrials, "trial score disagrees with its outcome");
    }
    if ((t.outcome.yaw_pass || t.outcome.shake_pass) && !t.outcome.lifted) {
      throw Error(ErrorCode::InconsistentTrials, "stability pass recorded without a lift");
    }
    if (std::find(alg_order.begin(), alg_order.end(), t.algorithm) == alg_order.end()) alg_order.push_back(t.algorithm);
    auto& objs = obj_order[t.algorithm];
    if (std::find(objs.begin(), objs.end(), t.object_id) == objs.end()) objs.push_back(t.object_id);
    scores[{t.algorithm, t.object_id}][t.pose_index] = t.score;
  }
  std::set<std::string> noted;
  for (const auto& a : alg_order) {
    AlgorithmScore as;
    as.algorithm = a;
    for (const auto& o : obj_order[a]) {
      const auto& per_pose = scores[{a, o}];
      ObjectScore os;
      os.object_id = o;
      const int n = per_pose.rbegin()->first + 1;
      if (static_cast<std::size_t>(n) != per_pose.size()) {
        throw Error(ErrorCode::InconsistentTrials, "missing pose indices for (" + o + ", " + a + ")");
      }
      for (const auto& [pose, s] : per_pose) os.pose_scores.push_back(s);
      for (int s : os.pose_scores) os.score += s;
      os.max_score = 3 * n;
      if (static_cast<std::size_t>(n) != kStandardPoseCount && noted.insert(o).second) {
        report.notes.push_back("object '" + o + "' uses " + std::to_string(n) + " poses (max score " +
                               std::to_string(os.max_score) + " instead of 18)");
      }
      as.total += os.score;
      as.max_total += os.max_score;
      as.objects.push_back(std::move(os));
    }
    report.algorithms.push_back(std::move(as));
  }
  report.trials = std::move(trials);
  return report;
}

/// Seed for one scene; depends only on the base seed, the object id and the
/// pose index, so adding objects or reordering them leaves other scenes alone.
inline std::uint64_t scene_seed(std::uint64_t base, std::string_view object_id, int pose_index) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : object_id) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return rng::derive_seed(rng::derive_seed(base, h), static_cast<std::uint64_t>(pose_index));
}

inline std::string failure_reason_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::NoFeasibleGrasp: return "no_feasible_grasp";
    case ErrorCode::AdapterTimeout: return "adapter_timeout";
    case ErrorCode::AdapterProtocolError: return "adapter_protocol_error";
    case ErrorCode::AdapterInvalidGrasp: return "adapter_invalid_grasp";
    default: return "planner_error";
  }
}

namespace detail {

struct SceneJob {
  std::string object_id;
  int pose_index = 0;
  BenchPose pose;
};

class ScratchDir {
 public:
  ScratchDir() {
    static std::atomic<unsigned> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("graspbench-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline GraspPose plan_once(const AlgorithmSpec& alg, const TrialContext& ctx, const BenchmarkConfig& config,
                           std::mutex* serial) {
  switch (alg.kind) {
    case AlgorithmKind::TopSurface: return plan_top_surface(ctx.cloud, ctx.gripper, config.topsurface).front().grasp;
    case AlgorithmKind::Mask: return plan_mask(ctx.cloud, ctx.gripper, config.mask).front();
    case AlgorithmKind::Custom: return alg.custom(ctx);
    case AlgorithmKind::External: {
      const AdapterRequest req{ctx.depth_png, ctx.intrinsics_json, ctx.gripper};
      if (serial) {
        std::lock_guard lock(*serial);
        return run_external_algorithm(req, alg.command, alg.timeout);
      }
      return run_external_algorithm(req, alg.command, alg.timeout);
    }
  }
  throw Error(ErrorCode::ConfigError, "unknown algorithm kind");
}

inline TrialRecord run_trial(const AlgorithmSpec& alg, const TrialContext& ctx, const PlacedScene& placed,
                             const BenchmarkConfig& config, std::mutex* serial) {
  TrialRecord t;
  t.algorithm = alg.name;
  t.object_id = ctx.object.id;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    GraspPose g = plan_once(alg, ctx, config, serial);
    if (grasp_violation(g, config.gripper).empty()) {
      t.grasp = g;
    } else {
      t.failure_reason = alg.kind == AlgorithmKind::External ? "adapter_invalid_grasp" : "invalid_grasp";
    }
  } catch (const Error& e) {
    t.failure_reason = failure_reason_for(e.code());
  } catch (const std::exception&) {
    t.failure_reason = "planner_error";
  }
  t.planner_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (t.grasp) {
    t.outcome = evaluate_grasp(placed, *t.grasp, config.gripper, config.physics);
    t.failure_reason = std::string(to_string(t.outcome.failure_reason));
  }
  t.score = score_trial(t.outcome);
  return t;
}

}  // namespace detail

/// Scene spec for one (object, pose) trial.
inline SceneSpec make_scene(const BenchmarkConfig& config, const std::string& object_id, const BenchPose& pose) {
  return SceneSpec{config.library, {{object_id, pose.x, pose.y, pose.yaw}}, config.workspace_size};
}

/**
 * Runs the whole protocol and returns the aggregated report. Planner
 * failures (no grasp, adapter errors, exceptions) score 0 with a failure
 * reason; scene errors such as an out-of-bounds placement abort the run
 * before any planner is called.
 */
inline BenchmarkReport run_benchmark(const BenchmarkConfig& config) {
  config.validate();
  std::vector<detail::SceneJob> jobs;
  for (const auto& id : config.object_ids()) {
    const auto& poses = config.poses_for(id);
    for (std::size_t p = 0; p < poses.size(); ++p) jobs.push_back({id, static_cast<int>(p), poses[p]});
  }
  for (const auto& j : jobs) {
    try {
      (void)PlacedScene(make_scene(config, j.object_id, j.pose));
    } catch (const Error& e) {
      throw Error(e.code(), "object '" + j.object_id + "' pose " + std::to_string(j.pose_index) + ": " + e.what());
    }
  }

  const std::size_t n_alg = config.algorithms.size();
  const bool needs_files = std::any_of(config.algorithms.begin(), config.algorithms.end(),
                                       [](const auto& a) { return a.kind == AlgorithmKind::External; });
  std::optional<detail::ScratchDir> scratch;
  if (needs_files) scratch.emplace();
  std::vector<std::unique_ptr<std::mutex>> serial(n_alg);
  for (std::size_t a = 0; a < n_alg; ++a) {
    if (config.algorithms[a].kind == AlgorithmKind::External && !config.algorithms[a].reentrant) {
      serial[a] = std::make_unique<std::mutex>();
    }
  }

  std::vector<TrialRecord> slots(n_alg * jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t s = next++; s < jobs.size(); s = next++) {
      try {
        const auto& job = jobs[s];
        const SceneSpec scene = make_scene(config, job.object_id, job.pose);
        const PlacedScene placed(scene);
        NoiseModel noise = config.noise;
        noise.seed = scene_seed(config.seed, job.object_id, job.pose_index);
        const DepthImage depth = render_depth(scene, config.intrinsics, config.camera, noise);
        const PointCloud cloud = deproject(depth, config.intrinsics, config.camera);
        std::filesystem::path png, sidecar;
        if (scratch) {
          png = scratch->path() / (job.object_id + "_pose" + std::to_string(job.pose_index) + ".png");
          sidecar = sidecar_path(png);
          write_depth_png(png, depth);
          write_intrinsics(sidecar, config.intrinsics, config.camera);
        }
        const TrialContext ctx{scene, scene.object(job.object_id), scene.placements.front(), depth, cloud,
                               config.intrinsics, config.camera, config.gripper, png, sidecar};
        for (std::size_t a = 0; a < n_alg; ++a) {
          auto t = detail::run_trial(config.algorithms[a], ctx, placed, config, serial[a].get());
          t.pose_index = job.pose_index;
          t.pose = job.pose;
          slots[a * jobs.size() + s] = std::move(t);
        }
      } catch (...) {
        errors[s] = std::current_exception();
      }
    }
  };
  int n_workers = config.workers > 0 ? config.workers : static_cast<int>(std::thread::hardware_concurrency());
  n_workers = std::clamp(n_workers, 1, static_cast<int>(std::max<std::size_t>(jobs.size(), 1)));
  std::vector<std::thread> pool;
  for (int w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return aggregate(std::move(slots));
}

}  // namespace graspbench
