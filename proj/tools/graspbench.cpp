// graspbench command-line front end.
//
// Exit codes: 0 success, 1 input/config error, 2 no feasible grasp, 64 usage error.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"

#include "graspbench/graspbench.hpp"

namespace fs = std::filesystem;
using namespace graspbench;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNoGrasp = 2;
constexpr int kExitUsage = 64;

struct SceneOpts {
  std::string scene_file;
  std::string output = "depth.png";
  std::string ply;
  std::optional<std::uint64_t> seed;
  std::optional<double> sigma;
};

struct GripperFlags {
  std::optional<double> max_opening, min_opening, finger_width, finger_thickness, engagement_depth, fingertip_clearance;

  void add(CLI::App* app) {
    app->add_option("--max-opening", max_opening, "Jaw max opening (m)");
    app->add_option("--min-opening", min_opening, "Jaw min opening (m)");
    app->add_option("--finger-width", finger_width, "Finger width along the jaw (m)");
    app->add_option("--finger-thickness", finger_thickness, "Finger thickness across the jaw (m)");
    app->add_option("--engagement-depth", engagement_depth, "Finger engagement below the top (m)");
    app->add_option("--fingertip-clearance", fingertip_clearance, "Fingertip clearance above support (m)");
  }
  void apply(GripperModel& g) const {
    if (max_opening) g.max_opening = *max_opening;
    if (min_opening) g.min_opening = *min_opening;
    if (finger_width) g.finger_width = *finger_width;
    if (finger_thickness) g.finger_thickness = *finger_thickness;
    if (engagement_depth) g.engagement_depth = *engagement_depth;
    if (fingertip_clearance) g.fingertip_clearance = *fingertip_clearance;
    g.validate();
  }
};

struct SynthOpts {
  std::string depth;
  std::string intrinsics;
  std::string config;
  std::string algorithm = "topsurface";
  std::string output;
  std::string score_field;
  GripperFlags gripper;
};

struct BenchOpts {
  std::string config;
  std::string output;
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
};

struct ReportOpts {
  std::string trials;
  std::string output;
};

int cmd_scene(const SceneOpts& o) {
  auto scene = load_scene_file(o.scene_file);
  if (o.seed) scene.noise.seed = *o.seed;
  if (o.sigma) scene.noise.gaussian_sigma = *o.sigma;
  const auto depth = render_depth(scene.spec, scene.intrinsics, scene.camera, scene.noise);
  const fs::path out(o.output);
  write_depth_png(out, depth);
  write_intrinsics(sidecar_path(out), scene.intrinsics, scene.camera);
  if (!o.ply.empty()) write_ply(o.ply, deproject(depth, scene.intrinsics, scene.camera));
  std::cerr << "wrote " << out.string() << " and " << sidecar_path(out).string() << "\n";
  return kExitOk;
}

int cmd_synth(const SynthOpts& o) {
  GripperModel gripper;
  TopSurfacePipelineParams ts;
  MaskPipelineParams mp;
  if (!o.config.empty()) {
    const auto root = cfg::parse_file(o.config);
    cfg::reject_unknown(root, "", {"gripper", "topsurface", "mask"});
    if (const auto* t = cfg::opt_table(root, "", "gripper")) gripper = parse_gripper(*t, "gripper");
    if (const auto* t = cfg::opt_table(root, "", "topsurface")) ts = parse_topsurface_params(*t, "topsurface");
    if (const auto* t = cfg::opt_table(root, "", "mask")) mp = parse_mask_params(*t, "mask");
  }
  o.gripper.apply(gripper);

  CameraIntrinsics k;
  CameraPose pose;
  const fs::path depth_path(o.depth);
  read_intrinsics(o.intrinsics.empty() ? sidecar_path(depth_path) : fs::path(o.intrinsics), k, pose);
  const auto depth = read_depth_png(depth_path);
  if (depth.width != k.width || depth.height != k.height) {
    throw Error(ErrorCode::DimensionMismatch, "depth image is " + std::to_string(depth.width) + "x" +
                                                  std::to_string(depth.height) + " but intrinsics say " +
                                                  std::to_string(k.width) + "x" + std::to_string(k.height));
  }
  const auto cloud = deproject(depth, k, pose);

  GraspPose g;
  if (o.algorithm == "topsurface") {
    g = plan_top_surface(cloud, gripper, ts).front().grasp;
  } else {
    if (!o.score_field.empty()) {
      HeightMap map;
      try {
        map = object_heightmap(cloud, mp.resolution, mp.min_height);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::EmptyScene) throw;
      }
      if (!map.empty()) write_score_field_png(o.score_field, compute_score_field(map, gripper, mp.search));
    }
    g = plan_mask(cloud, gripper, mp).front();
  }
  const std::string line = grasp_to_json(g).dump() + "\n";
  if (o.output.empty()) {
    std::cout << line;
  } else {
    write_text_file(o.output, line);
  }
  return kExitOk;
}

int cmd_bench(const BenchOpts& o) {
  const fs::path config_path(o.config);
  auto file = load_bench_config(config_path);
  auto& config = file.config;
  if (o.seed) config.seed = *o.seed;
  if (o.workers) config.workers = *o.workers;
  config.validate();
  const fs::path out = !o.output.empty() ? fs::path(o.output) : file.output_dir.value_or(fs::path("results"));

  const auto started = std::chrono::system_clock::now();
  const auto t0 = std::chrono::steady_clock::now();
  const auto report = run_benchmark(config);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const RunTiming timing{started, std::chrono::system_clock::now(), wall};
  write_report(out, report, meta_json(report, config_to_json(config), timing));
  std::cout << totals_table(report);
  std::cout << report.trials.size() << " trials written to " << out.string() << "\n";
  return kExitOk;
}

int cmd_report(const ReportOpts& o) {
  const auto report = aggregate(parse_trials_jsonl(read_text_file(o.trials)));
  const fs::path out = o.output.empty() ? fs::path(o.trials).parent_path() : fs::path(o.output);
  std::error_code ec;
  fs::create_directories(out.empty() ? fs::path(".") : out, ec);
  write_file_atomic(out / "summary.csv", summary_csv(report));
  write_file_atomic(out / "chart.svg", chart_svg(report));
  std::cout << totals_table(report);
  return kExitOk;
}

int exit_code_for(const Error& e) {
  return e.code() == ErrorCode::NoFeasibleGrasp ? kExitNoGrasp : kExitInput;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Planar grasp benchmarking on simulated depth scenes"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  SceneOpts scene;
  auto* sc = app.add_subcommand("scene", "Render a scene file to a 16-bit depth PNG plus intrinsics sidecar");
  sc->add_option("scene", scene.scene_file, "Scene TOML file")->required()->check(CLI::ExistingFile);
  sc->add_option("-o,--output", scene.output, "Depth PNG path")->capture_default_str();
  sc->add_option("--ply", scene.ply, "Also write the deprojected cloud as ASCII PLY");
  sc->add_option("--seed", scene.seed, "Noise seed (overrides the scene file)");
  sc->add_option("--sigma", scene.sigma, "Depth noise sigma in metres (overrides the scene file)")
      ->check(CLI::NonNegativeNumber);

  SynthOpts synth;
  auto* sy = app.add_subcommand("synth", "Plan one grasp from a depth PNG");
  sy->add_option("depth", synth.depth, "Depth PNG")->required();
  sy->add_option("--intrinsics", synth.intrinsics, "Intrinsics JSON (default: the PNG's sidecar)");
  sy->add_option("-c,--config", synth.config, "TOML with [gripper], [topsurface] and [mask] tables");
  sy->add_option("-a,--algorithm", synth.algorithm, "topsurface or mask")
      ->check(CLI::IsMember({"topsurface", "mask"}))
      ->capture_default_str();
  sy->add_option("-o,--output", synth.output, "Grasp JSON path (default: stdout)");
  sy->add_option("--score-field", synth.score_field, "Write the mask score field as a PNG (mask only)");
  synth.gripper.add(sy);

  BenchOpts bench;
  auto* be = app.add_subcommand("bench", "Run a benchmark config and write trials.jsonl, summary.csv, chart.svg, meta.json");
  be->add_option("config", bench.config, "Benchmark TOML file")->required();
  be->add_option("-o,--output", bench.output, "Output directory (overrides output_dir)");
  be->add_option("-w,--workers", bench.workers, "Parallel scenes (default: available parallelism)")
      ->check(CLI::NonNegativeNumber);
  be->add_option("--seed", bench.seed, "Base seed (overrides GRASPBENCH_SEED and the config)");

  ReportOpts rep;
  auto* re = app.add_subcommand("report", "Re-aggregate a trials.jsonl into summary.csv and chart.svg");
  re->add_option("trials", rep.trials, "trials.jsonl")->required();
  re->add_option("-o,--output", rep.output, "Output directory (default: next to the trials file)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  if (sy->parsed() && !synth.score_field.empty() && synth.algorithm != "mask") {
    std::cerr << "--score-field requires --algorithm mask\n";
    return kExitUsage;
  }

  try {
    if (sc->parsed()) return cmd_scene(scene);
    if (sy->parsed()) return cmd_synth(synth);
    if (be->parsed()) return cmd_bench(bench);
    if (re->parsed()) return cmd_report(rep);
  } catch (const Error& e) {
    std::cerr << "graspbench: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "graspbench: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitUsage;
}
