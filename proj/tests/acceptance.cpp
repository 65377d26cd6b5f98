// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "graspbench/graspbench.hpp"
#include "oracles.hpp"
#include "stub_planners.hpp"

using namespace graspbench;
namespace fs = std::filesystem;

namespace {

const std::string kStubs = STUB_DIR;
constexpr double kDeg = std::numbers::pi / 180;

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double axis_error(double a, double b) {
  const double d = std::fmod(std::abs(a - b), std::numbers::pi);
  return std::min(d, std::numbers::pi - d);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

BenchmarkConfig default_benchmark() {
  BenchmarkConfig c;
  c.algorithms = {AlgorithmSpec::topsurface(), AlgorithmSpec::mask()};
  c.noise.gaussian_sigma = 0.002;
  c.seed = 1;
  return c;
}

Verdict protocol_arithmetic() {
  BenchmarkConfig c;
  c.algorithms = {stubs::oracle_stub(), stubs::null_stub()};
  c.seed = 1;
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = run_benchmark(c);
  const double wall = seconds_since(t0);
  bool ok = r.algorithm("oracle").objects.size() == 10;
  for (const auto& o : r.algorithm("oracle").objects) ok = ok && o.score == 18;
  for (const auto& o : r.algorithm("null").objects) ok = ok && o.score == 0;
  const int total = r.algorithm("oracle").total, null_total = r.algorithm("null").total;
  ok = ok && total == 180 && null_total == 0 && wall < 10.0;
  return {ok, "oracle " + std::to_string(total) + "/180, null " + std::to_string(null_total) + ", " +
                  fmt("%.2f s", wall)};
}

Verdict symmetry() {
  const ObjectModel box{"box", {{rect_footprint(0.05, 0.20), 0.06}}, 0.2, 0.5};
  const SceneSpec scene{{box}, {{"box", 0.0, 0.0, 0.0}}, 0.6};
  const CameraIntrinsics k;
  const CameraPose pose;
  const auto cloud = deproject(render_depth(scene, k, pose), k, pose);
  GripperModel g;
  const auto ts = plan_top_surface(cloud, g).front().grasp;
  const double off = std::hypot(ts.x, ts.y), ang = axis_error(ts.theta, 0.0), dw = std::abs(ts.width - 0.05);
  const bool ts_ok = off <= 0.002 && ang <= 3 * kDeg && dw <= 0.003;

  const MaskPipelineParams mp;
  const auto mk = plan_mask(cloud, g, mp).front();
  const double cell = mp.resolution;
  const bool mk_ok = std::abs(mk.x - ts.x) <= cell + 1e-12 && std::abs(mk.y - ts.y) <= cell + 1e-12 &&
                     axis_error(mk.theta, ts.theta) <= mp.search.rotation_step + 1e-12;
  return {ts_ok && mk_ok, fmt("topsurface offset %.4f m, axis %.2f deg, width err %.4f m; ", off, ang / kDeg, dw) +
                              fmt("mask at (%.4f, %.4f) theta %.1f deg", mk.x, mk.y, mk.theta / kDeg)};
}

Verdict oracle_equivalence() {
  std::mt19937_64 rng(2024);
  GripperModel g;
  MaskParams p;
  p.opening_count = 3;
  int mask_ok = 0, mask_n = 0;
  for (int t = 0; t < 20; ++t) {
    const auto m = oracle::random_block_map(rng, 60, 60, 0.003);
    const auto want = oracle::brute_force_mask(m, g, p.rotation_step, p.opening_count, p.symmetry_weight,
                                               p.centering_weight);
    ++mask_n;
    if (!want.found) {
      try {
        synthesize_mask(m, g, p);
      } catch (const Error& e) {
        mask_ok += e.code() == ErrorCode::NoFeasibleGrasp;
      }
      continue;
    }
    const auto best = synthesize_mask(m, g, p).front();
    mask_ok += m.col_of(best.x) == want.i && m.row_of(best.y) == want.j && best.theta == want.rotation &&
               best.width == want.opening;
  }

  std::uniform_real_distribution<double> u(0, 1);
  HeightMap flat(0.002, {-0.3, -0.3}, 301, 301);
  std::fill(flat.valid.begin(), flat.valid.end(), std::uint8_t{1});
  int ts_ok = 0, ts_n = 0;
  double worst = 0;
  for (int t = 0; t < 20; ++t) {
    const int n = 5 + static_cast<int>(u(rng) * 8);
    std::vector<Point2> v;
    for (int k = 0; k < n; ++k) {
      const double a = 2 * std::numbers::pi * (k + 0.8 * u(rng)) / n, r = 0.015 + 0.02 * u(rng);
      v.push_back({r * std::cos(a), r * std::sin(a)});
    }
    const Polygon poly(v);
    std::vector<Point2> pts;
    for (double x = -0.04; x <= 0.04; x += 0.0015)
      for (double y = -0.04; y <= 0.04; y += 0.0015)
        if (poly.contains({x, y})) pts.push_back({x, y});
    const auto best = synthesize_top_surface(pts, flat, g).front();
    const Polygon hull = concave_hull(pts);
    const auto want = oracle::all_pairs_best({hull.vertices().begin(), hull.vertices().end()}, g,
                                             TopSurfaceParams{}.spacing);
    ++ts_n;
    const double err = std::abs(best.grasp.quality - want.quality);
    worst = std::max(worst, err);
    ts_ok += want.found && err <= 1e-9;
  }
  return {mask_ok == mask_n && ts_ok == ts_n,
          "mask " + std::to_string(mask_ok) + "/" + std::to_string(mask_n) + " exact, topsurface " +
              std::to_string(ts_ok) + "/" + std::to_string(ts_n) + fmt(" within 1e-9 (worst %.1e)", worst)};
}

Verdict round_trip() {
  const auto lib = default_object_library();
  const CameraIntrinsics k;
  const CameraPose pose;
  std::size_t bad_total = 0;
  std::string worst;
  for (std::size_t n = 0; n < lib.size(); ++n) {
    const SceneSpec scene{lib, {{lib[n].id, 0.03, -0.02, 0.5 + 0.3 * n}}, 0.6};
    const auto map = to_heightmap(deproject(render_depth(scene, k, pose), k, pose), kDefaultHeightmapResolution);
    const auto bad = oracle::heightmap_mismatches(scene, map, 2, 0.002, 0.002);
    if (bad > 0) worst += " " + lib[n].id + ":" + std::to_string(bad);
    bad_total += bad;
  }
  return {bad_total == 0, std::to_string(lib.size()) + " objects, " + std::to_string(bad_total) +
                              " mismatched cells" + worst};
}

Verdict friction_cone() {
  std::mt19937_64 rng(5);
  GripperModel g;
  PhysicsParams phys;
  int disagreements = 0, decided = 0, closure = 0;
  for (int k = 0; k < 500; ++k) {
    const auto c = oracle::random_pick_case(rng);
    const ObjectModel m{"prism", {{Polygon(c.local), 0.05}}, 0.05, c.mu};
    const SceneSpec scene{{m}, {{"prism", c.x, c.y, c.yaw}}, 0.6};
    const double opening = std::min(c.width + phys.width_tolerance, g.max_opening);
    const auto want = oracle::predict_pick(c, opening, g.min_opening);
    const auto got = evaluate_pick(scene, GraspPose{c.cx, c.cy, 0.01, c.theta, c.width, 0.0}, g, phys);
    bool agree = false;
    switch (want.verdict) {
      case oracle::PickVerdict::Missed: agree = got.failure_reason == FailureReason::MissedObject; break;
      case oracle::PickVerdict::Width: agree = got.failure_reason == FailureReason::WidthInfeasible; break;
      case oracle::PickVerdict::NoClosure: agree = got.failure_reason == FailureReason::NotForceClosure; break;
      case oracle::PickVerdict::Closure: agree = got.lifted; break;
    }
    decided += want.verdict == oracle::PickVerdict::Closure || want.verdict == oracle::PickVerdict::NoClosure;
    closure += want.verdict == oracle::PickVerdict::Closure;
    disagreements += !agree;
  }
  return {disagreements == 0, "500 configurations, " + std::to_string(disagreements) + " disagreements (" +
                                  std::to_string(decided) + " reached the cone test, " + std::to_string(closure) +
                                  " in closure)"};
}

int group_score(const BenchmarkReport& r, const std::string& alg, std::initializer_list<const char*> ids) {
  int s = 0;
  for (const char* id : ids) s += r.object_score(alg, id);
  return s;
}

Verdict irregular_top(const BenchmarkReport& r) {
  const auto flat = {"cracker_box", "wide_plate", "small_cube"};
  const auto irregular = {"pear", "mustard", "small_clamp"};
  const int ts_flat = group_score(r, "topsurface", flat), ts_irr = group_score(r, "topsurface", irregular);
  const int mk_flat = group_score(r, "mask", flat), mk_irr = group_score(r, "mask", irregular);
  const bool ok = ts_irr < ts_flat && std::abs(mk_flat - mk_irr) < std::abs(ts_flat - ts_irr);
  return {ok, "topsurface flat " + std::to_string(ts_flat) + " vs irregular " + std::to_string(ts_irr) +
                  "; mask flat " + std::to_string(mk_flat) + " vs irregular " + std::to_string(mk_irr)};
}

Verdict determinism(BenchmarkReport& first_out) {
  const auto cfg = default_benchmark();
  const auto base = fs::temp_directory_path() / "graspbench_acceptance";
  fs::remove_all(base);
  double walls[2];
  for (int run = 0; run < 2; ++run) {
    const auto started = std::chrono::system_clock::now();
    const auto t0 = std::chrono::steady_clock::now();
    auto r = run_benchmark(cfg);
    walls[run] = seconds_since(t0);
    write_report(base / ("run" + std::to_string(run)), r,
                 meta_json(r, config_to_json(cfg), RunTiming{started, std::chrono::system_clock::now(), walls[run]}));
    if (run == 0) first_out = std::move(r);
  }
  bool same = true;
  for (const char* f : {"trials.jsonl", "summary.csv", "chart.svg"}) {
    same = same && read_text_file(base / "run0" / f) == read_text_file(base / "run1" / f);
  }
  const std::size_t trials = first_out.trials.size();
  fs::remove_all(base);
  const bool ok = same && trials == 120 && walls[0] < 300 && walls[1] < 300;
  return {ok, std::to_string(trials) + " trials, outputs " + (same ? "byte-identical" : "DIFFER") +
                  fmt(", wall %.1f s and %.1f s", walls[0], walls[1])};
}

Verdict adapter_robustness() {
  const std::string good = stubs::grasp_json(0, 0, 0.02, 0, 0.045, 0.5);
  BenchmarkConfig c;
  c.objects = {"small_cube"};
  c.poses = {{0.0, 0.0, 0.0}, {0.0, 0.0, std::numbers::pi / 4}};
  c.algorithms = {AlgorithmSpec::external("echo", kStubs + "/echo_adapter.sh '" + good + "'", 10),
                  AlgorithmSpec::external("malformed", kStubs + "/malformed_adapter.sh", 10),
                  AlgorithmSpec::external("sleeping", kStubs + "/sleeping_adapter.sh", 1.0),
                  stubs::oracle_stub()};
  c.seed = 1;
  const auto r = run_benchmark(c);
  bool ok = r.trials.size() == 8;
  int echo_scored = 0;
  for (const auto& t : r.trials) {
    if (t.algorithm == "echo") echo_scored += t.grasp.has_value() && t.score == score_trial(t.outcome);
    if (t.algorithm == "malformed") ok = ok && t.failure_reason == "adapter_protocol_error" && t.score == 0;
    if (t.algorithm == "sleeping") ok = ok && t.failure_reason == "adapter_timeout" && t.score == 0;
    if (t.algorithm == "oracle") ok = ok && t.score == 3;
  }
  ok = ok && echo_scored == 2 && r.object_score("echo", "small_cube") >= 3;
  return {ok, std::to_string(r.trials.size()) + " trials; echo " + std::to_string(r.object_score("echo", "small_cube")) +
                  ", malformed " + std::to_string(r.object_score("malformed", "small_cube")) + ", sleeping " +
                  std::to_string(r.object_score("sleeping", "small_cube")) + ", oracle after them " +
                  std::to_string(r.object_score("oracle", "small_cube"))};
}

Verdict guarded(const std::function<Verdict()>& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    return {false, std::string("threw: ") + e.what()};
  }
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](int n, const char* name, const Verdict& v) {
    std::printf("criterion %d %-22s %s  %s\n", n, name, v.pass ? "PASS" : "FAIL", v.detail.c_str());
    std::fflush(stdout);
    failed += !v.pass;
  };
  report(1, "protocol-arithmetic", guarded(protocol_arithmetic));
  report(2, "symmetry", guarded(symmetry));
  report(3, "oracle-equivalence", guarded(oracle_equivalence));
  report(4, "round-trip", guarded(round_trip));
  report(5, "friction-cone", guarded(friction_cone));
  BenchmarkReport full;
  const auto det = guarded([&] { return determinism(full); });
  report(6, "irregular-top", full.trials.empty() ? Verdict{false, "benchmark did not run"} : guarded([&] {
    return irregular_top(full);
  }));
  report(7, "determinism", det);
  report(8, "adapter-robustness", guarded(adapter_robustness));
  std::printf("%d of 8 criteria passed\n", 8 - failed);
  return failed == 0 ? 0 : 1;
}
