/**
 * @file report.hpp
 * @brief Benchmark outputs: trials.jsonl, summary.csv, chart.svg (the
 * byte-stable part) and meta.json (timestamps, timings, config echo).
 */
#pragma once

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "graspbench/bench.hpp"
#include "graspbench/error.hpp"
#include "graspbench/io.hpp"

namespace graspbench {

#ifndef GRASPBENCH_VERSION
#define GRASPBENCH_VERSION "0.1.0"
#endif

inline constexpr const char* kToolVersion = GRASPBENCH_VERSION;

inline nlohmann::ordered_json trial_to_json(const TrialRecord& t) {
  nlohmann::ordered_json j;
  j["algorithm"] = t.algorithm;
  j["object"] = t.object_id;
  j["pose_index"] = t.pose_index;
  j["pose"] = {{"x", t.pose.x}, {"y", t.pose.y}, {"yaw_rad", t.pose.yaw}};
  j["grasp"] = t.grasp ? grasp_to_json(*t.grasp) : nlohmann::ordered_json(nullptr);
  j["lifted"] = t.outcome.lifted;
  j["yaw_pass"] = t.outcome.yaw_pass;
  j["shake_pass"] = t.outcome.shake_pass;
  j["score"] = t.score;
  j["failure_reason"] = t.failure_reason;
  return j;
}

inline TrialRecord trial_from_json(const nlohmann::json& j) {
  try {
    TrialRecord t;
    t.algorithm = j.at("algorithm").get<std::string>();
    t.object_id = j.at("object").get<std::string>();
    t.pose_index = j.at("pose_index").get<int>();
    const auto& p = j.at("pose");
    t.pose = {p.at("x").get<double>(), p.at("y").get<double>(), p.at("yaw_rad").get<double>()};
    if (!j.at("grasp").is_null()) t.grasp = grasp_from_json(j.at("grasp"));
    t.outcome.lifted = j.at("lifted").get<bool>();
    t.outcome.yaw_pass = j.at("yaw_pass").get<bool>();
    t.outcome.shake_pass = j.at("shake_pass").get<bool>();
    t.score = j.at("score").get<int>();
    t.failure_reason = j.at("failure_reason").get<std::string>();
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InconsistentTrials, std::string("malformed trial record: ") + e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::InconsistentTrials, std::string("malformed trial record: ") + e.what());
  }
}

inline std::string trials_jsonl(const std::vector<TrialRecord>& trials) {
  std::string out;
  for (const auto& t : trials) out += trial_to_json(t).dump() + "\n";
  return out;
}

inline std::vector<TrialRecord> parse_trials_jsonl(const std::string& text) {
  std::vector<TrialRecord> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(trial_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::InconsistentTrials, "line " + std::to_string(lineno) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorCode::InconsistentTrials, "line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

/// algorithm, object, pose0..poseN-1, object_score; then one TOTAL row per
/// algorithm. N is the largest pose count in the report; shorter objects
/// leave trailing cells empty.
inline std::string summary_csv(const BenchmarkReport& report) {
  std::size_t n = 0;
  for (const auto& a : report.algorithms) {
    for (const auto& o : a.objects) n = std::max(n, o.pose_scores.size());
  }
  std::ostringstream ss;
  ss << "algorithm,object";
  for (std::size_t p = 0; p < n; ++p) ss << ",pose" << p;
  ss << ",object_score\n";
  for (const auto& a : report.algorithms) {
    for (const auto& o : a.objects) {
      ss << a.algorithm << ',' << o.object_id;
      for (std::size_t p = 0; p < n; ++p) {
        ss << ',';
        if (p < o.pose_scores.size()) ss << o.pose_scores[p];
      }
      ss << ',' << o.score << '\n';
    }
  }
  for (const auto& a : report.algorithms) {
    ss << a.algorithm << ",TOTAL";
    for (std::size_t p = 0; p < n; ++p) ss << ',';
    ss << ',' << a.total << '\n';
  }
  return ss.str();
}

namespace detail {

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace detail

/// Grouped bar chart, one group per object and one bar per algorithm.
inline std::string chart_svg(const BenchmarkReport& report) {
  static const char* palette[] = {"#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948", "#b07aa1"};
  std::vector<std::string> objects;
  int y_max = 18;
  for (const auto& a : report.algorithms) {
    for (const auto& o : a.objects) {
      if (std::find(objects.begin(), objects.end(), o.object_id) == objects.end()) objects.push_back(o.object_id);
      y_max = std::max(y_max, o.max_score);
    }
  }
  const int n_alg = static_cast<int>(report.algorithms.size());
  const int bar = 14, gap = 18, left = 50, top = 30, plot_h = 240, bottom = 90;
  const int group_w = n_alg * bar + gap;
  const int width = left + static_cast<int>(objects.size()) * group_w + 20 + 160;
  const int height = top + plot_h + bottom;
  auto y_of = [&](double v) { return top + plot_h - v / y_max * plot_h; };

  std::ostringstream ss;
  ss << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  ss << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  ss << "<text x=\"" << left << "\" y=\"18\" font-size=\"13\">Grasp score per object (max " << y_max << ")</text>\n";
  for (int v = 0; v <= y_max; v += 3) {
    const double y = y_of(v);
    ss << "<line x1=\"" << left << "\" y1=\"" << y << "\" x2=\"" << left + objects.size() * group_w << "\" y2=\"" << y
       << "\" stroke=\"#dddddd\"/>\n";
    ss << "<text x=\"" << left - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">" << v << "</text>\n";
  }
  for (std::size_t g = 0; g < objects.size(); ++g) {
    const int x0 = left + static_cast<int>(g) * group_w + gap / 2;
    for (int a = 0; a < n_alg; ++a) {
      int score = 0;
      for (const auto& o : report.algorithms[a].objects) {
        if (o.object_id == objects[g]) score = o.score;
      }
      const double y = y_of(score);
      ss << "<rect x=\"" << x0 + a * bar << "\" y=\"" << y << "\" width=\"" << bar - 2 << "\" height=\""
         << top + plot_h - y << "\" fill=\"" << palette[a % 7] << "\"><title>"
         << detail::xml_escape(report.algorithms[a].algorithm) << " / " << detail::xml_escape(objects[g]) << ": "
         << score << "</title></rect>\n";
    }
    const int cx = x0 + n_alg * bar / 2;
    ss << "<text transform=\"translate(" << cx << "," << top + plot_h + 10 << ") rotate(45)\">"
       << detail::xml_escape(objects[g]) << "</text>\n";
  }
  ss << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + objects.size() * group_w
     << "\" y2=\"" << top + plot_h << "\" stroke=\"black\"/>\n";
  const int lx = left + static_cast<int>(objects.size()) * group_w + 20;
  for (int a = 0; a < n_alg; ++a) {
    const auto& alg = report.algorithms[a];
    ss << "<rect x=\"" << lx << "\" y=\"" << top + a * 18 << "\" width=\"10\" height=\"10\" fill=\"" << palette[a % 7]
       << "\"/>\n";
    ss << "<text x=\"" << lx + 16 << "\" y=\"" << top + a * 18 + 9 << "\">" << detail::xml_escape(alg.algorithm)
       << " (" << alg.total << "/" << alg.max_total << ")</text>\n";
  }
  ss << "</svg>\n";
  return ss.str();
}

inline std::string utc_timestamp(std::chrono::system_clock::time_point t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline nlohmann::ordered_json config_to_json(const BenchmarkConfig& c) {
  nlohmann::ordered_json j;
  j["seed"] = c.seed;
  j["objects"] = c.object_ids();
  auto poses_json = [](const std::vector<BenchPose>& ps) {
    nlohmann::ordered_json a = nlohmann::ordered_json::array();
    for (const auto& p : ps) a.push_back({{"x", p.x}, {"y", p.y}, {"yaw_rad", p.yaw}});
    return a;
  };
  j["poses"] = poses_json(c.poses);
  nlohmann::ordered_json op = nlohmann::ordered_json::object();
  for (const auto& [id, ps] : c.object_poses) op[id] = poses_json(ps);
  j["object_poses"] = op;
  nlohmann::ordered_json algs = nlohmann::ordered_json::array();
  for (const auto& a : c.algorithms) {
    nlohmann::ordered_json aj{{"name", a.name}, {"kind", std::string(to_string(a.kind))}};
    if (a.kind == AlgorithmKind::External) {
      aj["command"] = a.command;
      aj["timeout"] = a.timeout;
      aj["reentrant"] = a.reentrant;
    }
    algs.push_back(aj);
  }
  j["algorithms"] = algs;
  const auto& g = c.gripper;
  j["gripper"] = {{"max_opening", g.max_opening},         {"min_opening", g.min_opening},
                  {"finger_width", g.finger_width},       {"finger_thickness", g.finger_thickness},
                  {"engagement_depth", g.engagement_depth}, {"fingertip_clearance", g.fingertip_clearance}};
  j["noise"] = {{"sigma", c.noise.gaussian_sigma}, {"dropout", c.noise.dropout_probability}};
  const auto& p = c.physics;
  j["physics"] = {{"grip_force", p.grip_force},           {"gravity", p.gravity},
                  {"shake_multiplier", p.shake_multiplier}, {"width_tolerance", p.width_tolerance},
                  {"yaw_angle_rad", p.yaw_angle},          {"collision_sample_step", p.collision_sample_step}};
  j["camera"] = camera_to_json(c.intrinsics, c.camera);
  j["workspace_size"] = c.workspace_size;
  return j;
}

struct RunTiming {
  std::chrono::system_clock::time_point started;
  std::chrono::system_clock::time_point finished;
  double wall_seconds = 0.0;
};

inline nlohmann::ordered_json meta_json(const BenchmarkReport& report, const nlohmann::ordered_json& config_echo,
                                        const RunTiming& timing) {
  nlohmann::ordered_json j;
  j["tool"] = "graspbench";
  j["version"] = kToolVersion;
  j["started_utc"] = utc_timestamp(timing.started);
  j["finished_utc"] = utc_timestamp(timing.finished);
  j["wall_seconds"] = timing.wall_seconds;
  j["trial_count"] = report.trials.size();
  nlohmann::ordered_json totals = nlohmann::ordered_json::object();
  for (const auto& a : report.algorithms) totals[a.algorithm] = {{"total", a.total}, {"max", a.max_total}};
  j["totals"] = totals;
  j["notes"] = report.notes;
  nlohmann::ordered_json times = nlohmann::ordered_json::array();
  for (const auto& t : report.trials) {
    times.push_back({{"algorithm", t.algorithm}, {"object", t.object_id}, {"pose_index", t.pose_index},
                     {"planner_seconds", t.planner_time}});
  }
  j["planner_times"] = times;
  j["config"] = config_echo;
  return j;
}

/// Writes @p text to a temporary sibling and renames it over @p path, so
/// readers never see a partial file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  write_text_file(tmp, text);
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::IoError, "cannot move report into place at '" + path.string() + "'");
  }
}

inline const std::vector<std::string>& report_file_names() {
  static const std::vector<std::string> names{"trials.jsonl", "summary.csv", "chart.svg", "meta.json"};
  return names;
}

/// Renders all four outputs first, then moves them into @p dir.
inline void write_report(const std::filesystem::path& dir, const BenchmarkReport& report,
                         const nlohmann::ordered_json& meta) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create output directory '" + dir.string() + "'");
  const std::vector<std::string> contents{trials_jsonl(report.trials), summary_csv(report), chart_svg(report),
                                          meta.dump(2) + "\n"};
  const auto& names = report_file_names();
  for (std::size_t k = 0; k < names.size(); ++k) write_file_atomic(dir / names[k], contents[k]);
}

/// Plain-text totals table for the terminal.
inline std::string totals_table(const BenchmarkReport& report) {
  std::ostringstream ss;
  std::size_t w = 9;
  for (const auto& a : report.algorithms) w = std::max(w, a.algorithm.size());
  char line[256];
  std::snprintf(line, sizeof line, "%-*s  %7s  %5s\n", static_cast<int>(w), "algorithm", "score", "max");
  ss << line;
  for (const auto& a : report.algorithms) {
    std::snprintf(line, sizeof line, "%-*s  %7d  %5d\n", static_cast<int>(w), a.algorithm.c_str(), a.total,
                  a.max_total);
    ss << line;
  }
  for (const auto& n : report.notes) ss << "note: " << n << '\n';
  return ss.str();
}

}  // namespace graspbench
