/**
 * @file adapter.hpp
 * @brief External planners behind a one-line JSON protocol over the
 * child's stdin/stdout.
 *
 * Request (one line):  {"depth_png": ..., "intrinsics": ..., "gripper": {...}}
 * Response (one line): {"x": ..., "y": ..., "z": ..., "theta_rad": ..., "width": ..., "quality": ...?}
 *
 * The command runs under `/bin/sh -c` in its own process group, which is
 * killed when the deadline passes or the response has been read.
 */
#pragma once

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <filesystem>
#include <string>

#include "json.hpp"

#include "graspbench/error.hpp"
#include "graspbench/grasp.hpp"
#include "graspbench/io.hpp"

namespace graspbench {

struct AdapterRequest {
  std::filesystem::path depth_png;
  std::filesystem::path intrinsics;
  GripperModel gripper;
};

inline std::string adapter_request_line(const AdapterRequest& r) {
  nlohmann::ordered_json g;
  g["max_opening"] = r.gripper.max_opening;
  g["min_opening"] = r.gripper.min_opening;
  g["finger_width"] = r.gripper.finger_width;
  g["finger_thickness"] = r.gripper.finger_thickness;
  g["engagement_depth"] = r.gripper.engagement_depth;
  g["fingertip_clearance"] = r.gripper.fingertip_clearance;
  nlohmann::ordered_json j;
  j["depth_png"] = r.depth_png.string();
  j["intrinsics"] = r.intrinsics.string();
  j["gripper"] = g;
  return j.dump() + "\n";
}

/// Parses and validates one response line.
inline GraspPose parse_adapter_response(const std::string& line, const GripperModel& gripper) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::AdapterProtocolError, std::string("response is not JSON: ") + e.what());
  }
  const GraspPose g = grasp_from_json(j);
  if (const auto why = grasp_violation(g, gripper); !why.empty()) {
    throw Error(ErrorCode::AdapterInvalidGrasp, why);
  }
  return g;
}

namespace detail {

struct Fd {
  int fd = -1;
  Fd() = default;
  explicit Fd(int f) : fd(f) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  ~Fd() { reset(); }
  void reset() {
    if (fd >= 0) ::close(fd);
    fd = -1;
  }
};

/// Writes all of @p data, returning false if the reader went away. SIGPIPE
/// is blocked on this thread for the duration and any pending one consumed.
inline bool write_all_nosigpipe(int fd, const std::string& data) {
  sigset_t pipe_set, old;
  sigemptyset(&pipe_set);
  sigaddset(&pipe_set, SIGPIPE);
  pthread_sigmask(SIG_BLOCK, &pipe_set, &old);
  bool ok = true;
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::write(fd, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      ok = false;
      break;
    }
    off += static_cast<std::size_t>(n);
  }
  if (!ok) {
    const timespec zero{0, 0};
    while (sigtimedwait(&pipe_set, nullptr, &zero) > 0) {
    }
  }
  pthread_sigmask(SIG_SETMASK, &old, nullptr);
  return ok;
}

inline void kill_and_reap(pid_t pid) {
  ::kill(-pid, SIGKILL);
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
}

}  // namespace detail

/**
 * Runs @p command once for @p request and returns its validated grasp.
 * Throws AdapterTimeout, AdapterProtocolError (no line, bad JSON, missing
 * fields, spawn failure) or AdapterInvalidGrasp.
 */
inline GraspPose run_external_algorithm(const AdapterRequest& request, const std::string& command,
                                        double timeout_seconds = 30.0) {
  if (!(timeout_seconds > 0.0)) throw Error(ErrorCode::ConfigError, "adapter timeout must be positive");
  const std::string request_line = adapter_request_line(request);

  int in_pipe[2], out_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw Error(ErrorCode::AdapterProtocolError, "pipe() failed");
  detail::Fd in_r(in_pipe[0]), in_w(in_pipe[1]);
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) throw Error(ErrorCode::AdapterProtocolError, "pipe() failed");
  detail::Fd out_r(out_pipe[0]), out_w(out_pipe[1]);

  const pid_t pid = ::fork();
  if (pid < 0) throw Error(ErrorCode::AdapterProtocolError, "fork() failed");
  if (pid == 0) {
    // Child: only async-signal-safe calls until exec.
    ::setpgid(0, 0);
    if (::dup2(in_pipe[0], STDIN_FILENO) < 0 || ::dup2(out_pipe[1], STDOUT_FILENO) < 0) ::_exit(127);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::setpgid(pid, pid);  // also done by the child; whichever runs first wins
  in_r.reset();
  out_w.reset();

  const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_seconds);
  detail::write_all_nosigpipe(in_w.fd, request_line);
  in_w.reset();

  std::string buffer;
  bool have_line = false;
  bool eof = false;
  while (!have_line && !eof) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) break;
    pollfd p{out_r.fd, POLLIN, 0};
    const int r = ::poll(&p, 1, static_cast<int>(std::min<long long>(left.count(), 1000)));
    if (r < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (r == 0) continue;
    char chunk[4096];
    const ssize_t n = ::read(out_r.fd, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      eof = true;
    } else if (n == 0) {
      eof = true;
    } else {
      buffer.append(chunk, static_cast<std::size_t>(n));
      have_line = buffer.find('\n') != std::string::npos;
    }
  }
  detail::kill_and_reap(pid);

  if (!have_line && !eof) {
    throw Error(ErrorCode::AdapterTimeout, "no response within " + std::to_string(timeout_seconds) + " s");
  }
  if (!have_line && buffer.empty()) throw Error(ErrorCode::AdapterProtocolError, "adapter exited without a response");
  return parse_adapter_response(buffer.substr(0, buffer.find('\n')), request.gripper);
}

}  // namespace graspbench
