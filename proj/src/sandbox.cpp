// Copyright 2026 The cotrobust Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cotrobust/sandbox.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>

#include "cotrobust/error.hpp"

namespace cotrobust {

using nlohmann::json;

std::string_view to_string(OutcomeStatus s) {
  switch (s) {
    case OutcomeStatus::kPass: return "Pass";
    case OutcomeStatus::kFail: return "Fail";
    case OutcomeStatus::kError: return "Error";
    case OutcomeStatus::kTimeout: return "Timeout";
    case OutcomeStatus::kParseFailure: return "ParseFailure";
  }
  return "?";
}

OutcomeStatus parse_outcome_status(std::string_view s) {
  for (auto st : {OutcomeStatus::kPass, OutcomeStatus::kFail, OutcomeStatus::kError,
                  OutcomeStatus::kTimeout, OutcomeStatus::kParseFailure}) {
    if (to_string(st) == s) return st;
  }
  throw Error(ErrorKind::kParse, "unknown outcome status '" + std::string(s) + "'");
}

json to_json(const OutcomeRecord& r) {
  json cond = to_json(r.condition);
  cond["task_id"] = r.task_id;
  return json{{"condition", std::move(cond)},
              {"status", to_string(r.status)},
              {"duration_ms", r.duration_ms},
              {"detail", r.detail}};
}

OutcomeRecord outcome_from_json(const json& j) {
  OutcomeRecord r;
  r.condition = condition_from_json(j.at("condition"));
  r.task_id = j.at("condition").at("task_id").get<std::string>();
  r.status = parse_outcome_status(j.at("status").get<std::string>());
  r.duration_ms = j.at("duration_ms").get<long long>();
  r.detail = j.at("detail").get<std::string>();
  return r;
}

namespace {

std::string truncate(std::string s, std::size_t max_bytes) {
  static constexpr std::string_view kMark = "...[truncated]";
  if (s.size() > max_bytes) {
    s.resize(max_bytes > kMark.size() ? max_bytes - kMark.size() : 0);
    s += kMark.substr(0, max_bytes - s.size());
  }
  return s;
}

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(Fd&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Fd& operator=(Fd&& o) noexcept {
    reset();
    fd_ = std::exchange(o.fd_, -1);
    return *this;
  }
  ~Fd() { reset(); }
  int get() const { return fd_; }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

struct Pipe {
  Fd read;
  Fd write;
};

Pipe make_pipe() {
  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0) {
    throw Error(ErrorKind::kEnvironment, std::string("pipe: ") + std::strerror(errno));
  }
  return {Fd(fds[0]), Fd(fds[1])};
}

class ScratchDir {
 public:
  ScratchDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "cotrobust-XXXXXX").string();
    if (!::mkdtemp(tmpl.data())) {
      throw Error(ErrorKind::kEnvironment, std::string("mkdtemp: ") + std::strerror(errno));
    }
    path_ = tmpl;
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace

Sandbox::Sandbox(SandboxConfig config) : config_(std::move(config)) {
  if (config_.runner_argv.empty()) throw Error(ErrorKind::kConfig, "runner command is empty");
  // Writes to a runner that already exited must fail with EPIPE, not kill us.
  ::signal(SIGPIPE, SIG_IGN);
}

OutcomeRecord interpret_reply(std::string_view stdout_text, int exit_code, long long wall_ms,
                              std::size_t max_detail_bytes) {
  OutcomeRecord r;
  r.duration_ms = wall_ms;
  // The reply is the last non-empty line.
  std::size_t end = stdout_text.find_last_not_of(" \t\r\n");
  if (end == std::string_view::npos) {
    r.status = OutcomeStatus::kError;
    r.detail = "protocol violation: runner produced no reply (exit code " + std::to_string(exit_code) + ")";
    return r;
  }
  std::size_t begin = stdout_text.rfind('\n', end);
  begin = begin == std::string_view::npos ? 0 : begin + 1;
  std::string_view line = stdout_text.substr(begin, end - begin + 1);
  try {
    json reply = json::parse(line);
    std::string status = reply.at("status").get<std::string>();
    OutcomeStatus st = parse_outcome_status(status);
    if (st == OutcomeStatus::kParseFailure) throw Error(ErrorKind::kParse, "runner may not report ParseFailure");
    r.status = st;
    if (auto it = reply.find("duration_ms"); it != reply.end() && it->is_number()) {
      r.duration_ms = static_cast<long long>(std::llround(it->get<double>()));
    }
    if (auto it = reply.find("detail"); it != reply.end() && it->is_string()) {
      r.detail = truncate(it->get<std::string>(), max_detail_bytes);
    }
    if (exit_code != 0) {
      r.detail = truncate("protocol violation: exit code " + std::to_string(exit_code) +
                              " with reply status " + status + "; " + r.detail,
                          max_detail_bytes);
      r.status = OutcomeStatus::kError;
    }
  } catch (const std::exception& e) {
    r.status = OutcomeStatus::kError;
    r.detail = truncate("protocol violation: " + std::string(e.what()) + " in reply '" +
                            std::string(line) + "'",
                        max_detail_bytes);
  }
  return r;
}

OutcomeRecord Sandbox::evaluate(std::string_view code_text, const Task& task, int timeout_s) const {
  if (timeout_s < 1) throw Error(ErrorKind::kUsage, "timeout_s must be at least 1");
  json request{{"source", code_text},
               {"test", task.tests},
               {"entry_point", task.entry_point},
               {"timeout_s", timeout_s}};
  std::string payload = request.dump();
  payload.push_back('\n');

  ScratchDir scratch;
  Pipe in = make_pipe();
  Pipe out = make_pipe();
  Pipe err = make_pipe();
  Pipe exec_status = make_pipe();

  std::vector<char*> argv;
  for (const auto& a : config_.runner_argv) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);
  const std::string workdir = scratch.path().string();

  auto started = std::chrono::steady_clock::now();
  pid_t pid = ::fork();
  if (pid < 0) throw Error(ErrorKind::kEnvironment, std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    ::setpgid(0, 0);
    ::dup2(in.read.get(), STDIN_FILENO);
    ::dup2(out.write.get(), STDOUT_FILENO);
    ::dup2(err.write.get(), STDERR_FILENO);
    if (::chdir(workdir.c_str()) == 0) {
      ::execvp(argv[0], argv.data());
    }
    int code = errno;
    [[maybe_unused]] auto n = ::write(exec_status.write.get(), &code, sizeof code);
    ::_exit(127);
  }
  ::setpgid(pid, pid);
  in.read.reset();
  out.write.reset();
  err.write.reset();
  exec_status.write.reset();

  int exec_errno = 0;
  if (::read(exec_status.read.get(), &exec_errno, sizeof exec_errno) == sizeof exec_errno) {
    int ignored;
    ::waitpid(pid, &ignored, 0);
    throw Error(ErrorKind::kEnvironment, "cannot start runner '" + config_.runner_argv[0] +
                                             "': " + std::strerror(exec_errno));
  }

  // The request is written from the poll loop so a runner that never reads
  // stdin cannot block us past the deadline.
  ::fcntl(in.write.get(), F_SETFL, ::fcntl(in.write.get(), F_GETFL) | O_NONBLOCK);
  std::size_t sent = 0;

  const auto deadline = started + std::chrono::seconds(timeout_s + config_.grace_s);
  std::string stdout_text;
  std::string stderr_text;
  bool out_open = true;
  bool err_open = true;
  bool killed = false;
  char buf[4096];
  while (out_open || err_open) {
    auto now = std::chrono::steady_clock::now();
    if (now >= deadline) {
      ::kill(-pid, SIGKILL);
      killed = true;
      break;
    }
    int wait_ms = static_cast<int>(
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count()) + 1;
    pollfd fds[3];
    int nfds = 0;
    if (out_open) fds[nfds++] = {out.read.get(), POLLIN, 0};
    if (err_open) fds[nfds++] = {err.read.get(), POLLIN, 0};
    if (in.write.get() >= 0) fds[nfds++] = {in.write.get(), POLLOUT, 0};
    int rc = ::poll(fds, static_cast<nfds_t>(nfds), wait_ms);
    if (rc < 0 && errno == EINTR) continue;
    for (int i = 0; i < nfds; ++i) {
      if (fds[i].fd == in.write.get()) {
        if (fds[i].revents & (POLLERR | POLLHUP)) {
          in.write.reset();
        } else if (fds[i].revents & POLLOUT) {
          ssize_t n = ::write(in.write.get(), payload.data() + sent, payload.size() - sent);
          if (n > 0) sent += static_cast<std::size_t>(n);
          if (n < 0 && errno != EAGAIN) in.write.reset();
          if (sent == payload.size()) in.write.reset();
        }
        continue;
      }
      if (!(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
      ssize_t n = ::read(fds[i].fd, buf, sizeof buf);
      bool is_out = fds[i].fd == out.read.get();
      if (n <= 0) {
        (is_out ? out_open : err_open) = false;
      } else {
        (is_out ? stdout_text : stderr_text).append(buf, static_cast<std::size_t>(n));
      }
    }
  }
  in.write.reset();
  int wstatus = 0;
  if (!killed) {
    // Output closed; give the child until the deadline to exit.
    while (true) {
      pid_t r = ::waitpid(pid, &wstatus, WNOHANG);
      if (r == pid) break;
      if (std::chrono::steady_clock::now() >= deadline) {
        ::kill(-pid, SIGKILL);
        ::waitpid(pid, &wstatus, 0);
        killed = true;
        break;
      }
      ::usleep(2000);
    }
  } else {
    ::waitpid(pid, &wstatus, 0);
  }
  ::kill(-pid, SIGKILL);  // stray grandchildren
  auto wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                     std::chrono::steady_clock::now() - started)
                     .count();

  OutcomeRecord record;
  if (killed) {
    record.status = OutcomeStatus::kTimeout;
    record.duration_ms = wall_ms;
    record.detail = "killed after " + std::to_string(timeout_s + config_.grace_s) + "s wall-clock";
  } else {
    int exit_code = WIFEXITED(wstatus) ? WEXITSTATUS(wstatus) : 128 + WTERMSIG(wstatus);
    record = interpret_reply(stdout_text, exit_code, wall_ms, config_.max_detail_bytes);
    if (record.status == OutcomeStatus::kError && record.detail.starts_with("protocol violation") &&
        !stderr_text.empty()) {
      record.detail = truncate(record.detail + "; stderr: " + stderr_text, config_.max_detail_bytes);
    }
  }
  record.task_id = task.task_id;
  return record;
}

std::string cell_key(std::string_view task_id, const ExperimentCondition& c) {
  ExperimentCondition base = c;
  base.sample_index = 0;
  std::string key = trace_key(task_id, base);
  return key.substr(0, key.rfind('|'));
}

CellCount aggregate(const std::vector<OutcomeRecord>& records) {
  CellCount count;
  if (records.empty()) return count;
  const std::string first = cell_key(records.front().task_id, records.front().condition);
  for (const auto& r : records) {
    if (cell_key(r.task_id, r.condition) != first) {
      throw Error(ErrorKind::kGrouping, "records from cells '" + first + "' and '" +
                                            cell_key(r.task_id, r.condition) + "' mixed in one group");
    }
    ++count.n;
    if (r.status == OutcomeStatus::kPass) ++count.c;
  }
  return count;
}

std::map<std::string, CellCount> aggregate_by_cell(const std::vector<OutcomeRecord>& records) {
  std::map<std::string, CellCount> cells;
  for (const auto& r : records) {
    auto& c = cells[cell_key(r.task_id, r.condition)];
    ++c.n;
    if (r.status == OutcomeStatus::kPass) ++c.c;
  }
  return cells;
}

}  // namespace cotrobust
