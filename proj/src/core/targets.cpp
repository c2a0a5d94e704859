// Copyright 2026 The fuzzeval Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fuzzeval/core/targets.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <regex>
#include <string>

#include "fuzzeval/errors.hpp"

extern char** environ;

namespace fuzzeval::core {

void TraceContext::Block(std::uint32_t id) {
  const Edge e{prev_, id};
  map_[e.MapIndex()] = 1;
  prev_ = id;
}

TraceContext::Scope::Scope(TraceContext& ctx, const char* unit,
                           std::uint32_t line)
    : ctx_(ctx) {
  ctx_.stack_.push_back(Frame{unit, line});
}

TraceContext::Scope::~Scope() { ctx_.stack_.pop_back(); }

void TraceContext::Scope::At(std::uint32_t line) {
  ctx_.stack_.back().line = line;
}

void TraceContext::Crash() {
  StackTrace trace;
  trace.frames.assign(stack_.rbegin(), stack_.rend());
  throw TargetCrash{std::move(trace)};
}

namespace {

using Input = std::span<const std::uint8_t>;

// --- branchy-crash ------------------------------------------------------
//
//   int main(int argc, char* argv[]) {
//     if (argc >= 2) {
//       char b = argv[1][0];
//       if (b == 'a') crash();
//       else          crash();
//     }
//     return 0;
//   }
//
// crash() is an uninstrumented sink, like abort().

[[noreturn]] void CrashSink(TraceContext& ctx) {
  TraceContext::Scope frame(ctx, "crash", 2);
  ctx.Crash();
}

void BranchyMain(TraceContext& ctx, Input in) {
  TraceContext::Scope frame(ctx, "main", 1);
  ctx.Block(1);
  if (!in.empty()) {
    ctx.Block(2);
    if (in[0] == 'a') {
      ctx.Block(3);
      frame.At(4);
      CrashSink(ctx);
    } else {
      ctx.Block(4);
      frame.At(5);
      CrashSink(ctx);
    }
  }
  ctx.Block(5);
}

// --- shared-crash-paths -------------------------------------------------
//
// format() corrupts its argument; output() is where the failure shows.

void Output(TraceContext& ctx, bool corrupted) {
  TraceContext::Scope frame(ctx, "output", 30);
  ctx.Block(10);
  if (corrupted) {
    frame.At(32);
    ctx.Crash();
  }
  ctx.Block(11);
}

void Prepare(TraceContext& ctx, bool corrupted) {
  TraceContext::Scope frame(ctx, "prepare", 26);
  ctx.Block(9);
  Output(ctx, corrupted);
}

void Format(TraceContext& ctx, Input s) {
  TraceContext::Scope frame(ctx, "format", 21);
  ctx.Block(8);
  // bug: corrupts any non-empty string
  const bool corrupted = !s.empty();
  frame.At(23);
  Prepare(ctx, corrupted);
}

void CallerF(TraceContext& ctx, Input s) {
  TraceContext::Scope frame(ctx, "f", 15);
  ctx.Block(6);
  Format(ctx, s);
}

void CallerG(TraceContext& ctx, Input s) {
  TraceContext::Scope frame(ctx, "g", 18);
  ctx.Block(7);
  Format(ctx, s);
}

void SharedMain(TraceContext& ctx, Input in) {
  TraceContext::Scope frame(ctx, "main", 5);
  ctx.Block(1);
  if (in.size() < 2) {
    ctx.Block(2);
    return;
  }
  const Input rest = in.subspan(1);
  switch (in[0]) {
    case 'f':
      ctx.Block(3);
      frame.At(8);
      CallerF(ctx, rest);
      break;
    case 'g':
      ctx.Block(4);
      frame.At(10);
      CallerG(ctx, rest);
      break;
    default:
      ctx.Block(5);
      break;
  }
}

// --- versioned-family ---------------------------------------------------
//
// Record format: <kind 'A'..'D'> '!' <flags> ... Each kind has its own
// parser and its own out-of-bounds copy; fixing a bug removes it for that
// kind only, so the bugs are independent.

constexpr const char* kParserNames[versioned::kNumBugs] = {
    "parse_alpha", "parse_bravo", "parse_charlie", "parse_delta"};

void CopyField(TraceContext& ctx, std::uint32_t bug, bool odd_flags,
               bool buggy) {
  TraceContext::Scope frame(ctx, "copy_field", 40);
  const std::uint32_t base = 4 + bug * 5;
  ctx.Block(base + 3);
  if (buggy) {
    // crash site differs with the flag parity: two stack hashes per bug
    frame.At(odd_flags ? 43 : 45);
    ctx.Crash();
  }
  ctx.Block(base + 4);
}

void ParseRecord(TraceContext& ctx, std::uint32_t bug, Input in,
                 std::uint32_t version) {
  TraceContext::Scope frame(ctx, kParserNames[bug], 60 + bug * 10);
  const std::uint32_t base = 4 + bug * 5;
  ctx.Block(base);
  if (in.size() < 2 || in[1] != '!') return;
  ctx.Block(24 + bug);  // separator seen, flags pending
  if (in.size() < 3) return;
  const bool odd = (in[2] & 1) != 0;
  ctx.Block(odd ? base + 1 : base + 2);
  frame.At(62 + bug * 10);
  CopyField(ctx, bug, odd, version < versioned::kFixVersions[bug]);
}

void VersionedMain(TraceContext& ctx, Input in, std::uint32_t version) {
  TraceContext::Scope frame(ctx, "main", 100);
  ctx.Block(1);
  if (in.empty()) {
    ctx.Block(2);
    return;
  }
  const int kind = static_cast<int>(in[0]) - 'A';
  if (kind < 0 || kind >= static_cast<int>(versioned::kNumBugs)) {
    ctx.Block(3);
    return;
  }
  frame.At(104);
  ParseRecord(ctx, static_cast<std::uint32_t>(kind), in, version);
}

std::int64_t MicrosSince(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::microseconds>(
             std::chrono::steady_clock::now() - start)
      .count();
}

std::string_view SignalName(int sig) {
  switch (sig) {
    case SIGSEGV:
      return "SIGSEGV";
    case SIGABRT:
      return "SIGABRT";
    case SIGILL:
      return "SIGILL";
    case SIGFPE:
      return "SIGFPE";
    case SIGBUS:
      return "SIGBUS";
    default:
      return "";
  }
}

// Owns a file descriptor.
class Fd {
 public:
  explicit Fd(int fd = -1) : fd_(fd) {}
  ~Fd() { Reset(); }
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  int get() const { return fd_; }
  void Reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_;
};

// Temporary input file, removed on destruction.
class TempInputFile {
 public:
  explicit TempInputFile(std::span<const std::uint8_t> data) {
    const auto dir = std::filesystem::temp_directory_path();
    std::string pattern = (dir / "fuzzeval-input-XXXXXX").string();
    const int fd = ::mkstemp(pattern.data());
    if (fd < 0) {
      throw ExecutionError("cannot create temporary input file: " +
                           std::string(std::strerror(errno)));
    }
    Fd guard(fd);
    path_ = pattern;
    std::size_t off = 0;
    while (off < data.size()) {
      const ssize_t n = ::write(fd, data.data() + off, data.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        std::filesystem::remove(path_);
        throw ExecutionError("cannot write temporary input file");
      }
      off += static_cast<std::size_t>(n);
    }
  }
  ~TempInputFile() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace

bool ParseSanitizerReport(std::string_view text, std::vector<Frame>* frames) {
  static const std::regex kAsanHeader(R"(^(==\d+==)?ERROR: AddressSanitizer)");
  static const std::regex kUbsan(R"(^(.*: )?runtime error:)");
  static const std::regex kFrame(
      R"(^\s*#\d+\s+0x[0-9a-fA-F]+\s+in\s+(\S+)\s+(\S+?):(\d+)(:\d+)?\s*$)");
  bool found = false;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string line(text.substr(pos, end - pos));
    pos = end + 1;
    if (std::regex_search(line, kAsanHeader) || std::regex_search(line, kUbsan)) {
      found = true;
      continue;
    }
    std::smatch m;
    if (frames != nullptr && found && std::regex_match(line, m, kFrame)) {
      frames->push_back(
          Frame{m[1].str(), static_cast<std::uint32_t>(std::stoul(m[3].str()))});
    }
  }
  return found;
}

Executor::Executor(TargetSpec target, std::chrono::milliseconds timeout)
    : target_(std::move(target)),
      external_timeout_(timeout),
      map_(kEdgeMapSize, 0) {
  target_.Validate();
}

Executor::Result Executor::Run(std::span<const std::uint8_t> input) {
  if (target_.family == TargetFamily::kExternalSubprocess) {
    return RunExternal(input);
  }
  std::fill(map_.begin(), map_.end(), std::uint8_t{0});
  const auto start = std::chrono::steady_clock::now();
  TraceContext ctx(map_);
  Result result;
  try {
    switch (target_.family) {
      case TargetFamily::kBranchyCrash:
        BranchyMain(ctx, input);
        break;
      case TargetFamily::kSharedCrashPaths:
        SharedMain(ctx, input);
        break;
      case TargetFamily::kVersionedFamily:
        VersionedMain(ctx, input, *target_.version);
        break;
      case TargetFamily::kExternalSubprocess:
        break;
    }
  } catch (TargetCrash& crash) {
    result.crashed = true;
    result.trace = std::move(crash.trace);
  }
  result.duration_us = MicrosSince(start);
  return result;
}

Executor::Result Executor::RunExternal(std::span<const std::uint8_t> input) {
  std::fill(map_.begin(), map_.end(), std::uint8_t{0});
  TempInputFile file(input);
  const std::string& exe = *target_.path;

  int pipe_fds[2];
  if (::pipe2(pipe_fds, O_CLOEXEC) != 0) {
    throw ExecutionError("pipe failed: " + std::string(std::strerror(errno)));
  }
  Fd read_end(pipe_fds[0]);
  Fd write_end(pipe_fds[1]);

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, STDIN_FILENO, "/dev/null", O_RDONLY, 0);
  posix_spawn_file_actions_addopen(&actions, STDOUT_FILENO, "/dev/null", O_WRONLY, 0);
  posix_spawn_file_actions_adddup2(&actions, write_end.get(), STDERR_FILENO);

  std::vector<char*> argv{const_cast<char*>(exe.c_str()),
                          const_cast<char*>(file.path().c_str()), nullptr};
  const auto start = std::chrono::steady_clock::now();
  pid_t pid = 0;
  const int rc =
      ::posix_spawn(&pid, exe.c_str(), &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) {
    throw ExecutionError("cannot spawn " + exe + ": " + std::strerror(rc));
  }
  write_end.Reset();

  std::string err;
  bool timed_out = false;
  char buf[4096];
  for (;;) {
    const auto elapsed = std::chrono::steady_clock::now() - start;
    const auto left = external_timeout_ -
        std::chrono::duration_cast<std::chrono::milliseconds>(elapsed);
    if (left.count() <= 0) {
      timed_out = true;
      ::kill(pid, SIGKILL);
      break;
    }
    pollfd pfd{read_end.get(), POLLIN, 0};
    const int pr = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (pr < 0 && errno == EINTR) continue;
    if (pr <= 0) continue;
    const ssize_t n = ::read(read_end.get(), buf, sizeof(buf));
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;  // EOF: child closed stderr
    err.append(buf, static_cast<std::size_t>(n));
  }

  int status = 0;
  while (::waitpid(pid, &status, 0) < 0) {
    if (errno != EINTR) {
      throw ExecutionError("waitpid failed for " + exe);
    }
  }

  Result result;
  result.duration_us = MicrosSince(start);
  if (timed_out) return result;  // a hang is not a crash

  std::vector<Frame> frames;
  const bool sanitizer = ParseSanitizerReport(err, &frames);
  std::string_view sig_name;
  if (WIFSIGNALED(status)) sig_name = SignalName(WTERMSIG(status));
  if (WIFEXITED(status) && WEXITSTATUS(status) == 127 && err.empty()) {
    // posix_spawn may report exec failure only through the exit status.
    if (!std::filesystem::exists(exe)) {
      throw ExecutionError("cannot execute " + exe);
    }
  }
  if (!sanitizer && sig_name.empty()) return result;

  result.crashed = true;
  StackTrace trace;
  if (!frames.empty()) {
    trace.frames = std::move(frames);
  } else {
    trace.frames.push_back(Frame{
        "<signal " + std::string(sig_name.empty() ? "sanitizer" : sig_name) + ">",
        0});
  }
  result.trace = std::move(trace);
  return result;
}

Observation Eval(const TargetSpec& target, std::span<const std::uint8_t> input) {
  Executor exec(target);
  auto r = exec.Run(input);
  Observation obs;
  obs.crashed = r.crashed;
  obs.trace = std::move(r.trace);
  obs.duration_us = r.duration_us;
  obs.edges = CoverageProfile::FromMap(
      std::vector<std::uint8_t>(exec.map().begin(), exec.map().end()));
  return obs;
}

std::optional<std::uint32_t> PlantedBug(const TargetSpec& target,
                                        std::span<const std::uint8_t> input) {
  switch (target.family) {
    case TargetFamily::kBranchyCrash:
      if (!input.empty()) return 0;
      return std::nullopt;
    case TargetFamily::kSharedCrashPaths:
      if (input.size() >= 2 && (input[0] == 'f' || input[0] == 'g')) return 0;
      return std::nullopt;
    case TargetFamily::kVersionedFamily: {
      if (input.size() < 3 || input[1] != '!') return std::nullopt;
      const int kind = static_cast<int>(input[0]) - 'A';
      if (kind < 0 || kind >= static_cast<int>(versioned::kNumBugs)) {
        return std::nullopt;
      }
      return static_cast<std::uint32_t>(kind);
    }
    case TargetFamily::kExternalSubprocess:
      return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace fuzzeval::core
