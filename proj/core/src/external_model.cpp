// Copyright 2026 The gsa-shapley Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gsa/error.hpp"
#include "gsa/models.hpp"

namespace gsa {
namespace {

// Unlinks the file and closes the descriptor on scope exit.
class TempFile {
 public:
  TempFile() {
    auto pattern = (std::filesystem::temp_directory_path() / "gsa-ext-XXXXXX").string();
    std::vector<char> buf(pattern.begin(), pattern.end());
    buf.push_back('\0');
    fd_ = ::mkstemp(buf.data());
    if (fd_ < 0) {
      throw ExternalModelError("cannot create temporary file: " +
                                   std::string(std::strerror(errno)),
                               "");
    }
    path_ = buf.data();
  }
  TempFile(const TempFile&) = delete;
  TempFile& operator=(const TempFile&) = delete;
  ~TempFile() {
    if (fd_ >= 0) ::close(fd_);
    ::unlink(path_.c_str());
  }

  int fd() const { return fd_; }
  const std::string& path() const { return path_; }

 private:
  int fd_ = -1;
  std::string path_;
};

void write_all(int fd, const std::string& data) {
  std::size_t done = 0;
  while (done < data.size()) {
    const ssize_t n = ::write(fd, data.data() + done, data.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ExternalModelError("write to temporary file failed", "");
    }
    done += static_cast<std::size_t>(n);
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void append_number(std::string& out, double v) {
  std::array<char, 32> buf;
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  out.append(buf.data(), ptr);
}

std::string to_csv(const Matrix& x) {
  std::string out;
  out.reserve(static_cast<std::size_t>(x.size()) * 24 + 64);
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    if (c > 0) out.push_back(',');
    out += "x" + std::to_string(c + 1);
  }
  out.push_back('\n');
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      if (c > 0) out.push_back(',');
      append_number(out, x(r, c));
    }
    out.push_back('\n');
  }
  return out;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

Vector evaluate_external(const ExternalModel& model, const Matrix& x) {
  if (model.command.empty()) {
    throw ExternalModelError("external model: empty command", "");
  }
  TempFile input;
  TempFile errors;
  write_all(input.fd(), to_csv(x));
  if (::lseek(input.fd(), 0, SEEK_SET) != 0) {
    throw ExternalModelError("cannot rewind temporary input file", "");
  }

  int out_pipe[2];
  if (::pipe(out_pipe) != 0) {
    throw ExternalModelError("pipe() failed: " + std::string(std::strerror(errno)), "");
  }
  const std::string workdir = model.workdir.string();
  const pid_t pid = ::fork();
  if (pid < 0) {
    ::close(out_pipe[0]);
    ::close(out_pipe[1]);
    throw ExternalModelError("fork() failed: " + std::string(std::strerror(errno)), "");
  }
  if (pid == 0) {
    // Child: only async-signal-safe calls from here on.
    ::dup2(input.fd(), STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::dup2(errors.fd(), STDERR_FILENO);
    ::close(out_pipe[0]);
    ::close(out_pipe[1]);
    if (!workdir.empty() && ::chdir(workdir.c_str()) != 0) ::_exit(126);
    ::execl("/bin/sh", "sh", "-c", model.command.c_str(),
            static_cast<char*>(nullptr));
    ::_exit(127);
  }

  ::close(out_pipe[1]);
  std::string output;
  std::array<char, 1 << 16> buf;
  for (;;) {
    const ssize_t n = ::read(out_pipe[0], buf.data(), buf.size());
    if (n > 0) {
      output.append(buf.data(), static_cast<std::size_t>(n));
    } else if (n == 0) {
      break;
    } else if (errno != EINTR) {
      break;
    }
  }
  ::close(out_pipe[0]);
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  const std::string captured = read_file(errors.path());

  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    const std::string how = WIFEXITED(status)
                                ? "exited with code " + std::to_string(WEXITSTATUS(status))
                                : "was terminated by a signal";
    throw ExternalModelError("external model '" + model.command + "' " + how, captured);
  }

  Vector y(x.rows());
  std::size_t count = 0;
  std::string_view rest(output);
  while (!rest.empty()) {
    const auto eol = rest.find('\n');
    std::string_view line = rest.substr(0, eol);
    rest = eol == std::string_view::npos ? std::string_view{} : rest.substr(eol + 1);
    line = trim(line);
    if (line.empty() && rest.empty()) break;
    if (count >= static_cast<std::size_t>(x.rows())) {
      throw ExternalModelError("external model produced more than " +
                                   std::to_string(x.rows()) + " output lines",
                               captured);
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
    if (ec != std::errc() || ptr != line.data() + line.size()) {
      throw ExternalModelError("external model: malformed output line " +
                                   std::to_string(count + 1) + ": '" + std::string(line) + "'",
                               captured);
    }
    y(static_cast<Eigen::Index>(count++)) = v;
  }
  if (count != static_cast<std::size_t>(x.rows())) {
    throw ExternalModelError("external model produced " + std::to_string(count) +
                                 " outputs for " + std::to_string(x.rows()) + " inputs",
                             captured);
  }
  require_finite(y, "external");
  return y;
}

}  // namespace gsa
