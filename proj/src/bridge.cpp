#include "skelfreq/bridge.hpp"

#include <poll.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>
#include <json.hpp>

namespace skelfreq {

BridgeClassifier::BridgeClassifier(BridgeLaunchSpec spec) : spec_(std::move(spec)) {
  require(!spec_.argv.empty(), ErrorKind::parameter, "bridge launch spec has no program");
  int fds[2];
  require(::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, fds) == 0, ErrorKind::bridge,
          std::string("socketpair failed: ") + std::strerror(errno));

  std::vector<char*> argv;
  for (auto& a : spec_.argv) argv.push_back(a.data());
  argv.push_back(nullptr);

  const pid_t pid = ::fork();
  if (pid < 0) {
    ::close(fds[0]);
    ::close(fds[1]);
    fail(ErrorKind::bridge, std::string("fork failed: ") + std::strerror(errno));
  }
  if (pid == 0) {
    // child: the socket end becomes stdin and stdout
    ::dup2(fds[1], STDIN_FILENO);
    ::dup2(fds[1], STDOUT_FILENO);
    ::execvp(argv[0], argv.data());
    ::_exit(127);
  }
  ::close(fds[1]);
  fd_ = fds[0];
  pid_ = pid;

  try {
    const auto reply = exchange(R"({"op":"hello"})");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(reply);
    } catch (const nlohmann::json::exception&) {
      fail(ErrorKind::bridge, "malformed handshake reply: " + reply);
    }
    require(j.is_object() && j.value("ok", false), ErrorKind::bridge, "handshake rejected: " + reply);
    require(j.contains("classes") && j["classes"].is_number_integer() && j["classes"].get<long long>() >= 1,
            ErrorKind::bridge, "handshake reply lacks a positive class count: " + reply);
    classes_ = j["classes"].get<std::size_t>();
  } catch (...) {
    shutdown();
    throw;
  }
}

BridgeClassifier::~BridgeClassifier() { shutdown(); }

void BridgeClassifier::shutdown() noexcept {
  if (fd_ >= 0) {
    ::shutdown(fd_, SHUT_WR);
    ::close(fd_);
    fd_ = -1;
  }
  if (pid_ > 0) {
    // give the child a moment to exit on EOF, then make sure it is gone
    int status = 0;
    for (int i = 0; i < 50; ++i) {
      if (::waitpid(pid_, &status, WNOHANG) == pid_) {
        pid_ = -1;
        return;
      }
      ::usleep(10000);
    }
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, &status, 0);
    pid_ = -1;
  }
}

std::string BridgeClassifier::describe_exit() const {
  int status = 0;
  if (pid_ > 0 && ::waitpid(pid_, &status, WNOHANG) == pid_) {
    const_cast<BridgeClassifier*>(this)->pid_ = -1;
    if (WIFEXITED(status)) return "child exited with status " + std::to_string(WEXITSTATUS(status));
    if (WIFSIGNALED(status)) return "child killed by signal " + std::to_string(WTERMSIG(status));
  }
  return "child closed its output";
}

std::string BridgeClassifier::read_line() const {
  const auto deadline = std::chrono::steady_clock::now() + spec_.timeout;
  for (;;) {
    if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    const auto remaining =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (remaining.count() <= 0) fail(ErrorKind::bridge, "timed out waiting for a reply");
    pollfd p{fd_, POLLIN, 0};
    const int ready = ::poll(&p, 1, static_cast<int>(remaining.count()));
    if (ready < 0 && errno == EINTR) continue;
    if (ready == 0) fail(ErrorKind::bridge, "timed out waiting for a reply");
    char chunk[65536];
    const ssize_t got = ::read(fd_, chunk, sizeof(chunk));
    if (got < 0 && errno == EINTR) continue;
    if (got <= 0) {
      ::usleep(20000);
      fail(ErrorKind::bridge, describe_exit());
    }
    buffer_.append(chunk, static_cast<std::size_t>(got));
  }
}

std::string BridgeClassifier::exchange(const std::string& request) const {
  const std::string line = request + "\n";
  std::size_t sent = 0;
  while (sent < line.size()) {
    const ssize_t n = ::send(fd_, line.data() + sent, line.size() - sent, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) fail(ErrorKind::bridge, "write to child failed: " + describe_exit());
    sent += static_cast<std::size_t>(n);
  }
  return read_line();
}

std::string BridgeClassifier::encode_predict(std::span<const SignalTriple> batch) {
  std::size_t nodes = 0;
  std::size_t frames = 0;
  if (!batch.empty()) {
    nodes = batch.front()[0].rows();
    frames = batch.front()[0].cols();
  }
  nlohmann::json data = nlohmann::json::array();
  for (const auto& item : batch) {
    for (const auto& ch : item) {
      require(ch.rows() == nodes && ch.cols() == frames, ErrorKind::shape, "bridge batch must share one shape");
      for (const double v : ch.values()) data.push_back(v);
    }
  }
  nlohmann::json req{{"op", "predict"}, {"shape", {batch.size(), 3, nodes, frames}}, {"data", std::move(data)}};
  return req.dump();
}

std::vector<Scores> BridgeClassifier::decode_scores(const std::string& line, std::size_t batch, std::size_t classes) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception&) {
    fail(ErrorKind::bridge, "malformed reply line: " + line.substr(0, 200));
  }
  require(j.is_object() && j.contains("ok") && j["ok"].is_boolean(), ErrorKind::bridge,
          "reply lacks an ok flag: " + line.substr(0, 200));
  if (!j["ok"].get<bool>()) {
    const auto err = j.contains("error") ? j["error"].dump() : std::string("(no message)");
    fail(ErrorKind::bridge, "classifier reported an error: " + err);
  }
  require(j.contains("scores") && j["scores"].is_array() && j["scores"].size() == batch, ErrorKind::bridge,
          "reply has the wrong number of score vectors");
  std::vector<Scores> out;
  out.reserve(batch);
  for (const auto& row : j["scores"]) {
    require(row.is_array() && row.size() == classes, ErrorKind::bridge, "score vector has the wrong length");
    Scores s;
    for (const auto& v : row) {
      require(v.is_number() && std::isfinite(v.get<double>()), ErrorKind::bridge, "non-numeric score");
      s.push_back(v.get<double>());
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Scores> BridgeClassifier::predict(std::span<const SignalTriple> batch) const {
  const auto request = encode_predict(batch);
  std::lock_guard lock(mutex_);
  return decode_scores(exchange(request), batch.size(), classes_);
}

std::string BridgeClassifier::id() const { return "bridge:" + spec_.argv.front(); }

std::unique_ptr<Classifier> bridge_classifier(BridgeLaunchSpec spec) {
  return std::make_unique<BridgeClassifier>(std::move(spec));
}

}  // namespace skelfreq
