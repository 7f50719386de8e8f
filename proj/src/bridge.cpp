#include "geoshap/bridge.hpp"

#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <utility>

#include <json.hpp>

#include "geoshap/errors.hpp"

extern char** environ;

namespace geoshap {
namespace {

using nlohmann::json;

json parse_frame(const std::string& line) {
  json frame;
  try {
    frame = json::parse(line);
  } catch (const json::exception&) {
    throw ProtocolError("malformed bridge frame: " + line);
  }
  if (!frame.is_object() || !frame.contains("type") ||
      !frame["type"].is_string()) {
    throw ProtocolError("bridge frame without a type: " + line);
  }
  return frame;
}

}  // namespace

BridgePredictor::BridgePredictor(std::string command, int features)
    : command_(std::move(command)), features_(features) {}

std::unique_ptr<BridgePredictor> BridgePredictor::connect(
    const std::string& command, int features, std::vector<std::string> names,
    std::chrono::milliseconds timeout) {
  if (features < 1) throw ConfigError("bridge arity must be positive");
  std::unique_ptr<BridgePredictor> bridge(new BridgePredictor(command, features));
  bridge->launch();
  try {
    bridge->handshake(names, timeout);
  } catch (...) {
    bridge->close();
    throw;
  }
  bridge->reader_ = std::thread([b = bridge.get()] { b->reader_loop(); });
  return bridge;
}

void BridgePredictor::launch() {
  int fds[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, fds) != 0) {
    throw PredictorError(std::string("socketpair failed: ") + std::strerror(errno));
  }
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, fds[1], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, fds[1], STDOUT_FILENO);

  std::string shell = "/bin/sh";
  std::string flag = "-c";
  char* argv[] = {shell.data(), flag.data(), command_.data(), nullptr};
  const int rc = ::posix_spawn(&pid_, "/bin/sh", &actions, nullptr, argv, environ);
  posix_spawn_file_actions_destroy(&actions);
  ::close(fds[1]);
  if (rc != 0) {
    ::close(fds[0]);
    throw PredictorError("cannot launch bridge command '" + command_ +
                         "': " + std::strerror(rc));
  }
  fd_ = fds[0];
}

void BridgePredictor::send_line(const std::string& line) const {
  std::lock_guard<std::mutex> lock(write_mutex_);
  const std::string data = line + "\n";
  std::size_t sent = 0;
  while (sent < data.size()) {
    const ssize_t n = ::send(fd_, data.data() + sent, data.size() - sent,
                             MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw PredictorError("bridge write failed: " + std::string(std::strerror(errno)));
    }
    sent += static_cast<std::size_t>(n);
  }
}

std::optional<std::string> BridgePredictor::read_line(int timeout_ms) {
  const auto deadline =
      std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
  while (true) {
    const auto pos = read_buffer_.find('\n');
    if (pos != std::string::npos) {
      std::string line = read_buffer_.substr(0, pos);
      read_buffer_.erase(0, pos + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    int wait = -1;
    if (timeout_ms >= 0) {
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
          deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) throw PredictorError("timeout");
      wait = static_cast<int>(left.count());
    }
    pollfd pfd{fd_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, wait);
    if (ready < 0) {
      if (errno == EINTR) continue;
      throw PredictorError("bridge poll failed: " + std::string(std::strerror(errno)));
    }
    if (ready == 0) continue;
    char chunk[65536];
    const ssize_t n = ::read(fd_, chunk, sizeof(chunk));
    if (n < 0) {
      if (errno == EINTR) continue;
      throw PredictorError("bridge read failed: " + std::string(std::strerror(errno)));
    }
    if (n == 0) return std::nullopt;
    read_buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

void BridgePredictor::handshake(const std::vector<std::string>& names,
                                std::chrono::milliseconds timeout) {
  json hello = {{"type", "hello"},
                {"protocol", kProtocolVersion},
                {"features", features_},
                {"names", names}};
  send_line(hello.dump());

  std::optional<std::string> line;
  try {
    line = read_line(static_cast<int>(timeout.count()));
  } catch (const PredictorError& e) {
    if (std::string(e.what()) == "timeout") {
      throw PredictorError("bridge handshake timed out after " +
                           std::to_string(timeout.count()) + " ms");
    }
    throw;
  }
  if (!line) throw PredictorError("bridge process exited during handshake");
  const json ready = parse_frame(*line);
  if (ready["type"] == "error") {
    throw PredictorError("bridge refused handshake: " +
                         ready.value("message", std::string("(no message)")));
  }
  if (ready["type"] != "ready") {
    throw ProtocolError("expected a ready frame, got: " + *line);
  }
  if (!ready.contains("features") || !ready["features"].is_number_integer()) {
    throw ProtocolError("ready frame lacks an integer feature count: " + *line);
  }
  const int advertised = ready["features"].get<int>();
  if (advertised != features_) {
    throw PredictorError("bridge arity mismatch: server expects " +
                         std::to_string(advertised) + " features, explainer has " +
                         std::to_string(features_));
  }
  parallel_ = ready.value("parallel", false);
}

void BridgePredictor::fail_all(const std::string& message, bool protocol) {
  std::lock_guard<std::mutex> lock(state_mutex_);
  if (fatal_.empty()) {
    fatal_ = message;
    fatal_is_protocol_ = protocol;
  }
  state_cv_.notify_all();
}

void BridgePredictor::throw_fatal() const {
  if (fatal_is_protocol_) throw ProtocolError(fatal_);
  throw PredictorError(fatal_);
}

void BridgePredictor::reader_loop() {
  try {
    while (true) {
      const auto line = read_line(-1);
      if (!line) {
        fail_all("bridge process closed its output", false);
        return;
      }
      if (line->empty()) continue;
      const json frame = parse_frame(*line);
      const std::string type = frame["type"];
      if (type != "prediction" && type != "error") {
        throw ProtocolError("unexpected bridge frame type '" + type + "': " + *line);
      }
      if (!frame.contains("id") || !frame["id"].is_number_integer()) {
        throw ProtocolError("bridge frame without an integer id: " + *line);
      }
      const auto id = frame["id"].get<std::int64_t>();
      Response response;
      if (type == "prediction") {
        if (!frame.contains("y") || !frame["y"].is_array()) {
          throw ProtocolError("prediction frame without a y array: " + *line);
        }
        response.ok = true;
        for (const auto& v : frame["y"]) {
          if (!v.is_number()) throw ProtocolError("non-numeric prediction: " + *line);
          response.y.push_back(v.get<double>());
        }
      } else {
        response.message = frame.value("message", std::string("(no message)"));
      }
      std::lock_guard<std::mutex> lock(state_mutex_);
      auto it = responses_.find(id);
      if (it == responses_.end()) {
        throw ProtocolError("bridge answered unknown request id " +
                            std::to_string(id) + ": " + *line);
      }
      response.answered = true;
      it->second = std::move(response);
      state_cv_.notify_all();
    }
  } catch (const ProtocolError& e) {
    fail_all(e.what(), true);
  } catch (const std::exception& e) {
    fail_all(e.what(), false);
  }
}

Vector BridgePredictor::predict(const Matrix& x) const {
  if (x.cols() != features_) {
    throw PredictorError("bridge expects " + std::to_string(features_) +
                         " columns, got " + std::to_string(x.cols()));
  }
  std::unique_lock<std::mutex> serial(request_mutex_, std::defer_lock);
  if (!parallel_) serial.lock();

  std::int64_t id = 0;
  {
    std::lock_guard<std::mutex> lock(state_mutex_);
    if (!fatal_.empty()) throw_fatal();
    if (closed_) throw PredictorError("bridge is closed");
    id = next_id_++;
    responses_.emplace(id, Response{});
  }

  json rows = json::array();
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < x.cols(); ++j) row.push_back(x(i, j));
    rows.push_back(std::move(row));
  }
  const json frame = {{"type", "predict"}, {"id", id}, {"x", std::move(rows)}};
  send_line(frame.dump());

  Response response;
  {
    std::unique_lock<std::mutex> lock(state_mutex_);
    state_cv_.wait(lock, [&] {
      const auto& r = responses_.at(id);
      return r.answered || !fatal_.empty();
    });
    response = std::move(responses_.at(id));
    responses_.erase(id);
    if (!response.answered) throw_fatal();
  }
  if (!response.ok) {
    throw PredictorError("bridge error for request " + std::to_string(id) +
                         ": " + response.message);
  }
  if (static_cast<Eigen::Index>(response.y.size()) != x.rows()) {
    throw ProtocolError("bridge returned " + std::to_string(response.y.size()) +
                        " predictions for " + std::to_string(x.rows()) + " rows");
  }
  return Eigen::Map<const Vector>(response.y.data(),
                                  static_cast<Eigen::Index>(response.y.size()));
}

int BridgePredictor::close() {
  {
    std::lock_guard<std::mutex> lock(state_mutex_);
    if (closed_) return exit_status_;
    closed_ = true;
  }
  if (fd_ >= 0) {
    try {
      send_line(json{{"type", "shutdown"}}.dump());
    } catch (const std::exception&) {
      // Child already gone; reaping below reports its status.
    }
    ::shutdown(fd_, SHUT_WR);
  }
  if (pid_ > 0) {
    int status = 0;
    pid_t done = 0;
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(5);
    while ((done = ::waitpid(pid_, &status, WNOHANG)) == 0 &&
           std::chrono::steady_clock::now() < deadline) {
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    if (done == 0) {
      ::kill(pid_, SIGKILL);
      ::waitpid(pid_, &status, 0);
      exit_status_ = -1;
    } else if (done > 0 && WIFEXITED(status)) {
      exit_status_ = WEXITSTATUS(status);
    }
    pid_ = -1;
  }
  if (reader_.joinable()) reader_.join();
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
  return exit_status_;
}

BridgePredictor::~BridgePredictor() {
  try {
    close();
  } catch (...) {
  }
}

std::unique_ptr<Predictor> bridge_connect(const std::string& command,
                                          int features,
                                          std::vector<std::string> names,
                                          std::chrono::milliseconds timeout) {
  return BridgePredictor::connect(command, features, std::move(names), timeout);
}

}  // namespace geoshap
