#pragma once

#include <sys/types.h>

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "geoshap/models.hpp"

namespace geoshap {

// Client side of the model bridge: a child process speaking newline-delimited
// JSON on its standard streams.
//
//   -> {"type":"hello","protocol":1,"features":p,"names":[...]}
//   <- {"type":"ready","features":p,"parallel":bool}
//   -> {"type":"predict","id":k,"x":[[...],...]}
//   <- {"type":"prediction","id":k,"y":[...]}  or
//      {"type":"error","id":k,"message":"..."}
//   -> {"type":"shutdown"}
//
// Requests are serialized unless the server advertised parallel capability,
// in which case several may be in flight and responses are matched by id.
class BridgePredictor final : public Predictor {
 public:
  static constexpr int kProtocolVersion = 1;

  // Launches `command` through /bin/sh and performs the handshake. Throws
  // PredictorError on timeout or arity mismatch, ProtocolError on malformed
  // frames.
  static std::unique_ptr<BridgePredictor> connect(
      const std::string& command, int features,
      std::vector<std::string> names = {},
      std::chrono::milliseconds timeout = std::chrono::seconds(30));

  ~BridgePredictor() override;
  BridgePredictor(const BridgePredictor&) = delete;
  BridgePredictor& operator=(const BridgePredictor&) = delete;

  Vector predict(const Matrix& x) const override;
  int arity() const override { return features_; }
  std::string descriptor() const override { return "cmd:" + command_; }
  bool concurrency_safe() const override { return parallel_; }

  // Sends the shutdown frame and reaps the child. Idempotent. Returns the
  // child's exit status (or -1 if it had to be killed).
  int close();

 private:
  struct Response {
    bool answered = false;
    bool ok = false;
    std::vector<double> y;
    std::string message;
  };

  BridgePredictor(std::string command, int features);

  void launch();
  void handshake(const std::vector<std::string>& names,
                 std::chrono::milliseconds timeout);
  void send_line(const std::string& line) const;
  std::optional<std::string> read_line(int timeout_ms);
  void reader_loop();
  void fail_all(const std::string& message, bool protocol);
  [[noreturn]] void throw_fatal() const;

  std::string command_;
  int features_;
  bool parallel_ = false;
  pid_t pid_ = -1;
  int fd_ = -1;
  std::string read_buffer_;
  std::thread reader_;
  bool closed_ = false;
  int exit_status_ = -1;

  mutable std::mutex write_mutex_;
  mutable std::mutex request_mutex_;
  mutable std::mutex state_mutex_;
  mutable std::condition_variable state_cv_;
  mutable std::map<std::int64_t, Response> responses_;
  mutable std::int64_t next_id_ = 1;
  std::string fatal_;
  bool fatal_is_protocol_ = false;
};

std::unique_ptr<Predictor> bridge_connect(
    const std::string& command, int features,
    std::vector<std::string> names = {},
    std::chrono::milliseconds timeout = std::chrono::seconds(30));

}  // namespace geoshap
