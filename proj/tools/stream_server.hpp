#pragma once

// One-way TCP fan-out of newline-delimited records. publish() never blocks
// on the network: each client has its own buffer drained by a writer
// thread, and a client whose backlog exceeds kMaxClientBuffer is dropped.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace tangible::cli {

class StreamServer {
 public:
  static constexpr std::size_t kMaxClientBuffer = std::size_t{1} << 20;

  // Binds and listens immediately; port 0 picks an ephemeral port.
  StreamServer(const std::string& host, std::uint16_t port);
  ~StreamServer();

  StreamServer(const StreamServer&) = delete;
  StreamServer& operator=(const StreamServer&) = delete;

  std::uint16_t port() const noexcept { return port_; }

  // Queues `line` plus a trailing LF for every connected client.
  void publish(const std::string& line);

  std::size_t client_count() const;
  std::size_t dropped_count() const noexcept { return dropped_.load(); }

  // Stops accepting, lets writers drain for up to `timeout`, closes sockets.
  void shutdown(std::chrono::milliseconds timeout = std::chrono::milliseconds(2000));

 private:
  struct Client;

  void accept_loop();

  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> running_{true};
  std::atomic<std::size_t> dropped_{0};
  std::thread acceptor_;
  mutable std::mutex clients_mutex_;
  std::vector<std::shared_ptr<Client>> clients_;
};

// Parses "host:port"; throws tangible::Error(InvalidArgument).
std::pair<std::string, std::uint16_t> parse_endpoint(const std::string& text);

}  // namespace tangible::cli
