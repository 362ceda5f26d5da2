#include "stream_server.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <condition_variable>
#include <cstring>

#include <spdlog/spdlog.h>

#include "tangible/error.hpp"

namespace tangible::cli {

struct StreamServer::Client {
  int fd = -1;
  std::mutex mutex;
  std::condition_variable wake;
  std::string pending;
  bool closing = false;
  bool dead = false;
  bool sending = false;
  std::thread writer;

  void run() {
    std::string chunk;
    for (;;) {
      {
        std::unique_lock lock(mutex);
        wake.wait(lock, [&] { return !pending.empty() || closing || dead; });
        if (dead || pending.empty()) return;
        chunk.swap(pending);
        sending = true;
      }
      std::size_t sent = 0;
      while (sent < chunk.size()) {
        const ssize_t n = ::send(fd, chunk.data() + sent, chunk.size() - sent, MSG_NOSIGNAL);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) {
          std::lock_guard lock(mutex);
          dead = true;
          sending = false;
          return;
        }
        sent += static_cast<std::size_t>(n);
      }
      chunk.clear();
      std::lock_guard lock(mutex);
      sending = false;
    }
  }
};

std::pair<std::string, std::uint16_t> parse_endpoint(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos || colon + 1 == text.size()) {
    throw Error(ErrorCode::InvalidArgument, "expected host:port, got '" + text + "'");
  }
  std::string host = text.substr(0, colon);
  if (host.empty()) host = "0.0.0.0";
  int port = -1;
  try {
    std::size_t used = 0;
    port = std::stoi(text.substr(colon + 1), &used);
    if (used != text.size() - colon - 1) port = -1;
  } catch (const std::exception&) {
    port = -1;
  }
  if (port < 0 || port > 65535) {
    throw Error(ErrorCode::InvalidArgument, "bad port in '" + text + "'");
  }
  return {host, static_cast<std::uint16_t>(port)};
}

StreamServer::StreamServer(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* found = nullptr;
  const std::string service = std::to_string(port);
  if (::getaddrinfo(host.c_str(), service.c_str(), &hints, &found) != 0 || !found) {
    throw Error(ErrorCode::IoError, "cannot resolve listen host '" + host + "'");
  }
  listen_fd_ = ::socket(found->ai_family, found->ai_socktype, found->ai_protocol);
  const int yes = 1;
  const bool ok = listen_fd_ >= 0 &&
                  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes)) == 0 &&
                  ::bind(listen_fd_, found->ai_addr, found->ai_addrlen) == 0 &&
                  ::listen(listen_fd_, 16) == 0;
  ::freeaddrinfo(found);
  if (!ok) {
    const std::string why = std::strerror(errno);
    if (listen_fd_ >= 0) ::close(listen_fd_);
    throw Error(ErrorCode::IoError, "cannot listen on " + host + ":" + service + ": " + why);
  }
  sockaddr_in bound{};
  socklen_t len = sizeof(bound);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len);
  port_ = ntohs(bound.sin_port);
  acceptor_ = std::thread([this] { accept_loop(); });
  spdlog::info("stream listening on {}:{}", host, port_);
}

StreamServer::~StreamServer() { shutdown(std::chrono::milliseconds(0)); }

void StreamServer::accept_loop() {
  while (running_) {
    pollfd pfd{listen_fd_, POLLIN, 0};
    if (::poll(&pfd, 1, 20) <= 0 || !(pfd.revents & POLLIN)) continue;
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    auto client = std::make_shared<Client>();
    client->fd = fd;
    client->writer = std::thread([c = client.get()] { c->run(); });
    std::lock_guard lock(clients_mutex_);
    clients_.push_back(std::move(client));
    spdlog::debug("stream client connected ({} total)", clients_.size());
  }
}

void StreamServer::publish(const std::string& line) {
  std::lock_guard lock(clients_mutex_);
  for (auto& c : clients_) {
    std::lock_guard client_lock(c->mutex);
    if (c->dead || c->closing) continue;
    if (c->pending.size() + line.size() + 1 > kMaxClientBuffer) {
      c->dead = true;
      ::shutdown(c->fd, SHUT_RDWR);
      ++dropped_;
      spdlog::warn("stream client dropped: backlog above {} bytes", kMaxClientBuffer);
    } else {
      c->pending += line;
      c->pending += '\n';
    }
    c->wake.notify_one();
  }
}

std::size_t StreamServer::client_count() const {
  std::lock_guard lock(clients_mutex_);
  std::size_t live = 0;
  for (const auto& c : clients_) {
    std::lock_guard client_lock(c->mutex);
    if (!c->dead) ++live;
  }
  return live;
}

void StreamServer::shutdown(std::chrono::milliseconds timeout) {
  if (running_.exchange(false) && acceptor_.joinable()) acceptor_.join();
  std::vector<std::shared_ptr<Client>> clients;
  {
    std::lock_guard lock(clients_mutex_);
    clients.swap(clients_);
  }
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (auto& c : clients) {
    {
      std::lock_guard lock(c->mutex);
      c->closing = true;
    }
    c->wake.notify_one();
  }
  for (auto& c : clients) {
    // Writers that cannot drain before the deadline are cut off.
    for (;;) {
      {
        std::lock_guard lock(c->mutex);
        if ((c->pending.empty() && !c->sending) || c->dead) break;
      }
      if (std::chrono::steady_clock::now() >= deadline) {
        std::lock_guard lock(c->mutex);
        c->dead = true;
        ::shutdown(c->fd, SHUT_RDWR);
        break;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    c->wake.notify_one();
    if (c->writer.joinable()) c->writer.join();
    ::close(c->fd);
  }
  if (listen_fd_ >= 0) {
    ::close(listen_fd_);
    listen_fd_ = -1;
  }
}

}  // namespace tangible::cli
