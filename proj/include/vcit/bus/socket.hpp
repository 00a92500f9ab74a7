#pragma once

#include <atomic>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "vcit/bus/farm.hpp"

namespace vcit::bus {

class SocketStream : public LineStream {
 public:
  explicit SocketStream(int fd) : fd_(fd) {}
  ~SocketStream() override;
  SocketStream(const SocketStream&) = delete;
  SocketStream& operator=(const SocketStream&) = delete;

  std::optional<std::string> read_line() override;
  void write(std::string_view bytes) override;

  /// Everything the peer sends until it closes.
  std::string read_to_end();
  void shutdown_write();
  int fd() const { return fd_; }

 private:
  int fd_;
  std::string buffer_;
};

std::unique_ptr<SocketStream> connect_tcp(const Address& address);

/// TCP listener with one thread per connection.
class TcpServer {
 public:
  TcpServer(ProberFarm& farm, const Address& address);  // binds; throws Transport
  ~TcpServer();
  TcpServer(const TcpServer&) = delete;
  TcpServer& operator=(const TcpServer&) = delete;

  std::uint16_t port() const { return port_; }

  /// Accepts until request_stop(), then closes open connections and joins.
  void run();
  /// Safe to call from a signal handler.
  void request_stop() noexcept { stop_.store(true); }

 private:
  void handle(int fd);

  ProberFarm* farm_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stop_{false};
  std::mutex mutex_;
  std::vector<int> open_fds_;
  std::vector<std::thread> workers_;
};

}  // namespace vcit::bus
