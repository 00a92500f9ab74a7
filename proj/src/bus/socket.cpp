#include "vcit/bus/socket.hpp"

#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace vcit::bus {

namespace {

constexpr std::size_t kMaxBuffered = 1u << 16;

struct AddrInfo {
  addrinfo* list = nullptr;
  ~AddrInfo() {
    if (list) freeaddrinfo(list);
  }
};

void resolve(const Address& address, bool passive, AddrInfo& out) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  if (passive) hints.ai_flags = AI_PASSIVE;
  const auto port = std::to_string(address.port);
  const int rc = getaddrinfo(address.host.c_str(), port.c_str(), &hints, &out.list);
  if (rc != 0)
    throw Error(Errc::Transport, "cannot resolve " + address.host + ": " + gai_strerror(rc));
}

std::string where(const Address& a) { return a.host + ":" + std::to_string(a.port); }

}  // namespace

SocketStream::~SocketStream() {
  if (fd_ >= 0) ::close(fd_);
}

std::optional<std::string> SocketStream::read_line() {
  for (;;) {
    auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    if (buffer_.size() > kMaxBuffered) throw Error(Errc::Transport, "line too long");
    char chunk[4096];
    const auto n = ::recv(fd_, chunk, sizeof chunk, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      if (buffer_.empty()) return std::nullopt;
      std::string line;
      line.swap(buffer_);
      return line;
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

void SocketStream::write(std::string_view bytes) {
  while (!bytes.empty()) {
    const auto n = ::send(fd_, bytes.data(), bytes.size(), MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n < 0) throw Error(Errc::Transport, std::string("send: ") + std::strerror(errno));
    bytes.remove_prefix(static_cast<std::size_t>(n));
  }
}

std::string SocketStream::read_to_end() {
  std::string out;
  out.swap(buffer_);
  char chunk[4096];
  for (;;) {
    const auto n = ::recv(fd_, chunk, sizeof chunk, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    out.append(chunk, static_cast<std::size_t>(n));
  }
  return out;
}

void SocketStream::shutdown_write() { ::shutdown(fd_, SHUT_WR); }

std::unique_ptr<SocketStream> connect_tcp(const Address& address) {
  AddrInfo info;
  resolve(address, false, info);
  int last_errno = 0;
  for (auto* ai = info.list; ai; ai = ai->ai_next) {
    const int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) {
      last_errno = errno;
      continue;
    }
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) return std::make_unique<SocketStream>(fd);
    last_errno = errno;
    ::close(fd);
  }
  throw Error(Errc::Transport, "cannot connect to " + where(address) + ": " + std::strerror(last_errno));
}

TcpServer::TcpServer(ProberFarm& farm, const Address& address) : farm_(&farm) {
  AddrInfo info;
  resolve(address, true, info);
  int last_errno = 0;
  for (auto* ai = info.list; ai; ai = ai->ai_next) {
    const int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) {
      last_errno = errno;
      continue;
    }
    const int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(fd, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd, 16) == 0) {
      listen_fd_ = fd;
      break;
    }
    last_errno = errno;
    ::close(fd);
  }
  if (listen_fd_ < 0)
    throw Error(Errc::Transport, "cannot listen on " + where(address) + ": " + std::strerror(last_errno));
  sockaddr_storage bound{};
  socklen_t len = sizeof bound;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len);
  if (bound.ss_family == AF_INET6)
    port_ = ntohs(reinterpret_cast<sockaddr_in6*>(&bound)->sin6_port);
  else
    port_ = ntohs(reinterpret_cast<sockaddr_in*>(&bound)->sin_port);
}

TcpServer::~TcpServer() {
  request_stop();
  {
    std::lock_guard lock(mutex_);
    for (int fd : open_fds_) ::shutdown(fd, SHUT_RDWR);
  }
  for (auto& t : workers_)
    if (t.joinable()) t.join();
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

void TcpServer::run() {
  while (!stop_.load()) {
    pollfd p{listen_fd_, POLLIN, 0};
    const int rc = ::poll(&p, 1, 50);
    if (rc <= 0 || !(p.revents & POLLIN)) continue;
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    std::lock_guard lock(mutex_);
    open_fds_.push_back(fd);
    workers_.emplace_back([this, fd] { handle(fd); });
  }
  {
    std::lock_guard lock(mutex_);
    for (int fd : open_fds_) ::shutdown(fd, SHUT_RDWR);
  }
  for (auto& t : workers_)
    if (t.joinable()) t.join();
  workers_.clear();
}

void TcpServer::handle(int fd) {
  auto stream = std::make_unique<SocketStream>(fd);
  try {
    serve(*farm_, *stream);
    // Let the peer read every reply before the close: drain what it still sends.
    stream->shutdown_write();
    timeval tv{2, 0};
    ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
    stream->read_to_end();
  } catch (const std::exception&) {
  }
  std::lock_guard lock(mutex_);
  std::erase(open_fds_, fd);
  stream.reset();
}

}  // namespace vcit::bus
