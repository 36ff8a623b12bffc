#pragma once

#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

// Minimal blocking socket clients for exercising the broadcast server.

namespace limrsf::testing {

inline sockaddr_in loopback_address(std::uint16_t port)
{
    sockaddr_in a{};
    a.sin_family = AF_INET;
    a.sin_port = htons(port);
    a.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    return a;
}

class RawClient
{
public:
    explicit RawClient(std::uint16_t port)
    {
        fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
        const sockaddr_in a = loopback_address(port);
        if (fd_ < 0 || ::connect(fd_, reinterpret_cast<const sockaddr*>(&a), sizeof a) != 0)
            throw std::runtime_error("connect failed");
    }
    RawClient(RawClient&& o) noexcept : fd_(std::exchange(o.fd_, -1)), buffer_(std::move(o.buffer_)) {}
    RawClient& operator=(RawClient&&) = delete;
    ~RawClient()
    {
        if (fd_ >= 0)
            ::close(fd_);
    }

    void write(const std::string& bytes)
    {
        std::size_t at = 0;
        while (at < bytes.size()) {
            const ssize_t n = ::send(fd_, bytes.data() + at, bytes.size() - at, MSG_NOSIGNAL);
            if (n <= 0)
                throw std::runtime_error("send failed");
            at += static_cast<std::size_t>(n);
        }
    }

    /// Whatever is buffered, else waits for at least one byte. Empty on EOF.
    std::string read_some(int timeout_ms = 10000)
    {
        if (buffer_.empty())
            fill(timeout_ms);
        return std::exchange(buffer_, {});
    }

    std::string read_exact(std::size_t n, int timeout_ms = 10000)
    {
        while (buffer_.size() < n) {
            if (!fill(timeout_ms))
                throw std::runtime_error("stream ended early");
        }
        std::string out = buffer_.substr(0, n);
        buffer_.erase(0, n);
        return out;
    }

    std::string read_until(const std::string& delimiter, int timeout_ms = 10000)
    {
        std::size_t pos;
        while ((pos = buffer_.find(delimiter)) == std::string::npos) {
            if (!fill(timeout_ms))
                throw std::runtime_error("stream ended early");
        }
        return read_exact(pos + delimiter.size());
    }

private:
    bool fill(int timeout_ms)
    {
        pollfd p{fd_, POLLIN, 0};
        if (::poll(&p, 1, timeout_ms) <= 0)
            throw std::runtime_error("read timed out");
        char chunk[65536];
        const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
        if (n <= 0)
            return false;
        buffer_.append(chunk, static_cast<std::size_t>(n));
        return true;
    }

    int fd_ = -1;
    std::string buffer_;
};

class WebSocketClient
{
public:
    WebSocketClient(std::uint16_t port, const std::string& key) : raw_(port)
    {
        raw_.write("GET / HTTP/1.1\r\nHost: 127.0.0.1\r\nUpgrade: websocket\r\nConnection: Upgrade\r\n"
                   "Sec-WebSocket-Key: " + key + "\r\nSec-WebSocket-Version: 13\r\n\r\n");
        response_ = raw_.read_until("\r\n\r\n");
    }

    const std::string& response() const { return response_; }

    std::string accept_header() const
    {
        const std::string name = "Sec-WebSocket-Accept: ";
        const auto at = response_.find(name);
        if (at == std::string::npos)
            return {};
        const auto end = response_.find("\r\n", at);
        return response_.substr(at + name.size(), end - at - name.size());
    }

    /// Next unfragmented server message as (opcode, payload).
    std::pair<int, std::string> read_message()
    {
        const std::string head = raw_.read_exact(2);
        const int opcode = head[0] & 0x0f;
        std::uint64_t len = static_cast<unsigned char>(head[1]) & 0x7f;
        if (len == 126 || len == 127) {
            const std::string ext = raw_.read_exact(len == 126 ? 2 : 8);
            len = 0;
            for (unsigned char c : ext)
                len = (len << 8) | c;
        }
        return {opcode, raw_.read_exact(static_cast<std::size_t>(len))};
    }

    void send_masked(int opcode, const std::string& payload)
    {
        std::string frame;
        frame += static_cast<char>(0x80 | opcode);
        frame += static_cast<char>(0x80 | payload.size());
        const char mask[4] = {0x11, 0x22, 0x33, 0x44};
        frame.append(mask, 4);
        for (std::size_t i = 0; i < payload.size(); ++i)
            frame += static_cast<char>(payload[i] ^ mask[i % 4]);
        raw_.write(frame);
    }

    void close() { send_masked(0x8, std::string("\x03\xe8", 2)); }

private:
    RawClient raw_;
    std::string response_;
};

/// A port nothing is listening on.
inline std::uint16_t unused_port()
{
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in a = loopback_address(0);
    ::bind(fd, reinterpret_cast<sockaddr*>(&a), sizeof a);
    socklen_t len = sizeof a;
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&a), &len);
    ::close(fd);
    return ntohs(a.sin_port);
}

/// Accepts one connection, writes `bytes`, closes.
class OneShotServer
{
public:
    explicit OneShotServer(std::string bytes)
    {
        fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
        sockaddr_in a = loopback_address(0);
        ::bind(fd_, reinterpret_cast<sockaddr*>(&a), sizeof a);
        ::listen(fd_, 1);
        socklen_t len = sizeof a;
        ::getsockname(fd_, reinterpret_cast<sockaddr*>(&a), &len);
        port_ = ntohs(a.sin_port);
        thread_ = std::thread([this, bytes = std::move(bytes)] {
            const int c = ::accept(fd_, nullptr, nullptr);
            if (c < 0)
                return;
            ::send(c, bytes.data(), bytes.size(), MSG_NOSIGNAL);
            ::close(c);
        });
    }
    ~OneShotServer()
    {
        ::shutdown(fd_, SHUT_RDWR);
        thread_.join();
        ::close(fd_);
    }

    std::uint16_t port() const { return port_; }

private:
    int fd_ = -1;
    std::uint16_t port_ = 0;
    std::thread thread_;
};

} // namespace limrsf::testing
