#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "limrsf/reconstruction/mesh.hpp"

namespace limrsf {

struct ServerOptions
{
    /// Overridden by the LIMRSF_BIND environment variable when set.
    std::string host = "0.0.0.0";
    /// 0 picks an ephemeral port.
    std::uint16_t tcp_port = 9400;
    std::uint16_t ws_port = 9401;
};

/// Host from LIMRSF_BIND if set, else `fallback`.
std::string bind_host(const std::string& fallback);

/// Snapshot broadcaster. Raw TCP clients get a stream of LMRF frames, WebSocket
/// clients one binary message per snapshot, both carrying the same payload.
/// A client receives the latest snapshot on connect and after every publish;
/// a slow client skips to the newest snapshot instead of queueing old ones.
class BroadcastServer
{
public:
    /// Binds both listeners and starts accepting. Throws IoError on failure.
    explicit BroadcastServer(const ServerOptions& options);
    ~BroadcastServer();
    BroadcastServer(const BroadcastServer&) = delete;
    BroadcastServer& operator=(const BroadcastServer&) = delete;

    std::uint16_t tcp_port() const { return tcp_port_; }
    std::uint16_t ws_port() const { return ws_port_; }

    /// Encodes and publishes; returns the snapshot's sequence number (from 1).
    std::uint64_t publish(const TriangleMesh& mesh);
    /// Publishes an already encoded payload.
    std::uint64_t publish_payload(std::string payload);

    /// Number of clients currently connected on either transport.
    std::size_t client_count() const;

    /// Closes every socket and joins all threads. Idempotent.
    void stop();

private:
    struct Snapshot;
    struct Client;

    std::shared_ptr<const Snapshot> latest() const;
    void accept_loop(int listener, bool websocket);
    void serve_client(const std::shared_ptr<Client>& client);

    int tcp_listener_ = -1;
    int ws_listener_ = -1;
    int wake_[2] = {-1, -1};
    std::uint16_t tcp_port_ = 0;
    std::uint16_t ws_port_ = 0;

    mutable std::mutex mutex_;
    std::condition_variable changed_;
    std::shared_ptr<const Snapshot> latest_;
    std::uint64_t sequence_ = 0;
    std::vector<std::shared_ptr<Client>> clients_;
    std::atomic<bool> stopping_{false};
    std::vector<std::thread> acceptors_;
};

/// Connects to "host:port", reads one frame and decodes it. Throws IoError on
/// connect or read failure and ParseError on a bad or truncated frame.
TriangleMesh fetch_once(const std::string& address, int timeout_ms = 10000);

/// Splits "host:port". Throws InvalidArgument.
std::pair<std::string, std::uint16_t> split_address(const std::string& address);

} // namespace limrsf
