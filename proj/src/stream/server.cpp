#include "limrsf/stream/server.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <cstring>

#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <openssl/evp.h>
#include <openssl/sha.h>

#include "limrsf/error.hpp"
#include "limrsf/stream/wire.hpp"

namespace limrsf {

struct BroadcastServer::Snapshot
{
    std::uint64_t sequence = 0;
    std::string tcp_frame;
    std::string ws_frame;
};

struct BroadcastServer::Client
{
    int fd = -1;
    bool websocket = false;
    std::thread thread;
    std::atomic<bool> done{false};
};

namespace {

constexpr auto kPollInterval = std::chrono::milliseconds(200);
constexpr int kHandshakeTimeoutMs = 5000;
constexpr std::size_t kMaxRequest = 16384;
constexpr const char* kWebSocketGuid = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11";

std::string errno_text()
{
    return std::strerror(errno);
}

struct AddrInfo
{
    addrinfo* head = nullptr;
    ~AddrInfo()
    {
        if (head)
            freeaddrinfo(head);
    }
};

void resolve(AddrInfo& out, const std::string& host, std::uint16_t port, bool passive)
{
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    hints.ai_flags = passive ? AI_PASSIVE : 0;
    const std::string service = std::to_string(port);
    const int rc = getaddrinfo(host.empty() ? nullptr : host.c_str(), service.c_str(), &hints, &out.head);
    if (rc != 0)
        throw IoError("cannot resolve '" + host + "': " + gai_strerror(rc));
}

int listen_on(const std::string& host, std::uint16_t port, std::uint16_t& bound)
{
    AddrInfo ai;
    resolve(ai, host, port, true);
    std::string last = "no usable address";
    for (addrinfo* a = ai.head; a; a = a->ai_next) {
        const int fd = socket(a->ai_family, a->ai_socktype | SOCK_CLOEXEC, a->ai_protocol);
        if (fd < 0) {
            last = errno_text();
            continue;
        }
        const int one = 1;
        setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
        if (bind(fd, a->ai_addr, a->ai_addrlen) == 0 && listen(fd, 64) == 0) {
            sockaddr_storage ss{};
            socklen_t len = sizeof ss;
            getsockname(fd, reinterpret_cast<sockaddr*>(&ss), &len);
            bound = ntohs(ss.ss_family == AF_INET6 ? reinterpret_cast<sockaddr_in6*>(&ss)->sin6_port
                                                   : reinterpret_cast<sockaddr_in*>(&ss)->sin_port);
            return fd;
        }
        last = errno_text();
        close(fd);
    }
    throw IoError("cannot listen on " + host + ":" + std::to_string(port) + ": " + last);
}

bool send_all(int fd, std::string_view bytes)
{
    while (!bytes.empty()) {
        const ssize_t n = send(fd, bytes.data(), bytes.size(), MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR)
                continue;
            return false;
        }
        bytes.remove_prefix(static_cast<std::size_t>(n));
    }
    return true;
}

std::string websocket_header(std::size_t length, std::uint8_t opcode)
{
    std::string h;
    h.push_back(static_cast<char>(0x80 | opcode));
    if (length < 126) {
        h.push_back(static_cast<char>(length));
    } else if (length <= 0xffff) {
        h.push_back(126);
        h.push_back(static_cast<char>(length >> 8));
        h.push_back(static_cast<char>(length & 0xff));
    } else {
        h.push_back(127);
        for (int s = 56; s >= 0; s -= 8)
            h.push_back(static_cast<char>((static_cast<std::uint64_t>(length) >> s) & 0xff));
    }
    return h;
}

std::string websocket_accept(const std::string& key)
{
    const std::string text = key + kWebSocketGuid;
    unsigned char digest[SHA_DIGEST_LENGTH];
    SHA1(reinterpret_cast<const unsigned char*>(text.data()), text.size(), digest);
    unsigned char b64[4 * ((SHA_DIGEST_LENGTH + 2) / 3) + 1];
    const int n = EVP_EncodeBlock(b64, digest, SHA_DIGEST_LENGTH);
    return std::string(reinterpret_cast<char*>(b64), static_cast<std::size_t>(n));
}

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

// Reads the upgrade request and answers it; false if the peer is not a
// well-formed WebSocket client.
bool websocket_handshake(int fd)
{
    std::string request;
    char buf[1024];
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(kHandshakeTimeoutMs);
    while (request.find("\r\n\r\n") == std::string::npos) {
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        pollfd p{fd, POLLIN, 0};
        if (left.count() <= 0 || poll(&p, 1, static_cast<int>(left.count())) <= 0)
            return false;
        const ssize_t n = recv(fd, buf, sizeof buf, 0);
        if (n <= 0)
            return false;
        request.append(buf, static_cast<std::size_t>(n));
        if (request.size() > kMaxRequest)
            return false;
    }

    std::string key;
    bool upgrade = false;
    std::size_t pos = request.find("\r\n");
    const bool is_get = request.compare(0, 4, "GET ") == 0;
    while (pos != std::string::npos && pos + 2 < request.size()) {
        const std::size_t end = request.find("\r\n", pos + 2);
        const std::string line = request.substr(pos + 2, end - pos - 2);
        pos = end;
        const auto colon = line.find(':');
        if (colon == std::string::npos)
            continue;
        const std::string name = lower(trim(line.substr(0, colon)));
        const std::string value = trim(line.substr(colon + 1));
        if (name == "sec-websocket-key")
            key = value;
        else if (name == "upgrade")
            upgrade = lower(value) == "websocket";
    }
    if (!is_get || !upgrade || key.empty()) {
        send_all(fd, "HTTP/1.1 400 Bad Request\r\nConnection: close\r\nContent-Length: 0\r\n\r\n");
        return false;
    }
    return send_all(fd, "HTTP/1.1 101 Switching Protocols\r\nUpgrade: websocket\r\nConnection: Upgrade\r\n"
                        "Sec-WebSocket-Accept: " +
                            websocket_accept(key) + "\r\n\r\n");
}

// Consumes client-to-server WebSocket frames; answers pings and returns false
// once a close frame arrives.
bool process_websocket_input(int fd, std::string& in)
{
    while (in.size() >= 2) {
        const auto b0 = static_cast<std::uint8_t>(in[0]), b1 = static_cast<std::uint8_t>(in[1]);
        const std::uint8_t opcode = b0 & 0x0f;
        const bool masked = (b1 & 0x80) != 0;
        std::uint64_t len = b1 & 0x7f;
        std::size_t at = 2;
        if (len == 126) {
            if (in.size() < 4)
                return true;
            len = (static_cast<std::uint8_t>(in[2]) << 8) | static_cast<std::uint8_t>(in[3]);
            at = 4;
        } else if (len == 127) {
            if (in.size() < 10)
                return true;
            len = 0;
            for (int i = 0; i < 8; ++i)
                len = (len << 8) | static_cast<std::uint8_t>(in[2 + i]);
            at = 10;
        }
        const std::size_t mask_at = at;
        if (masked)
            at += 4;
        if (in.size() < at + len)
            return true;
        std::string body = in.substr(at, len);
        if (masked) {
            for (std::size_t i = 0; i < body.size(); ++i)
                body[i] = static_cast<char>(body[i] ^ in[mask_at + i % 4]);
        }
        in.erase(0, at + len);
        if (opcode == 0x8) {
            send_all(fd, websocket_header(0, 0x8));
            return false;
        }
        if (opcode == 0x9)
            send_all(fd, websocket_header(body.size(), 0xA) + body);
    }
    return true;
}

} // namespace

std::string bind_host(const std::string& fallback)
{
    const char* env = std::getenv("LIMRSF_BIND");
    return env && *env ? std::string(env) : fallback;
}

std::pair<std::string, std::uint16_t> split_address(const std::string& address)
{
    const auto colon = address.rfind(':');
    if (colon == std::string::npos || colon + 1 == address.size())
        throw InvalidArgument("address '" + address + "' is not host:port");
    std::string host = address.substr(0, colon);
    if (host.size() >= 2 && host.front() == '[' && host.back() == ']')
        host = host.substr(1, host.size() - 2);
    const std::string port = address.substr(colon + 1);
    char* end = nullptr;
    const long p = std::strtol(port.c_str(), &end, 10);
    if (*end != '\0' || p < 0 || p > 65535)
        throw InvalidArgument("bad port in '" + address + "'");
    return {host, static_cast<std::uint16_t>(p)};
}

BroadcastServer::BroadcastServer(const ServerOptions& options)
{
    const std::string host = bind_host(options.host);
    if (pipe2(wake_, O_CLOEXEC) != 0)
        throw IoError("pipe: " + errno_text());
    try {
        tcp_listener_ = listen_on(host, options.tcp_port, tcp_port_);
        ws_listener_ = listen_on(host, options.ws_port, ws_port_);
    } catch (...) {
        for (int fd : {tcp_listener_, ws_listener_, wake_[0], wake_[1]}) {
            if (fd >= 0)
                close(fd);
        }
        throw;
    }
    acceptors_.emplace_back([this] { accept_loop(tcp_listener_, false); });
    acceptors_.emplace_back([this] { accept_loop(ws_listener_, true); });
}

BroadcastServer::~BroadcastServer()
{
    stop();
}

std::uint64_t BroadcastServer::publish(const TriangleMesh& mesh)
{
    return publish_payload(wire::encode_mesh(mesh));
}

std::uint64_t BroadcastServer::publish_payload(std::string payload)
{
    auto snap = std::make_shared<Snapshot>();
    snap->tcp_frame = wire::encode_frame(payload);
    snap->ws_frame = websocket_header(payload.size(), 0x2) + payload;
    std::uint64_t seq = 0;
    {
        std::lock_guard lock(mutex_);
        seq = ++sequence_;
        snap->sequence = seq;
        latest_ = std::move(snap);
    }
    changed_.notify_all();
    return seq;
}

std::shared_ptr<const BroadcastServer::Snapshot> BroadcastServer::latest() const
{
    std::lock_guard lock(mutex_);
    return latest_;
}

std::size_t BroadcastServer::client_count() const
{
    std::lock_guard lock(mutex_);
    return static_cast<std::size_t>(
        std::count_if(clients_.begin(), clients_.end(), [](const auto& c) { return !c->done.load(); }));
}

void BroadcastServer::accept_loop(int listener, bool websocket)
{
    while (!stopping_) {
        pollfd fds[2] = {{listener, POLLIN, 0}, {wake_[0], POLLIN, 0}};
        const int rc = poll(fds, 2, static_cast<int>(kPollInterval.count()));

        // Reap finished clients.
        std::vector<std::shared_ptr<Client>> finished;
        {
            std::lock_guard lock(mutex_);
            auto mid = std::stable_partition(clients_.begin(), clients_.end(),
                                             [&](const auto& c) { return !(c->done && c->websocket == websocket); });
            finished.assign(mid, clients_.end());
            clients_.erase(mid, clients_.end());
        }
        for (auto& c : finished) {
            c->thread.join();
            close(c->fd);
        }

        if (rc <= 0 || stopping_ || (fds[0].revents & POLLIN) == 0)
            continue;
        const int fd = accept4(listener, nullptr, nullptr, SOCK_CLOEXEC);
        if (fd < 0)
            continue;
        const int one = 1;
        setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
        auto client = std::make_shared<Client>();
        client->fd = fd;
        client->websocket = websocket;
        std::lock_guard lock(mutex_);
        if (stopping_) {
            close(fd);
            break;
        }
        clients_.push_back(client);
        client->thread = std::thread([this, client] { serve_client(client); });
    }
}

void BroadcastServer::serve_client(const std::shared_ptr<Client>& client)
{
    const int fd = client->fd;
    if (client->websocket && !websocket_handshake(fd)) {
        shutdown(fd, SHUT_RDWR);
        client->done = true;
        return;
    }
    std::uint64_t sent = 0;
    std::string input;
    char buf[4096];
    while (!stopping_) {
        std::shared_ptr<const Snapshot> snap;
        {
            std::unique_lock lock(mutex_);
            changed_.wait_for(lock, kPollInterval,
                              [&] { return stopping_ || (latest_ && latest_->sequence != sent); });
            snap = latest_;
        }
        if (stopping_)
            break;

        pollfd p{fd, POLLIN, 0};
        if (poll(&p, 1, 0) > 0) {
            const ssize_t n = recv(fd, buf, sizeof buf, 0);
            if (n <= 0)
                break;
            if (client->websocket) {
                input.append(buf, static_cast<std::size_t>(n));
                if (!process_websocket_input(fd, input))
                    break;
            }
        }
        if (snap && snap->sequence != sent) {
            if (!send_all(fd, client->websocket ? snap->ws_frame : snap->tcp_frame))
                break;
            sent = snap->sequence;
        }
    }
    shutdown(fd, SHUT_RDWR);
    client->done = true;
}

void BroadcastServer::stop()
{
    if (stopping_.exchange(true))
        return;
    if (wake_[1] >= 0) {
        const char c = 0;
        [[maybe_unused]] const ssize_t n = write(wake_[1], &c, 1);
    }
    changed_.notify_all();
    for (auto& t : acceptors_)
        t.join();
    std::vector<std::shared_ptr<Client>> clients;
    {
        std::lock_guard lock(mutex_);
        clients.swap(clients_);
    }
    for (auto& c : clients)
        shutdown(c->fd, SHUT_RDWR);
    for (auto& c : clients) {
        c->thread.join();
        close(c->fd);
    }
    for (int fd : {tcp_listener_, ws_listener_, wake_[0], wake_[1]}) {
        if (fd >= 0)
            close(fd);
    }
}

TriangleMesh fetch_once(const std::string& address, int timeout_ms)
{
    const auto [host, port] = split_address(address);
    AddrInfo ai;
    resolve(ai, host, port, false);
    int fd = -1;
    std::string last = "no usable address";
    for (addrinfo* a = ai.head; a; a = a->ai_next) {
        fd = socket(a->ai_family, a->ai_socktype | SOCK_CLOEXEC, a->ai_protocol);
        if (fd < 0) {
            last = errno_text();
            continue;
        }
        if (connect(fd, a->ai_addr, a->ai_addrlen) == 0)
            break;
        last = errno_text();
        close(fd);
        fd = -1;
    }
    if (fd < 0)
        throw IoError("connect to " + address + ": " + last);

    timeval tv{timeout_ms / 1000, (timeout_ms % 1000) * 1000};
    setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
    wire::FrameReader reader;
    char buf[65536];
    try {
        for (;;) {
            if (auto payload = reader.next()) {
                close(fd);
                return wire::decode_mesh(*payload);
            }
            const ssize_t n = recv(fd, buf, sizeof buf, 0);
            if (n < 0) {
                if (errno == EINTR)
                    continue;
                throw IoError("read from " + address + ": " +
                              (errno == EAGAIN || errno == EWOULDBLOCK ? std::string("timed out") : errno_text()));
            }
            if (n == 0) {
                reader.finish();
                throw IoError("connection to " + address + " closed before a frame arrived");
            }
            reader.feed(std::string_view(buf, static_cast<std::size_t>(n)));
        }
    } catch (...) {
        close(fd);
        throw;
    }
}

} // namespace limrsf
