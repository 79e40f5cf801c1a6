#include "twinforge/stream_listener.hpp"

#include "twinforge/errors.hpp"
#include "twinforge/ingestion.hpp"
#include "twinforge/logging.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <string>

namespace twinforge {

LocationStreamListener::LocationStreamListener(const std::string& host, std::uint16_t port) {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw BindFailure("socket: " + std::string(std::strerror(errno)));

    int on = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &on, sizeof on);

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        ::close(listen_fd_);
        listen_fd_ = -1;
        throw BindFailure("not an IPv4 address: " + host);
    }
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
        ::listen(listen_fd_, 1) != 0) {
        std::string why = std::strerror(errno);
        ::close(listen_fd_);
        listen_fd_ = -1;
        throw BindFailure("cannot bind " + host + ":" + std::to_string(port) + ": " + why);
    }

    sockaddr_in bound{};
    socklen_t len = sizeof bound;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len);
    port_ = ntohs(bound.sin_port);
}

LocationStreamListener::~LocationStreamListener() {
    if (listen_fd_ >= 0) ::close(listen_fd_);
}

ListenSummary LocationStreamListener::serve_once(PositionSeries& sink) {
    ListenSummary summary;
    int conn = ::accept(listen_fd_, nullptr, nullptr);
    if (conn < 0) throw BindFailure("accept: " + std::string(std::strerror(errno)));

    std::string pending;
    char buf[4096];
    std::size_t line_no = 0;
    auto consume_line = [&](std::string_view line) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        try {
            sink.push_back(parse_position_line_jsonl(line, line_no));
            ++summary.accepted;
        } catch (const MalformedRecord& e) {
            ++summary.rejected;
            log(LogLevel::debug, std::string("stream line rejected: ") + e.what());
        }
    };

    while (true) {
        ssize_t n = ::read(conn, buf, sizeof buf);
        if (n <= 0) break;
        pending.append(buf, static_cast<std::size_t>(n));
        std::size_t start = 0;
        while (true) {
            std::size_t nl = pending.find('\n', start);
            if (nl == std::string::npos) break;
            consume_line(std::string_view(pending).substr(start, nl - start));
            start = nl + 1;
        }
        pending.erase(0, start);
    }
    if (!pending.empty()) consume_line(pending);  // unterminated trailing line
    ::close(conn);
    return summary;
}

}  // namespace twinforge
