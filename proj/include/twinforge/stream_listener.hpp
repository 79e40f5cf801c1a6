#pragma once

#include "twinforge/types.hpp"

#include <cstdint>
#include <string>

namespace twinforge {

struct ListenSummary {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
};

/// Accepts one TCP replay connection and appends every well-formed line
/// (SLMP-inspired JSONL position grammar, LF-terminated) to the sink.
/// Single-writer contract: one listener per sink.
class LocationStreamListener {
  public:
    /// Binds and listens, or throws BindFailure. Port 0 picks an ephemeral
    /// port, readable via port().
    LocationStreamListener(const std::string& host, std::uint16_t port);
    ~LocationStreamListener();

    LocationStreamListener(const LocationStreamListener&) = delete;
    LocationStreamListener& operator=(const LocationStreamListener&) = delete;

    std::uint16_t port() const { return port_; }

    /// Blocks until a client connects and its stream closes. Malformed lines
    /// are counted, never fatal.
    ListenSummary serve_once(PositionSeries& sink);

  private:
    int listen_fd_ = -1;
    std::uint16_t port_ = 0;
};

}  // namespace twinforge
