#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace twinforge {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

/// Integer milliseconds since epoch. All sources share one clock.
using TimestampMs = std::int64_t;

/// One RTLS fix of a tagged workpiece carrier, plant-local meters.
struct PositionSample {
    std::string transponder_id;
    TimestampMs t = 0;
    Vec3 pos = Vec3::Zero();
};

/// One process-data point (boolean signals encoded 0/1).
struct SignalSample {
    std::string signal_name;
    TimestampMs t = 0;
    double value = 0.0;
};

// Series are kept sorted ascending by t; ties keep source order.
using PositionSeries = std::vector<PositionSample>;
using SignalSeries = std::vector<SignalSample>;

inline bool operator==(const PositionSample& a, const PositionSample& b) {
    return a.transponder_id == b.transponder_id && a.t == b.t && a.pos == b.pos;
}

inline bool operator==(const SignalSample& a, const SignalSample& b) {
    return a.signal_name == b.signal_name && a.t == b.t && a.value == b.value;
}

}  // namespace twinforge
