#pragma once

// Wire messages shared by the NDJSON stream, the WebSocket endpoint and the
// event log. Every message is a single-line JSON object with a "kind" field.

#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "lunatrack/fusion.hpp"
#include "lunatrack/scenario.hpp"
#include "lunatrack/tracker.hpp"

namespace lunatrack {
struct PlatformConfig;
}

namespace lunatrack::protocol {

using Json = nlohmann::ordered_json;

struct StatusCounters {
    double t{0.0};
    std::uint64_t enqueued{0};
    std::uint64_t drops{0};
    std::uint64_t gaps{0};
    std::vector<int> stale;  // zone numbers
    bool log_ok{true};
};

Json snapshot_message(const fusion::ZoneSnapshot& snap, double t);
Json detection_message(const fusion::DetectionMessage& msg, int zone);
Json alert_message(int zone, double t);
Json tracker_message(const tracker::TrackerEvent& ev);
Json status_message(const StatusCounters& c);
Json diagnostic_message(double t, const std::string& source, const std::string& type, const std::string& detail);
/// Sent to each client on connect: zone geometry and timing for display.
Json config_message(const PlatformConfig& cfg, bool lens_on);

/// Stale zone numbers of a snapshot.
std::vector<int> stale_zones(const fusion::ZoneSnapshot& snap);

/// One line, no trailing newline.
std::string encode(const Json& j);

struct InboundError {
    std::string reason;
};

/// Parses an inbound client line. Only {"kind":"subject","x":..,"y":..,"absent":..}
/// is accepted; "absent" is optional and defaults to false, x and y are
/// required unless absent is true.
std::variant<Steering, InboundError> parse_inbound(const std::string& line);

/// Detection message fields recovered from a log payload.
fusion::DetectionMessage detection_from_json(const Json& j);

}  // namespace lunatrack::protocol
