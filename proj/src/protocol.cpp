#include "lunatrack/protocol.hpp"

#include <cmath>

#include "lunatrack/config.hpp"
#include "lunatrack/coverage.hpp"
#include "lunatrack/errors.hpp"
#include "lunatrack/tracker.hpp"

namespace lunatrack::protocol {

std::vector<int> stale_zones(const fusion::ZoneSnapshot& snap) {
    std::vector<int> out;
    for (int z = 1; z <= fmcw::kZones; ++z) {
        if (snap.stale[static_cast<std::size_t>(z - 1)]) out.push_back(z);
    }
    return out;
}

Json snapshot_message(const fusion::ZoneSnapshot& snap, double t) {
    Json zones = Json::array();
    Json seqs = Json::array();
    for (std::size_t i = 0; i < snap.states.size(); ++i) {
        zones.push_back(snap.states[i]);
        seqs.push_back(snap.seqs[i]);
    }
    return Json{{"kind", "snapshot"}, {"t", t},          {"zones", zones},
                {"stale", stale_zones(snap)}, {"seqs", seqs}, {"cold_start", snap.cold_start}};
}

Json detection_message(const fusion::DetectionMessage& msg, int zone) {
    return Json{{"kind", "detection"},          {"uuid", msg.uuid}, {"t", msg.timestamp_s},
                {"amplitude_db", msg.amplitude_db}, {"detect", msg.detect}, {"seq", msg.seq},
                {"zone", zone}};
}

Json alert_message(int zone, double t) { return Json{{"kind", "alert"}, {"zone", zone}, {"t", t}}; }

Json tracker_message(const tracker::TrackerEvent& ev) {
    Json j{{"kind", "tracker"}, {"event", tracker::to_string(ev.kind)}, {"zone", ev.zone}, {"t", ev.timestamp_s}};
    if (ev.from_zone != 0) j["from"] = ev.from_zone;
    return j;
}

Json status_message(const StatusCounters& c) {
    return Json{{"kind", "status"}, {"t", c.t},       {"drops", c.drops},   {"enqueued", c.enqueued},
                {"gaps", c.gaps},   {"stale", c.stale}, {"log_ok", c.log_ok}};
}

Json diagnostic_message(double t, const std::string& source, const std::string& type, const std::string& detail) {
    return Json{{"kind", "diagnostic"}, {"t", t}, {"source", source}, {"type", type}, {"detail", detail}};
}

Json config_message(const PlatformConfig& cfg, bool lens_on) {
    Json zones = Json::array();
    for (const auto& r : cfg.radars) {
        zones.push_back(Json{{"zone", r.zone},
                             {"uuid", r.uuid},
                             {"boresight", r.boresight_deg},
                             {"timeout", tracker::timeout_for(r.zone)}});
    }
    const double max_range = cfg.radars.empty() ? 2.0 : cfg.radars.front().max_range_m;
    return Json{{"kind", "config"},
                {"zones", zones},
                {"sector_width", cfg.gain_model.sector_width_deg},
                {"frame_period", cfg.radars.empty() ? 0.05 : cfg.radars.front().frame_rep_time_s},
                {"lens_on", lens_on},
                {"room", Json{{"x_min", -max_range}, {"x_max", max_range}, {"y_min", 0.0}, {"y_max", max_range}}}};
}

std::string encode(const Json& j) { return j.dump(); }

std::variant<Steering, InboundError> parse_inbound(const std::string& line) {
    Json j;
    try {
        j = Json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        return InboundError{std::string("invalid JSON: ") + e.what()};
    }
    if (!j.is_object()) return InboundError{"message is not an object"};
    const auto kind = j.find("kind");
    if (kind == j.end() || !kind->is_string()) return InboundError{"missing kind"};
    if (*kind != "subject") return InboundError{"unsupported kind '" + kind->get<std::string>() + "'"};

    Steering s;
    if (auto a = j.find("absent"); a != j.end()) {
        if (!a->is_boolean()) return InboundError{"absent must be a boolean"};
        s.absent = a->get<bool>();
    }
    for (const char* key : {"x", "y"}) {
        auto it = j.find(key);
        if (it == j.end()) {
            if (s.absent) continue;
            return InboundError{std::string("missing ") + key};
        }
        if (!it->is_number()) return InboundError{std::string(key) + " must be a number"};
        const double v = it->get<double>();
        if (!std::isfinite(v)) return InboundError{std::string(key) + " must be finite"};
        (key[0] == 'x' ? s.x_m : s.y_m) = v;
    }
    return s;
}

fusion::DetectionMessage detection_from_json(const Json& j) {
    try {
        return {j.at("uuid").get<std::string>(), j.at("seq").get<std::uint64_t>(), j.at("t").get<double>(),
                j.at("amplitude_db").get<double>(), j.at("detect").get<bool>()};
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("detection record: ") + e.what());
    }
}

}  // namespace lunatrack::protocol
