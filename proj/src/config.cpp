#include "lunatrack/config.hpp"

#include <fstream>
#include <set>

#include "lunatrack/errors.hpp"

namespace lunatrack {

using nlohmann::json;

namespace {

template <typename T>
void read(const json& j, const char* key, T& out) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return;
    try {
        out = it->get<T>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("field '") + key + "': " + e.what());
    }
}

void require_object(const json& j, const char* what) {
    if (!j.is_object()) throw ParseError(std::string(what) + " must be a JSON object");
}

}  // namespace

lens::LensConfig parse_lens_config(const json& j, lens::LensConfig c) {
    require_object(j, "lens");
    read(j, "R", c.radius_mm);
    read(j, "eps_min", c.eps_min);
    read(j, "base_offset", c.base_offset);
    read(j, "base_span", c.base_span);
    read(j, "r_tube", c.rod_radius_mm);
    read(j, "seg_eps", c.segment_eps);
    read(j, "seg_bounds", c.segment_bounds);
    read(j, "n_rods", c.n_rods);
    if (auto it = j.find("theta_range"); it != j.end()) {
        std::array<double, 2> range{};
        read(j, "theta_range", range);
        c.theta_min_deg = range[0];
        c.theta_max_deg = range[1];
    }
    read(j, "r_step", c.voxel_mm);
    read(j, "voxel_budget", c.voxel_budget);
    return c;
}

json to_json(const lens::LensConfig& c) {
    return {{"R", c.radius_mm},
            {"eps_min", c.eps_min},
            {"base_offset", c.base_offset},
            {"base_span", c.base_span},
            {"r_tube", c.rod_radius_mm},
            {"seg_eps", c.segment_eps},
            {"seg_bounds", c.segment_bounds},
            {"n_rods", c.n_rods},
            {"theta_range", {c.theta_min_deg, c.theta_max_deg}},
            {"r_step", c.voxel_mm},
            {"voxel_budget", c.voxel_budget}};
}

coverage::CoverageConfig parse_coverage_config(const json& j, coverage::CoverageConfig c) {
    require_object(j, "coverage");
    read(j, "n_zones", c.n_zones);
    read(j, "inter_beam_spacing", c.inter_beam_spacing_deg);
    read(j, "hpbw", c.hpbw_deg);
    read(j, "torso_width", c.torso_width_m);
    read(j, "unit_cell", c.unit_cell_mm);
    read(j, "host_eps", c.host_eps);
    return c;
}

json to_json(const coverage::CoverageConfig& c) {
    return {{"n_zones", c.n_zones},       {"inter_beam_spacing", c.inter_beam_spacing_deg},
            {"hpbw", c.hpbw_deg},         {"torso_width", c.torso_width_m},
            {"unit_cell", c.unit_cell_mm}, {"host_eps", c.host_eps}};
}

fmcw::RadarConfig parse_radar_config(const json& j, fmcw::RadarConfig c) {
    require_object(j, "radar");
    read(j, "uuid", c.uuid);
    read(j, "zone", c.zone);
    read(j, "boresight", c.boresight_deg);
    read(j, "frame_rep_time", c.frame_rep_time_s);
    read(j, "chirp_rep_time", c.chirp_rep_time_s);
    read(j, "chirps_per_frame", c.chirps_per_frame);
    read(j, "f_start", c.f_start_ghz);
    read(j, "f_end", c.f_end_ghz);
    read(j, "sample_rate", c.sample_rate_mhz);
    read(j, "samples_per_chirp", c.samples_per_chirp);
    read(j, "if_gain", c.if_gain_db);
    read(j, "max_range", c.max_range_m);
    return c;
}

json to_json(const fmcw::RadarConfig& c) {
    return {{"uuid", c.uuid},
            {"zone", c.zone},
            {"boresight", c.boresight_deg},
            {"frame_rep_time", c.frame_rep_time_s},
            {"chirp_rep_time", c.chirp_rep_time_s},
            {"chirps_per_frame", c.chirps_per_frame},
            {"f_start", c.f_start_ghz},
            {"f_end", c.f_end_ghz},
            {"sample_rate", c.sample_rate_mhz},
            {"samples_per_chirp", c.samples_per_chirp},
            {"if_gain", c.if_gain_db},
            {"max_range", c.max_range_m}};
}

fmcw::ZoneGainModel parse_gain_model(const json& j, fmcw::ZoneGainModel c) {
    require_object(j, "gain_model");
    read(j, "base_gain", c.base_gain_db);
    read(j, "lens_boost", c.lens_boost_db);
    read(j, "hpbw_on", c.hpbw_on_deg);
    read(j, "hpbw_off", c.hpbw_off_deg);
    read(j, "sector_width", c.sector_width_deg);
    read(j, "shelf", c.shelf_db);
    read(j, "lens_on", c.lens_on);
    return c;
}

json to_json(const fmcw::ZoneGainModel& c) {
    return {{"base_gain", c.base_gain_db}, {"lens_boost", c.lens_boost_db},       {"hpbw_on", c.hpbw_on_deg},
            {"hpbw_off", c.hpbw_off_deg},  {"sector_width", c.sector_width_deg}, {"shelf", c.shelf_db},
            {"lens_on", c.lens_on}};
}

void PlatformConfig::validate() const {
    lens.validate();
    coverage.validate();
    gain_model.validate();
    if (radars.size() != static_cast<std::size_t>(fmcw::kZones))
        throw ConfigError("platform: exactly five radars are required");
    std::set<std::string> uuids;
    std::set<int> zones;
    for (const auto& r : radars) {
        r.validate();
        if (!uuids.insert(r.uuid).second) throw ConfigError("platform: duplicate radar uuid " + r.uuid);
        if (!zones.insert(r.zone).second) throw ConfigError("platform: zone assigned twice: " + std::to_string(r.zone));
        if (r.frame_rep_time_s != radars.front().frame_rep_time_s)
            throw ConfigError("platform: radars must share one frame repetition time");
    }
    if (fusion.calibration_n < 1) throw ConfigError("fusion: calibration_n must be positive");
    if (fusion.queue_capacity < 1) throw ConfigError("fusion: queue_capacity must be positive");
    if (fusion.stale_frames < 1) throw ConfigError("fusion: stale_frames must be positive");
    if (tracker.loss_debounce_frames < 1) throw ConfigError("tracker: loss_debounce_frames must be positive");
}

std::map<std::string, int> PlatformConfig::zone_map() const {
    std::map<std::string, int> map;
    for (const auto& r : radars) map.emplace(r.uuid, r.zone);
    return map;
}

PlatformConfig parse_platform_config(const json& j) {
    require_object(j, "platform config");
    PlatformConfig cfg;
    if (j.contains("lens")) cfg.lens = parse_lens_config(j["lens"]);
    if (j.contains("coverage")) cfg.coverage = parse_coverage_config(j["coverage"]);
    if (j.contains("gain_model")) cfg.gain_model = parse_gain_model(j["gain_model"]);
    if (j.contains("radars")) {
        if (!j["radars"].is_array()) throw ParseError("radars must be an array");
        cfg.radars.clear();
        for (const auto& r : j["radars"]) cfg.radars.push_back(parse_radar_config(r));
    }
    if (auto it = j.find("fusion"); it != j.end()) {
        require_object(*it, "fusion");
        read(*it, "calibration_n", cfg.fusion.calibration_n);
        read(*it, "offset_db", cfg.fusion.offset_db);
        read(*it, "queue_capacity", cfg.fusion.queue_capacity);
        read(*it, "stale_frames", cfg.fusion.stale_frames);
    }
    if (auto it = j.find("tracker"); it != j.end()) {
        require_object(*it, "tracker");
        read(*it, "loss_debounce_frames", cfg.tracker.loss_debounce_frames);
    }
    if (auto it = j.find("service"); it != j.end()) {
        require_object(*it, "service");
        read(*it, "listen", cfg.service.listen);
        read(*it, "ws_listen", cfg.service.ws_listen);
        read(*it, "log_path", cfg.service.log_path);
        read(*it, "client_buffer", cfg.service.client_buffer);
    }
    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        throw ParseError(e.what());
    }
    return cfg;
}

json to_json(const PlatformConfig& cfg) {
    json radars = json::array();
    for (const auto& r : cfg.radars) radars.push_back(to_json(r));
    return {{"lens", to_json(cfg.lens)},
            {"coverage", to_json(cfg.coverage)},
            {"radars", radars},
            {"gain_model", to_json(cfg.gain_model)},
            {"fusion",
             {{"calibration_n", cfg.fusion.calibration_n},
              {"offset_db", cfg.fusion.offset_db},
              {"queue_capacity", cfg.fusion.queue_capacity},
              {"stale_frames", cfg.fusion.stale_frames}}},
            {"tracker", {{"loss_debounce_frames", cfg.tracker.loss_debounce_frames}}},
            {"service",
             {{"listen", cfg.service.listen},
              {"ws_listen", cfg.service.ws_listen},
              {"log_path", cfg.service.log_path},
              {"client_buffer", cfg.service.client_buffer}}}};
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FileError("cannot open for reading", path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

PlatformConfig load_platform_config(const std::filesystem::path& path) {
    return parse_platform_config(read_json_file(path));
}

std::pair<std::string, unsigned short> split_address(const std::string& address) {
    const auto colon = address.rfind(':');
    if (colon == std::string::npos || colon + 1 == address.size())
        throw ConfigError("address must look like host:port, got '" + address + "'");
    std::string host = address.substr(0, colon);
    if (host.empty()) host = "0.0.0.0";
    int port = -1;
    try {
        std::size_t used = 0;
        port = std::stoi(address.substr(colon + 1), &used);
        if (used != address.size() - colon - 1) port = -1;
    } catch (const std::exception&) {
        port = -1;
    }
    if (port < 0 || port > 65535) throw ConfigError("invalid port in '" + address + "'");
    return {host, static_cast<unsigned short>(port)};
}

}  // namespace lunatrack
