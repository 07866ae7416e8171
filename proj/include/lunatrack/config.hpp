#pragma once

// Platform configuration and its JSON representation. The same JSON parser
// serves the platform config, scenarios and the wire protocol.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "lunatrack/coverage.hpp"
#include "lunatrack/fmcw.hpp"
#include "lunatrack/lens.hpp"

namespace lunatrack {

struct FusionSettings {
    int calibration_n{100};
    double offset_db{0.75};
    std::size_t queue_capacity{64};  // per radar
    int stale_frames{3};
};

struct TrackerSettings {
    int loss_debounce_frames{1};
};

struct ServiceSettings {
    std::string listen{"127.0.0.1:7070"};
    /// WebSocket endpoint; empty means the port after `listen`.
    std::string ws_listen;
    std::string log_path{"events.jsonl"};
    std::size_t client_buffer{256};
};

struct PlatformConfig {
    lens::LensConfig lens;
    coverage::CoverageConfig coverage;
    std::vector<fmcw::RadarConfig> radars{fmcw::default_radars()};
    fmcw::ZoneGainModel gain_model;
    FusionSettings fusion;
    TrackerSettings tracker;
    ServiceSettings service;

    /// Throws ConfigError; checks the uuid -> zone map is a bijection onto 1..5.
    void validate() const;
    std::map<std::string, int> zone_map() const;
};

PlatformConfig load_platform_config(const std::filesystem::path& path);
PlatformConfig parse_platform_config(const nlohmann::json& j);
nlohmann::json to_json(const PlatformConfig& cfg);

lens::LensConfig parse_lens_config(const nlohmann::json& j, lens::LensConfig base = {});
coverage::CoverageConfig parse_coverage_config(const nlohmann::json& j, coverage::CoverageConfig base = {});
fmcw::RadarConfig parse_radar_config(const nlohmann::json& j, fmcw::RadarConfig base = {});
fmcw::ZoneGainModel parse_gain_model(const nlohmann::json& j, fmcw::ZoneGainModel base = {});

nlohmann::json to_json(const lens::LensConfig& cfg);
nlohmann::json to_json(const coverage::CoverageConfig& cfg);
nlohmann::json to_json(const fmcw::RadarConfig& cfg);
nlohmann::json to_json(const fmcw::ZoneGainModel& cfg);

/// Reads a whole JSON document; throws FileError or ParseError.
nlohmann::json read_json_file(const std::filesystem::path& path);

/// Splits "host:port"; throws ConfigError on malformed input.
std::pair<std::string, unsigned short> split_address(const std::string& address);

}  // namespace lunatrack
