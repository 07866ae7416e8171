#pragma once

// Scenario files and the scenario-driven frame source.

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <vector>

#include "json.hpp"
#include "lunatrack/fmcw.hpp"
#include "lunatrack/units.hpp"

namespace lunatrack {

struct Scenario {
    std::uint64_t seed{1};
    bool lens_on{true};
    fmcw::Scene scene;  // subject is filled in by waypoint playback
    std::vector<fmcw::Waypoint> waypoints;
    /// Radar overrides; empty means "use the platform radars".
    std::vector<fmcw::RadarConfig> radars;
    /// Playback length in seconds; empty means "last waypoint + 25 s".
    std::optional<double> duration_s;

    double effective_duration() const;
};

Scenario parse_scenario(const nlohmann::json& j);
Scenario load_scenario(const std::filesystem::path& path);
nlohmann::json to_json(const Scenario& s);

/// Subject override coming from an interactive client.
struct Steering {
    double x_m{0.0};
    double y_m{0.0};
    bool absent{false};
};

/// Produces frames for (radar, tick). Implementations must be callable from
/// several worker threads at once.
class FrameSource {
public:
    virtual ~FrameSource() = default;
    virtual fmcw::Frame frame(std::size_t radar_index, std::uint64_t tick) = 0;
};

class ScenarioSimulator final : public FrameSource {
public:
    ScenarioSimulator(Scenario scenario, std::vector<fmcw::RadarConfig> radars, fmcw::ZoneGainModel model);

    fmcw::Frame frame(std::size_t radar_index, std::uint64_t tick) override;

    /// Scene for a tick. The first request for a tick freezes it, so every
    /// radar sees the same scene at a given tick.
    fmcw::Scene scene_at(std::uint64_t tick);

    /// Applies from the first tick not yet frozen onward.
    void steer(const Steering& s);

    double frame_period() const { return radars_.front().frame_rep_time_s; }
    double tick_time(std::uint64_t tick) const { return lunatrack::tick_time(tick, frame_period()); }
    std::uint64_t tick_count() const;

    const std::vector<fmcw::RadarConfig>& radars() const { return radars_; }
    const fmcw::ZoneGainModel& model() const { return model_; }
    const Scenario& scenario() const { return scenario_; }

private:
    Scenario scenario_;
    std::vector<fmcw::RadarConfig> radars_;
    fmcw::ZoneGainModel model_;

    std::mutex mutex_;
    std::map<std::uint64_t, fmcw::Scene> frozen_;
    std::uint64_t next_unfrozen_{0};
    std::optional<Steering> steering_;
    std::uint64_t steering_from_{0};
};

}  // namespace lunatrack
