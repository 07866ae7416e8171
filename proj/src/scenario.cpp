#include "lunatrack/scenario.hpp"

#include <algorithm>
#include <cmath>

#include "lunatrack/config.hpp"
#include "lunatrack/errors.hpp"

namespace lunatrack {

using nlohmann::json;

namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    try {
        return it->get<T>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("scenario field '") + key + "': " + e.what());
    }
}

}  // namespace

double Scenario::effective_duration() const {
    if (duration_s) return *duration_s;
    return (waypoints.empty() ? 0.0 : waypoints.back().t_s) + 25.0;
}

Scenario parse_scenario(const json& j) {
    if (!j.is_object()) throw ParseError("scenario must be a JSON object");
    Scenario s;
    s.seed = get_or<std::uint64_t>(j, "seed", 1);
    s.lens_on = get_or<bool>(j, "lens_on", true);
    if (auto it = j.find("noise_floor"); it != j.end()) {
        if (it->is_null()) {
            s.scene.noise_floor_db.reset();
        } else if (it->is_number()) {
            s.scene.noise_floor_db = it->get<double>();
        } else {
            throw ParseError("scenario field 'noise_floor' must be a number or null");
        }
    }
    s.scene.torso_width_m = get_or(j, "torso_width", s.scene.torso_width_m);
    s.scene.reflectivity = get_or(j, "reflectivity", s.scene.reflectivity);
    s.scene.multipath_enabled = get_or(j, "multipath", s.scene.multipath_enabled);
    s.scene.ghost_probability = get_or(j, "ghost_probability", s.scene.ghost_probability);
    s.scene.link_constant_db = get_or(j, "link_constant", s.scene.link_constant_db);
    if (!(s.scene.torso_width_m > 0.0)) throw ParseError("scenario: torso_width must be positive");
    if (!(s.scene.reflectivity > 0.0)) throw ParseError("scenario: reflectivity must be positive");
    if (!(s.scene.ghost_probability >= 0.0 && s.scene.ghost_probability <= 1.0))
        throw ParseError("scenario: ghost_probability must lie in [0, 1]");

    if (auto it = j.find("clutter"); it != j.end() && !it->is_null()) {
        if (!it->is_array()) throw ParseError("scenario: clutter must be an array");
        for (const auto& c : *it) {
            if (!c.is_object() || !c.contains("range") || !c.contains("level_db"))
                throw ParseError("scenario: clutter entries need 'range' and 'level_db'");
            s.scene.clutter.push_back({get_or<double>(c, "range", 0.0), get_or<double>(c, "level_db", 0.0)});
        }
    }

    if (auto it = j.find("waypoints"); it != j.end()) {
        if (!it->is_array()) throw ParseError("scenario: waypoints must be an array");
        for (const auto& w : *it) {
            if (!w.is_object() || !w.contains("t")) throw ParseError("scenario: every waypoint needs 't'");
            fmcw::Waypoint wp;
            wp.t_s = get_or<double>(w, "t", 0.0);
            wp.absent = get_or<bool>(w, "absent", false);
            if (!wp.absent && (!w.contains("x") || !w.contains("y")))
                throw ParseError("scenario: present waypoints need 'x' and 'y'");
            wp.x_m = get_or<double>(w, "x", 0.0);
            wp.y_m = get_or<double>(w, "y", 0.0);
            s.waypoints.push_back(wp);
        }
        fmcw::validate_waypoints(s.waypoints);
    }

    if (auto it = j.find("radars"); it != j.end() && !it->is_null()) {
        if (!it->is_array()) throw ParseError("scenario: radars must be an array");
        for (const auto& r : *it) s.radars.push_back(parse_radar_config(r));
    }
    if (auto it = j.find("duration"); it != j.end() && !it->is_null()) {
        s.duration_s = get_or<double>(j, "duration", 0.0);
        if (!(*s.duration_s > 0.0)) throw ParseError("scenario: duration must be positive");
    }
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) { return parse_scenario(read_json_file(path)); }

json to_json(const Scenario& s) {
    json waypoints = json::array();
    for (const auto& w : s.waypoints) {
        json jw = {{"t", w.t_s}};
        if (w.absent) {
            jw["absent"] = true;
        } else {
            jw["x"] = w.x_m;
            jw["y"] = w.y_m;
        }
        waypoints.push_back(jw);
    }
    json clutter = json::array();
    for (const auto& c : s.scene.clutter) clutter.push_back({{"range", c.range_m}, {"level_db", c.level_db}});
    json j = {{"seed", s.seed},
              {"lens_on", s.lens_on},
              {"noise_floor", s.scene.noise_floor_db ? json(*s.scene.noise_floor_db) : json(nullptr)},
              {"torso_width", s.scene.torso_width_m},
              {"reflectivity", s.scene.reflectivity},
              {"multipath", s.scene.multipath_enabled},
              {"ghost_probability", s.scene.ghost_probability},
              {"link_constant", s.scene.link_constant_db},
              {"clutter", clutter},
              {"waypoints", waypoints}};
    if (s.duration_s) j["duration"] = *s.duration_s;
    if (!s.radars.empty()) {
        json radars = json::array();
        for (const auto& r : s.radars) radars.push_back(to_json(r));
        j["radars"] = radars;
    }
    return j;
}

ScenarioSimulator::ScenarioSimulator(Scenario scenario, std::vector<fmcw::RadarConfig> radars,
                                     fmcw::ZoneGainModel model)
    : scenario_(std::move(scenario)), radars_(std::move(radars)), model_(model) {
    if (radars_.empty()) throw ConfigError("simulator: no radars configured");
    for (const auto& r : radars_) r.validate();
    model_.lens_on = scenario_.lens_on;
    model_.validate();
}

std::uint64_t ScenarioSimulator::tick_count() const {
    return static_cast<std::uint64_t>(std::llround(scenario_.effective_duration() / frame_period()));
}

fmcw::Scene ScenarioSimulator::scene_at(std::uint64_t tick) {
    std::lock_guard lock(mutex_);
    if (auto it = frozen_.find(tick); it != frozen_.end()) return it->second;

    fmcw::Scene scene = fmcw::step_scene(scenario_.scene, scenario_.waypoints, tick_time(tick));
    if (steering_ && tick >= steering_from_) {
        if (steering_->absent) {
            scene.subject.reset();
        } else {
            scene.subject = fmcw::Subject{steering_->x_m, steering_->y_m};
        }
    }
    frozen_.emplace(tick, scene);
    next_unfrozen_ = std::max(next_unfrozen_, tick + 1);
    // Workers never lag far behind each other; keep a short window.
    while (frozen_.size() > 256) frozen_.erase(frozen_.begin());
    return scene;
}

void ScenarioSimulator::steer(const Steering& s) {
    std::lock_guard lock(mutex_);
    steering_ = s;
    steering_from_ = next_unfrozen_;
}

fmcw::Frame ScenarioSimulator::frame(std::size_t radar_index, std::uint64_t tick) {
    const fmcw::Scene scene = scene_at(tick);
    const auto& radar = radars_.at(radar_index);
    return fmcw::synth_frame(scene, radar, model_, tick_time(tick), fmcw::frame_seed(scenario_.seed, radar_index, tick),
                             tick);
}

}  // namespace lunatrack
