// lunatrack: command-line front end for lens synthesis, ray tracing, coverage
// analysis, simulation, the live pipeline and log replay.
//
// Exit codes: 0 success, 1 usage, 2 config/scenario parse error, 3 runtime failure.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "lunatrack/config.hpp"
#include "lunatrack/coverage.hpp"
#include "lunatrack/errors.hpp"
#include "lunatrack/event_log.hpp"
#include "lunatrack/frame_file.hpp"
#include "lunatrack/lens.hpp"
#include "lunatrack/pipeline.hpp"
#include "lunatrack/raytrace.hpp"
#include "lunatrack/scenario.hpp"
#include "lunatrack/service.hpp"

using namespace lunatrack;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kUsage = 1, kParse = 2, kRuntime = 3 };

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

int report_error(const char* category, const std::string& message, int code) {
    json j{{"error", category}, {"message", message}, {"exit_code", code}};
    std::cerr << j.dump() << std::endl;
    return code;
}

// Unreadable config and scenario files count as parse failures.
PlatformConfig platform(const std::string& path) {
    try {
        return path.empty() ? PlatformConfig{} : load_platform_config(path);
    } catch (const FileError& e) {
        throw ParseError(e.what());
    }
}

std::vector<double> parse_distances(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw CLI::ValidationError("--distances", "not a number: '" + item + "'");
        }
        if (item.find_first_not_of(" \t", used) != std::string::npos) {
            throw CLI::ValidationError("--distances", "not a number: '" + item + "'");
        }
        out.push_back(v);
    }
    if (out.empty()) throw CLI::ValidationError("--distances", "no distances given");
    return out;
}

json to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

struct LensArgs {
    std::string config;
    std::string out;
    std::string plane{"z0"};
    double coord{0.0};
    std::string csv;
};

int lens_synth(const LensArgs& a) {
    const auto cfg = platform(a.config);
    const auto field = lens::synthesize_field(cfg.lens);
    lens::export_ascii(field, std::filesystem::path(a.out));
    std::size_t inside = 0;
    for (std::size_t k = 0; k < field.dims()[2]; ++k)
        for (std::size_t j = 0; j < field.dims()[1]; ++j)
            for (std::size_t i = 0; i < field.dims()[0]; ++i) inside += field.inside(i, j, k) ? 1 : 0;
    json j{{"out", a.out},
           {"dims", field.dims()},
           {"step_mm", field.step()},
           {"voxels_exported", inside}};
    std::cout << j.dump() << "\n";
    return kOk;
}

int lens_slice(const LensArgs& a) {
    const auto cfg = platform(a.config);
    const auto field = lens::synthesize_field(cfg.lens);
    const auto section = lens::cross_section(field, lens::parse_plane(a.plane), a.coord);
    std::ofstream out(a.csv);
    if (!out) throw FileError("cannot create CSV", a.csv);
    section.write_csv(out);
    if (!out.flush()) throw FileError("write failed", a.csv);
    return kOk;
}

struct TraceArgs {
    std::string config;
    double feed_angle{0.0};
    int rays{500};
    double cone{30.0};
    double step{0.1};
    bool classical{false};
    std::string report;
    std::string paths;
};

int trace(const TraceArgs& a) {
    const auto cfg = platform(a.config);
    const double radius = cfg.lens.radius_mm;
    std::unique_ptr<raytrace::Medium> medium;
    lens::PermittivityField field;
    if (a.classical) {
        medium = std::make_unique<raytrace::ClassicalLuneburg>(radius);
    } else {
        field = lens::synthesize_field(cfg.lens);
        medium = std::make_unique<raytrace::VoxelMedium>(field);
    }
    raytrace::TraceOptions opts;
    opts.step_mm = a.step;
    opts.keep_samples = !a.paths.empty();
    const auto feed = raytrace::sector_feed(a.feed_angle, radius);
    const auto bundle = raytrace::trace_bundle(*medium, feed, a.cone, a.rays, opts);
    const auto boresight = raytrace::sector_boresight(a.feed_angle);
    const auto& st = bundle.stats;

    json j{{"medium", a.classical ? "classical" : "modified"},
           {"feed_angle_deg", a.feed_angle},
           {"feed_position_mm", to_json(feed)},
           {"cone_half_angle_deg", a.cone},
           {"step_mm", a.step},
           {"n_rays", st.n_rays},
           {"mean_exit_direction", to_json(st.mean_exit_direction)},
           {"sector_boresight", to_json(boresight)},
           {"boresight_deviation_deg", rad_to_deg(angle_between(st.mean_exit_direction, boresight))},
           {"angular_spread_rms_deg", st.angular_spread_rms_deg},
           {"trapped_fraction", st.trapped_fraction}};
    if (!a.report.empty()) {
        std::ofstream out(a.report);
        if (!out) throw FileError("cannot create report", a.report);
        out << j.dump(2) << "\n";
        if (!out.flush()) throw FileError("write failed", a.report);
    }
    if (!a.paths.empty()) {
        std::ofstream out(a.paths);
        if (!out) throw FileError("cannot create path CSV", a.paths);
        out << "ray,index,x,y,z,s\n";
        char buf[160];
        for (std::size_t r = 0; r < bundle.paths.size(); ++r) {
            const auto& p = bundle.paths[r];
            std::size_t idx = 0;
            auto emit = [&](const raytrace::RayState& s) {
                std::snprintf(buf, sizeof buf, "%zu,%zu,%.6f,%.6f,%.6f,%.6f\n", r, idx++, s.position.x, s.position.y,
                              s.position.z, s.path_length);
                out << buf;
            };
            for (const auto& s : p.samples) emit(s);
            if (p.exit_state) emit(*p.exit_state);
        }
        if (!out.flush()) throw FileError("write failed", a.paths);
    }
    std::cout << j.dump() << "\n";
    return kOk;
}

struct AnalyzeArgs {
    std::string config;
    std::string distances;
    std::string format{"both"};
    std::string json_out;
};

json report_json(const coverage::CoverageReport& r) {
    json rows = json::array();
    for (const auto& row : r.rows) {
        rows.push_back({{"distance_m", row.distance_m},
                        {"alpha_deg", row.alpha_deg},
                        {"body_width_deg", row.body_width_deg},
                        {"verdict", coverage::to_string(row.verdict)},
                        {"regime", coverage::to_string(row.regime)},
                        {"resolvable_separation_m", row.resolvable_separation_m}});
    }
    return {{"gap_deg", r.gap_deg},
            {"gapfree_distance_m", r.gapfree_distance_m},
            {"crossover_distance_m", r.crossover_distance_m},
            {"fmax_unit_cell_ghz", r.fmax_literal_ghz},
            {"fmax_quoted_cell_ghz", r.fmax_quoted_cell_ghz},
            {"rows", rows}};
}

int analyze(const AnalyzeArgs& a) {
    const auto cfg = platform(a.config);
    const auto report = coverage::coverage_report(cfg.coverage, parse_distances(a.distances));
    const auto j = report_json(report);
    if (a.format != "json") std::cout << coverage::format_table(report);
    if (a.format != "table") std::cout << j.dump() << "\n";
    if (!a.json_out.empty()) {
        std::ofstream out(a.json_out);
        if (!out) throw FileError("cannot create report", a.json_out);
        out << j.dump(2) << "\n";
    }
    return kOk;
}

struct SimArgs {
    std::string config;
    std::string scenario;
    std::string out;
    std::string log;
    std::string lens{"on"};
    double duration{-1.0};
};

Scenario scenario_with_lens(const std::string& path, const std::string& lens) {
    Scenario s;
    try {
        s = load_scenario(path);
    } catch (const FileError& e) {
        throw ParseError(e.what());
    }
    if (lens == "off") s.lens_on = false;
    return s;
}

int sim(const SimArgs& a) {
    auto cfg = platform(a.config);
    auto scenario = scenario_with_lens(a.scenario, a.lens);
    PipelineOptions opts;
    if (a.duration >= 0.0) opts.duration_s = a.duration;
    Pipeline pipeline(cfg, scenario, opts);
    const auto ticks = pipeline.tick_count();
    const auto& radars = pipeline.simulator().radars();

    FrameWriter writer(a.out);
    for (std::uint64_t k = 0; k < ticks; ++k) {
        for (std::size_t r = 0; r < radars.size(); ++r) {
            writer.write(static_cast<std::uint32_t>(r), pipeline.simulator().frame(r, k));
        }
    }
    writer.close();
    json j{{"frames", writer.count()}, {"ticks", ticks}, {"out", a.out}};

    if (!a.log.empty()) {
        opts.log_path = a.log;
        Pipeline logged(cfg, scenario, opts);
        const auto res = logged.run_virtual();
        j["log"] = a.log;
        j["alerts"] = res.count(tracker::EventKind::AlertRaised);
        j["log_ok"] = res.log_ok;
    }
    std::cout << j.dump() << "\n";
    return kOk;
}

struct RunArgs {
    std::string config;
    std::string scenario;
    std::string lens{"on"};
    std::string serve;
    std::string ws;
    std::string log;
    double speed{1.0};
    double duration{-1.0};
    bool virtual_clock{false};
};

int run(const RunArgs& a) {
    auto cfg = platform(a.config);
    auto scenario = scenario_with_lens(a.scenario, a.lens);
    PipelineOptions opts;
    opts.speed = a.speed;
    if (a.duration >= 0.0) opts.duration_s = a.duration;
    const std::string log = a.log.empty() ? cfg.service.log_path : a.log;
    if (!log.empty()) opts.log_path = log;
    Pipeline pipeline(cfg, scenario, opts);

    std::unique_ptr<service::StreamService> svc;
    if (!a.serve.empty()) {
        service::ServiceOptions so;
        so.tcp_address = a.serve;
        so.ws_address = !a.ws.empty() ? a.ws
                        : !cfg.service.ws_listen.empty() ? cfg.service.ws_listen
                                                         : service::default_ws_address(a.serve);
        so.client_buffer = cfg.service.client_buffer;
        svc = std::make_unique<service::StreamService>(so, [&](const std::string& line) {
            pipeline.handle_inbound(line);
        });
        svc->start();
        json hello{{"serving", {{"tcp", svc->tcp_port()}, {"ws", svc->ws_port()}}}};
        std::cerr << hello.dump() << std::endl;
    }

    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    const auto res = a.virtual_clock ? pipeline.run_virtual() : pipeline.run_live(svc.get(), &g_stop);
    if (svc) svc->stop();

    json alerts = json::array();
    for (const auto& e : res.events) {
        if (e.kind == tracker::EventKind::AlertRaised) alerts.push_back({{"zone", e.zone}, {"t", e.timestamp_s}});
    }
    json j{{"ticks", res.ticks},
           {"messages", res.stats.consumed},
           {"drops", res.stats.dropped},
           {"gaps", res.stats.gaps},
           {"detections", res.detected_messages},
           {"handoffs", res.count(tracker::EventKind::ZoneHandoff)},
           {"alerts", alerts},
           {"median_latency_s", res.stats.median_latency_s()},
           {"log", log},
           {"log_ok", res.log_ok}};
    std::cout << j.dump() << "\n";
    return kOk;
}

struct ReplayArgs {
    std::string config;
    std::string log;
};

int replay_cmd(const ReplayArgs& a) {
    const auto cfg = platform(a.config);
    const auto records = eventlog::read_log(a.log);
    const auto res = replay(records, cfg.tracker);
    for (const auto& line : res.replayed) std::cout << line << "\n";
    json j{{"detections", res.detections},
           {"snapshots", res.snapshots},
           {"tracker_records", res.replayed.size()},
           {"identical", res.identical()}};
    std::cerr << j.dump() << std::endl;
    if (!res.identical()) return report_error("replay_mismatch", "replayed tracker events differ from the log", kRuntime);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Five-radar mmWave fall-detection platform with a multi-feed GRIN Luneburg lens"};
    app.require_subcommand(1);

    LensArgs lens_args;
    auto* lens_cmd = app.add_subcommand("lens", "Lens permittivity synthesis");
    lens_cmd->require_subcommand(1);
    auto* synth_cmd = lens_cmd->add_subcommand("synth", "Write the ASCII permittivity export");
    synth_cmd->add_option("--config", lens_args.config, "Platform config (JSON)");
    synth_cmd->add_option("--out", lens_args.out, "Output file")->required();
    auto* slice_cmd = lens_cmd->add_subcommand("slice", "Write a cross-section as CSV");
    slice_cmd->add_option("--config", lens_args.config, "Platform config (JSON)");
    slice_cmd->add_option("--plane", lens_args.plane, "x0, y0 or z0")
        ->check(CLI::IsMember({"x0", "y0", "z0"}))
        ->capture_default_str();
    slice_cmd->add_option("--coord", lens_args.coord, "Plane offset, mm")->capture_default_str();
    slice_cmd->add_option("--csv", lens_args.csv, "Output CSV")->required();

    TraceArgs trace_args;
    auto* trace_cmd = app.add_subcommand("trace", "Trace a ray bundle from a sector feed");
    trace_cmd->add_option("--config", trace_args.config, "Platform config (JSON)");
    trace_cmd->add_option("--feed-angle", trace_args.feed_angle, "Sector azimuth, degrees")->capture_default_str();
    trace_cmd->add_option("--rays", trace_args.rays, "Number of rays")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    trace_cmd->add_option("--cone", trace_args.cone, "Launch cone half-angle, degrees")
        ->check(CLI::Range(0.0, 89.0))
        ->capture_default_str();
    trace_cmd->add_option("--step", trace_args.step, "Integration step, mm")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    trace_cmd->add_flag("--classical", trace_args.classical, "Trace the classical Luneburg profile instead");
    trace_cmd->add_option("--report", trace_args.report, "JSON summary output");
    trace_cmd->add_option("--paths", trace_args.paths, "Per-ray polyline CSV output");

    AnalyzeArgs analyze_args;
    auto* analyze_cmd = app.add_subcommand("analyze", "Coverage and link-budget report");
    analyze_cmd->add_option("--config", analyze_args.config, "Platform config (JSON)");
    analyze_cmd->add_option("--distances", analyze_args.distances, "Comma-separated distances, m")->required();
    analyze_cmd->add_option("--format", analyze_args.format, "table, json or both")
        ->check(CLI::IsMember({"table", "json", "both"}))
        ->capture_default_str();
    analyze_cmd->add_option("--json", analyze_args.json_out, "Also write the JSON report here");

    SimArgs sim_args;
    auto* sim_cmd = app.add_subcommand("sim", "Dump simulated frames offline");
    sim_cmd->add_option("--config", sim_args.config, "Platform config (JSON)");
    sim_cmd->add_option("--scenario", sim_args.scenario, "Scenario file")->required();
    sim_cmd->add_option("--out", sim_args.out, "Frame dump")->required();
    sim_cmd->add_option("--log", sim_args.log, "Also run the virtual-clock pipeline and write its event log");
    sim_cmd->add_option("--lens", sim_args.lens, "on or off")->check(CLI::IsMember({"on", "off"}));
    sim_cmd->add_option("--duration", sim_args.duration, "Seconds of playback")->check(CLI::NonNegativeNumber);

    RunArgs run_args;
    auto* run_cmd = app.add_subcommand("run", "Run the live pipeline");
    run_cmd->add_option("--config", run_args.config, "Platform config (JSON)");
    run_cmd->add_option("--scenario", run_args.scenario, "Scenario file")->required();
    run_cmd->add_option("--lens", run_args.lens, "on or off")->check(CLI::IsMember({"on", "off"}));
    run_cmd->add_option("--serve", run_args.serve, "Stream address host:port");
    run_cmd->add_option("--ws", run_args.ws, "WebSocket address (default: next port)");
    run_cmd->add_option("--log", run_args.log, "Event log path");
    run_cmd->add_option("--speed", run_args.speed, "Playback speed factor")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    run_cmd->add_option("--duration", run_args.duration, "Seconds of playback")->check(CLI::NonNegativeNumber);
    run_cmd->add_flag("--virtual", run_args.virtual_clock, "Step the virtual clock without pacing");

    ReplayArgs replay_args;
    auto* replay_sub = app.add_subcommand("replay", "Re-run fusion and tracking from an event log");
    replay_sub->add_option("--config", replay_args.config, "Platform config (JSON)");
    replay_sub->add_option("--log", replay_args.log, "Event log")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report_error("usage", e.what(), kUsage);
    }

    try {
        if (synth_cmd->parsed()) return lens_synth(lens_args);
        if (slice_cmd->parsed()) return lens_slice(lens_args);
        if (trace_cmd->parsed()) return trace(trace_args);
        if (analyze_cmd->parsed()) return analyze(analyze_args);
        if (sim_cmd->parsed()) return sim(sim_args);
        if (run_cmd->parsed()) return run(run_args);
        if (replay_sub->parsed()) return replay_cmd(replay_args);
    } catch (const CLI::ValidationError& e) {
        return report_error("usage", e.what(), kUsage);
    } catch (const ParseError& e) {
        return report_error("parse", e.what(), kParse);
    } catch (const ConfigError& e) {
        return report_error("config", e.what(), kParse);
    } catch (const FileError& e) {
        return report_error("file", e.what(), kRuntime);
    } catch (const std::exception& e) {
        return report_error("runtime", e.what(), kRuntime);
    }
    return kUsage;
}
