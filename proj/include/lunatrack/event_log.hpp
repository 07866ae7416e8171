#pragma once

// Append-only JSON-lines event log: {"t":..,"kind":..,"payload":{..}} per line.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lunatrack/protocol.hpp"

namespace lunatrack::eventlog {

using Json = protocol::Json;

/// Record kinds: detection, snapshot, tracker, alert, diagnostics.
struct LogRecord {
    double t{0.0};
    std::string kind;
    Json payload = Json::object();
};

std::string encode(const LogRecord& r);
/// Throws ParseError on malformed lines.
LogRecord decode(const std::string& line);

/// Builds a record from a protocol message: its "t" and "kind" move to the
/// envelope, everything else becomes the payload.
LogRecord from_message(const Json& message, double t, std::string kind);

class EventLog {
public:
    /// Truncates or creates `path`; throws FileError when it cannot be opened.
    explicit EventLog(const std::filesystem::path& path,
                      std::chrono::milliseconds flush_interval = std::chrono::milliseconds(1000));
    ~EventLog();
    EventLog(const EventLog&) = delete;
    EventLog& operator=(const EventLog&) = delete;

    /// Returns false once the sink has failed; later records are discarded.
    /// Throws ContractError when `r.t` is older than the previous record.
    bool append(const LogRecord& r);
    void flush();
    void close();

    bool healthy() const { return healthy_; }
    /// Description of the first write failure, reported once.
    std::optional<std::string> take_failure();
    std::uint64_t written() const { return written_; }
    const std::filesystem::path& path() const { return path_; }

private:
    void fail(const std::string& what);

    std::filesystem::path path_;
    std::FILE* file_{nullptr};
    std::chrono::milliseconds flush_interval_;
    std::chrono::steady_clock::time_point last_flush_;
    std::optional<double> last_t_;
    bool healthy_{true};
    std::optional<std::string> failure_;
    std::uint64_t written_{0};
};

/// Reads every record; throws FileError or ParseError (with line number).
std::vector<LogRecord> read_log(const std::filesystem::path& path);

}  // namespace lunatrack::eventlog
