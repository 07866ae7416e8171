#include "lunatrack/event_log.hpp"

#include <cerrno>
#include <cstring>
#include <fstream>

#include "lunatrack/errors.hpp"

namespace lunatrack::eventlog {

std::string encode(const LogRecord& r) {
    Json j{{"t", r.t}, {"kind", r.kind}, {"payload", r.payload}};
    return j.dump();
}

LogRecord decode(const std::string& line) {
    Json j;
    try {
        j = Json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("event log: ") + e.what());
    }
    if (!j.is_object() || !j.contains("t") || !j.contains("kind") || !j["t"].is_number() || !j["kind"].is_string()) {
        throw ParseError("event log: record needs numeric t and string kind");
    }
    LogRecord r;
    r.t = j["t"].get<double>();
    r.kind = j["kind"].get<std::string>();
    if (auto p = j.find("payload"); p != j.end()) {
        if (!p->is_object()) throw ParseError("event log: payload must be an object");
        r.payload = *p;
    }
    return r;
}

LogRecord from_message(const Json& message, double t, std::string kind) {
    LogRecord r;
    r.t = t;
    r.kind = std::move(kind);
    for (const auto& [key, value] : message.items()) {
        if (key == "kind" || key == "t") continue;
        r.payload[key] = value;
    }
    return r;
}

EventLog::EventLog(const std::filesystem::path& path, std::chrono::milliseconds flush_interval)
    : path_(path), flush_interval_(flush_interval), last_flush_(std::chrono::steady_clock::now()) {
    file_ = std::fopen(path.c_str(), "w");
    if (file_ == nullptr) throw FileError(std::string("cannot open event log: ") + std::strerror(errno), path);
}

EventLog::~EventLog() { close(); }

void EventLog::fail(const std::string& what) {
    if (!healthy_) return;
    healthy_ = false;
    failure_ = "event log " + path_.string() + ": " + what;
}

bool EventLog::append(const LogRecord& r) {
    if (last_t_ && r.t < *last_t_) {
        throw ContractError("event log: timestamp " + std::to_string(r.t) + " precedes " + std::to_string(*last_t_));
    }
    last_t_ = r.t;
    if (!healthy_ || file_ == nullptr) return false;
    std::string line = encode(r);
    line.push_back('\n');
    if (std::fwrite(line.data(), 1, line.size(), file_) != line.size()) {
        fail(std::strerror(errno));
        return false;
    }
    ++written_;
    if (std::chrono::steady_clock::now() - last_flush_ >= flush_interval_) flush();
    return healthy_;
}

void EventLog::flush() {
    last_flush_ = std::chrono::steady_clock::now();
    if (!healthy_ || file_ == nullptr) return;
    if (std::fflush(file_) != 0) fail(std::strerror(errno));
}

void EventLog::close() {
    if (file_ == nullptr) return;
    flush();
    if (std::fclose(file_) != 0) fail(std::strerror(errno));
    file_ = nullptr;
}

std::optional<std::string> EventLog::take_failure() {
    auto out = std::move(failure_);
    failure_.reset();
    return out;
}

std::vector<LogRecord> read_log(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FileError("cannot open event log", path);
    std::vector<LogRecord> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        try {
            out.push_back(decode(line));
        } catch (const ParseError& e) {
            throw ParseError(path.string() + ":" + std::to_string(n) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace lunatrack::eventlog
