#pragma once

// Binary frame dump ("frames.bin"): a fixed header followed by frame records,
// all little-endian.
//
//   header: magic "LTFRAME1" (8 bytes), u32 version = 1, u32 reserved = 0
//   record: u32 radar_index, u64 tick, f64 timestamp_s, u32 chirps,
//           u32 samples, u16 uuid_len, uuid bytes, chirps*samples f64 values

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <vector>

#include "lunatrack/fmcw.hpp"

namespace lunatrack {

struct FrameRecord {
    std::uint32_t radar_index{0};
    fmcw::Frame frame;
};

class FrameWriter {
public:
    /// Throws FileError when the file cannot be created.
    explicit FrameWriter(const std::filesystem::path& path);
    void write(std::uint32_t radar_index, const fmcw::Frame& frame);
    /// Flushes and throws FileError if any write failed.
    void close();
    std::uint64_t count() const { return count_; }

private:
    std::filesystem::path path_;
    std::ofstream out_;
    std::uint64_t count_{0};
};

/// Throws FileError or ParseError on truncated or foreign files.
std::vector<FrameRecord> read_frames(const std::filesystem::path& path);

}  // namespace lunatrack
