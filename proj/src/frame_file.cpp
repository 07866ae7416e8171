#include "lunatrack/frame_file.hpp"

#include <bit>
#include <cstring>

#include "lunatrack/errors.hpp"

namespace lunatrack {

static_assert(std::endian::native == std::endian::little, "frame files are written in host order");

namespace {

constexpr char kMagic[8] = {'L', 'T', 'F', 'R', 'A', 'M', 'E', '1'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::ifstream& in, const std::filesystem::path& path) {
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw ParseError("truncated frame file: " + path.string());
    return v;
}

}  // namespace

FrameWriter::FrameWriter(const std::filesystem::path& path) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw FileError("cannot create frame file", path.string());
    out_.write(kMagic, sizeof kMagic);
    put(out_, kVersion);
    put(out_, std::uint32_t{0});
}

void FrameWriter::write(std::uint32_t radar_index, const fmcw::Frame& f) {
    if (f.data.size() != static_cast<std::size_t>(f.chirps) * static_cast<std::size_t>(f.samples)) {
        throw ContractError("frame data does not match its dimensions");
    }
    put(out_, radar_index);
    put(out_, f.index);
    put(out_, f.timestamp_s);
    put(out_, static_cast<std::uint32_t>(f.chirps));
    put(out_, static_cast<std::uint32_t>(f.samples));
    put(out_, static_cast<std::uint16_t>(f.uuid.size()));
    out_.write(f.uuid.data(), static_cast<std::streamsize>(f.uuid.size()));
    out_.write(reinterpret_cast<const char*>(f.data.data()), static_cast<std::streamsize>(f.data.size() * sizeof(double)));
    ++count_;
}

void FrameWriter::close() {
    out_.flush();
    if (!out_) throw FileError("write failed", path_.string());
    out_.close();
}

std::vector<FrameRecord> read_frames(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileError("cannot open frame file", path.string());
    char magic[8];
    if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
        throw ParseError("not a frame file: " + path.string());
    }
    if (get<std::uint32_t>(in, path) != kVersion) throw ParseError("unsupported frame file version: " + path.string());
    get<std::uint32_t>(in, path);

    std::vector<FrameRecord> out;
    while (in.peek() != std::ifstream::traits_type::eof()) {
        FrameRecord r;
        r.radar_index = get<std::uint32_t>(in, path);
        r.frame.index = get<std::uint64_t>(in, path);
        r.frame.timestamp_s = get<double>(in, path);
        r.frame.chirps = static_cast<int>(get<std::uint32_t>(in, path));
        r.frame.samples = static_cast<int>(get<std::uint32_t>(in, path));
        r.frame.uuid.resize(get<std::uint16_t>(in, path));
        if (!in.read(r.frame.uuid.data(), static_cast<std::streamsize>(r.frame.uuid.size()))) {
            throw ParseError("truncated frame file: " + path.string());
        }
        r.frame.data.resize(static_cast<std::size_t>(r.frame.chirps) * static_cast<std::size_t>(r.frame.samples));
        if (!in.read(reinterpret_cast<char*>(r.frame.data.data()),
                     static_cast<std::streamsize>(r.frame.data.size() * sizeof(double)))) {
            throw ParseError("truncated frame file: " + path.string());
        }
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace lunatrack
