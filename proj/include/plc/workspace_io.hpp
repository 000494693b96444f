#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "plc/workspace.hpp"

namespace plc {

inline constexpr std::uint32_t kIndexFormatVersion = 1;
inline constexpr char kIndexMagic[4] = {'P', 'L', 'C', 'W'};

/// FNV-1a over the fields that determine the reachable set (n, N, L, β).
inline std::uint64_t workspace_hash(const RobotDescription& d) {
    std::uint64_t h = 14695981039346656037ULL;
    auto mix = [&h](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xFFu;
            h *= 1099511628211ULL;
        }
    };
    mix(static_cast<std::uint64_t>(d.segment_count));
    mix(static_cast<std::uint64_t>(d.tooth_count));
    mix(std::bit_cast<std::uint64_t>(d.curve_length));
    mix(std::bit_cast<std::uint64_t>(d.bend_angle));
    return h;
}

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

inline void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

class ByteReader {
public:
    explicit ByteReader(const std::string& data) : data_(data) {}

    std::uint32_t u32() { return static_cast<std::uint32_t>(take(4)); }
    std::uint64_t u64() { return take(8); }
    double f64() { return std::bit_cast<double>(take(8)); }
    std::size_t remaining() const { return data_.size() - pos_; }

private:
    std::uint64_t take(int bytes) {
        if (remaining() < static_cast<std::size_t>(bytes)) throw IoError("workspace index file is truncated");
        std::uint64_t v = 0;
        for (int i = 0; i < bytes; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + static_cast<std::size_t>(i)]))
                 << (8 * i);
        pos_ += static_cast<std::size_t>(bytes);
        return v;
    }

    const std::string& data_;
    std::size_t pos_ = 4;
};

}  // namespace detail

/// Little-endian binary image of an index.
///
/// Layout: "PLCW", u32 version, u32 segment_count, u32 tooth_count,
/// u64 point_count, u64 description hash, u64 configuration_count, then per
/// point three f64 coordinates and a u64 bucket size, then every
/// configuration ordinal as u64 in bucket order.
inline std::string encode_index(const WorkspaceIndex& index, std::uint64_t description_hash) {
    std::string out(kIndexMagic, 4);
    detail::put_u32(out, kIndexFormatVersion);
    detail::put_u32(out, static_cast<std::uint32_t>(index.segment_count()));
    detail::put_u32(out, static_cast<std::uint32_t>(index.tooth_count()));
    detail::put_u64(out, index.point_count());
    detail::put_u64(out, description_hash);
    detail::put_u64(out, index.configuration_count());
    for (std::size_t i = 0; i < index.point_count(); ++i) {
        for (int a = 0; a < 3; ++a) detail::put_u64(out, std::bit_cast<std::uint64_t>(index.point(i)[a]));
        detail::put_u64(out, index.bucket_size(i));
    }
    for (auto o : index.ordinals()) detail::put_u64(out, o);
    return out;
}

struct DecodedIndex {
    WorkspaceIndex index;
    std::uint64_t description_hash;
};

inline DecodedIndex decode_index(const std::string& data) {
    if (data.size() < 4 || std::memcmp(data.data(), kIndexMagic, 4) != 0)
        throw IoError("not a workspace index file (bad magic)");
    detail::ByteReader in(data);
    const auto version = in.u32();
    if (version != kIndexFormatVersion)
        throw IoError("unsupported workspace index format version " + std::to_string(version));
    const auto n = in.u32();
    const auto teeth = in.u32();
    const auto count = in.u64();
    const auto hash = in.u64();
    const auto configs = in.u64();
    if (count > in.remaining() / 32 || configs > in.remaining() / 8) throw IoError("workspace index file is truncated");

    std::vector<Eigen::Vector3d> points(count);
    std::vector<std::uint64_t> offsets(count + 1, 0);
    for (std::uint64_t i = 0; i < count; ++i) {
        for (int a = 0; a < 3; ++a) points[i][a] = in.f64();
        offsets[i + 1] = offsets[i] + in.u64();
    }
    std::vector<std::uint64_t> ordinals(configs);
    for (auto& o : ordinals) o = in.u64();
    if (in.remaining() != 0) throw IoError("workspace index file has trailing bytes");
    try {
        return {WorkspaceIndex(static_cast<int>(n), static_cast<int>(teeth), std::move(points), std::move(offsets),
                               std::move(ordinals)),
                hash};
    } catch (const InvariantError& e) {
        throw IoError(std::string("corrupt workspace index: ") + e.what());
    }
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Writes through a temporary sibling and renames, so readers never see a partial file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw IoError("write to '" + tmp.string() + "' failed");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot move index into place at '" + path.string() + "'");
    }
}

inline void save_index(const std::filesystem::path& path, const WorkspaceIndex& index, std::uint64_t description_hash) {
    write_file_atomic(path, encode_index(index, description_hash));
}

inline DecodedIndex load_index(const std::filesystem::path& path) { return decode_index(read_file(path)); }

}  // namespace plc
