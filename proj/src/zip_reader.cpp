#include "agentos/zip_reader.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>

#include <zlib.h>

#include "agentos/error.hpp"

namespace agentos {

namespace {

constexpr std::uint32_t kEndOfCentralDir = 0x06054b50;
constexpr std::uint32_t kCentralHeader = 0x02014b50;
constexpr std::uint32_t kLocalHeader = 0x04034b50;

[[noreturn]] void bad(const std::string& why) { throw Error(ErrorCode::io, "zip: " + why); }

std::uint32_t u16(const std::string& b, std::size_t at) {
    if (at + 2 > b.size()) bad("truncated");
    return static_cast<unsigned char>(b[at]) | static_cast<unsigned char>(b[at + 1]) << 8;
}

std::uint32_t u32(const std::string& b, std::size_t at) {
    if (at + 4 > b.size()) bad("truncated");
    return u16(b, at) | u16(b, at + 2) << 16;
}

std::string inflate_raw(const std::string& in, std::size_t expected) {
    z_stream zs{};
    if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) bad("inflateInit failed");
    std::string out(expected, '\0');
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(in.data()));
    zs.avail_in = static_cast<uInt>(in.size());
    zs.next_out = reinterpret_cast<Bytef*>(out.data());
    zs.avail_out = static_cast<uInt>(out.size());
    const int rc = inflate(&zs, Z_FINISH);
    const auto produced = zs.total_out;
    inflateEnd(&zs);
    if (rc != Z_STREAM_END || produced != expected) bad("corrupt deflate stream");
    return out;
}

}  // namespace

std::vector<ZipEntry> read_zip_bytes(const std::string& b) {
    if (b.size() < 22) bad("too short");
    // The end record sits in the last 22 + 65535 bytes.
    std::size_t eocd = std::string::npos;
    const std::size_t lo = b.size() > 22 + 65535 ? b.size() - 22 - 65535 : 0;
    for (std::size_t i = b.size() - 22 + 1; i-- > lo;) {
        if (u32(b, i) == kEndOfCentralDir) {
            eocd = i;
            break;
        }
    }
    if (eocd == std::string::npos) bad("no end of central directory");
    const std::uint32_t count = u16(b, eocd + 10);
    std::size_t pos = u32(b, eocd + 16);

    std::vector<ZipEntry> out;
    for (std::uint32_t n = 0; n < count; ++n) {
        if (u32(b, pos) != kCentralHeader) bad("bad central header");
        const std::uint32_t flags = u16(b, pos + 8);
        const std::uint32_t method = u16(b, pos + 10);
        const std::uint32_t csize = u32(b, pos + 20);
        const std::uint32_t usize = u32(b, pos + 24);
        const std::uint32_t name_len = u16(b, pos + 28);
        const std::uint32_t extra_len = u16(b, pos + 30);
        const std::uint32_t comment_len = u16(b, pos + 32);
        const std::uint32_t local = u32(b, pos + 42);
        if (pos + 46 + name_len > b.size()) bad("truncated name");
        std::string name = b.substr(pos + 46, name_len);
        pos += 46 + name_len + extra_len + comment_len;

        if (!name.empty() && name.back() == '/') continue;
        if (flags & 1) bad(name + " is encrypted");
        if (u32(b, local) != kLocalHeader) bad("bad local header for " + name);
        const std::size_t data_at = local + 30 + u16(b, local + 26) + u16(b, local + 28);
        if (data_at + csize > b.size()) bad("truncated data for " + name);
        std::string raw = b.substr(data_at, csize);
        if (method == 0) {
            if (csize != usize) bad("size mismatch for " + name);
            out.push_back({std::move(name), std::move(raw)});
        } else if (method == 8) {
            out.push_back({std::move(name), inflate_raw(raw, usize)});
        } else {
            bad("unsupported compression method " + std::to_string(method) + " for " + name);
        }
    }
    return out;
}

std::vector<ZipEntry> read_zip(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return read_zip_bytes(ss.str());
}

}  // namespace agentos
