#include "support.hpp"

#include <cstdint>

#include <zlib.h>

namespace testing {

namespace {

void u16(std::string& o, std::uint32_t v) {
    o.push_back(static_cast<char>(v & 0xff));
    o.push_back(static_cast<char>((v >> 8) & 0xff));
}
void u32(std::string& o, std::uint32_t v) {
    u16(o, v & 0xffff);
    u16(o, v >> 16);
}

}  // namespace

std::string make_zip(const std::vector<std::pair<std::string, std::string>>& entries) {
    std::string body, central;
    for (const auto& [name, data] : entries) {
        const auto crc = static_cast<std::uint32_t>(
            crc32(0, reinterpret_cast<const Bytef*>(data.data()), static_cast<uInt>(data.size())));
        const auto offset = static_cast<std::uint32_t>(body.size());
        u32(body, 0x04034b50);
        u16(body, 20);
        u16(body, 0);
        u16(body, 0);  // stored
        u16(body, 0);
        u16(body, 0);
        u32(body, crc);
        u32(body, static_cast<std::uint32_t>(data.size()));
        u32(body, static_cast<std::uint32_t>(data.size()));
        u16(body, static_cast<std::uint32_t>(name.size()));
        u16(body, 0);
        body += name;
        body += data;

        u32(central, 0x02014b50);
        u16(central, 20);
        u16(central, 20);
        u16(central, 0);
        u16(central, 0);
        u16(central, 0);
        u16(central, 0);
        u32(central, crc);
        u32(central, static_cast<std::uint32_t>(data.size()));
        u32(central, static_cast<std::uint32_t>(data.size()));
        u16(central, static_cast<std::uint32_t>(name.size()));
        u16(central, 0);
        u16(central, 0);
        u16(central, 0);
        u16(central, 0);
        u32(central, 0);
        u32(central, offset);
        central += name;
    }
    std::string out = body + central;
    u32(out, 0x06054b50);
    u16(out, 0);
    u16(out, 0);
    u16(out, static_cast<std::uint32_t>(entries.size()));
    u16(out, static_cast<std::uint32_t>(entries.size()));
    u32(out, static_cast<std::uint32_t>(central.size()));
    u32(out, static_cast<std::uint32_t>(body.size()));
    u16(out, 0);
    return out;
}

}  // namespace testing
