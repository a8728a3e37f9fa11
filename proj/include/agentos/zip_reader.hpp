#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace agentos {

struct ZipEntry {
    std::string name;
    std::string data;
};

// Reads every file member of a zip archive (stored or deflated) in central
// directory order. Directory entries are skipped. Throws E_IO on malformed input.
std::vector<ZipEntry> read_zip(const std::filesystem::path& path);
std::vector<ZipEntry> read_zip_bytes(const std::string& bytes);

}  // namespace agentos
