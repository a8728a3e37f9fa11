#include <fstream>
#include <sstream>

#include "agentos/backend.hpp"
#include "agentos/error.hpp"

namespace agentos {

namespace {

constexpr std::string_view kHeader = "agentos-cassette 1";

}  // namespace

CassetteBackend::CassetteBackend(std::filesystem::path path, CassetteMode mode, std::shared_ptr<Backend> inner)
    : path_(std::move(path)), mode_(mode), inner_(std::move(inner)) {
    if (mode_ == CassetteMode::record && !inner_) {
        throw Error(ErrorCode::config, "record mode needs an inner backend");
    }
    load();
}

// Layout: header line, then per record
//   <64 hex digest> SP <decimal byte length> SP <blob bytes> LF
// The blob is the response JSON; the length makes embedded newlines safe.
void CassetteBackend::load() {
    std::ifstream in(path_, std::ios::binary);
    if (!in) {
        if (mode_ == CassetteMode::replay) throw Error(ErrorCode::io, "cannot open cassette " + path_.string());
        return;
    }
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (data.empty() && mode_ == CassetteMode::record) return;

    auto bad = [&](const std::string& why) {
        return Error(ErrorCode::io, "corrupt cassette " + path_.string() + ": " + why);
    };
    if (data.compare(0, kHeader.size(), kHeader) != 0 || data.size() <= kHeader.size() ||
        data[kHeader.size()] != '\n') {
        throw bad("missing header");
    }
    std::size_t pos = kHeader.size() + 1;
    while (pos < data.size()) {
        const std::size_t sp1 = data.find(' ', pos);
        if (sp1 == std::string::npos || sp1 - pos != 64) throw bad("bad digest at byte " + std::to_string(pos));
        std::string digest = data.substr(pos, 64);
        const std::size_t sp2 = data.find(' ', sp1 + 1);
        if (sp2 == std::string::npos) throw bad("bad length at byte " + std::to_string(sp1));
        std::size_t len = 0;
        try {
            len = std::stoull(data.substr(sp1 + 1, sp2 - sp1 - 1));
        } catch (const std::exception&) {
            throw bad("bad length at byte " + std::to_string(sp1));
        }
        const std::size_t blob_at = sp2 + 1;
        if (blob_at + len >= data.size() || data[blob_at + len] != '\n') throw bad("truncated record");
        records_[digest].push_back(data.substr(blob_at, len));
        ++count_;
        pos = blob_at + len + 1;
    }
}

void CassetteBackend::append(const std::string& digest, const std::string& blob) {
    const bool fresh = !std::filesystem::exists(path_) || std::filesystem::file_size(path_) == 0;
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) throw Error(ErrorCode::io, "cannot write cassette " + path_.string());
    if (fresh) out << kHeader << '\n';
    out << digest << ' ' << blob.size() << ' ' << blob << '\n';
    out.flush();
    if (!out) throw Error(ErrorCode::io, "write failed on cassette " + path_.string());
}

CompletionResponse CassetteBackend::complete(const CompletionRequest& request) {
    const std::string digest = request_digest(request);
    {
        std::lock_guard lock(mutex_);
        auto it = records_.find(digest);
        std::size_t& cur = cursor_[digest];
        if (it != records_.end() && cur < it->second.size()) {
            auto j = nlohmann::json::parse(it->second[cur++], nullptr, false);
            if (j.is_discarded()) throw Error(ErrorCode::io, "cassette record is not JSON");
            return response_from_json(j);
        }
        if (mode_ == CassetteMode::replay) {
            throw Error(ErrorCode::cassette_miss, "no recorded response for request " + digest.substr(0, 12));
        }
    }

    CompletionResponse response = inner_->complete(request);
    const std::string blob = response_to_json(response).dump();
    std::lock_guard lock(mutex_);
    append(digest, blob);
    records_[digest].push_back(blob);
    ++cursor_[digest];
    ++count_;
    ++forwarded_;
    return response;
}

std::size_t CassetteBackend::record_count() const {
    std::lock_guard lock(mutex_);
    return count_;
}

std::size_t CassetteBackend::forwarded() const {
    std::lock_guard lock(mutex_);
    return forwarded_;
}

}  // namespace agentos
