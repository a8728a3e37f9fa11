#include "agentos/ragstore.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "agentos/error.hpp"
#include "agentos/text.hpp"
#include "agentos/tool_runner.hpp"
#include "agentos/zip_reader.hpp"

namespace agentos {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<std::string> chunk_text(std::string_view text, std::size_t chunk_size) {
    if (chunk_size == 0) throw Error(ErrorCode::args, "chunk_size must be at least 1");
    const auto tokens = split_whitespace(text);
    std::vector<std::string> out;
    for (std::size_t i = 0; i < tokens.size(); i += chunk_size) {
        std::string c;
        for (std::size_t j = i; j < std::min(tokens.size(), i + chunk_size); ++j) {
            if (j > i) c.push_back(' ');
            c.append(tokens[j]);
        }
        out.push_back(std::move(c));
    }
    return out;
}

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

double cosine(const std::vector<float>& a, const std::vector<float>& b) {
    if (a.size() != b.size()) throw Error(ErrorCode::args, "vector dimensions differ");
    double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a[i]) * b[i];
        na += static_cast<double>(a[i]) * a[i];
        nb += static_cast<double>(b[i]) * b[i];
    }
    if (na == 0 || nb == 0) return 0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

HashingEmbedder::HashingEmbedder(std::size_t dim) : dim_(dim) {
    if (dim_ == 0) throw Error(ErrorCode::args, "embedding dimension must be at least 1");
}

std::string HashingEmbedder::id() const { return "hashing-" + std::to_string(dim_); }

std::vector<float> HashingEmbedder::embed(const std::string& text) {
    std::vector<double> acc(dim_, 0.0);
    for (auto tok : split_whitespace(text)) acc[fnv1a64(to_lower(tok)) % dim_] += 1.0;
    double norm = 0;
    for (double v : acc) norm += v * v;
    norm = std::sqrt(norm);
    std::vector<float> out(dim_, 0.0f);
    if (norm > 0) {
        for (std::size_t i = 0; i < dim_; ++i) out[i] = static_cast<float>(acc[i] / norm);
    }
    return out;
}

HttpEmbedder::HttpEmbedder(HttpConfig config, std::string model, std::size_t dim)
    : config_(std::move(config)), model_(std::move(model)), dim_(dim) {
    if (config_.base_url.empty() || config_.api_key.empty()) {
        throw Error(ErrorCode::config, "http embedder needs an api base URL and key");
    }
}

std::vector<float> HttpEmbedder::embed(const std::string& text) {
    const json res = post_json(config_, "/embeddings", json{{"model", model_}, {"input", json::array({text})}});
    std::vector<float> v;
    try {
        v = res.at("data").at(0).at("embedding").get<std::vector<float>>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::backend, std::string("malformed embeddings response: ") + e.what());
    }
    if (v.size() != dim_) {
        throw Error(ErrorCode::backend,
                    "embedding has dimension " + std::to_string(v.size()) + ", expected " + std::to_string(dim_));
    }
    return v;
}

bool rank_before(const ScoredChunk& a, const ScoredChunk& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.chunk.doc_id != b.chunk.doc_id) return a.chunk.doc_id < b.chunk.doc_id;
    return a.chunk.ordinal < b.chunk.ordinal;
}

// ---------------------------------------------------------------- codec

namespace {

constexpr std::uint32_t kChunkFormatVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

struct Reader {
    const std::string& b;
    std::size_t pos = 0;

    std::uint32_t u32() {
        if (pos + 4 > b.size()) throw Error(ErrorCode::io, "chunk file truncated");
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b[pos + i])) << (8 * i);
        pos += 4;
        return v;
    }
    std::string bytes(std::size_t n) {
        if (pos + n > b.size()) throw Error(ErrorCode::io, "chunk file truncated");
        std::string s = b.substr(pos, n);
        pos += n;
        return s;
    }
};

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_atomic(const fs::path& p, const std::string& bytes) {
    const fs::path tmp = p.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::io, "cannot write " + tmp.string());
        out << bytes;
        if (!out.flush()) throw Error(ErrorCode::io, "write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, p, ec);
    if (ec) throw Error(ErrorCode::io, "cannot replace " + p.string() + ": " + ec.message());
}

bool supported_text(const std::string& name) {
    const std::string ext = to_lower(fs::path(name).extension().string());
    return ext == ".txt" || ext == ".md";
}

bool is_zip(const std::string& name) { return to_lower(fs::path(name).extension().string()) == ".zip"; }

struct Document {
    std::string doc_id;
    std::string text;
};

void collect_file(const fs::path& file, const std::string& doc_id, std::vector<Document>& docs, IngestReport& rep) {
    if (is_zip(doc_id)) {
        for (auto& entry : read_zip(file)) {
            ++rep.files_seen;
            const std::string id = doc_id + "!" + entry.name;
            if (supported_text(entry.name)) {
                docs.push_back({id, std::move(entry.data)});
            } else {
                rep.skipped.push_back(id);
            }
        }
        return;
    }
    ++rep.files_seen;
    if (supported_text(doc_id)) {
        docs.push_back({doc_id, read_file(file)});
    } else {
        rep.skipped.push_back(doc_id);
    }
}

const std::string kManifestFormat = "agentos-collection 1";

}  // namespace

std::string encode_chunks(const std::vector<Chunk>& chunks, std::size_t dimension) {
    std::string out = "AGCH";
    put_u32(out, kChunkFormatVersion);
    put_u32(out, static_cast<std::uint32_t>(dimension));
    put_u32(out, static_cast<std::uint32_t>(chunks.size()));
    for (const auto& c : chunks) {
        if (c.vector.size() != dimension) throw Error(ErrorCode::args, "chunk vector dimension mismatch");
        put_u32(out, static_cast<std::uint32_t>(c.doc_id.size()));
        out += c.doc_id;
        put_u32(out, c.ordinal);
        put_u32(out, c.token_count);
        for (float f : c.vector) put_u32(out, std::bit_cast<std::uint32_t>(f));
        put_u32(out, static_cast<std::uint32_t>(c.text.size()));
        out += c.text;
    }
    return out;
}

std::vector<Chunk> decode_chunks(const std::string& bytes, std::size_t& dimension) {
    Reader r{bytes};
    if (r.bytes(4) != "AGCH") throw Error(ErrorCode::io, "not a chunk file");
    if (const auto v = r.u32(); v != kChunkFormatVersion) {
        throw Error(ErrorCode::io, "unsupported chunk file version " + std::to_string(v));
    }
    dimension = r.u32();
    const std::uint32_t count = r.u32();
    std::vector<Chunk> out;
    out.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        Chunk c;
        c.doc_id = r.bytes(r.u32());
        c.ordinal = r.u32();
        c.token_count = r.u32();
        c.vector.resize(dimension);
        for (auto& f : c.vector) f = std::bit_cast<float>(r.u32());
        c.text = r.bytes(r.u32());
        out.push_back(std::move(c));
    }
    if (r.pos != bytes.size()) throw Error(ErrorCode::io, "trailing bytes in chunk file");
    return out;
}

// ---------------------------------------------------------------- store

RagStore::RagStore(fs::path root) : root_(std::move(root)) {}

std::mutex& RagStore::lock_for(const std::string& name) const {
    std::lock_guard g(locks_mutex_);
    auto& m = locks_[name];
    if (!m) m = std::make_unique<std::mutex>();
    return *m;
}

bool RagStore::has_collection(const std::string& name) const {
    return is_identifier(name) && fs::exists(root_ / name / "manifest.json");
}

std::vector<std::string> RagStore::collections() const {
    std::vector<std::string> out;
    std::error_code ec;
    for (const auto& e : fs::directory_iterator(root_, ec)) {
        const std::string n = e.path().filename().string();
        if (has_collection(n)) out.push_back(n);
    }
    std::sort(out.begin(), out.end());
    return out;
}

CollectionInfo RagStore::info(const std::string& name) const {
    if (!has_collection(name)) throw Error(ErrorCode::not_found, "no collection named " + name);
    const fs::path p = root_ / name / "manifest.json";
    auto j = json::parse(read_file(p), nullptr, false);
    if (j.is_discarded() || j.value("format", "") != kManifestFormat) {
        throw Error(ErrorCode::io, p.string() + " is not a collection manifest");
    }
    CollectionInfo ci;
    ci.name = j.at("name").get<std::string>();
    ci.embedder = j.at("embedder").get<std::string>();
    ci.dimension = j.at("dimension").get<std::size_t>();
    ci.chunk_size = j.at("chunk_size").get<std::size_t>();
    for (const auto& d : j.at("documents")) ci.documents[d.at("doc_id").get<std::string>()] = d.at("chunks").get<std::size_t>();
    ci.chunks = j.at("chunks").get<std::size_t>();
    return ci;
}

std::vector<Chunk> RagStore::load_chunks(const std::string& name) const {
    const CollectionInfo ci = info(name);
    std::size_t dim = 0;
    auto chunks = decode_chunks(read_file(root_ / name / "chunks.bin"), dim);
    if (dim != ci.dimension || chunks.size() != ci.chunks) {
        throw Error(ErrorCode::io, "collection " + name + " manifest disagrees with its chunk file");
    }
    return chunks;
}

void RagStore::save(const CollectionInfo& ci, const std::vector<Chunk>& chunks) const {
    const fs::path dir = root_ / ci.name;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::io, "cannot create " + dir.string() + ": " + ec.message());
    json docs = json::array();
    for (const auto& [id, n] : ci.documents) docs.push_back({{"doc_id", id}, {"chunks", n}});
    json manifest{{"format", kManifestFormat}, {"name", ci.name},         {"embedder", ci.embedder},
                  {"dimension", ci.dimension}, {"chunk_size", ci.chunk_size}, {"documents", docs},
                  {"chunks", chunks.size()}};
    // Chunks first: a manifest never points at a chunk file it does not match
    // except across a crash between the two renames.
    write_atomic(dir / "chunks.bin", encode_chunks(chunks, ci.dimension));
    write_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

IngestReport RagStore::ingest(const fs::path& path, const std::string& collection, Embedder& embedder,
                              std::size_t chunk_size) {
    if (!is_identifier(collection)) throw Error(ErrorCode::args, "collection name '" + collection + "' is not an identifier");
    if (chunk_size == 0) throw Error(ErrorCode::args, "chunk_size must be at least 1");
    std::error_code ec;
    if (!fs::exists(path, ec)) throw Error(ErrorCode::io, "no such path " + path.string());

    IngestReport rep;
    std::vector<Document> docs;
    if (fs::is_directory(path, ec)) {
        const fs::path base = path.lexically_normal();
        std::string prefix = base.filename().string();
        if (prefix.empty() || prefix == ".") prefix = base.parent_path().filename().string();
        std::vector<fs::path> files;
        for (const auto& e : fs::recursive_directory_iterator(path, ec)) {
            if (e.is_regular_file()) files.push_back(e.path());
        }
        std::vector<std::pair<std::string, fs::path>> named;
        for (const auto& f : files) named.emplace_back(prefix + "/" + f.lexically_relative(path).generic_string(), f);
        std::sort(named.begin(), named.end());
        for (const auto& [id, f] : named) collect_file(f, id, docs, rep);
    } else {
        collect_file(path, path.filename().string(), docs, rep);
    }
    rep.files_ingested = docs.size();
    rep.files_skipped = rep.files_seen - rep.files_ingested;
    if (docs.empty()) throw Error(ErrorCode::empty, "no .txt or .md documents under " + path.string());

    std::lock_guard lock(lock_for(collection));
    CollectionInfo ci;
    std::vector<Chunk> chunks;
    if (has_collection(collection)) {
        ci = info(collection);
        if (ci.embedder != embedder.id() || ci.dimension != embedder.dimension()) {
            throw Error(ErrorCode::args, "collection " + collection + " was built with " + ci.embedder);
        }
        chunks = load_chunks(collection);
    } else {
        ci.name = collection;
        ci.embedder = embedder.id();
        ci.dimension = embedder.dimension();
    }
    ci.chunk_size = chunk_size;

    std::map<std::string, std::vector<Chunk>> fresh;
    for (const auto& d : docs) {
        auto& out = fresh[d.doc_id];
        out.clear();
        const auto pieces = chunk_text(d.text, chunk_size);
        for (std::size_t i = 0; i < pieces.size(); ++i) {
            Chunk c;
            c.doc_id = d.doc_id;
            c.ordinal = static_cast<std::uint32_t>(i);
            c.token_count = static_cast<std::uint32_t>(split_whitespace(pieces[i]).size());
            c.vector = embedder.embed(pieces[i]);
            c.text = pieces[i];
            out.push_back(std::move(c));
        }
    }
    std::erase_if(chunks, [&](const Chunk& c) { return fresh.count(c.doc_id) > 0; });
    for (auto& [id, list] : fresh) {
        ci.documents[id] = list.size();
        rep.chunks_written += list.size();
        for (auto& c : list) chunks.push_back(std::move(c));
    }
    std::sort(chunks.begin(), chunks.end(), [](const Chunk& a, const Chunk& b) {
        return a.doc_id != b.doc_id ? a.doc_id < b.doc_id : a.ordinal < b.ordinal;
    });
    ci.chunks = chunks.size();
    save(ci, chunks);
    return rep;
}

std::vector<ScoredChunk> RagStore::query(const std::string& text, const std::string& collection, Embedder& embedder,
                                         std::size_t k) const {
    if (k == 0) throw Error(ErrorCode::args, "k must be at least 1");
    const CollectionInfo ci = info(collection);
    if (ci.dimension != embedder.dimension()) {
        throw Error(ErrorCode::args, "collection " + collection + " was built with " + ci.embedder);
    }
    auto chunks = load_chunks(collection);
    const auto q = embedder.embed(text);
    std::vector<ScoredChunk> scored;
    scored.reserve(chunks.size());
    for (auto& c : chunks) {
        const double s = cosine(q, c.vector);
        scored.push_back({std::move(c), s});
    }
    const std::size_t n = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(), rank_before);
    scored.resize(n);
    return scored;
}

// ---------------------------------------------------------------- answer loop

std::string format_chunks(const std::vector<ScoredChunk>& hits) {
    std::string out;
    char score[32];
    for (std::size_t i = 0; i < hits.size(); ++i) {
        std::snprintf(score, sizeof score, "%.4f", hits[i].score);
        out += "[" + std::to_string(i + 1) + "] " + hits[i].chunk.doc_id + "#" + std::to_string(hits[i].chunk.ordinal) +
               " (score " + score + ")\n" + hits[i].chunk.text + "\n";
    }
    return out;
}

namespace {

const char* const kCanAnswerSystem =
    "You judge retrieval results. Reply with the single word YES if the passages below contain what is needed "
    "to answer the question, otherwise reply NO.";
const char* const kModifySystem =
    "You improve search queries. Given a question and passages that did not settle it, write one new search "
    "query likely to surface the missing facts. Reply with the query only.";
const char* const kAnswerSystem =
    "Answer the question using only the passages provided. Be brief and state the answer directly.";

std::string question_block(const std::string& question, const std::vector<ScoredChunk>& hits) {
    return "Question: " + question + "\n\nPassages:\n" + (hits.empty() ? std::string("(none)\n") : format_chunks(hits));
}

bool says_yes(const std::string& reply) {
    const std::string r = to_lower(trim(reply));
    return r.rfind("yes", 0) == 0;
}

}  // namespace

RagAnswer rag_answer_loop(const std::string& query, const std::string& collection, const RagStore& store,
                          Embedder& embedder, Engine& engine, const RagLimits& limits) {
    RagAnswer out;
    std::string current = query;
    std::vector<ScoredChunk> hits;
    for (int round = 0; round <= limits.max_rewrites; ++round) {
        hits = store.query(current, collection, embedder, limits.k);
        ++out.retrievals;
        out.queries.push_back(current);
        const std::string block = question_block(query, hits);
        if (says_yes(engine.complete_text(kCanAnswerSystem, block, limits.model, "can_answer"))) {
            out.answered = true;
            out.text = trim(engine.complete_text(kAnswerSystem, block, limits.model, "answer_query"));
            return out;
        }
        if (round < limits.max_rewrites) {
            std::string next = trim(engine.complete_text(
                kModifySystem, block + "\nPrevious search query: " + current, limits.model, "modify_query"));
            if (!next.empty()) current = std::move(next);
        }
    }
    out.text = "insufficient information after " + std::to_string(out.retrievals) + " retrievals";
    if (!hits.empty()) {
        out.text += "; last passages:";
        for (const auto& h : hits) out.text += " " + h.chunk.doc_id + "#" + std::to_string(h.chunk.ordinal);
    }
    return out;
}

// ---------------------------------------------------------------- primitives

void register_rag_primitives(ToolRunner& runner, RagStore& store, std::shared_ptr<Embedder> embedder,
                             std::shared_ptr<Engine> engine) {
    ToolRunner* r = &runner;
    RagStore* s = &store;
    runner.add_primitive({ToolSchema{"save_raw_docs_to_vector_db",
                                     "Split text documents (.txt, .md, a directory or a .zip) into chunks and "
                                     "store them in a named collection.",
                                     {{"path", "File, directory or zip inside the working directory", true},
                                      {"collection", "Collection name", true},
                                      {"chunk_size", "Tokens per chunk (default 4096)", false}}},
                          [r, s, embedder](const Arguments& a) {
                              std::size_t size = kDefaultChunkSize;
                              if (auto it = a.find("chunk_size"); it != a.end() && !it->second.empty()) {
                                  try {
                                      size = std::stoul(it->second);
                                  } catch (const std::exception&) {
                                      return ToolResult::failure("E_ARGS", "chunk_size is not a number");
                                  }
                              }
                              const auto rep = s->ingest(r->confine(a.at("path")), a.at("collection"), *embedder, size);
                              return ToolResult::success(
                                  "files_seen=" + std::to_string(rep.files_seen) +
                                  " files_ingested=" + std::to_string(rep.files_ingested) +
                                  " files_skipped=" + std::to_string(rep.files_skipped) +
                                  " chunks_written=" + std::to_string(rep.chunks_written));
                          }});
    runner.add_primitive({ToolSchema{"query_db",
                                     "Retrieve the passages of a collection most similar to a query.",
                                     {{"query", "Search text", true},
                                      {"collection", "Collection name", true},
                                      {"k", "Number of passages (default 6)", false}}},
                          [s, embedder](const Arguments& a) {
                              std::size_t k = kDefaultTopK;
                              if (auto it = a.find("k"); it != a.end() && !it->second.empty()) {
                                  try {
                                      k = std::stoul(it->second);
                                  } catch (const std::exception&) {
                                      return ToolResult::failure("E_ARGS", "k is not a number");
                                  }
                              }
                              return ToolResult::success(format_chunks(s->query(a.at("query"), a.at("collection"), *embedder, k)));
                          }});
    if (!engine) return;
    runner.add_primitive({ToolSchema{"can_answer",
                                     "Check whether the stored passages suffice to answer a question.",
                                     {{"query", "The question", true}, {"collection", "Collection name", true}}},
                          [s, embedder, engine](const Arguments& a) {
                              const auto hits = s->query(a.at("query"), a.at("collection"), *embedder);
                              const bool yes = says_yes(engine->complete_text(
                                  kCanAnswerSystem, question_block(a.at("query"), hits), {}, "can_answer"));
                              return ToolResult::success(yes ? "yes" : "no");
                          }});
    runner.add_primitive({ToolSchema{"modify_query",
                                     "Rewrite a search query using what the retrieved passages already show.",
                                     {{"query", "The question", true}, {"collection", "Collection name", true}}},
                          [s, embedder, engine](const Arguments& a) {
                              const auto hits = s->query(a.at("query"), a.at("collection"), *embedder);
                              return ToolResult::success(trim(engine->complete_text(
                                  kModifySystem, question_block(a.at("query"), hits), {}, "modify_query")));
                          }});
    runner.add_primitive({ToolSchema{"answer_query",
                                     "Answer a question from the passages retrieved for it.",
                                     {{"query", "The question", true}, {"collection", "Collection name", true}}},
                          [s, embedder, engine](const Arguments& a) {
                              const auto hits = s->query(a.at("query"), a.at("collection"), *embedder);
                              return ToolResult::success(trim(engine->complete_text(
                                  kAnswerSystem, question_block(a.at("query"), hits), {}, "answer_query")));
                          }});
}

}  // namespace agentos
