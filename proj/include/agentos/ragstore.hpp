#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "agentos/backend.hpp"
#include "agentos/engine.hpp"

namespace agentos {

class ToolRunner;

constexpr std::size_t kDefaultChunkSize = 4096;
constexpr std::size_t kDefaultTopK = 6;
constexpr std::size_t kDefaultEmbeddingDim = 256;

// Tokens are maximal whitespace runs; chunks are consecutive windows of
// chunk_size tokens joined by single spaces.
std::vector<std::string> chunk_text(std::string_view text, std::size_t chunk_size);

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::string id() const = 0;
    virtual std::size_t dimension() const = 0;
    virtual std::vector<float> embed(const std::string& text) = 0;
};

// Feature hashing of lowercased tokens (FNV-1a 64) into `dim` buckets, then L2
// normalization. Pure and platform independent.
class HashingEmbedder : public Embedder {
public:
    explicit HashingEmbedder(std::size_t dim = kDefaultEmbeddingDim);
    std::string id() const override;
    std::size_t dimension() const override { return dim_; }
    std::vector<float> embed(const std::string& text) override;

private:
    std::size_t dim_;
};

// OpenAI-compatible /embeddings client.
class HttpEmbedder : public Embedder {
public:
    HttpEmbedder(HttpConfig config, std::string model, std::size_t dim);
    std::string id() const override { return "http:" + model_; }
    std::size_t dimension() const override { return dim_; }
    std::vector<float> embed(const std::string& text) override;

private:
    HttpConfig config_;
    std::string model_;
    std::size_t dim_;
};

std::uint64_t fnv1a64(std::string_view s);
double cosine(const std::vector<float>& a, const std::vector<float>& b);

struct Chunk {
    std::string doc_id;
    std::uint32_t ordinal = 0;
    std::uint32_t token_count = 0;
    std::vector<float> vector;
    std::string text;

    bool operator==(const Chunk&) const = default;
};

struct IngestReport {
    std::size_t files_seen = 0;
    std::size_t files_ingested = 0;
    std::size_t files_skipped = 0;
    std::size_t chunks_written = 0;
    std::vector<std::string> skipped;  // doc ids of unsupported files
};

struct ScoredChunk {
    Chunk chunk;
    double score = 0;
};

struct CollectionInfo {
    std::string name;
    std::string embedder;
    std::size_t dimension = 0;
    std::size_t chunk_size = 0;
    std::map<std::string, std::size_t> documents;  // doc_id -> chunk count
    std::size_t chunks = 0;
};

// Sorts by descending score, then (doc_id, ordinal).
bool rank_before(const ScoredChunk& a, const ScoredChunk& b);

// Collections live at <root>/<name>/{manifest.json,chunks.bin}.
class RagStore {
public:
    explicit RagStore(std::filesystem::path root);

    // Accepts a .txt/.md file, a .zip archive or a directory (recursed, sorted).
    // Re-ingesting a document replaces its chunks.
    IngestReport ingest(const std::filesystem::path& path, const std::string& collection, Embedder& embedder,
                        std::size_t chunk_size = kDefaultChunkSize);

    std::vector<ScoredChunk> query(const std::string& text, const std::string& collection, Embedder& embedder,
                                   std::size_t k = kDefaultTopK) const;

    bool has_collection(const std::string& name) const;
    std::vector<std::string> collections() const;
    CollectionInfo info(const std::string& name) const;
    std::vector<Chunk> load_chunks(const std::string& name) const;

    const std::filesystem::path& root() const noexcept { return root_; }

private:
    std::mutex& lock_for(const std::string& name) const;
    void save(const CollectionInfo& info, const std::vector<Chunk>& chunks) const;

    std::filesystem::path root_;
    mutable std::mutex locks_mutex_;
    mutable std::map<std::string, std::unique_ptr<std::mutex>> locks_;
};

// Binary chunk file codec. Layout (all integers u32 little endian, reals f32 LE):
//   "AGCH" version dimension count, then per chunk:
//   doc_id_len doc_id ordinal token_count vector[dimension] text_len text
std::string encode_chunks(const std::vector<Chunk>& chunks, std::size_t dimension);
std::vector<Chunk> decode_chunks(const std::string& bytes, std::size_t& dimension);

struct RagLimits {
    std::size_t k = kDefaultTopK;
    int max_rewrites = 2;
    std::string model;
};

struct RagAnswer {
    bool answered = false;
    std::string text;  // the answer, or an insufficiency summary
    int retrievals = 0;
    std::vector<std::string> queries;  // retrieval queries in order
};

// Backend tags: can_answer, modify_query, answer_query.
RagAnswer rag_answer_loop(const std::string& query, const std::string& collection, const RagStore& store,
                          Embedder& embedder, Engine& engine, const RagLimits& limits = {});

// Renders retrieved chunks for prompts and tool payloads.
std::string format_chunks(const std::vector<ScoredChunk>& hits);

// save_raw_docs_to_vector_db, query_db, and, when an engine is given,
// can_answer, modify_query and answer_query.
void register_rag_primitives(ToolRunner& runner, RagStore& store, std::shared_ptr<Embedder> embedder,
                             std::shared_ptr<Engine> engine = nullptr);

}  // namespace agentos
