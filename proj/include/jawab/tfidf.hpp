#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "jawab/corpus.hpp"
#include "jawab/error.hpp"

namespace jawab {

// Arbitrary fixed seed; part of the on-disk format so artifacts are
// reproducible across machines.
constexpr uint64_t kDefaultHashSeed = 0x6a617761625f7466ULL;

enum class DocUnit : uint8_t { article = 0, paragraph = 1 };

struct DocInput {
    std::string id;
    std::string text;
};

struct SparseVector {
    // (bin, weight), bins unique and ascending, weights > 0.
    std::vector<std::pair<uint32_t, double>> entries;

    bool empty() const { return entries.empty(); }
};

struct RetrievalHit {
    std::string doc_id;
    double score = 0.0; // cosine, in [0, 1]
};

// Hashed n-gram TF-IDF matrix with L2-normalized rows, stored as CSR.
// idf is dense over all hash bins; bins no document touches carry idf 0 so
// out-of-vocabulary query terms vanish instead of scoring phantom weight.
struct TfidfIndex {
    uint64_t hash_seed = kDefaultHashSeed;
    uint64_t hash_bins = 1ULL << 24;
    int ngram_lo = 1;
    int ngram_hi = 2;
    DocUnit unit = DocUnit::article;
    uint64_t analyzer_cfg_hash = 0;

    std::vector<double> idf;           // length hash_bins
    std::vector<uint64_t> row_offsets; // length rows()+1
    std::vector<uint32_t> cols;        // ascending within each row
    std::vector<double> weights;
    std::vector<std::string> doc_ids;

    // Not serialized; required for vectorize_query.
    std::shared_ptr<const Analyzer> analyzer;

    size_t rows() const { return doc_ids.size(); }
    size_t nnz() const { return cols.size(); }
};

struct BuildOptions {
    DocUnit unit = DocUnit::article;
    int threads = 0;        // 0 = library default
    bool warn_empty = true; // transient per-question builds turn this off
};

// tf = raw n-gram count, idf = ln((1+N)/(1+df)) + 1, rows L2-normalized.
// Deterministic: the artifact is byte-identical for fixed inputs regardless
// of thread count. Documents with no features keep an all-zero row (warned).
TfidfIndex build_index(const std::vector<DocInput>& docs, const AnalyzerConfig& cfg,
                       uint64_t hash_bins, const BuildOptions& opt = {});

// Same analyzer, hashing, and idf as the index; L2-normalized unless all
// feature bins are unused by the corpus (then empty).
SparseVector vectorize_query(std::string_view question, const TfidfIndex& index);

// Exact cosine against every row. The parallel and serial variants produce
// bit-identical outputs; the serial one is the reference for tests and the
// benchmark baseline.
std::vector<double> score_all(const TfidfIndex& index, const SparseVector& q);
std::vector<double> score_all_serial(const TfidfIndex& index, const SparseVector& q);

// Top documents by score descending, ties by ascending row index. Documents
// scoring 0 are never returned, so the result may be shorter than k.
std::vector<RetrievalHit> top_k(const TfidfIndex& index, const SparseVector& q, size_t k);

struct IndexIoError : Error {
    enum class Kind { io, bad_magic, bad_version, truncated, checksum_mismatch };
    Kind kind;
    IndexIoError(Kind k, const std::string& msg) : Error(msg), kind(k) {}
};

void save_index(const TfidfIndex& index, const std::string& path);

// Reads and checksums the whole file. The analyzer is left unset; call
// attach_analyzer (or pass cfg) before vectorize_query.
TfidfIndex load_index(const std::string& path);
TfidfIndex load_index(const std::string& path, const AnalyzerConfig& cfg);

// Warns when cfg's digest differs from the one recorded at build time.
void attach_analyzer(TfidfIndex& index, const AnalyzerConfig& cfg);

} // namespace jawab
