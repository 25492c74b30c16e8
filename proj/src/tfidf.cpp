#include "jawab/tfidf.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <unordered_map>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "jawab/hash.hpp"
#include "jawab/log.hpp"

namespace jawab {

namespace {

int resolve_threads(int requested) {
#ifdef _OPENMP
    return requested > 0 ? requested : omp_get_max_threads();
#else
    (void)requested;
    return 1;
#endif
}

void validate_bins(uint64_t bins) {
    if (bins < 256 || bins > (1ULL << 31) || (bins & (bins - 1)) != 0) {
        throw Error("hash_bins must be a power of two in [2^8, 2^31]");
    }
}

// Identical accumulation order in the serial and parallel paths keeps their
// outputs bit-identical.
inline double row_dot(const TfidfIndex& idx, const SparseVector& q, size_t row) {
    uint64_t i = idx.row_offsets[row];
    const uint64_t end = idx.row_offsets[row + 1];
    size_t qi = 0;
    const auto& ent = q.entries;
    double s = 0.0;
    while (i < end && qi < ent.size()) {
        const uint32_t c = idx.cols[i];
        const uint32_t qb = ent[qi].first;
        if (c == qb) {
            s += idx.weights[i] * ent[qi].second;
            ++i;
            ++qi;
        } else if (c < qb) {
            ++i;
        } else {
            ++qi;
        }
    }
    return s;
}

} // namespace

TfidfIndex build_index(const std::vector<DocInput>& docs, const AnalyzerConfig& cfg,
                       uint64_t hash_bins, const BuildOptions& opt) {
    if (docs.empty()) throw Error("build_index requires at least one document");
    validate_bins(hash_bins);

    TfidfIndex idx;
    idx.hash_bins = hash_bins;
    idx.ngram_lo = cfg.ngram_lo;
    idx.ngram_hi = cfg.ngram_hi;
    idx.unit = opt.unit;
    idx.analyzer_cfg_hash = cfg.content_hash();
    idx.analyzer = std::make_shared<Analyzer>(cfg);

    const int64_t n_docs = static_cast<int64_t>(docs.size());
    const uint64_t mask = hash_bins - 1;
    std::vector<std::vector<std::pair<uint32_t, uint32_t>>> feats(docs.size());

    // Feature extraction is per-document and lands in preassigned slots, so
    // thread count cannot change the result.
    const int nthreads = resolve_threads(opt.threads);
    (void)nthreads;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 16) num_threads(nthreads)
#endif
    for (int64_t d = 0; d < n_docs; ++d) {
        TokenStream toks = idx.analyzer->analyze(docs[d].text);
        std::unordered_map<uint32_t, uint32_t> counts;
        for (const std::string& g : ngrams(toks, idx.ngram_lo, idx.ngram_hi)) {
            counts[static_cast<uint32_t>(murmur64(g, idx.hash_seed) & mask)]++;
        }
        auto& f = feats[d];
        f.assign(counts.begin(), counts.end());
        std::sort(f.begin(), f.end());
    }

    std::vector<uint32_t> df(hash_bins, 0);
    for (int64_t d = 0; d < n_docs; ++d) {
        if (feats[d].empty() && opt.warn_empty) {
            warn("document '" + docs[d].id + "' produced no features; row kept as all-zero");
        }
        for (const auto& [bin, tf] : feats[d]) {
            (void)tf;
            df[bin]++;
        }
    }

    // Bins untouched by every document keep idf 0; they can only appear in
    // queries, where a zero weight drops the term.
    idx.idf.assign(hash_bins, 0.0);
    const double numerator = 1.0 + static_cast<double>(n_docs);
    for (uint64_t b = 0; b < hash_bins; ++b) {
        if (df[b] > 0) idx.idf[b] = std::log(numerator / (1.0 + df[b])) + 1.0;
    }

    idx.row_offsets.assign(docs.size() + 1, 0);
    for (int64_t d = 0; d < n_docs; ++d) {
        idx.row_offsets[d + 1] = idx.row_offsets[d] + feats[d].size();
    }
    const uint64_t nnz = idx.row_offsets.back();
    idx.cols.resize(nnz);
    idx.weights.resize(nnz);

#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(nthreads)
#endif
    for (int64_t d = 0; d < n_docs; ++d) {
        uint64_t off = idx.row_offsets[d];
        double norm2 = 0.0;
        for (const auto& [bin, tf] : feats[d]) {
            const double w = static_cast<double>(tf) * idx.idf[bin];
            idx.cols[off] = bin;
            idx.weights[off] = w;
            norm2 += w * w;
            ++off;
        }
        if (norm2 > 0.0) {
            const double inv = 1.0 / std::sqrt(norm2);
            for (uint64_t i = idx.row_offsets[d]; i < off; ++i) idx.weights[i] *= inv;
        }
    }

    idx.doc_ids.reserve(docs.size());
    for (const auto& d : docs) idx.doc_ids.push_back(d.id);
    return idx;
}

SparseVector vectorize_query(std::string_view question, const TfidfIndex& index) {
    if (!index.analyzer) throw Error("index has no analyzer attached");
    const uint64_t mask = index.hash_bins - 1;
    TokenStream toks = index.analyzer->analyze(question);
    std::unordered_map<uint32_t, uint32_t> counts;
    for (const std::string& g : ngrams(toks, index.ngram_lo, index.ngram_hi)) {
        counts[static_cast<uint32_t>(murmur64(g, index.hash_seed) & mask)]++;
    }

    SparseVector q;
    q.entries.reserve(counts.size());
    for (const auto& [bin, tf] : counts) {
        const double w = static_cast<double>(tf) * index.idf[bin];
        if (w > 0.0) q.entries.emplace_back(bin, w);
    }
    std::sort(q.entries.begin(), q.entries.end());

    double norm2 = 0.0;
    for (const auto& [bin, w] : q.entries) norm2 += w * w;
    if (norm2 > 0.0) {
        const double inv = 1.0 / std::sqrt(norm2);
        for (auto& e : q.entries) e.second *= inv;
    }
    return q;
}

std::vector<double> score_all(const TfidfIndex& index, const SparseVector& q) {
    std::vector<double> scores(index.rows(), 0.0);
    if (q.empty()) return scores;
    const int64_t rows = static_cast<int64_t>(index.rows());
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int64_t r = 0; r < rows; ++r) scores[r] = row_dot(index, q, r);
    return scores;
}

std::vector<double> score_all_serial(const TfidfIndex& index, const SparseVector& q) {
    std::vector<double> scores(index.rows(), 0.0);
    if (q.empty()) return scores;
    for (size_t r = 0; r < index.rows(); ++r) scores[r] = row_dot(index, q, r);
    return scores;
}

std::vector<RetrievalHit> top_k(const TfidfIndex& index, const SparseVector& q, size_t k) {
    std::vector<RetrievalHit> out;
    if (k == 0 || q.empty()) return out;

    const std::vector<double> scores = score_all(index, q);
    std::vector<std::pair<double, size_t>> hits;
    for (size_t r = 0; r < scores.size(); ++r) {
        if (scores[r] > 0.0) hits.emplace_back(scores[r], r);
    }
    std::sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    if (hits.size() > k) hits.resize(k);

    out.reserve(hits.size());
    for (const auto& [score, row] : hits) {
        out.push_back({index.doc_ids[row], std::min(score, 1.0)});
    }
    return out;
}

namespace {

constexpr char kMagic[4] = {'S', 'Q', 'T', 'F'};
constexpr uint16_t kVersion = 1;

class ByteSink {
public:
    explicit ByteSink(const std::string& path) : out_(path, std::ios::binary), path_(path) {
        if (!out_) throw IndexIoError(IndexIoError::Kind::io, "cannot open for write: " + path);
    }

    void raw(const void* p, size_t n) {
        out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
        sum_.update(p, n);
    }
    void u8(uint8_t v) { raw(&v, 1); }
    void u16(uint16_t v) {
        uint8_t b[2] = {uint8_t(v), uint8_t(v >> 8)};
        raw(b, 2);
    }
    void u32(uint32_t v) {
        uint8_t b[4];
        for (int i = 0; i < 4; ++i) b[i] = uint8_t(v >> (8 * i));
        raw(b, 4);
    }
    void u64(uint64_t v) {
        uint8_t b[8];
        for (int i = 0; i < 8; ++i) b[i] = uint8_t(v >> (8 * i));
        raw(b, 8);
    }
    void f64(double v) { u64(std::bit_cast<uint64_t>(v)); }

    void u32_array(const std::vector<uint32_t>& v) {
        encode_array(v.data(), v.size(), 4, [](uint8_t* b, uint32_t x) {
            for (int i = 0; i < 4; ++i) b[i] = uint8_t(x >> (8 * i));
        });
    }
    void u64_array(const std::vector<uint64_t>& v) {
        encode_array(v.data(), v.size(), 8, [](uint8_t* b, uint64_t x) {
            for (int i = 0; i < 8; ++i) b[i] = uint8_t(x >> (8 * i));
        });
    }
    void f64_array(const std::vector<double>& v) {
        encode_array(v.data(), v.size(), 8, [](uint8_t* b, double x) {
            uint64_t u = std::bit_cast<uint64_t>(x);
            for (int i = 0; i < 8; ++i) b[i] = uint8_t(u >> (8 * i));
        });
    }

    // The trailing checksum covers every byte before it and is not part of
    // its own digest.
    void finish() {
        const uint64_t digest = sum_.digest();
        uint8_t b[8];
        for (int i = 0; i < 8; ++i) b[i] = uint8_t(digest >> (8 * i));
        out_.write(reinterpret_cast<const char*>(b), 8);
        out_.flush();
        if (!out_) throw IndexIoError(IndexIoError::Kind::io, "write failed: " + path_);
    }

private:
    template <typename T, typename Enc>
    void encode_array(const T* data, size_t count, size_t width, Enc enc) {
        std::vector<uint8_t> buf;
        const size_t chunk = 1 << 16;
        buf.resize(std::min(count, chunk) * width);
        size_t done = 0;
        while (done < count) {
            const size_t n = std::min(chunk, count - done);
            for (size_t i = 0; i < n; ++i) enc(buf.data() + i * width, data[done + i]);
            raw(buf.data(), n * width);
            done += n;
        }
    }

    std::ofstream out_;
    std::string path_;
    Fnv1a64 sum_;
};

class ByteSource {
public:
    explicit ByteSource(const std::string& path) : in_(path, std::ios::binary) {
        if (!in_) throw IndexIoError(IndexIoError::Kind::io, "cannot open for read: " + path);
        std::error_code ec;
        const auto size = std::filesystem::file_size(path, ec);
        if (ec) throw IndexIoError(IndexIoError::Kind::io, "cannot stat: " + path);
        remaining_ = static_cast<uint64_t>(size);
    }

    uint64_t remaining() const { return remaining_; }

    void need(uint64_t n) const {
        if (n > remaining_) {
            throw IndexIoError(IndexIoError::Kind::truncated, "index file truncated");
        }
    }

    void raw(void* p, size_t n) {
        need(n);
        in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (static_cast<size_t>(in_.gcount()) != n) {
            throw IndexIoError(IndexIoError::Kind::truncated, "index file truncated");
        }
        sum_.update(p, n);
        remaining_ -= n;
    }
    uint8_t u8() {
        uint8_t b;
        raw(&b, 1);
        return b;
    }
    uint16_t u16() {
        uint8_t b[2];
        raw(b, 2);
        return uint16_t(b[0]) | uint16_t(b[1]) << 8;
    }
    uint32_t u32() {
        uint8_t b[4];
        raw(b, 4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= uint32_t(b[i]) << (8 * i);
        return v;
    }
    uint64_t u64() {
        uint8_t b[8];
        raw(b, 8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= uint64_t(b[i]) << (8 * i);
        return v;
    }

    void u32_array(std::vector<uint32_t>& v, uint64_t count) {
        need(count * 4);
        v.resize(count);
        decode_array(v.data(), count, 4, [](const uint8_t* b) {
            uint32_t x = 0;
            for (int i = 0; i < 4; ++i) x |= uint32_t(b[i]) << (8 * i);
            return x;
        });
    }
    void u64_array(std::vector<uint64_t>& v, uint64_t count) {
        need(count * 8);
        v.resize(count);
        decode_array(v.data(), count, 8, [](const uint8_t* b) {
            uint64_t x = 0;
            for (int i = 0; i < 8; ++i) x |= uint64_t(b[i]) << (8 * i);
            return x;
        });
    }
    void f64_array(std::vector<double>& v, uint64_t count) {
        need(count * 8);
        v.resize(count);
        decode_array(v.data(), count, 8, [](const uint8_t* b) {
            uint64_t x = 0;
            for (int i = 0; i < 8; ++i) x |= uint64_t(b[i]) << (8 * i);
            return std::bit_cast<double>(x);
        });
    }

    // Reads the stored digest without folding it into the running one.
    uint64_t tail_checksum() {
        if (remaining_ != 8) {
            throw IndexIoError(IndexIoError::Kind::checksum_mismatch,
                               "index file size does not match its contents");
        }
        uint8_t b[8];
        in_.read(reinterpret_cast<char*>(b), 8);
        if (in_.gcount() != 8) {
            throw IndexIoError(IndexIoError::Kind::truncated, "index file truncated");
        }
        remaining_ = 0;
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= uint64_t(b[i]) << (8 * i);
        return v;
    }

    uint64_t digest() const { return sum_.digest(); }

private:
    template <typename T, typename Dec>
    void decode_array(T* data, uint64_t count, size_t width, Dec dec) {
        std::vector<uint8_t> buf;
        const uint64_t chunk = 1 << 16;
        buf.resize(static_cast<size_t>(std::min(count, chunk) * width));
        uint64_t done = 0;
        while (done < count) {
            const uint64_t n = std::min(chunk, count - done);
            raw(buf.data(), static_cast<size_t>(n * width));
            for (uint64_t i = 0; i < n; ++i) data[done + i] = dec(buf.data() + i * width);
            done += n;
        }
    }

    std::ifstream in_;
    Fnv1a64 sum_;
    uint64_t remaining_ = 0;
};

} // namespace

void save_index(const TfidfIndex& index, const std::string& path) {
    ByteSink out(path);
    out.raw(kMagic, 4);
    out.u16(kVersion);
    out.u64(index.hash_seed);
    out.u64(index.hash_bins);
    out.u32(static_cast<uint32_t>(index.ngram_lo));
    out.u32(static_cast<uint32_t>(index.ngram_hi));
    out.u8(static_cast<uint8_t>(index.unit));
    out.u64(index.analyzer_cfg_hash);
    out.u64(index.rows());
    out.u64(index.nnz());
    out.f64_array(index.idf);
    out.u64_array(index.row_offsets);
    out.u32_array(index.cols);
    out.f64_array(index.weights);
    for (const auto& id : index.doc_ids) {
        out.u32(static_cast<uint32_t>(id.size()));
        out.raw(id.data(), id.size());
    }
    out.finish();
}

TfidfIndex load_index(const std::string& path) {
    ByteSource in(path);

    char magic[4];
    in.raw(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0) {
        throw IndexIoError(IndexIoError::Kind::bad_magic, "not an index file: " + path);
    }
    const uint16_t version = in.u16();
    if (version != kVersion) {
        throw IndexIoError(IndexIoError::Kind::bad_version,
                           "unsupported index version " + std::to_string(version));
    }

    TfidfIndex idx;
    idx.hash_seed = in.u64();
    idx.hash_bins = in.u64();
    idx.ngram_lo = static_cast<int>(in.u32());
    idx.ngram_hi = static_cast<int>(in.u32());
    const uint8_t unit = in.u8();
    idx.analyzer_cfg_hash = in.u64();
    const uint64_t rows = in.u64();
    const uint64_t nnz = in.u64();

    if (idx.hash_bins < 256 || idx.hash_bins > (1ULL << 31) ||
        (idx.hash_bins & (idx.hash_bins - 1)) != 0 || unit > 1 || idx.ngram_lo < 1 ||
        idx.ngram_lo > idx.ngram_hi) {
        throw IndexIoError(IndexIoError::Kind::io, "invalid index header: " + path);
    }
    idx.unit = static_cast<DocUnit>(unit);

    in.f64_array(idx.idf, idx.hash_bins);
    in.u64_array(idx.row_offsets, rows + 1);
    in.u32_array(idx.cols, nnz);
    in.f64_array(idx.weights, nnz);
    idx.doc_ids.resize(rows);
    for (uint64_t r = 0; r < rows; ++r) {
        const uint32_t len = in.u32();
        in.need(len);
        std::string id(len, '\0');
        if (len > 0) in.raw(id.data(), len);
        idx.doc_ids[r] = std::move(id);
    }

    const uint64_t expected = in.digest();
    if (in.tail_checksum() != expected) {
        throw IndexIoError(IndexIoError::Kind::checksum_mismatch,
                           "index checksum mismatch: " + path);
    }
    return idx;
}

TfidfIndex load_index(const std::string& path, const AnalyzerConfig& cfg) {
    TfidfIndex idx = load_index(path);
    attach_analyzer(idx, cfg);
    return idx;
}

void attach_analyzer(TfidfIndex& index, const AnalyzerConfig& cfg) {
    if (cfg.content_hash() != index.analyzer_cfg_hash) {
        warn("analyzer configuration differs from the one the index was built with");
    }
    index.analyzer = std::make_shared<Analyzer>(cfg);
}

} // namespace jawab
