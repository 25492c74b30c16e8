#pragma once

#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "jawab/corpus.hpp"
#include "jawab/error.hpp"
#include "jawab/retriever.hpp"
#include "jawab/text.hpp"

namespace jawab {

struct AnswerCandidate {
    std::string article_id;
    size_t paragraph_index = 0;
    size_t char_start = 0; // character offsets into the paragraph text
    size_t char_end = 0;
    std::string text; // always equals the paragraph slice [char_start, char_end)
    double ans_raw = 0.0;
    double doc_score = 0.0; // inherited from the ParagraphHit
};

// Every contiguous run of 1..max_span_tokens tokens inside one sentence,
// as character ranges into the original text. Spans never cross sentence
// boundaries.
std::vector<CharRange> gen_candidates(std::string_view paragraph_text,
                                      size_t max_span_tokens = 10);

// One uniformly chosen candidate per paragraph, ans_raw uniform in (0, 1).
std::vector<AnswerCandidate> random_reader(std::string_view question,
                                           const std::vector<ParagraphHit>& paragraphs,
                                           std::mt19937_64& rng);

// Window/distance baseline. For candidate A with S = tokens(A) ∪
// tokens(question): sw = best length-|S| window sum of IC over tokens in S,
// IC(w) = ln(1 + 1/count(w)); dist = nearest question-token/candidate-token
// occurrence distance scaled by 1/(|P|-1), 1 when either side never occurs,
// 0 when the paragraph has fewer than two tokens. ans_raw = sw - dist; the
// best candidate per paragraph is emitted.
std::vector<AnswerCandidate> sliding_window_reader(std::string_view question,
                                                   const std::vector<ParagraphHit>& paragraphs);

// Cosine between the question and each candidate in a transient [1,4] tf-idf
// space built over the paragraph's own candidates; argmax per paragraph,
// ties to the earliest char_start.
std::vector<AnswerCandidate> tfidf_reader(std::string_view question,
                                          const std::vector<ParagraphHit>& paragraphs,
                                          const AnalyzerConfig& base_cfg,
                                          uint64_t hash_bins = 1ULL << 16);

struct WordVectors {
    size_t dim = 0;
    std::unordered_map<std::string, std::vector<float>> table; // normalized tokens
};

// Text format: header "count dim", then one token and dim floats per line.
WordVectors load_word_vectors(const std::string& path);

// A token sequence is the sum of its word vectors (out-of-vocabulary tokens
// contribute zero); ans_raw = cosine of candidate and question sums, clamped
// to [0,1], 0 when either sum is the zero vector. Argmax per paragraph.
std::vector<AnswerCandidate> embedding_reader(std::string_view question,
                                              const std::vector<ParagraphHit>& paragraphs,
                                              const WordVectors& vectors);

struct ExternalReaderError : Error {
    enum class Kind { timeout, protocol, child_exit };
    Kind kind;
    ExternalReaderError(Kind k, const std::string& msg) : Error(msg), kind(k) {}
};

// One child process speaking newline-delimited JSON on stdin/stdout, one
// request in flight at a time. Any failure (timeout, exit, protocol
// desync) permanently closes the channel; run one channel per worker.
class ExternalReaderChannel {
public:
    ExternalReaderChannel(std::vector<std::string> argv, int timeout_ms = 30000);
    ~ExternalReaderChannel();
    ExternalReaderChannel(const ExternalReaderChannel&) = delete;
    ExternalReaderChannel& operator=(const ExternalReaderChannel&) = delete;

    bool alive() const { return !dead_; }

    // Writes one line, reads one line. Throws ExternalReaderError.
    std::string roundtrip_line(const std::string& request_line);

private:
    void mark_dead();

    int64_t pid_ = -1;
    int in_fd_ = -1;
    int out_fd_ = -1;
    int timeout_ms_ = 30000;
    bool dead_ = false;
    std::string buf_;
};

// Sends the question with all paragraphs as one request; ans_raw =
// start_score * end_score. Spans violating paragraph bounds or the
// 16-token span cap are dropped with a warning.
std::vector<AnswerCandidate> external_reader(const std::string& qid, std::string_view question,
                                             const std::vector<ParagraphHit>& paragraphs,
                                             ExternalReaderChannel& channel);

} // namespace jawab
