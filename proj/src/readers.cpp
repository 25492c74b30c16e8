#include "jawab/readers.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <csignal>
#include <cstring>
#include <chrono>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_set>

#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include "json.hpp"

#include "jawab/log.hpp"
#include "jawab/tfidf.hpp"

namespace jawab {

namespace {

using nlohmann::json;

// Shared reader-side tokenization: diacritics and tatweel stripped, alef and
// ya unified, split on separators. No stopword removal, no stemming.
std::u32string normalize_cps(const std::u32string& cps) {
    std::u32string out;
    out.reserve(cps.size());
    for (char32_t c : cps) {
        if (is_arabic_diacritic(c) || is_tatweel(c)) continue;
        out.push_back(unify_alef_ya(c));
    }
    return out;
}

std::vector<std::string> norm_tokens(std::string_view text) {
    CodeText ct = decode_utf8(text);
    std::vector<std::string> out;
    std::u32string cur;
    auto flush = [&]() {
        if (!cur.empty()) {
            out.push_back(encode_utf8(cur));
            cur.clear();
        }
    };
    for (char32_t c : ct.cp) {
        if (is_arabic_diacritic(c) || is_tatweel(c)) continue;
        c = unify_alef_ya(c);
        if (is_separator(c)) {
            flush();
            continue;
        }
        cur.push_back(c);
    }
    flush();
    return out;
}

// Token-aligned candidate spans of a paragraph, each confined to one
// sentence, in (sentence, start token, length) order so an argmax with a
// strict comparison lands on the earliest and shortest of tied spans.
struct TokenSpan {
    size_t tok_lo = 0; // inclusive token indices into the paragraph
    size_t tok_hi = 0;
    size_t char_start = 0;
    size_t char_end = 0;
};

struct ParagraphView {
    CodeText ct;
    std::vector<CharRange> tok_range;
    std::vector<std::string> tok_norm; // same indexing as tok_range
    std::vector<TokenSpan> spans;
};

ParagraphView make_view(std::string_view text, size_t max_span_tokens) {
    ParagraphView v;
    v.ct = decode_utf8(text);
    v.tok_range = tokenize_raw(v.ct);
    v.tok_norm.reserve(v.tok_range.size());
    for (const auto& r : v.tok_range) {
        v.tok_norm.push_back(encode_utf8(normalize_cps(v.ct.cp.substr(r.begin, r.end - r.begin))));
    }

    const std::vector<CharRange> sentences = split_sentences(v.ct);
    size_t t = 0;
    for (const auto& s : sentences) {
        const size_t first = t;
        while (t < v.tok_range.size() && v.tok_range[t].end <= s.end) ++t;
        const size_t n = t - first;
        for (size_t i = 0; i < n; ++i) {
            const size_t max_len = std::min(max_span_tokens, n - i);
            for (size_t len = 1; len <= max_len; ++len) {
                TokenSpan span;
                span.tok_lo = first + i;
                span.tok_hi = first + i + len - 1;
                span.char_start = v.tok_range[span.tok_lo].begin;
                span.char_end = v.tok_range[span.tok_hi].end;
                v.spans.push_back(span);
            }
        }
    }
    return v;
}

AnswerCandidate to_candidate(const ParagraphHit& hit, const ParagraphView& view,
                             const TokenSpan& span, double ans_raw) {
    AnswerCandidate c;
    c.article_id = hit.article_id;
    c.paragraph_index = hit.paragraph_index;
    c.char_start = span.char_start;
    c.char_end = span.char_end;
    c.text = slice_chars(hit.text, view.ct, span.char_start, span.char_end);
    c.ans_raw = ans_raw;
    c.doc_score = hit.doc_score;
    return c;
}

} // namespace

std::vector<CharRange> gen_candidates(std::string_view paragraph_text, size_t max_span_tokens) {
    const ParagraphView view = make_view(paragraph_text, max_span_tokens);
    std::vector<CharRange> out;
    out.reserve(view.spans.size());
    for (const auto& s : view.spans) out.push_back({s.char_start, s.char_end});
    return out;
}

std::vector<AnswerCandidate> random_reader(std::string_view question,
                                           const std::vector<ParagraphHit>& paragraphs,
                                           std::mt19937_64& rng) {
    (void)question;
    std::vector<AnswerCandidate> out;
    for (const auto& hit : paragraphs) {
        const ParagraphView view = make_view(hit.text, 10);
        if (view.spans.empty()) continue;
        std::uniform_int_distribution<size_t> pick(0, view.spans.size() - 1);
        std::uniform_real_distribution<double> score(std::numeric_limits<double>::min(), 1.0);
        const TokenSpan& span = view.spans[pick(rng)];
        out.push_back(to_candidate(hit, view, span, score(rng)));
    }
    return out;
}

std::vector<AnswerCandidate> sliding_window_reader(std::string_view question,
                                                   const std::vector<ParagraphHit>& paragraphs) {
    const std::vector<std::string> q_tokens = norm_tokens(question);
    const std::unordered_set<std::string> q_set(q_tokens.begin(), q_tokens.end());

    std::vector<AnswerCandidate> out;
    for (const auto& hit : paragraphs) {
        const ParagraphView view = make_view(hit.text, 10);
        if (view.spans.empty()) continue;
        const std::vector<std::string>& P = view.tok_norm;
        const size_t n = P.size();

        // Distinct-token ids over the paragraph; question membership per id.
        std::unordered_map<std::string, uint32_t> id_of;
        std::vector<uint32_t> tok_id(n);
        for (size_t i = 0; i < n; ++i) {
            tok_id[i] = id_of.emplace(P[i], static_cast<uint32_t>(id_of.size())).first->second;
        }
        const size_t n_ids = id_of.size();
        std::vector<uint32_t> count_of(n_ids, 0);
        for (size_t i = 0; i < n; ++i) count_of[tok_id[i]]++;
        std::vector<double> ic_of(n_ids);
        for (size_t i = 0; i < n_ids; ++i) ic_of[i] = std::log(1.0 + 1.0 / count_of[i]);
        std::vector<char> in_q(n_ids, 0);
        for (const auto& [tok, id] : id_of) in_q[id] = q_set.count(tok) ? 1 : 0;

        // Distance from each position to the nearest question-token
        // occurrence; no occurrence anywhere leaves the sentinel.
        const size_t none = std::numeric_limits<size_t>::max();
        std::vector<size_t> dist_q(n, none);
        size_t last = none;
        for (size_t i = 0; i < n; ++i) {
            if (in_q[tok_id[i]]) last = i;
            if (last != none) dist_q[i] = i - last;
        }
        last = none;
        for (size_t i = n; i-- > 0;) {
            if (in_q[tok_id[i]]) last = i;
            if (last != none) dist_q[i] = std::min(dist_q[i], last - i);
        }
        const bool q_occurs = last != none;

        // member_ic built per candidate: IC where the token is in S, else 0.
        std::vector<double> member_ic(n);
        std::vector<double> prefix(n + 1);
        std::vector<uint32_t> cand_ids;

        double best = 0.0;
        const TokenSpan* best_span = nullptr;
        for (const auto& span : view.spans) {
            cand_ids.clear();
            for (size_t i = span.tok_lo; i <= span.tok_hi; ++i) {
                if (std::find(cand_ids.begin(), cand_ids.end(), tok_id[i]) == cand_ids.end()) {
                    cand_ids.push_back(tok_id[i]);
                }
            }
            size_t cand_only = 0;
            for (uint32_t id : cand_ids) {
                if (!in_q[id]) ++cand_only;
            }
            const size_t s_size = q_set.size() + cand_only; // |tokens(A) ∪ tokens(question)|

            for (size_t i = 0; i < n; ++i) {
                const uint32_t id = tok_id[i];
                const bool member =
                    in_q[id] || std::find(cand_ids.begin(), cand_ids.end(), id) != cand_ids.end();
                member_ic[i] = member ? ic_of[id] : 0.0;
                prefix[i + 1] = prefix[i] + member_ic[i];
            }
            double sw = 0.0;
            for (size_t j = 0; j < n; ++j) {
                const size_t hi = std::min(n, j + s_size);
                sw = std::max(sw, prefix[hi] - prefix[j]);
            }

            double dist;
            if (n < 2) {
                dist = 0.0;
            } else if (!q_occurs) {
                dist = 1.0;
            } else {
                size_t best_d = none;
                for (size_t i = 0; i < n; ++i) {
                    if (std::find(cand_ids.begin(), cand_ids.end(), tok_id[i]) !=
                        cand_ids.end()) {
                        best_d = std::min(best_d, dist_q[i]);
                    }
                }
                dist = best_d == none
                           ? 1.0
                           : static_cast<double>(best_d) / static_cast<double>(n - 1);
            }

            const double score = sw - dist;
            if (!best_span || score > best) {
                best = score;
                best_span = &span;
            }
        }
        if (best_span) out.push_back(to_candidate(hit, view, *best_span, best));
    }
    return out;
}

std::vector<AnswerCandidate> tfidf_reader(std::string_view question,
                                          const std::vector<ParagraphHit>& paragraphs,
                                          const AnalyzerConfig& base_cfg, uint64_t hash_bins) {
    AnalyzerConfig cfg = base_cfg;
    cfg.ngram_lo = 1;
    cfg.ngram_hi = 4;

    std::vector<AnswerCandidate> out;
    for (const auto& hit : paragraphs) {
        const ParagraphView view = make_view(hit.text, 10);
        if (view.spans.empty()) continue;

        std::vector<DocInput> docs;
        docs.reserve(view.spans.size());
        for (size_t i = 0; i < view.spans.size(); ++i) {
            docs.push_back({std::to_string(i), slice_chars(hit.text, view.ct,
                                                           view.spans[i].char_start,
                                                           view.spans[i].char_end)});
        }
        BuildOptions opt;
        opt.unit = DocUnit::paragraph;
        opt.warn_empty = false;
        const TfidfIndex index = build_index(docs, cfg, hash_bins, opt);
        const std::vector<double> scores = score_all(index, vectorize_query(question, index));

        size_t best = 0;
        for (size_t i = 1; i < scores.size(); ++i) {
            if (scores[i] > scores[best]) best = i;
        }
        out.push_back(to_candidate(hit, view, view.spans[best], std::min(scores[best], 1.0)));
    }
    return out;
}

WordVectors load_word_vectors(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open word-vector file: " + path);

    WordVectors wv;
    std::string line;
    if (!std::getline(in, line)) throw Error("word-vector file is empty: " + path);
    size_t count = 0;
    {
        std::istringstream head(line);
        if (!(head >> count >> wv.dim) || count == 0 || wv.dim == 0) {
            throw Error("word-vector file has a malformed header: " + path);
        }
        std::string extra;
        if (head >> extra) throw Error("word-vector file has a malformed header: " + path);
    }

    for (size_t i = 0; i < count; ++i) {
        if (!std::getline(in, line)) {
            throw Error("word-vector file truncated at entry " + std::to_string(i + 1));
        }
        std::istringstream row(line);
        std::string token;
        if (!(row >> token)) {
            throw Error("word-vector file line " + std::to_string(i + 2) + ": missing token");
        }
        std::vector<float> vec(wv.dim);
        for (size_t d = 0; d < wv.dim; ++d) {
            if (!(row >> vec[d])) {
                throw Error("word-vector file line " + std::to_string(i + 2) +
                            ": expected " + std::to_string(wv.dim) + " floats");
            }
        }
        std::string extra;
        if (row >> extra) {
            throw Error("word-vector file line " + std::to_string(i + 2) + ": trailing fields");
        }
        const std::string key = encode_utf8(normalize_cps(decode_utf8(token).cp));
        wv.table.emplace(key, std::move(vec)); // first occurrence wins
    }
    while (std::getline(in, line)) {
        if (!line.empty() && line.find_first_not_of(" \t\r") != std::string::npos) {
            throw Error("word-vector file has more rows than its header declares: " + path);
        }
    }
    return wv;
}

namespace {

void add_vec(std::vector<double>& acc, const std::vector<float>& v) {
    for (size_t i = 0; i < acc.size(); ++i) acc[i] += v[i];
}

std::vector<double> sum_vectors(const std::vector<std::string>& tokens, const WordVectors& wv) {
    std::vector<double> acc(wv.dim, 0.0);
    for (const auto& t : tokens) {
        auto it = wv.table.find(t);
        if (it != wv.table.end()) add_vec(acc, it->second);
    }
    return acc;
}

double cosine_clamped(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), 0.0, 1.0);
}

} // namespace

std::vector<AnswerCandidate> embedding_reader(std::string_view question,
                                              const std::vector<ParagraphHit>& paragraphs,
                                              const WordVectors& vectors) {
    const std::vector<double> q_sum = sum_vectors(norm_tokens(question), vectors);

    std::vector<AnswerCandidate> out;
    std::vector<std::string> span_tokens;
    for (const auto& hit : paragraphs) {
        const ParagraphView view = make_view(hit.text, 10);
        if (view.spans.empty()) continue;

        double best = -1.0;
        const TokenSpan* best_span = nullptr;
        for (const auto& span : view.spans) {
            span_tokens.assign(view.tok_norm.begin() + span.tok_lo,
                               view.tok_norm.begin() + span.tok_hi + 1);
            const double score = cosine_clamped(sum_vectors(span_tokens, vectors), q_sum);
            if (!best_span || score > best) {
                best = score;
                best_span = &span;
            }
        }
        out.push_back(to_candidate(hit, view, *best_span, best));
    }
    return out;
}

ExternalReaderChannel::ExternalReaderChannel(std::vector<std::string> argv, int timeout_ms)
    : timeout_ms_(timeout_ms) {
    if (argv.empty()) throw Error("external reader command is empty");

    static std::once_flag flag;
    std::call_once(flag, [] { std::signal(SIGPIPE, SIG_IGN); });

    int to_child[2];
    int from_child[2];
    if (pipe(to_child) != 0) throw Error("pipe failed");
    if (pipe(from_child) != 0) {
        close(to_child[0]);
        close(to_child[1]);
        throw Error("pipe failed");
    }

    const pid_t pid = fork();
    if (pid < 0) throw Error("fork failed");
    if (pid == 0) {
        dup2(to_child[0], STDIN_FILENO);
        dup2(from_child[1], STDOUT_FILENO);
        close(to_child[0]);
        close(to_child[1]);
        close(from_child[0]);
        close(from_child[1]);
        std::vector<char*> args;
        args.reserve(argv.size() + 1);
        for (auto& a : argv) args.push_back(a.data());
        args.push_back(nullptr);
        execvp(args[0], args.data());
        _exit(127);
    }
    close(to_child[0]);
    close(from_child[1]);
    pid_ = pid;
    in_fd_ = to_child[1];
    out_fd_ = from_child[0];
}

void ExternalReaderChannel::mark_dead() {
    if (dead_) return;
    dead_ = true;
    if (in_fd_ >= 0) close(in_fd_);
    if (out_fd_ >= 0) close(out_fd_);
    in_fd_ = out_fd_ = -1;
    if (pid_ > 0) {
        kill(static_cast<pid_t>(pid_), SIGKILL);
        int status = 0;
        waitpid(static_cast<pid_t>(pid_), &status, 0);
        pid_ = -1;
    }
}

ExternalReaderChannel::~ExternalReaderChannel() {
    if (dead_) return;
    if (in_fd_ >= 0) close(in_fd_); // EOF asks the child to exit
    in_fd_ = -1;
    if (pid_ > 0) {
        for (int i = 0; i < 20; ++i) {
            int status = 0;
            if (waitpid(static_cast<pid_t>(pid_), &status, WNOHANG) != 0) {
                pid_ = -1;
                break;
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(10));
        }
        if (pid_ > 0) {
            kill(static_cast<pid_t>(pid_), SIGKILL);
            int status = 0;
            waitpid(static_cast<pid_t>(pid_), &status, 0);
        }
    }
    if (out_fd_ >= 0) close(out_fd_);
}

std::string ExternalReaderChannel::roundtrip_line(const std::string& request_line) {
    using Kind = ExternalReaderError::Kind;
    if (dead_) throw ExternalReaderError(Kind::child_exit, "external reader channel is closed");

    std::string payload = request_line;
    payload += '\n';
    size_t written = 0;
    while (written < payload.size()) {
        const ssize_t n = write(in_fd_, payload.data() + written, payload.size() - written);
        if (n < 0) {
            if (errno == EINTR) continue;
            mark_dead();
            throw ExternalReaderError(Kind::child_exit, "external reader closed its input");
        }
        written += static_cast<size_t>(n);
    }

    const auto deadline =
        std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms_);
    constexpr size_t kMaxResponse = 64ULL << 20;
    for (;;) {
        const size_t nl = buf_.find('\n');
        if (nl != std::string::npos) {
            std::string line = buf_.substr(0, nl);
            buf_.erase(0, nl + 1);
            return line;
        }
        if (buf_.size() > kMaxResponse) {
            mark_dead();
            throw ExternalReaderError(Kind::protocol, "external reader response too large");
        }

        const auto now = std::chrono::steady_clock::now();
        if (now >= deadline) {
            mark_dead();
            throw ExternalReaderError(Kind::timeout, "external reader timed out");
        }
        const auto left =
            std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();

        struct pollfd pfd = {};
        pfd.fd = out_fd_;
        pfd.events = POLLIN;
        const int pr = poll(&pfd, 1, static_cast<int>(std::min<int64_t>(left, 1000)));
        if (pr < 0) {
            if (errno == EINTR) continue;
            mark_dead();
            throw ExternalReaderError(Kind::child_exit, "external reader poll failed");
        }
        if (pr == 0) continue;

        char chunk[4096];
        const ssize_t n = read(out_fd_, chunk, sizeof(chunk));
        if (n < 0) {
            if (errno == EINTR) continue;
            mark_dead();
            throw ExternalReaderError(Kind::child_exit, "external reader read failed");
        }
        if (n == 0) {
            mark_dead();
            throw ExternalReaderError(Kind::child_exit, "external reader exited");
        }
        buf_.append(chunk, static_cast<size_t>(n));
    }
}

std::vector<AnswerCandidate> external_reader(const std::string& qid, std::string_view question,
                                             const std::vector<ParagraphHit>& paragraphs,
                                             ExternalReaderChannel& channel) {
    using Kind = ExternalReaderError::Kind;

    json request;
    request["type"] = "read";
    request["qid"] = qid;
    request["question"] = std::string(question);
    json plist = json::array();
    std::unordered_map<std::string, const ParagraphHit*> by_pid;
    for (const auto& hit : paragraphs) {
        const std::string pid = paragraph_doc_id(hit.article_id, hit.paragraph_index);
        plist.push_back({{"id", pid}, {"text", hit.text}});
        by_pid.emplace(pid, &hit);
    }
    request["paragraphs"] = std::move(plist);

    std::string reply;
    try {
        reply = channel.roundtrip_line(request.dump());
    } catch (const ExternalReaderError& e) {
        throw ExternalReaderError(e.kind, "qid " + qid + ": " + e.what());
    }

    const json resp = json::parse(reply, nullptr, /*allow_exceptions=*/false);
    auto bad = [&](const std::string& what) {
        return ExternalReaderError(Kind::protocol, "qid " + qid + ": " + what);
    };
    if (resp.is_discarded() || !resp.is_object()) throw bad("response is not a JSON object");
    if (resp.value("type", "") != "candidates") throw bad("response type is not \"candidates\"");
    if (resp.value("qid", "") != qid) throw bad("response qid mismatch");
    if (!resp.contains("candidates") || !resp["candidates"].is_array()) {
        throw bad("response has no candidates array");
    }

    std::vector<AnswerCandidate> out;
    for (const auto& c : resp["candidates"]) {
        if (!c.is_object() || !c.contains("paragraph_id") || !c["paragraph_id"].is_string() ||
            !c.contains("char_start") || !c["char_start"].is_number_integer() ||
            !c.contains("char_end") || !c["char_end"].is_number_integer() ||
            !c.contains("start_score") || !c["start_score"].is_number() ||
            !c.contains("end_score") || !c["end_score"].is_number()) {
            throw bad("candidate object is malformed");
        }
        const std::string pid = c["paragraph_id"].get<std::string>();
        auto it = by_pid.find(pid);
        if (it == by_pid.end()) {
            warn("qid " + qid + ": reader answered for unknown paragraph " + pid + "; dropped");
            continue;
        }
        const ParagraphHit& hit = *it->second;
        const int64_t start = c["char_start"].get<int64_t>();
        const int64_t end = c["char_end"].get<int64_t>();

        const CodeText ct = decode_utf8(hit.text);
        if (start < 0 || end <= start || static_cast<size_t>(end) > ct.size()) {
            warn("qid " + qid + ": reader span out of bounds in " + pid + "; dropped");
            continue;
        }
        // Spans may cover at most 16 tokens (start index i, end index j,
        // j <= i + 15), measured over tokens the span intersects.
        const std::vector<CharRange> toks = tokenize_raw(ct);
        size_t covered = 0;
        for (const auto& t : toks) {
            if (t.begin < static_cast<size_t>(end) && t.end > static_cast<size_t>(start)) {
                ++covered;
            }
        }
        if (covered > 16) {
            warn("qid " + qid + ": reader span exceeds the 16-token cap in " + pid +
                 "; dropped");
            continue;
        }

        AnswerCandidate cand;
        cand.article_id = hit.article_id;
        cand.paragraph_index = hit.paragraph_index;
        cand.char_start = static_cast<size_t>(start);
        cand.char_end = static_cast<size_t>(end);
        cand.text = slice_chars(hit.text, ct, cand.char_start, cand.char_end);
        cand.ans_raw = c["start_score"].get<double>() * c["end_score"].get<double>();
        cand.doc_score = hit.doc_score;
        out.push_back(std::move(cand));
    }
    return out;
}

} // namespace jawab
