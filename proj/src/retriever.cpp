#include "jawab/retriever.hpp"

#include <algorithm>
#include <charconv>
#include <unordered_set>

#include "jawab/error.hpp"
#include "jawab/log.hpp"

namespace jawab {

namespace {

void validate(const HierarchicalConfig& cfg) {
    if (cfg.k1 < 1 || cfg.k2 < 1 || cfg.k2 > cfg.k1) {
        throw Error("hierarchical config requires 1 <= k2 <= k1");
    }
    auto ok_range = [](int lo, int hi) { return lo >= 1 && lo <= hi && hi <= 4; };
    if (!ok_range(cfg.stage1_lo, cfg.stage1_hi) || !ok_range(cfg.stage2_lo, cfg.stage2_hi)) {
        throw Error("hierarchical config has an invalid ngram range");
    }
}

// Corpus position of a resolved doc, used to order transient stage-2 rows.
std::pair<size_t, size_t> corpus_position(const Corpus& corpus, const ResolvedDoc& doc) {
    const size_t article_row = corpus.by_id.at(doc.article->id);
    const size_t par = doc.paragraph ? doc.paragraph->index : 0;
    return {article_row, par};
}

} // namespace

std::string paragraph_doc_id(const std::string& article_id, size_t index) {
    return article_id + "#" + std::to_string(index);
}

std::optional<ResolvedDoc> resolve_doc_id(const Corpus& corpus, const std::string& id) {
    if (const Article* a = corpus.find(id)) return ResolvedDoc{a, nullptr};
    const size_t pos = id.rfind('#');
    if (pos == std::string::npos || pos == 0 || pos + 1 == id.size()) return std::nullopt;
    const Article* a = corpus.find(id.substr(0, pos));
    if (!a) return std::nullopt;
    size_t index = 0;
    const char* first = id.data() + pos + 1;
    const char* last = id.data() + id.size();
    auto [ptr, ec] = std::from_chars(first, last, index);
    if (ec != std::errc() || ptr != last || index >= a->paragraphs.size()) return std::nullopt;
    return ResolvedDoc{a, &a->paragraphs[index]};
}

std::string article_text(const Article& article) {
    std::string text = article.title;
    for (const auto& p : article.paragraphs) {
        text += '\n';
        text += p.text;
    }
    return text;
}

std::vector<RetrievalHit> retrieve_flat(const TfidfIndex& index, std::string_view question,
                                        size_t k) {
    return top_k(index, vectorize_query(question, index), k);
}

std::vector<RetrievalHit> retrieve_hierarchical(const TfidfIndex& stage1_index,
                                                const Corpus& corpus, std::string_view question,
                                                const HierarchicalConfig& cfg) {
    validate(cfg);
    if (!stage1_index.analyzer) throw Error("stage-1 index has no analyzer attached");
    if (stage1_index.ngram_lo != cfg.stage1_lo || stage1_index.ngram_hi != cfg.stage1_hi) {
        warn("stage-1 index ngram range differs from the configured one");
    }

    const std::vector<RetrievalHit> stage1 = retrieve_flat(stage1_index, question, cfg.k1);
    if (stage1.empty()) return {};

    struct Entry {
        std::pair<size_t, size_t> pos;
        const RetrievalHit* hit;
        ResolvedDoc doc;
    };
    std::vector<Entry> entries;
    entries.reserve(stage1.size());
    for (const auto& hit : stage1) {
        auto doc = resolve_doc_id(corpus, hit.doc_id);
        if (!doc) throw Error("retrieved document id not in corpus: " + hit.doc_id);
        entries.push_back({corpus_position(corpus, *doc), &hit, *doc});
    }
    std::sort(entries.begin(), entries.end(),
              [](const Entry& a, const Entry& b) { return a.pos < b.pos; });

    std::vector<DocInput> docs;
    docs.reserve(entries.size());
    for (const auto& e : entries) {
        docs.push_back({e.hit->doc_id,
                        e.doc.paragraph ? e.doc.paragraph->text : article_text(*e.doc.article)});
    }

    AnalyzerConfig cfg2 = stage1_index.analyzer->config();
    cfg2.ngram_lo = cfg.stage2_lo;
    cfg2.ngram_hi = cfg.stage2_hi;
    BuildOptions opt;
    opt.unit = stage1_index.unit;
    const TfidfIndex stage2 = build_index(docs, cfg2, cfg.stage2_bins, opt);
    return top_k(stage2, vectorize_query(question, stage2), cfg.k2);
}

std::vector<ParagraphHit> expand_to_paragraphs(const std::vector<RetrievalHit>& hits,
                                               const Corpus& corpus) {
    std::vector<ParagraphHit> out;
    for (const auto& hit : hits) {
        auto doc = resolve_doc_id(corpus, hit.doc_id);
        if (!doc) throw Error("document id not in corpus: " + hit.doc_id);
        if (doc->paragraph) {
            out.push_back({doc->article->id, doc->paragraph->index, doc->paragraph->text,
                           hit.score});
        } else {
            for (const auto& p : doc->article->paragraphs) {
                out.push_back({doc->article->id, p.index, p.text, hit.score});
            }
        }
    }
    return out;
}

std::vector<RetrievalHit> merge_external(const std::vector<RetrievalHit>& primary,
                                         const std::vector<std::string>& external_ids,
                                         size_t total_budget, const Corpus& corpus) {
    std::vector<RetrievalHit> out;
    std::unordered_set<std::string> seen;

    double floor = 0.0;
    bool any_primary = false;
    for (const auto& hit : primary) {
        if (out.size() >= total_budget) break;
        if (!seen.insert(hit.doc_id).second) continue;
        out.push_back(hit);
        floor = any_primary ? std::min(floor, hit.score) : hit.score;
        any_primary = true;
    }

    for (const auto& id : external_ids) {
        if (out.size() >= total_budget) break;
        if (seen.count(id)) continue;
        if (!resolve_doc_id(corpus, id)) {
            warn("unknown external document id: " + id);
            continue;
        }
        seen.insert(id);
        out.push_back({id, floor});
    }
    return out;
}

std::vector<ParagraphHit> subselect_paragraphs(const std::vector<ParagraphHit>& paragraph_hits,
                                               std::string_view question, size_t k,
                                               const AnalyzerConfig& base_cfg,
                                               uint64_t hash_bins) {
    if (k < 1) throw Error("subselect_paragraphs requires k >= 1");
    if (paragraph_hits.empty()) return {};

    std::vector<DocInput> docs;
    docs.reserve(paragraph_hits.size());
    for (size_t i = 0; i < paragraph_hits.size(); ++i) {
        docs.push_back({std::to_string(i), paragraph_hits[i].text});
    }
    AnalyzerConfig cfg = base_cfg;
    cfg.ngram_lo = 1;
    cfg.ngram_hi = 4;
    BuildOptions opt;
    opt.unit = DocUnit::paragraph;
    opt.warn_empty = false;
    const TfidfIndex index = build_index(docs, cfg, hash_bins, opt);

    const std::vector<double> scores = score_all(index, vectorize_query(question, index));
    std::vector<std::pair<double, size_t>> ranked;
    for (size_t r = 0; r < scores.size(); ++r) {
        if (scores[r] > 0.0) ranked.emplace_back(scores[r], r);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    if (ranked.size() > k) ranked.resize(k);

    std::vector<ParagraphHit> out;
    out.reserve(ranked.size());
    for (const auto& [score, row] : ranked) {
        ParagraphHit hit = paragraph_hits[row];
        hit.doc_score = std::min(score, 1.0);
        out.push_back(std::move(hit));
    }
    return out;
}

} // namespace jawab
