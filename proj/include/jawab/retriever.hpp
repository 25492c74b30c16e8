#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "jawab/corpus.hpp"
#include "jawab/tfidf.hpp"

namespace jawab {

struct HierarchicalConfig {
    int stage1_lo = 1;
    int stage1_hi = 2;
    size_t k1 = 1000; // stage-1 depth
    int stage2_lo = 1;
    int stage2_hi = 4;
    size_t k2 = 15; // final depth, k2 <= k1
    uint64_t stage2_bins = 1ULL << 18;
};

struct ParagraphHit {
    std::string article_id;
    size_t paragraph_index = 0;
    std::string text;
    double doc_score = 0.0; // inherited from the source document hit
};

// Document id forms: "<article_id>" for whole articles, or
// "<article_id>#<paragraph_index>". An exact article-id match wins before
// the suffix is interpreted.
std::string paragraph_doc_id(const std::string& article_id, size_t index);

struct ResolvedDoc {
    const Article* article = nullptr;   // always set
    const Paragraph* paragraph = nullptr; // set only for paragraph ids
};
std::optional<ResolvedDoc> resolve_doc_id(const Corpus& corpus, const std::string& id);

// Text a whole-article document contributes to an index: title and
// paragraphs joined by newlines.
std::string article_text(const Article& article);

std::vector<RetrievalHit> retrieve_flat(const TfidfIndex& index, std::string_view question,
                                        size_t k);

// Stage 1 takes top-k1 from the prebuilt index; stage 2 rebuilds a transient
// index over just those documents' texts with the wider n-gram range and
// returns its top-k2. Stage-2 rows follow corpus order so score ties break
// exactly as a flat index over the same documents would.
std::vector<RetrievalHit> retrieve_hierarchical(const TfidfIndex& stage1_index,
                                                const Corpus& corpus, std::string_view question,
                                                const HierarchicalConfig& cfg = {});

// Article hits fan out to every paragraph (inheriting doc_score, article
// order); paragraph hits pass through. Hit order preserved.
std::vector<ParagraphHit> expand_to_paragraphs(const std::vector<RetrievalHit>& hits,
                                               const Corpus& corpus);

// Primary hits first (deduplicated, truncated to the budget), then external
// ids not already present until the budget fills. Appended externals score
// at the minimum included primary score, 0 when primary is empty. Ids that
// resolve nowhere are skipped with a warning.
std::vector<RetrievalHit> merge_external(const std::vector<RetrievalHit>& primary,
                                         const std::vector<std::string>& external_ids,
                                         size_t total_budget, const Corpus& corpus);

// Rescores paragraphs against the question with a transient [1,4] index and
// keeps the top k; doc_score becomes the paragraph-level cosine.
std::vector<ParagraphHit> subselect_paragraphs(const std::vector<ParagraphHit>& paragraph_hits,
                                               std::string_view question, size_t k,
                                               const AnalyzerConfig& base_cfg,
                                               uint64_t hash_bins = 1ULL << 16);

} // namespace jawab
