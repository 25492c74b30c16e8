#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace jawab {

struct GoldAnswer {
    std::string text;
    size_t answer_start = 0; // character offset into the context
};

struct QaExample {
    std::string qid;
    std::string question;
    std::string context;
    std::vector<GoldAnswer> golds;
};

struct DatasetLoad {
    std::vector<QaExample> examples;
    // Answers whose answer_start does not slice to their text. Each one is
    // warned about and kept; strict callers can treat a nonzero count as
    // failure.
    size_t offset_mismatches = 0;
};

// SQuAD v1.1 shape: data -> paragraphs -> qas, flattened.
DatasetLoad load_dataset(const std::string& path);

struct NormalizeOptions {
    bool strip_alef_lam = true; // drop a leading "ال" from every token
};

// Strip diacritics and tatweel, unify alef/ya, drop punctuation in place,
// collapse whitespace, then strip each token's leading "ال". Idempotent.
std::string normalize_answer(std::string_view text, const NormalizeOptions& opt = {});

// Normalized text plus, per normalized character, the character offset it
// came from in the original (separators map to the following token).
struct NormalizedText {
    std::u32string cp;
    std::string text;
    std::vector<size_t> src_of; // size == cp.size()
};
NormalizedText normalize_answer_mapped(std::string_view text, const NormalizeOptions& opt = {});

int exact_match(std::string_view pred, const std::vector<std::string>& golds,
                const NormalizeOptions& opt = {});
int exact_match(std::string_view pred, const std::vector<GoldAnswer>& golds,
                const NormalizeOptions& opt = {});

// Token-multiset overlap F1 on normalized whitespace-split tokens, max over
// golds. Both sides empty scores 1, one side empty scores 0.
double f1(std::string_view pred, const std::vector<std::string>& golds,
          const NormalizeOptions& opt = {});
double f1(std::string_view pred, const std::vector<GoldAnswer>& golds,
          const NormalizeOptions& opt = {});

// 1 iff the prediction starts in the same sentence as any gold answer_start.
// Without a span, the prediction is located by its first normalized
// occurrence in the context; not found scores 0.
int sentence_match(std::string_view pred_text, std::optional<size_t> pred_char_start,
                   const QaExample& example, const NormalizeOptions& opt = {});

struct EvalReport {
    double exact_match = 0.0; // percentages
    double f1 = 0.0;
    double sentence_match = 0.0;
    size_t n = 0;
    std::optional<double> recall_at_k;
};
std::string report_to_json(const EvalReport& report);

// qid -> ranked answers; each metric takes its own max over the list.
using Predictions = std::map<std::string, std::vector<std::string>>;

// Macro averages x100 over all dataset questions. Missing predictions score
// 0 with a warning; predictions for unknown qids are an error.
EvalReport evaluate(const std::vector<QaExample>& dataset, const Predictions& predictions,
                    const NormalizeOptions& opt = {});

struct RecallOptions {
    bool normalized = true; // raw substring match when false
    NormalizeOptions norm;
};

// Fraction x100 of questions where some gold occurs as a substring of some
// retrieved document text.
double retriever_recall(
    const std::vector<QaExample>& dataset,
    const std::unordered_map<std::string, std::vector<std::string>>& retrieved_texts,
    const RecallOptions& opt = {});

} // namespace jawab
