#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace jawab {

struct Paragraph {
    std::string article_id;
    size_t index = 0; // position within the article after empty paragraphs are dropped
    std::string text;
};

struct Article {
    std::string id;
    std::string title;
    std::vector<Paragraph> paragraphs;
};

struct Corpus {
    std::vector<Article> articles;
    std::unordered_map<std::string, size_t> by_id;

    const Article* find(const std::string& id) const;
    size_t paragraph_count() const;
};

struct LoadOptions {
    // Paragraphs whose whitespace-trimmed length (in characters) falls below
    // this are dropped at load.
    size_t min_paragraph_chars = 1;
};

// Reads one article per line: {"id": ..., "title": ..., "paragraphs": [...]}.
// Throws Error naming the offending line or duplicate id.
Corpus load_corpus(const std::string& path, const LoadOptions& opt = {});

struct StemRules {
    std::vector<std::string> prefixes;
    std::vector<std::string> suffixes;
    size_t min_stem_len = 3;
};

struct AnalyzerConfig {
    bool strip_diacritics = true; // also removes tatweel
    bool unify_alef_ya = true;
    std::set<std::string> stopword_list;
    StemRules stem_rules;
    int ngram_lo = 1;
    int ngram_hi = 2;

    // Default Arabic rules and stopwords, unigram+bigram range.
    static AnalyzerConfig defaults();

    // Digest over a canonical serialization; stored in index headers so a
    // mismatched analyzer can be detected at query time.
    uint64_t content_hash() const;
};

struct Token {
    std::string stem;
    size_t char_start = 0; // character offsets into the original text
    size_t char_end = 0;
};

using TokenStream = std::vector<Token>;

class Analyzer {
public:
    explicit Analyzer(AnalyzerConfig cfg);

    const AnalyzerConfig& config() const { return cfg_; }

    // Normalize, tokenize, drop stopwords, stem. Offsets of each token cover
    // its surface form in the input; slicing the input with them and
    // re-normalizing reproduces the pre-stem surface.
    TokenStream analyze(std::string_view text) const;

private:
    AnalyzerConfig cfg_;
    std::unordered_set<std::u32string> stopwords_;
    std::vector<std::u32string> prefixes_; // longest first
    std::vector<std::u32string> suffixes_; // longest first

    std::u32string stem_word(std::u32string word) const;
};

// All contiguous n-token joins for n in [lo, hi], stems joined by a single
// space: all n = lo grams in stream order, then n = lo + 1, and so on.
std::vector<std::string> ngrams(const TokenStream& stream, int lo, int hi);

// The compiled-in copy of data/stopwords_ar.txt.
const std::vector<std::string>& default_stopwords();

// One token per line; blank lines ignored.
std::set<std::string> load_stopword_file(const std::string& path);

} // namespace jawab
