#include "jawab/corpus.hpp"

#include <algorithm>
#include <cassert>
#include <fstream>
#include <utility>

#include "json.hpp"

#include "jawab/error.hpp"
#include "jawab/hash.hpp"
#include "jawab/log.hpp"
#include "jawab/text.hpp"

namespace jawab {

namespace {

using nlohmann::json;

std::string trimmed(std::string_view s) {
    CodeText ct = decode_utf8(s);
    size_t a = 0, b = ct.size();
    while (a < b && is_whitespace(ct.cp[a])) ++a;
    while (b > a && is_whitespace(ct.cp[b - 1])) --b;
    return slice_chars(s, ct, a, b);
}

// Normalization steps shared with Analyzer::analyze, applied to one word.
std::u32string normalize_word(std::u32string_view w, bool strip, bool unify) {
    std::u32string out;
    out.reserve(w.size());
    for (char32_t c : w) {
        if (strip && (is_arabic_diacritic(c) || is_tatweel(c))) continue;
        if (unify) c = unify_alef_ya(c);
        out.push_back(c);
    }
    return out;
}

} // namespace

const Article* Corpus::find(const std::string& id) const {
    auto it = by_id.find(id);
    return it == by_id.end() ? nullptr : &articles[it->second];
}

size_t Corpus::paragraph_count() const {
    size_t n = 0;
    for (const auto& a : articles) n += a.paragraphs.size();
    return n;
}

Corpus load_corpus(const std::string& path, const LoadOptions& opt) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open corpus file: " + path);

    Corpus corpus;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trimmed(line).empty()) continue;

        json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
        if (j.is_discarded() || !j.is_object()) {
            throw Error("corpus line " + std::to_string(line_no) + ": malformed JSON");
        }
        auto require = [&](const char* key, bool ok) {
            if (!ok) {
                throw Error("corpus line " + std::to_string(line_no) + ": missing or invalid \"" +
                            key + "\"");
            }
        };
        require("id", j.contains("id") && j["id"].is_string());
        require("title", j.contains("title") && j["title"].is_string());
        require("paragraphs", j.contains("paragraphs") && j["paragraphs"].is_array());

        Article art;
        art.id = j["id"].get<std::string>();
        art.title = j["title"].get<std::string>();
        if (corpus.by_id.count(art.id)) {
            throw Error("duplicate article id \"" + art.id + "\" at line " +
                        std::to_string(line_no));
        }
        for (const auto& p : j["paragraphs"]) {
            require("paragraphs", p.is_string());
            std::string text = p.get<std::string>();
            if (char_length(trimmed(text)) < opt.min_paragraph_chars) continue;
            Paragraph par;
            par.article_id = art.id;
            par.index = art.paragraphs.size();
            par.text = std::move(text);
            art.paragraphs.push_back(std::move(par));
        }
        corpus.by_id.emplace(art.id, corpus.articles.size());
        corpus.articles.push_back(std::move(art));
    }
    if (corpus.articles.empty()) warn("corpus file has no articles: " + path);
    return corpus;
}

AnalyzerConfig AnalyzerConfig::defaults() {
    AnalyzerConfig cfg;
    cfg.stem_rules.prefixes = {"وال", "بال", "كال", "فال", "ال", "لل", "و"};
    cfg.stem_rules.suffixes = {"ها", "ان", "ات", "ون", "ين", "ية", "يه", "ه", "ة", "ي"};
    cfg.stem_rules.min_stem_len = 3;
    const auto& words = default_stopwords();
    cfg.stopword_list.insert(words.begin(), words.end());
    return cfg;
}

uint64_t AnalyzerConfig::content_hash() const {
    std::string s = "v1";
    auto field = [&s](std::string_view tag, const std::string& value) {
        s += '|';
        s += tag;
        s += '=';
        s += value;
    };
    field("d", strip_diacritics ? "1" : "0");
    field("u", unify_alef_ya ? "1" : "0");
    field("m", std::to_string(stem_rules.min_stem_len));
    field("n", std::to_string(ngram_lo) + "," + std::to_string(ngram_hi));
    auto join = [](const auto& seq) {
        std::string out;
        for (const auto& w : seq) {
            if (!out.empty()) out += ',';
            out += w;
        }
        return out;
    };
    field("sw", join(stopword_list));
    field("pf", join(stem_rules.prefixes));
    field("sf", join(stem_rules.suffixes));
    return fnv1a64(s);
}

Analyzer::Analyzer(AnalyzerConfig cfg) : cfg_(std::move(cfg)) {
    for (const auto& w : cfg_.stopword_list) {
        std::u32string cps = decode_utf8(w).cp;
        stopwords_.insert(normalize_word(cps, cfg_.strip_diacritics, cfg_.unify_alef_ya));
    }
    for (const auto& p : cfg_.stem_rules.prefixes) prefixes_.push_back(decode_utf8(p).cp);
    for (const auto& sfx : cfg_.stem_rules.suffixes) suffixes_.push_back(decode_utf8(sfx).cp);
    auto longer = [](const std::u32string& a, const std::u32string& b) {
        return a.size() > b.size();
    };
    std::stable_sort(prefixes_.begin(), prefixes_.end(), longer);
    std::stable_sort(suffixes_.begin(), suffixes_.end(), longer);
}

std::u32string Analyzer::stem_word(std::u32string word) const {
    const size_t min_len = cfg_.stem_rules.min_stem_len;
    // One longest-matching prefix then one longest-matching suffix per pass,
    // each only when the remainder keeps the minimum length; repeated until
    // stable so re-analyzing stemmer output changes nothing.
    for (;;) {
        const size_t before = word.size();
        for (const auto& p : prefixes_) {
            if (word.size() > p.size() && word.compare(0, p.size(), p) == 0) {
                if (word.size() - p.size() >= min_len) word.erase(0, p.size());
                break;
            }
        }
        for (const auto& s : suffixes_) {
            if (word.size() > s.size() &&
                word.compare(word.size() - s.size(), s.size(), s) == 0) {
                if (word.size() - s.size() >= min_len) word.resize(word.size() - s.size());
                break;
            }
        }
        if (word.size() == before) return word;
    }
}

TokenStream Analyzer::analyze(std::string_view text) const {
    CodeText ct = decode_utf8(text);
    TokenStream out;
    std::u32string surface;
    size_t start = 0;
    size_t end = 0;

    auto flush = [&]() {
        if (surface.empty()) return;
        if (!stopwords_.count(surface)) {
            Token tok;
            tok.stem = encode_utf8(stem_word(surface));
            tok.char_start = start;
            tok.char_end = end;
            out.push_back(std::move(tok));
        }
        surface.clear();
    };

    for (size_t i = 0; i < ct.size(); ++i) {
        char32_t c = ct.cp[i];
        if (cfg_.strip_diacritics && (is_arabic_diacritic(c) || is_tatweel(c))) continue;
        if (cfg_.unify_alef_ya) c = unify_alef_ya(c);
        if (is_separator(c)) {
            flush();
            continue;
        }
        if (surface.empty()) start = i;
        surface.push_back(c);
        end = i + 1;
    }
    flush();
    return out;
}

std::vector<std::string> ngrams(const TokenStream& stream, int lo, int hi) {
    assert(lo >= 1 && lo <= hi);
    std::vector<std::string> out;
    const int m = static_cast<int>(stream.size());
    for (int n = lo; n <= hi; ++n) {
        for (int i = 0; i + n <= m; ++i) {
            std::string g = stream[i].stem;
            for (int j = 1; j < n; ++j) {
                g += ' ';
                g += stream[i + j].stem;
            }
            out.push_back(std::move(g));
        }
    }
    return out;
}

std::set<std::string> load_stopword_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open stopword file: " + path);
    std::set<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        std::string w = trimmed(line);
        if (!w.empty()) out.insert(std::move(w));
    }
    return out;
}

const std::vector<std::string>& default_stopwords() {
    static const std::vector<std::string> words = {
        "في",    "من",    "على",   "إلى",   "عن",    "مع",    "هذا",   "هذه",
        "ذلك",   "تلك",   "التي",  "الذي",  "الذين", "هو",    "هي",    "هم",
        "هن",    "أنا",   "نحن",   "أنت",   "كان",   "كانت",  "يكون",  "تكون",
        "ما",    "لا",    "لم",    "لن",    "إن",    "أن",    "إذا",   "كل",
        "بعض",   "قد",    "أو",    "ثم",    "بل",    "حتى",   "لكن",   "لأن",
        "كما",   "منذ",   "عند",   "عندما", "بين",   "فوق",   "تحت",   "أمام",
        "خلف",   "قبل",   "بعد",   "حول",   "دون",   "غير",   "سوى",   "أي",
        "أيضا",  "فقط",   "إلا",   "حيث",   "هناك",  "هنا",   "ليس",   "ليست",
        "له",    "لها",   "لهم",   "به",    "بها",   "بهم",   "فيه",   "فيها",
        "فيهم",  "عليه",  "عليها", "عليهم", "إليه",  "إليها", "منه",   "منها",
        "منهم",  "عنه",   "عنها",  "معه",   "معها",  "نفسه",  "نفسها", "وهو",
        "وهي",   "ولا",   "وما",   "ومن",   "وفي",   "وقد",   "ولم",   "وكان",
        "فإن",   "أم",    "أما",   "لقد",
    };
    return words;
}

} // namespace jawab
