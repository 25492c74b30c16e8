#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace jawab {

// Decoded Unicode text. All character offsets in the library count Unicode
// scalar values, never bytes; byte_of maps a character offset back into the
// original UTF-8 buffer (byte_of.size() == cp.size() + 1).
struct CodeText {
    std::u32string cp;
    std::vector<uint32_t> byte_of;

    size_t size() const { return cp.size(); }
};

CodeText decode_utf8(std::string_view text);
std::string encode_utf8(std::u32string_view cps);
void append_utf8(std::string& out, char32_t c);

// Slice of the original UTF-8 text addressed by character offsets.
std::string slice_chars(std::string_view text, const CodeText& ct,
                        size_t char_start, size_t char_end);

// Number of Unicode scalar values in a UTF-8 string.
size_t char_length(std::string_view text);

// Arabic short-vowel marks U+064B..U+0652.
bool is_arabic_diacritic(char32_t c);
// Tatweel / kasheeda U+0640.
bool is_tatweel(char32_t c);
// Alef variants to bare alef, alef maqsura to yeh. Identity otherwise.
char32_t unify_alef_ya(char32_t c);

// Token separators: Unicode whitespace, invisible format marks, and a fixed
// Latin + Arabic punctuation set.
bool is_whitespace(char32_t c);
bool is_punctuation(char32_t c);
bool is_separator(char32_t c);

struct CharRange {
    size_t begin = 0;
    size_t end = 0;
};

// Sentence segmentation: a sentence ends after '.', '!', '?', U+061F, U+061B
// when followed by whitespace or end of text, and after every newline. The
// returned ranges partition [0, |text|).
std::vector<CharRange> split_sentences(const CodeText& ct);
std::vector<CharRange> split_sentences(std::string_view text);

// Index of the sentence containing character offset pos.
size_t sentence_index_at(const std::vector<CharRange>& sentences, size_t pos);

// Raw surface tokens: maximal runs of non-separator characters. No
// normalization, no stopword removal, no stemming. Offsets into the
// original text.
std::vector<CharRange> tokenize_raw(const CodeText& ct);
std::vector<CharRange> tokenize_raw(std::string_view text);

} // namespace jawab
