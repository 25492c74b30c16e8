#include "jawab/text.hpp"

#include <algorithm>

namespace jawab {

CodeText decode_utf8(std::string_view text) {
    CodeText out;
    out.cp.reserve(text.size());
    out.byte_of.reserve(text.size() + 1);
    size_t i = 0;
    const size_t n = text.size();
    while (i < n) {
        out.byte_of.push_back(static_cast<uint32_t>(i));
        unsigned char b0 = static_cast<unsigned char>(text[i]);
        char32_t c = 0xFFFD;
        size_t len = 1;
        if (b0 < 0x80) {
            c = b0;
        } else if ((b0 >> 5) == 0x6 && i + 1 < n) {
            unsigned char b1 = static_cast<unsigned char>(text[i + 1]);
            if ((b1 & 0xC0) == 0x80) {
                c = ((b0 & 0x1F) << 6) | (b1 & 0x3F);
                len = 2;
            }
        } else if ((b0 >> 4) == 0xE && i + 2 < n) {
            unsigned char b1 = static_cast<unsigned char>(text[i + 1]);
            unsigned char b2 = static_cast<unsigned char>(text[i + 2]);
            if ((b1 & 0xC0) == 0x80 && (b2 & 0xC0) == 0x80) {
                c = ((b0 & 0x0F) << 12) | ((b1 & 0x3F) << 6) | (b2 & 0x3F);
                len = 3;
            }
        } else if ((b0 >> 3) == 0x1E && i + 3 < n) {
            unsigned char b1 = static_cast<unsigned char>(text[i + 1]);
            unsigned char b2 = static_cast<unsigned char>(text[i + 2]);
            unsigned char b3 = static_cast<unsigned char>(text[i + 3]);
            if ((b1 & 0xC0) == 0x80 && (b2 & 0xC0) == 0x80 && (b3 & 0xC0) == 0x80) {
                c = ((b0 & 0x07) << 18) | ((b1 & 0x3F) << 12) | ((b2 & 0x3F) << 6) |
                    (b3 & 0x3F);
                len = 4;
            }
        }
        out.cp.push_back(c);
        i += len;
    }
    out.byte_of.push_back(static_cast<uint32_t>(n));
    return out;
}

void append_utf8(std::string& out, char32_t c) {
    if (c < 0x80) {
        out.push_back(static_cast<char>(c));
    } else if (c < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (c >> 6)));
        out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else if (c < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (c >> 12)));
        out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (c >> 18)));
        out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    }
}

std::string encode_utf8(std::u32string_view cps) {
    std::string out;
    out.reserve(cps.size() * 2);
    for (char32_t c : cps) append_utf8(out, c);
    return out;
}

std::string slice_chars(std::string_view text, const CodeText& ct,
                        size_t char_start, size_t char_end) {
    char_start = std::min(char_start, ct.cp.size());
    char_end = std::min(char_end, ct.cp.size());
    if (char_start >= char_end) return {};
    size_t b0 = ct.byte_of[char_start];
    size_t b1 = ct.byte_of[char_end];
    return std::string(text.substr(b0, b1 - b0));
}

size_t char_length(std::string_view text) { return decode_utf8(text).cp.size(); }

bool is_arabic_diacritic(char32_t c) { return c >= 0x064B && c <= 0x0652; }

bool is_tatweel(char32_t c) { return c == 0x0640; }

char32_t unify_alef_ya(char32_t c) {
    switch (c) {
        case 0x0622: // alef madda
        case 0x0623: // alef hamza above
        case 0x0625: // alef hamza below
            return 0x0627; // bare alef
        case 0x0649: // alef maqsura
            return 0x064A; // yeh
        default:
            return c;
    }
}

bool is_whitespace(char32_t c) {
    switch (c) {
        case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D:
        case 0x20: case 0x85: case 0xA0:
        case 0x1680:
        case 0x2028: case 0x2029: case 0x202F: case 0x205F:
        case 0x3000:
            return true;
        default:
            return (c >= 0x2000 && c <= 0x200A);
    }
}

namespace {

// Invisible format controls treated as separators (common in Arabic web text).
bool is_format_mark(char32_t c) {
    return (c >= 0x200B && c <= 0x200F) || c == 0xFEFF || c == 0x061C;
}

} // namespace

bool is_punctuation(char32_t c) {
    if (c < 0x80) {
        if ((c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) ||
            (c >= 0x5B && c <= 0x60) || (c >= 0x7B && c <= 0x7E))
            return true;
        return false;
    }
    switch (c) {
        case 0x060C: // arabic comma
        case 0x061B: // arabic semicolon
        case 0x061F: // arabic question mark
        case 0x066A: // arabic percent
        case 0x066B: // arabic decimal separator
        case 0x066C: // arabic thousands separator
        case 0x066D: // arabic five pointed star
        case 0x06D4: // arabic full stop
        case 0x00AB: case 0x00BB:
        case 0x2013: case 0x2014:
        case 0x2018: case 0x2019: case 0x201C: case 0x201D:
        case 0x2022: case 0x2026:
            return true;
        default:
            return false;
    }
}

bool is_separator(char32_t c) {
    return is_whitespace(c) || is_punctuation(c) || is_format_mark(c);
}

namespace {

bool is_sentence_terminal(char32_t c) {
    return c == '.' || c == '!' || c == '?' || c == 0x061F || c == 0x061B;
}

} // namespace

std::vector<CharRange> split_sentences(const CodeText& ct) {
    std::vector<CharRange> out;
    const size_t n = ct.cp.size();
    size_t start = 0;
    for (size_t i = 0; i < n; ++i) {
        char32_t c = ct.cp[i];
        bool boundary = false;
        if (c == '\n') {
            boundary = true;
        } else if (is_sentence_terminal(c)) {
            boundary = (i + 1 == n) || is_whitespace(ct.cp[i + 1]);
        }
        if (boundary) {
            out.push_back({start, i + 1});
            start = i + 1;
        }
    }
    if (start < n) out.push_back({start, n});
    return out;
}

std::vector<CharRange> split_sentences(std::string_view text) {
    return split_sentences(decode_utf8(text));
}

size_t sentence_index_at(const std::vector<CharRange>& sentences, size_t pos) {
    for (size_t i = 0; i < sentences.size(); ++i) {
        if (pos < sentences[i].end) return i;
    }
    return sentences.empty() ? 0 : sentences.size() - 1;
}

std::vector<CharRange> tokenize_raw(const CodeText& ct) {
    std::vector<CharRange> out;
    const size_t n = ct.cp.size();
    size_t i = 0;
    while (i < n) {
        while (i < n && is_separator(ct.cp[i])) ++i;
        if (i >= n) break;
        size_t start = i;
        while (i < n && !is_separator(ct.cp[i])) ++i;
        out.push_back({start, i});
    }
    return out;
}

std::vector<CharRange> tokenize_raw(std::string_view text) {
    return tokenize_raw(decode_utf8(text));
}

} // namespace jawab
