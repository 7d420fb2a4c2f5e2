#include "qep/text.hpp"

#include <stdexcept>

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

namespace qep::text {

namespace detail {
extern std::string_view const bundled_stopwords;
extern std::string_view const bundled_stopwords_version;
} // namespace detail

namespace {

bool is_token_char(UChar32 c)
{
    if (u_isalnum(c)) return true;
    auto category = u_charType(c);
    return category == U_NON_SPACING_MARK || category == U_COMBINING_SPACING_MARK;
}

bool is_ascii(std::string_view s)
{
    for (unsigned char c : s) {
        if (c >= 0x80) return false;
    }
    return true;
}

icu::Normalizer2 const &nfc()
{
    UErrorCode status = U_ZERO_ERROR;
    auto const *normalizer = icu::Normalizer2::getNFCInstance(status);
    if (U_FAILURE(status) || normalizer == nullptr) {
        throw std::runtime_error(std::string("ICU NFC normalizer unavailable: ") + u_errorName(status));
    }
    return *normalizer;
}

} // namespace

std::unordered_set<std::string> parse_stopwords(std::string_view contents)
{
    std::unordered_set<std::string> words;
    while (!contents.empty()) {
        auto eol = contents.find('\n');
        auto line = contents.substr(0, eol);
        contents = eol == std::string_view::npos ? std::string_view{} : contents.substr(eol + 1);
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) {
            line.remove_suffix(1);
        }
        while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) {
            line.remove_prefix(1);
        }
        if (line.empty() || line.front() == '#') continue;
        words.emplace(line);
    }
    return words;
}

std::string_view stopword_list_version() { return detail::bundled_stopwords_version; }

Tokenizer::Tokenizer() : Tokenizer(parse_stopwords(detail::bundled_stopwords)) {}

Tokenizer::Tokenizer(std::unordered_set<std::string> stopwords, bool stem)
    : m_stopwords(std::move(stopwords)), m_stem(stem)
{
}

Tokenizer const &Tokenizer::english()
{
    static Tokenizer const instance;
    return instance;
}

bool Tokenizer::is_stopword(std::string_view folded) const
{
    return m_stopwords.find(std::string(folded)) != m_stopwords.end();
}

template <typename Sink>
void Tokenizer::split(std::string_view text, Sink &&sink) const
{
    if (text.empty()) return;
    UErrorCode status = U_ZERO_ERROR;
    auto source = icu::UnicodeString::fromUTF8(
        icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
    auto normalized = nfc().normalize(source, status);
    if (U_FAILURE(status)) {
        throw std::runtime_error(std::string("NFC normalization failed: ") + u_errorName(status));
    }

    std::string token;
    auto flush = [&] {
        if (!token.empty() && !is_stopword(token)) sink(token);
        token.clear();
    };
    for (int32_t i = 0; i < normalized.length();) {
        UChar32 c = normalized.char32At(i);
        i = normalized.moveIndex32(i, 1);
        if (!is_token_char(c)) {
            flush();
            continue;
        }
        UChar32 folded = u_foldCase(c, U_FOLD_CASE_DEFAULT);
        char buffer[U8_MAX_LENGTH];
        int32_t length = 0;
        UBool error = false;
        U8_APPEND(buffer, length, U8_MAX_LENGTH, folded, error);
        if (!error) token.append(buffer, static_cast<std::size_t>(length));
    }
    flush();
}

std::vector<std::string> Tokenizer::normalize(std::string_view text) const
{
    std::vector<std::string> terms;
    split(text, [&](std::string const &token) { terms.push_back(token); });
    return terms;
}

std::vector<std::string> Tokenizer::tokenize(std::string_view text) const
{
    std::vector<std::string> terms;
    split(text, [&](std::string const &token) {
        if (m_stem && is_ascii(token)) {
            terms.push_back(porter_stem(token));
        } else {
            terms.push_back(token);
        }
    });
    return terms;
}

std::vector<std::string> tokenize(std::string_view text) { return Tokenizer::english().tokenize(text); }

} // namespace qep::text
