#pragma once

#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace qep::text {

/// Porter (1980) suffix stripping. Input is expected to be lowercase ASCII;
/// words of length <= 2 are returned unchanged.
[[nodiscard]] std::string porter_stem(std::string_view word);

/// Parses a stopword file: one word per line, '#' starts a comment line.
[[nodiscard]] std::unordered_set<std::string> parse_stopwords(std::string_view contents);

/// Version tag of the bundled English stopword list.
[[nodiscard]] std::string_view stopword_list_version();

/// Text analysis pipeline shared by documents and queries:
/// NFC normalization, simple case folding, splitting on anything that is not
/// a letter, digit or combining mark, stopword removal, Porter stemming.
class Tokenizer {
   public:
    Tokenizer();
    explicit Tokenizer(std::unordered_set<std::string> stopwords, bool stem = true);

    [[nodiscard]] std::vector<std::string> tokenize(std::string_view text) const;

    /// Same pipeline without the stemming step.
    [[nodiscard]] std::vector<std::string> normalize(std::string_view text) const;

    [[nodiscard]] bool is_stopword(std::string_view folded) const;

    [[nodiscard]] static Tokenizer const &english();

   private:
    template <typename Sink>
    void split(std::string_view text, Sink &&sink) const;

    std::unordered_set<std::string> m_stopwords;
    bool m_stem = true;
};

/// Shorthand for Tokenizer::english().tokenize(text).
[[nodiscard]] std::vector<std::string> tokenize(std::string_view text);

} // namespace qep::text
