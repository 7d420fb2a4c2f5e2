#include "qep/text.hpp"

namespace qep::text {

namespace {

// Direct transcription of the 1980 step tables. `m_word` always holds the
// current stem; `m_j` marks the end of the stem before a matched suffix.
class PorterStemmer {
   public:
    explicit PorterStemmer(std::string_view word) : m_word(word) {}

    std::string run() &&
    {
        if (m_word.size() <= 2) {
            return std::move(m_word);
        }
        step1ab();
        step1c();
        step2();
        step3();
        step4();
        step5();
        return std::move(m_word);
    }

   private:
    [[nodiscard]] int last() const { return static_cast<int>(m_word.size()) - 1; }

    [[nodiscard]] bool consonant(int i) const
    {
        switch (m_word[i]) {
        case 'a':
        case 'e':
        case 'i':
        case 'o':
        case 'u':
            return false;
        case 'y':
            return i == 0 || !consonant(i - 1);
        default:
            return true;
        }
    }

    // Number of VC sequences in m_word[0..m_j].
    [[nodiscard]] int measure() const
    {
        int n = 0;
        int i = 0;
        while (true) {
            if (i > m_j) return n;
            if (!consonant(i)) break;
            ++i;
        }
        ++i;
        while (true) {
            while (true) {
                if (i > m_j) return n;
                if (consonant(i)) break;
                ++i;
            }
            ++i;
            ++n;
            while (true) {
                if (i > m_j) return n;
                if (!consonant(i)) break;
                ++i;
            }
            ++i;
        }
    }

    [[nodiscard]] bool vowel_in_stem() const
    {
        for (int i = 0; i <= m_j; ++i) {
            if (!consonant(i)) return true;
        }
        return false;
    }

    [[nodiscard]] bool double_consonant(int i) const
    {
        if (i < 1 || m_word[i] != m_word[i - 1]) return false;
        return consonant(i);
    }

    // consonant-vowel-consonant ending at i, final consonant not w, x or y
    [[nodiscard]] bool cvc(int i) const
    {
        if (i < 2 || !consonant(i) || consonant(i - 1) || !consonant(i - 2)) return false;
        char c = m_word[i];
        return c != 'w' && c != 'x' && c != 'y';
    }

    bool ends(std::string_view suffix)
    {
        if (!std::string_view(m_word).ends_with(suffix)) return false;
        m_j = last() - static_cast<int>(suffix.size());
        return true;
    }

    void truncate(int new_last) { m_word.resize(static_cast<std::size_t>(new_last + 1)); }

    void set_suffix(std::string_view replacement)
    {
        truncate(m_j);
        m_word += replacement;
    }

    void replace_if_measured(std::string_view replacement)
    {
        if (measure() > 0) set_suffix(replacement);
    }

    void step1ab()
    {
        if (m_word.back() == 's') {
            if (ends("sses")) {
                truncate(last() - 2);
            } else if (ends("ies")) {
                set_suffix("i");
            } else if (m_word[m_word.size() - 2] != 's') {
                truncate(last() - 1);
            }
        }
        if (ends("eed")) {
            if (measure() > 0) truncate(last() - 1);
        } else if ((ends("ed") || ends("ing")) && vowel_in_stem()) {
            truncate(m_j);
            if (ends("at")) {
                set_suffix("ate");
            } else if (ends("bl")) {
                set_suffix("ble");
            } else if (ends("iz")) {
                set_suffix("ize");
            } else if (double_consonant(last())) {
                char c = m_word.back();
                if (c != 'l' && c != 's' && c != 'z') truncate(last() - 1);
            } else {
                m_j = last();
                if (measure() == 1 && cvc(last())) m_word += 'e';
            }
        }
    }

    void step1c()
    {
        if (ends("y") && vowel_in_stem()) m_word.back() = 'i';
    }

    void step2()
    {
        if (m_word.size() < 2) return;
        struct Rule {
            std::string_view suffix;
            std::string_view replacement;
        };
        static constexpr Rule rules[] = {
            {"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"},    {"anci", "ance"},
            {"izer", "ize"},    {"abli", "able"},   {"alli", "al"},      {"entli", "ent"},
            {"eli", "e"},       {"ousli", "ous"},   {"ization", "ize"},  {"ation", "ate"},
            {"ator", "ate"},    {"alism", "al"},    {"iveness", "ive"},  {"fulness", "ful"},
            {"ousness", "ous"}, {"aliti", "al"},    {"iviti", "ive"},    {"biliti", "ble"},
        };
        // The table is ordered so that, within each penultimate letter, the
        // first hit is the longest matching suffix.
        char key = m_word[m_word.size() - 2];
        for (auto const &rule : rules) {
            if (rule.suffix[rule.suffix.size() - 2] != key) continue;
            if (ends(rule.suffix)) {
                replace_if_measured(rule.replacement);
                return;
            }
        }
    }

    void step3()
    {
        struct Rule {
            std::string_view suffix;
            std::string_view replacement;
        };
        static constexpr Rule rules[] = {
            {"icate", "ic"}, {"ative", ""}, {"alize", "al"}, {"iciti", "ic"},
            {"ical", "ic"},  {"ful", ""},   {"ness", ""},
        };
        char key = m_word.back();
        for (auto const &rule : rules) {
            if (rule.suffix.back() != key) continue;
            if (ends(rule.suffix)) {
                replace_if_measured(rule.replacement);
                return;
            }
        }
    }

    void step4()
    {
        static constexpr std::string_view suffixes[] = {
            "al",  "ance", "ence", "er",  "ic",  "able", "ible", "ant", "ement", "ment",
            "ent", "ion",  "ou",   "ism", "ate", "iti",  "ous",  "ive", "ize",
        };
        if (m_word.size() < 2) return;
        char key = m_word[m_word.size() - 2];
        bool matched = false;
        for (auto suffix : suffixes) {
            if (suffix[suffix.size() - 2] != key) continue;
            if (!ends(suffix)) continue;
            if (suffix == "ion" && (m_j < 0 || (m_word[m_j] != 's' && m_word[m_j] != 't'))) {
                // (*S or *T)ION failed; "ou" shares the key and may still match
                continue;
            }
            matched = true;
            break;
        }
        if (matched && measure() > 1) truncate(m_j);
    }

    void step5()
    {
        m_j = last();
        if (m_word.back() == 'e') {
            int m = measure();
            if (m > 1 || (m == 1 && !cvc(last() - 1))) truncate(last() - 1);
        }
        if (m_word.back() == 'l' && double_consonant(last()) && measure() > 1) {
            truncate(last() - 1);
        }
    }

    std::string m_word;
    int m_j = 0;
};

} // namespace

std::string porter_stem(std::string_view word) { return PorterStemmer(word).run(); }

} // namespace qep::text
