#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "qep/error.hpp"
#include "qep/text.hpp"

namespace qep {

using TermId = std::uint32_t;
using DocNo = std::uint32_t;
using GroupNo = std::uint16_t;

struct Document {
    std::string doc_id;
    std::string text;
    std::map<std::string, std::string> labels; // category -> group
};

struct Category {
    std::string name;
    std::vector<std::string> groups;

    [[nodiscard]] std::optional<std::size_t> unknown_group() const;

    friend bool operator==(Category const &, Category const &) = default;
};

struct Posting {
    DocNo doc;
    std::uint32_t tf;

    friend bool operator==(Posting const &, Posting const &) = default;
};

struct TermStats {
    std::uint64_t df = 0;
    std::uint64_t cf = 0;
    std::vector<Posting> postings;

    friend bool operator==(TermStats const &, TermStats const &) = default;
};

/// Immutable inverted index with collection-wide and per-group statistics.
///
/// Term ids follow lexicographic term order and document numbers follow input
/// order, so two builds over the same input are identical. Every configured
/// category partitions the documents: for each term, the group document and
/// collection frequencies sum to the collection-wide ones.
class CollectionIndex {
   public:
    static constexpr std::uint8_t format_version = 1;

    [[nodiscard]] std::size_t num_docs() const { return m_doc_ids.size(); }
    [[nodiscard]] std::size_t num_terms() const { return m_terms.size(); }
    [[nodiscard]] std::uint64_t total_tokens() const { return m_total_tokens; }
    [[nodiscard]] double avg_doc_len() const;

    [[nodiscard]] std::optional<TermId> term_id(std::string_view term) const;
    [[nodiscard]] std::string const &term(TermId id) const { return m_terms.at(id); }
    [[nodiscard]] std::span<Posting const> postings(TermId id) const { return m_postings.at(id); }
    [[nodiscard]] std::uint64_t df(TermId id) const { return m_postings.at(id).size(); }
    [[nodiscard]] std::uint64_t cf(TermId id) const { return m_cf.at(id); }
    /// Collection-wide stats; an unindexed term yields all zeros.
    [[nodiscard]] TermStats term_stats(std::string_view term) const;

    [[nodiscard]] std::string const &doc_id(DocNo doc) const { return m_doc_ids.at(doc); }
    [[nodiscard]] std::optional<DocNo> doc_number(std::string_view doc_id) const;
    [[nodiscard]] std::uint32_t doc_length(DocNo doc) const { return m_doc_lengths.at(doc); }
    /// Forward view of a document: (term, tf) pairs in term id order.
    [[nodiscard]] std::span<std::pair<TermId, std::uint32_t> const> doc_terms(DocNo doc) const
    {
        return m_forward.at(doc);
    }

    [[nodiscard]] std::span<Category const> categories() const { return m_categories; }
    /// Throws ValidationError for unknown names.
    [[nodiscard]] std::size_t category_index(std::string_view name) const;
    [[nodiscard]] std::size_t group_index(std::size_t category, std::string_view group) const;
    [[nodiscard]] std::size_t num_groups(std::size_t category) const;

    [[nodiscard]] GroupNo group_of(std::size_t category, DocNo doc) const;
    [[nodiscard]] std::size_t group_num_docs(std::size_t category, std::size_t group) const;
    [[nodiscard]] std::uint64_t group_tokens(std::size_t category, std::size_t group) const;
    [[nodiscard]] std::uint64_t group_df(std::size_t category, TermId term, std::size_t group) const;
    [[nodiscard]] std::uint64_t group_cf(std::size_t category, TermId term, std::size_t group) const;

    friend bool operator==(CollectionIndex const &, CollectionIndex const &) = default;

   private:
    friend class IndexBuilder;
    friend CollectionIndex load_index(std::istream &in);

    void finalize_derived_stats();

    std::vector<std::string> m_terms;
    std::unordered_map<std::string, TermId> m_term_lookup;
    std::vector<std::vector<Posting>> m_postings;
    std::vector<std::uint64_t> m_cf;
    std::uint64_t m_total_tokens = 0;

    std::vector<std::string> m_doc_ids;
    std::unordered_map<std::string, DocNo> m_doc_lookup;
    std::vector<std::uint32_t> m_doc_lengths;
    std::vector<std::vector<std::pair<TermId, std::uint32_t>>> m_forward;

    std::vector<Category> m_categories;
    std::vector<std::vector<GroupNo>> m_labels;              // [category][doc]
    std::vector<std::vector<std::size_t>> m_group_docs;      // [category][group]
    std::vector<std::vector<std::uint64_t>> m_group_tokens;  // [category][group]
    std::vector<std::vector<std::uint32_t>> m_group_df;      // [category][term * groups + group]
    std::vector<std::vector<std::uint64_t>> m_group_cf;      // [category][term * groups + group]
};

/// Builds the index. Rejects an empty corpus, duplicate doc ids, documents
/// missing a label for a configured category (unless the category has an
/// "Unknown"/"Unk" group, which then receives the document) and labels naming
/// a group the category does not define.
[[nodiscard]] CollectionIndex build_index(std::span<Document const> docs,
                                          std::span<Category const> categories,
                                          text::Tokenizer const &tokenizer = text::Tokenizer::english());

/// Group-restricted statistics; a term absent from the group yields zeros.
[[nodiscard]] TermStats group_stats(CollectionIndex const &index,
                                    std::string_view term,
                                    std::string_view category,
                                    std::string_view group);

/// JSON Lines reader. `source` names the input in error messages.
[[nodiscard]] std::vector<Document> read_documents(std::istream &in, std::string_view source = "<stream>");
[[nodiscard]] std::vector<Document> load_documents(std::filesystem::path const &path);

/// Accepts a single {name, groups[]} object or an array of them.
[[nodiscard]] std::vector<Category> parse_categories(std::string_view json_text,
                                                     std::string_view source = "<string>");
[[nodiscard]] std::vector<Category> load_categories(std::filesystem::path const &path);

void save_index(CollectionIndex const &index, std::ostream &out);
void save_index(CollectionIndex const &index, std::filesystem::path const &path);
[[nodiscard]] CollectionIndex load_index(std::istream &in);
[[nodiscard]] CollectionIndex load_index(std::filesystem::path const &path);

} // namespace qep
