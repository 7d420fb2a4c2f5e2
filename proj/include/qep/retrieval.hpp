#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qep/corpus.hpp"

namespace qep {

/// Ordered multiset of processed terms with one nonnegative weight per entry.
/// Repeated terms add up: a term listed twice weighs like weight 2.
struct Query {
    std::string query_id;
    std::vector<std::string> terms;
    std::vector<double> weights;

    /// Every term weighted 1.
    [[nodiscard]] static Query from_terms(std::string query_id, std::vector<std::string> terms);
    /// Runs `text` through the same analysis pipeline as documents.
    [[nodiscard]] static Query parse(std::string query_id,
                                     std::string_view text,
                                     text::Tokenizer const &tokenizer = text::Tokenizer::english());

    [[nodiscard]] bool empty() const { return terms.empty(); }
    /// Throws std::invalid_argument if weights are misaligned, negative or not finite.
    void validate() const;
    /// Distinct terms in first-occurrence order with summed weights.
    [[nodiscard]] std::vector<std::pair<std::string, double>> term_weights() const;
    [[nodiscard]] double total_weight() const;
};

struct RankedDoc {
    std::string doc_id;
    double score;

    friend bool operator==(RankedDoc const &, RankedDoc const &) = default;
};

struct Ranking {
    std::string query_id;
    std::size_t k = 0;
    std::vector<RankedDoc> entries; // position p is entries[p - 1]
};

enum class RankingModel { bm25, tfidf };

[[nodiscard]] std::string_view to_string(RankingModel model);
/// Throws ValidationError for unknown names.
[[nodiscard]] RankingModel parse_ranking_model(std::string_view name);

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

/// Weighted sum over distinct query terms of
///   ln(1 + (N - df + 0.5) / (df + 0.5)) * tf * (k1 + 1) / (tf + k1 * (1 - b + b * dl / avgdl)).
/// The idf form is strictly positive, so every matching term contributes.
[[nodiscard]] double score_bm25(CollectionIndex const &index,
                                std::string_view doc_id,
                                Query const &query,
                                Bm25Params params = {});

/// Weighted sum over distinct query terms of tf * max(0, log2(N / df)).
[[nodiscard]] double score_tfidf(CollectionIndex const &index, std::string_view doc_id, Query const &query);

/// Top-k documents with positive score, by descending score then ascending doc_id.
[[nodiscard]] Ranking rank(CollectionIndex const &index,
                           Query const &query,
                           RankingModel model,
                           std::size_t k,
                           Bm25Params params = {});

/// TREC run format: `qid Q0 docid rank score tag`, one line per entry.
void write_run(std::ostream &out, std::span<Ranking const> rankings, std::string_view tag);

/// Reads a run file into rankings keyed by query id. Entries are ordered by
/// their rank column and truncated to `k`.
[[nodiscard]] std::map<std::string, Ranking> read_run(std::istream &in,
                                                      std::size_t k,
                                                      std::string_view source = "<stream>");
[[nodiscard]] std::map<std::string, Ranking> load_run(std::filesystem::path const &path, std::size_t k);

} // namespace qep
