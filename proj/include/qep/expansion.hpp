#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

#include "qep/corpus.hpp"
#include "qep/retrieval.hpp"

namespace qep {

struct ExpansionConfig {
    std::size_t fb_docs = 3;
    std::size_t fb_terms = 10;
    double lambda = 0.5; // RM3 interpolation weight of the relevance model

    /// Throws std::invalid_argument.
    void validate() const;
};

struct ExpansionResult {
    Query query;
    bool applied = false; // false when there was no feedback (empty ranking)
};

/// RM3. The relevance model is
///   P_rm(t) ∝ Σ_{d in F} P(t|d) · prior(d),  P(t|d) = tf / |d|,
/// with F the top fb_docs documents and prior(d) their min-max normalized
/// retrieval scores (all 1 when the scores coincide). The expanded query keeps
/// every original term plus the fb_terms most probable relevance-model terms,
/// weighted (1 - λ) · P_ml(t|Q) + λ · P_rm(t) and renormalized to sum 1.
/// Zero-weight expansion terms are dropped; original terms never are.
[[nodiscard]] ExpansionResult expand_rm3(CollectionIndex const &index,
                                         Query const &query,
                                         Ranking const &ranking,
                                         ExpansionConfig const &config = {});

/// KL expansion: terms of the feedback set F (excluding original terms) are
/// scored P(t|F) · log2(P(t|F) / P(t|C)); the fb_terms best positive ones are
/// appended with weights scaled so that their total equals the original
/// query's total weight. Original terms keep their (merged) weights.
[[nodiscard]] ExpansionResult expand_klq(CollectionIndex const &index,
                                         Query const &query,
                                         Ranking const &ranking,
                                         ExpansionConfig const &config = {});

/// KL weight of every term in the feedback set, sorted by descending weight
/// then term. Exposed for auditing the candidate ranking.
[[nodiscard]] std::vector<std::pair<std::string, double>> klq_candidate_weights(CollectionIndex const &index,
                                                                                Ranking const &ranking,
                                                                                std::size_t fb_docs);

enum class ExpansionModel { none, rm3, klq };

[[nodiscard]] std::string_view to_string(ExpansionModel model);
[[nodiscard]] ExpansionModel parse_expansion_model(std::string_view name);

[[nodiscard]] ExpansionResult expand(ExpansionModel model,
                                     CollectionIndex const &index,
                                     Query const &query,
                                     Ranking const &ranking,
                                     ExpansionConfig const &config = {});

/// Rank, expand from the top of that ranking, rank again. With
/// ExpansionModel::none this is a single ranking pass.
[[nodiscard]] Ranking rank_with_feedback(CollectionIndex const &index,
                                         Query const &query,
                                         RankingModel model,
                                         ExpansionModel expansion,
                                         std::size_t k,
                                         ExpansionConfig const &config = {},
                                         Bm25Params params = {});

/// {"query_id": ..., "terms": [...], "weights": [...]} on one line.
[[nodiscard]] std::string query_to_json(Query const &query);
[[nodiscard]] Query query_from_json(std::string_view json_text);

} // namespace qep
