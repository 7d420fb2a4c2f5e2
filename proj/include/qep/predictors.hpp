#pragma once

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qep/corpus.hpp"
#include "qep/exposure.hpp"
#include "qep/retrieval.hpp"

namespace qep {

/// `floored` clamps idf values at zero; `raw` keeps negative BM25-style idf.
enum class IdfMode { floored, raw };

/// Collection-level idf used by the GEP query vector.
/// bm25:    log2((N - df + 0.5) / (df + 0.5))
/// classic: log2(N / df)
enum class QueryIdf { bm25, classic };

struct PredictorConfig {
    std::size_t gep_k = 100; // length of the ranking being predicted
    IdfMode idf_mode = IdfMode::floored;
    QueryIdf query_idf = QueryIdf::bm25;
    double cori_b = 0.4;
    double cori_df_base = 50.0;
    double cori_cw_factor = 150.0;
};

struct PredictorOutput {
    std::string predictor;
    std::string category;
    std::vector<double> raw;           // per group, before flooring and normalization
    ExposureDistribution distribution; // per group, sums to 1
};

/// Mean of the k largest tf * idf_g values of `term` over the group's
/// documents, where idf_g = log2((|d_g| - df_g + 0.5) / (df_g + 0.5)) and
/// documents lacking the term (or missing when the group is smaller than k)
/// score zero.
[[nodiscard]] double gep_group_term_score(CollectionIndex const &index,
                                          std::string_view term,
                                          std::string_view category,
                                          std::string_view group,
                                          std::size_t k,
                                          IdfMode idf_mode = IdfMode::floored);

/// One weight per distinct query term: qtf * idf over the whole collection.
/// Unindexed terms weigh 0.
[[nodiscard]] std::vector<std::pair<std::string, double>> gep_query_vector(CollectionIndex const &index,
                                                                           Query const &query,
                                                                           QueryIdf query_idf = QueryIdf::bm25,
                                                                           IdfMode idf_mode = IdfMode::floored);

[[nodiscard]] PredictorOutput predict_gep(CollectionIndex const &index,
                                          Query const &query,
                                          std::string_view category,
                                          PredictorConfig const &config = {});

[[nodiscard]] PredictorOutput predict_avidf(CollectionIndex const &index,
                                            Query const &query,
                                            std::string_view category,
                                            PredictorConfig const &config = {});
[[nodiscard]] PredictorOutput predict_avictf(CollectionIndex const &index,
                                             Query const &query,
                                             std::string_view category,
                                             PredictorConfig const &config = {});
[[nodiscard]] PredictorOutput predict_scs(CollectionIndex const &index,
                                          Query const &query,
                                          std::string_view category,
                                          PredictorConfig const &config = {});
[[nodiscard]] PredictorOutput predict_avpmi(CollectionIndex const &index,
                                            Query const &query,
                                            std::string_view category,
                                            PredictorConfig const &config = {});
[[nodiscard]] PredictorOutput predict_cori(CollectionIndex const &index,
                                           Query const &query,
                                           std::string_view category,
                                           PredictorConfig const &config = {});

enum class PredictorKind { gep, avidf, avictf, scs, avpmi, cori };

[[nodiscard]] std::string_view to_string(PredictorKind kind);
[[nodiscard]] PredictorKind parse_predictor(std::string_view name);
[[nodiscard]] std::span<PredictorKind const> all_predictors();

[[nodiscard]] PredictorOutput predict(PredictorKind kind,
                                      CollectionIndex const &index,
                                      Query const &query,
                                      std::string_view category,
                                      PredictorConfig const &config = {});

/// Clamps negative raw scores to zero and normalizes to a distribution.
[[nodiscard]] PredictorOutput finish_prediction(std::string predictor,
                                                CollectionIndex const &index,
                                                std::size_t category,
                                                std::vector<double> raw);

} // namespace qep
