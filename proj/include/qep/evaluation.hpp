#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qep/corpus.hpp"
#include "qep/expansion.hpp"
#include "qep/exposure.hpp"
#include "qep/predictors.hpp"
#include "qep/retrieval.hpp"

namespace qep {

// ---------------------------------------------------------------------------
// Measures

/// Jensen-Shannon distance with base-2 logarithms, in [0, 1].
/// Throws std::invalid_argument on a dimension mismatch or when either input
/// is not a distribution (negative entries or sum off by more than 1e-6).
[[nodiscard]] double jsd(std::span<double const> p, std::span<double const> e);
[[nodiscard]] double jsd(ExposureDistribution const &p, ExposureDistribution const &e);

enum class Deviation { population, sample };

/// sigma / mu in percent. Throws std::invalid_argument when the mean is zero.
[[nodiscard]] double coefficient_of_variation(std::span<double const> values,
                                              Deviation deviation = Deviation::population);

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
[[nodiscard]] double regularized_incomplete_beta(double x, double a, double b);
/// CDF of Student's t with `dof` degrees of freedom.
[[nodiscard]] double student_t_cdf(double t, double dof);

/// Paired differences with zero variance leave the t statistic undefined.
class DegenerateTest : public std::domain_error {
   public:
    using std::domain_error::domain_error;
};

struct TTestResult {
    double t;
    double p; // two-sided
    std::size_t dof;
};

/// Paired Student t-test on a - b. Throws std::invalid_argument for mismatched
/// or too short inputs and DegenerateTest when all differences are equal.
[[nodiscard]] TTestResult paired_t_test(std::span<double const> a, std::span<double const> b);

/// p' = min(1, p * m). Throws std::invalid_argument for m == 0.
[[nodiscard]] std::vector<double> bonferroni(std::span<double const> p_values, std::size_t m);

// ---------------------------------------------------------------------------
// Experiments

/// A first-pass ranking pipeline: a lexical model with optional PRF, or
/// rankings read from an external run file.
struct Pipeline {
    std::string name;
    RankingModel model = RankingModel::bm25;
    ExpansionModel expansion = ExpansionModel::none;
    std::optional<std::map<std::string, Ranking>> external;

    [[nodiscard]] static Pipeline lexical(RankingModel model, ExpansionModel expansion = ExpansionModel::none);
    [[nodiscard]] static Pipeline run_file(std::string name, std::map<std::string, Ranking> rankings);
};

struct PredictionRequest {
    CollectionIndex const &index;
    Query const &query; // always the original, unexpanded query
    std::string_view category;
    std::size_t k;
};

struct Predictor {
    std::string name;
    std::function<PredictorOutput(PredictionRequest const &)> predict;
};

/// Built-in predictor; GEP uses config.gep_k when nonzero and the experiment's
/// ranking depth otherwise.
[[nodiscard]] Predictor make_predictor(PredictorKind kind, PredictorConfig config = {.gep_k = 0});

struct ExperimentOptions {
    std::size_t k = 100;
    ExposureFormula formula = ExposureFormula::dcg;
    ExpansionConfig expansion;
    Bm25Params bm25;
    double alpha = 0.01;
    std::size_t bonferroni_m = 0; // 0: number of baselines present
    Deviation cv_deviation = Deviation::population;
    std::string reference = "gep";
};

struct JsdRow {
    std::string query_id;
    std::string pipeline;
    std::string category;
    std::string predictor;
    double jsd;
    bool prediction_degenerate;
};

struct CvRow {
    std::string query_id;
    std::string pipeline;
    std::string category;
    double cv_percent;
};

/// One entry per (query, pipeline, category, predictor) row that could not be
/// produced. Empty category/predictor fields mean the whole stage failed for
/// that row's key.
struct Failure {
    std::string query_id;
    std::string pipeline;
    std::string category;
    std::string predictor;
    std::string reason;
};

struct SummaryCell {
    std::string pipeline;
    std::string category;
    std::string predictor;
    double mean_jsd = 0.0;
    std::size_t queries = 0;
    // Paired test of the reference predictor against this one (baselines only).
    std::optional<double> t;
    std::optional<double> p;
    std::optional<double> p_adjusted;
    bool significant = false;
    std::string note;
};

struct PredictionReport {
    std::vector<JsdRow> rows;       // sorted by pipeline order, query_id, category, predictor
    std::vector<CvRow> cv_rows;     // sorted by pipeline order, query_id, category
    std::vector<Failure> failures;
    std::vector<SummaryCell> summary;
    double alpha = 0.01;
    std::size_t bonferroni_m = 0;
    std::string reference;
};

[[nodiscard]] PredictionReport run_experiment(CollectionIndex const &index,
                                              std::span<Query const> queries,
                                              std::span<std::string const> categories,
                                              std::span<Pipeline const> pipelines,
                                              std::span<Predictor const> predictors,
                                              ExperimentOptions const &options = {});

/// query_id,pipeline,category,predictor,jsd
void write_jsd_csv(std::ostream &out, PredictionReport const &report);
/// query_id,pipeline,category,cv_percent
void write_cv_csv(std::ostream &out, PredictionReport const &report);
/// Predictor x category mean JSD per pipeline, with significance markers.
[[nodiscard]] nlohmann::ordered_json summary_json(PredictionReport const &report);

} // namespace qep
