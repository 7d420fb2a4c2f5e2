#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "qep/evaluation.hpp"

namespace qep::cli {

enum ExitCode : int { success = 0, validation_error = 1, partial_failure = 2 };

struct RunFileSpec {
    std::string name;
    std::filesystem::path path;
};

/// Everything `qep run` needs. Serialized verbatim next to its outputs.
struct ExperimentConfig {
    std::filesystem::path corpus;     // JSON Lines; ignored when `index` is set
    std::filesystem::path categories; // category definitions for `corpus`
    std::filesystem::path index;      // prebuilt index (optional)
    std::filesystem::path queries;    // TSV qid<TAB>text
    std::filesystem::path output_dir;
    std::vector<std::string> rankers{"bm25"};
    std::vector<std::string> expanders{"none"};
    std::vector<RunFileSpec> run_files;
    std::vector<std::string> predictors{"gep", "scs", "avidf", "avictf", "avpmi", "cori"};
    std::vector<std::string> category_names; // empty: every indexed category
    std::size_t k = 100;
    std::size_t gep_k = 0; // 0: same as k
    std::uint64_t seed = 42;
    std::string idf_mode = "floored";
    std::string query_idf = "bm25";
    std::string exposure_formula = "dcg";
    std::string cv_deviation = "population";
    double lambda = 0.5;
    std::size_t fb_docs = 3;
    std::size_t fb_terms = 10;
    double alpha = 0.01;
    std::size_t bonferroni_m = 5;
    double cori_b = 0.4;
    double bm25_k1 = 1.2;
    double bm25_b = 0.75;

    /// Throws ValidationError; checks names, ranges and that input files exist.
    void validate() const;
    [[nodiscard]] nlohmann::ordered_json to_json() const;
    [[nodiscard]] static ExperimentConfig from_json(nlohmann::json const &json);
};

/// TSV `qid<TAB>query text`, tokenized with the document pipeline.
[[nodiscard]] std::vector<Query> read_queries(std::istream &in, std::string_view source = "<stream>");
[[nodiscard]] std::vector<Query> load_queries(std::filesystem::path const &path);

struct IndexCommand {
    std::filesystem::path corpus;
    std::filesystem::path categories;
    std::filesystem::path out;
};

struct RankCommand {
    std::filesystem::path index;
    std::filesystem::path queries;
    std::filesystem::path out;
    std::string model = "bm25";
    std::string expander = "none";
    std::size_t k = 100;
    ExpansionConfig expansion;
    Bm25Params bm25;
    std::string tag = "qep";
};

struct PredictCommand {
    std::filesystem::path index;
    std::filesystem::path queries;
    std::filesystem::path out;
    std::vector<std::string> categories;
    std::vector<std::string> predictors{"gep", "scs", "avidf", "avictf", "avpmi", "cori"};
    std::size_t k = 100;
    PredictorConfig config;
};

struct AnalyzeExposureCommand {
    std::size_t k = 100;
    std::size_t m_min = 0;
    std::size_t m_max = 0;
    std::filesystem::path out;
    AchievableOptions options;
};

ExitCode cmd_index(IndexCommand const &command, std::ostream &log);
ExitCode cmd_rank(RankCommand const &command, std::ostream &log);
ExitCode cmd_expand(RankCommand const &command, std::ostream &log);
ExitCode cmd_predict(PredictCommand const &command, std::ostream &log);
ExitCode cmd_run(ExperimentConfig const &config, std::ostream &log);
ExitCode cmd_analyze_exposure(AnalyzeExposureCommand const &command, std::ostream &log);

/// Parses arguments, dispatches, and maps errors to exit codes.
int main(int argc, char const *const *argv, std::ostream &out, std::ostream &err);

} // namespace qep::cli
