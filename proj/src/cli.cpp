#include "qep/cli.hpp"

#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>

#include <CLI11.hpp>

namespace qep::cli {

namespace {

std::ofstream open_output(std::filesystem::path const &path)
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + path.string());
    return out;
}

void require_file(std::filesystem::path const &path, std::string_view what)
{
    if (path.empty()) throw ValidationError(std::string(what) + " path is required");
    if (!std::filesystem::is_regular_file(path)) {
        throw ValidationError(std::string(what) + " file not found: " + path.string());
    }
}

IdfMode parse_idf_mode(std::string_view name)
{
    if (name == "floored") return IdfMode::floored;
    if (name == "raw") return IdfMode::raw;
    throw ValidationError("unknown idf mode '" + std::string(name) + "'");
}

QueryIdf parse_query_idf(std::string_view name)
{
    if (name == "bm25") return QueryIdf::bm25;
    if (name == "classic") return QueryIdf::classic;
    throw ValidationError("unknown query idf '" + std::string(name) + "'");
}

Deviation parse_deviation(std::string_view name)
{
    if (name == "population") return Deviation::population;
    if (name == "sample") return Deviation::sample;
    throw ValidationError("unknown deviation '" + std::string(name) + "'");
}

RunFileSpec parse_run_file_spec(std::string const &text)
{
    auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == text.size()) {
        throw ValidationError("run file must be given as name=path, got '" + text + "'");
    }
    return {text.substr(0, eq), text.substr(eq + 1)};
}

std::vector<std::string> resolve_categories(CollectionIndex const &index, std::vector<std::string> const &requested)
{
    if (!requested.empty()) {
        for (auto const &name : requested) (void)index.category_index(name);
        return requested;
    }
    std::vector<std::string> names;
    for (auto const &category : index.categories()) names.push_back(category.name);
    return names;
}

CollectionIndex index_for(ExperimentConfig const &config)
{
    if (!config.index.empty()) return load_index(config.index);
    auto docs = load_documents(config.corpus);
    auto categories = load_categories(config.categories);
    return build_index(docs, categories);
}

} // namespace

// ---------------------------------------------------------------------------

void ExperimentConfig::validate() const
{
    if (index.empty()) {
        require_file(corpus, "corpus");
        require_file(categories, "categories");
    } else {
        require_file(index, "index");
    }
    require_file(queries, "queries");
    if (output_dir.empty()) throw ValidationError("output directory is required");
    if (k < 1) throw ValidationError("k must be at least 1");
    if (fb_docs < 1 || fb_terms < 1) throw ValidationError("fb_docs and fb_terms must be at least 1");
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw ValidationError("lambda must lie in [0, 1]");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
    if (bonferroni_m < 1) throw ValidationError("bonferroni_m must be at least 1");
    if (!(cori_b >= 0.0 && cori_b <= 1.0)) throw ValidationError("cori_b must lie in [0, 1]");
    if (!(bm25_k1 >= 0.0) || !(bm25_b >= 0.0 && bm25_b <= 1.0)) throw ValidationError("invalid BM25 parameters");
    if (rankers.empty() && run_files.empty()) throw ValidationError("no ranking pipeline configured");
    if (!rankers.empty() && expanders.empty()) throw ValidationError("no expander configured (use 'none')");
    if (predictors.empty()) throw ValidationError("no predictor configured");
    for (auto const &name : rankers) (void)parse_ranking_model(name);
    for (auto const &name : expanders) (void)parse_expansion_model(name);
    for (auto const &name : predictors) (void)parse_predictor(name);
    for (auto const &run : run_files) {
        if (run.name.empty()) throw ValidationError("run file needs a name");
        require_file(run.path, "run");
    }
    (void)parse_idf_mode(idf_mode);
    (void)parse_query_idf(query_idf);
    (void)parse_exposure_formula(exposure_formula);
    (void)parse_deviation(cv_deviation);
}

nlohmann::ordered_json ExperimentConfig::to_json() const
{
    nlohmann::ordered_json json;
    json["corpus"] = corpus.string();
    json["categories"] = categories.string();
    json["index"] = index.string();
    json["queries"] = queries.string();
    json["output_dir"] = output_dir.string();
    json["rankers"] = rankers;
    json["expanders"] = expanders;
    auto runs = nlohmann::ordered_json::array();
    for (auto const &run : run_files) runs.push_back({{"name", run.name}, {"path", run.path.string()}});
    json["run_files"] = runs;
    json["predictors"] = predictors;
    json["category_names"] = category_names;
    json["k"] = k;
    json["gep_k"] = gep_k;
    json["seed"] = seed;
    json["idf_mode"] = idf_mode;
    json["query_idf"] = query_idf;
    json["exposure_formula"] = exposure_formula;
    json["cv_deviation"] = cv_deviation;
    json["lambda"] = lambda;
    json["fb_docs"] = fb_docs;
    json["fb_terms"] = fb_terms;
    json["alpha"] = alpha;
    json["bonferroni_m"] = bonferroni_m;
    json["cori_b"] = cori_b;
    json["bm25_k1"] = bm25_k1;
    json["bm25_b"] = bm25_b;
    return json;
}

ExperimentConfig ExperimentConfig::from_json(nlohmann::json const &json)
{
    if (!json.is_object()) throw ValidationError("experiment config must be a JSON object");
    ExperimentConfig config;
    try {
        auto path = [&](char const *key, std::filesystem::path &field) {
            if (json.contains(key)) field = json.at(key).get<std::string>();
        };
        auto value = [&](char const *key, auto &field) {
            if (json.contains(key)) field = json.at(key).get<std::decay_t<decltype(field)>>();
        };
        path("corpus", config.corpus);
        path("categories", config.categories);
        path("index", config.index);
        path("queries", config.queries);
        path("output_dir", config.output_dir);
        value("rankers", config.rankers);
        value("expanders", config.expanders);
        if (json.contains("run_files")) {
            for (auto const &run : json.at("run_files")) {
                config.run_files.push_back({run.at("name").get<std::string>(), run.at("path").get<std::string>()});
            }
        }
        value("predictors", config.predictors);
        value("category_names", config.category_names);
        value("k", config.k);
        value("gep_k", config.gep_k);
        value("seed", config.seed);
        value("idf_mode", config.idf_mode);
        value("query_idf", config.query_idf);
        value("exposure_formula", config.exposure_formula);
        value("cv_deviation", config.cv_deviation);
        value("lambda", config.lambda);
        value("fb_docs", config.fb_docs);
        value("fb_terms", config.fb_terms);
        value("alpha", config.alpha);
        value("bonferroni_m", config.bonferroni_m);
        value("cori_b", config.cori_b);
        value("bm25_k1", config.bm25_k1);
        value("bm25_b", config.bm25_b);
    } catch (nlohmann::json::exception const &e) {
        throw ValidationError(std::string("invalid experiment config: ") + e.what());
    }
    return config;
}

std::vector<Query> read_queries(std::istream &in, std::string_view source)
{
    std::vector<Query> queries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0) {
            throw ValidationError(std::string(source) + ":" + std::to_string(line_no)
                                  + ": expected 'qid<TAB>query text'");
        }
        queries.push_back(Query::parse(line.substr(0, tab), std::string_view(line).substr(tab + 1)));
    }
    return queries;
}

std::vector<Query> load_queries(std::filesystem::path const &path)
{
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open query file " + path.string());
    return read_queries(in, path.string());
}

// ---------------------------------------------------------------------------

ExitCode cmd_index(IndexCommand const &command, std::ostream &log)
{
    require_file(command.corpus, "corpus");
    require_file(command.categories, "categories");
    if (command.out.empty()) throw ValidationError("output path is required");
    auto docs = load_documents(command.corpus);
    auto categories = load_categories(command.categories);
    auto index = build_index(docs, categories);
    auto out = open_output(command.out);
    save_index(index, out);

    log << "docs=" << index.num_docs() << " terms=" << index.num_terms() << " tokens=" << index.total_tokens()
        << '\n';
    for (std::size_t c = 0; c < index.categories().size(); ++c) {
        auto const &category = index.categories()[c];
        log << "category=" << category.name << " groups=" << category.groups.size();
        for (std::size_t g = 0; g < category.groups.size(); ++g) {
            log << ' ' << category.groups[g] << ':' << index.group_num_docs(c, g);
        }
        log << '\n';
    }
    return success;
}

namespace {

struct FeedbackRun {
    Query query;
    ExpansionResult expansion;
    Ranking ranking;
};

FeedbackRun run_with_feedback(CollectionIndex const &index, Query const &query, RankCommand const &command)
{
    auto model = parse_ranking_model(command.model);
    auto expander = parse_expansion_model(command.expander);
    FeedbackRun run{query, {query, false}, {}};
    run.ranking = rank(index, query, model, command.k, command.bm25);
    if (expander == ExpansionModel::none) return run;
    run.expansion = expand(expander, index, query, run.ranking, command.expansion);
    if (run.expansion.applied) run.ranking = rank(index, run.expansion.query, model, command.k, command.bm25);
    return run;
}

void validate_rank_command(RankCommand const &command)
{
    require_file(command.index, "index");
    require_file(command.queries, "queries");
    if (command.out.empty()) throw ValidationError("output path is required");
    if (command.k < 1) throw ValidationError("k must be at least 1");
    (void)parse_ranking_model(command.model);
    (void)parse_expansion_model(command.expander);
    try {
        command.expansion.validate();
    } catch (std::invalid_argument const &e) {
        throw ValidationError(e.what());
    }
}

} // namespace

ExitCode cmd_rank(RankCommand const &command, std::ostream &log)
{
    validate_rank_command(command);
    auto index = load_index(command.index);
    auto queries = load_queries(command.queries);
    std::vector<Ranking> rankings;
    std::size_t empty = 0;
    for (auto const &query : queries) {
        if (query.empty()) {
            ++empty;
            log << "warning: query '" << query.query_id << "' has no terms after analysis\n";
            continue;
        }
        rankings.push_back(run_with_feedback(index, query, command).ranking);
    }
    auto out = open_output(command.out);
    write_run(out, rankings, command.tag);
    log << "queries=" << queries.size() << " ranked=" << rankings.size() << '\n';
    return empty == 0 ? success : partial_failure;
}

ExitCode cmd_expand(RankCommand const &command, std::ostream &log)
{
    validate_rank_command(command);
    auto index = load_index(command.index);
    auto queries = load_queries(command.queries);
    auto out = open_output(command.out);
    std::size_t unexpanded = 0;
    for (auto const &query : queries) {
        if (query.empty()) {
            ++unexpanded;
            log << "warning: query '" << query.query_id << "' has no terms after analysis\n";
            continue;
        }
        auto run = run_with_feedback(index, query, command);
        if (!run.expansion.applied && parse_expansion_model(command.expander) != ExpansionModel::none) {
            ++unexpanded;
            log << "warning: query '" << query.query_id << "' retrieved nothing; left unexpanded\n";
        }
        out << query_to_json(run.expansion.query) << '\n';
    }
    return unexpanded == 0 ? success : partial_failure;
}

ExitCode cmd_predict(PredictCommand const &command, std::ostream &log)
{
    require_file(command.index, "index");
    require_file(command.queries, "queries");
    if (command.out.empty()) throw ValidationError("output path is required");
    if (command.k < 1) throw ValidationError("k must be at least 1");
    std::vector<PredictorKind> kinds;
    for (auto const &name : command.predictors) kinds.push_back(parse_predictor(name));
    auto index = load_index(command.index);
    auto categories = resolve_categories(index, command.categories);
    auto queries = load_queries(command.queries);
    auto config = command.config;
    if (config.gep_k == 0) config.gep_k = command.k;

    auto out = open_output(command.out);
    std::size_t failures = 0;
    for (auto const &query : queries) {
        for (auto const &category : categories) {
            for (auto kind : kinds) {
                try {
                    auto prediction = predict(kind, index, query, category, config);
                    nlohmann::ordered_json row;
                    row["query_id"] = query.query_id;
                    row["category"] = category;
                    row["predictor"] = prediction.predictor;
                    row["groups"] = prediction.distribution.groups;
                    row["distribution"] = prediction.distribution.values;
                    row["degenerate"] = prediction.distribution.degenerate;
                    out << row.dump() << '\n';
                } catch (std::invalid_argument const &e) {
                    ++failures;
                    log << "warning: query '" << query.query_id << "' " << to_string(kind) << ": " << e.what()
                        << '\n';
                }
            }
        }
    }
    return failures == 0 ? success : partial_failure;
}

ExitCode cmd_run(ExperimentConfig const &config, std::ostream &log)
{
    config.validate();
    auto index = index_for(config);
    auto categories = resolve_categories(index, config.category_names);
    auto queries = load_queries(config.queries);

    std::vector<Pipeline> pipelines;
    for (auto const &ranker : config.rankers) {
        for (auto const &expander : config.expanders) {
            pipelines.push_back(Pipeline::lexical(parse_ranking_model(ranker), parse_expansion_model(expander)));
        }
    }
    for (auto const &run : config.run_files) pipelines.push_back(Pipeline::run_file(run.name, load_run(run.path, config.k)));

    PredictorConfig predictor_config;
    predictor_config.gep_k = config.gep_k;
    predictor_config.idf_mode = parse_idf_mode(config.idf_mode);
    predictor_config.query_idf = parse_query_idf(config.query_idf);
    predictor_config.cori_b = config.cori_b;
    std::vector<Predictor> predictors;
    for (auto const &name : config.predictors) predictors.push_back(make_predictor(parse_predictor(name), predictor_config));

    ExperimentOptions options;
    options.k = config.k;
    options.formula = parse_exposure_formula(config.exposure_formula);
    options.expansion = {config.fb_docs, config.fb_terms, config.lambda};
    options.bm25 = {config.bm25_k1, config.bm25_b};
    options.alpha = config.alpha;
    options.bonferroni_m = config.bonferroni_m;
    options.cv_deviation = parse_deviation(config.cv_deviation);

    auto report = run_experiment(index, queries, categories, pipelines, predictors, options);

    std::filesystem::create_directories(config.output_dir);
    {
        auto out = open_output(config.output_dir / "resolved_config.json");
        out << config.to_json().dump(2) << '\n';
    }
    {
        auto out = open_output(config.output_dir / "jsd.csv");
        write_jsd_csv(out, report);
    }
    {
        auto out = open_output(config.output_dir / "cv.csv");
        write_cv_csv(out, report);
    }
    {
        auto out = open_output(config.output_dir / "summary.json");
        out << summary_json(report).dump(2) << '\n';
    }

    log << "queries=" << queries.size() << " pipelines=" << pipelines.size() << " categories=" << categories.size()
        << " predictors=" << predictors.size() << " rows=" << report.rows.size()
        << " failures=" << report.failures.size() << '\n';
    auto precision = log.precision();
    log << std::setprecision(4);
    for (auto const &cell : report.summary) {
        log << cell.pipeline << ' ' << cell.category << ' ' << cell.predictor << " mean_jsd=" << cell.mean_jsd
            << (cell.significant ? " *" : "") << '\n';
    }
    log.precision(precision);
    return report.failures.empty() ? success : partial_failure;
}

ExitCode cmd_analyze_exposure(AnalyzeExposureCommand const &command, std::ostream &log)
{
    if (command.out.empty()) throw ValidationError("output directory is required");
    if (command.k < 1) throw ValidationError("k must be at least 1");
    if (command.m_min > command.m_max || command.m_max > command.k) {
        throw ValidationError("need 0 <= m-min <= m-max <= k");
    }
    std::vector<ExposureHistogram> histograms;
    for (auto m = command.m_min; m <= command.m_max; ++m) {
        histograms.push_back(achievable_exposure(command.k, m, command.options));
    }

    std::filesystem::create_directories(command.out);
    {
        auto out = open_output(command.out / "histogram.csv");
        write_histogram_csv(out, histograms);
    }
    {
        auto out = open_output(command.out / "orderings.csv");
        out << "k,log10_orderings,orderings\n" << std::setprecision(10);
        for (std::size_t k = 1; k <= command.k; ++k) {
            out << k << ',' << log_orderings(k) << ',';
            if (auto exact = exact_orderings(k)) out << *exact;
            out << '\n';
        }
    }
    {
        auto out = open_output(command.out / "positions.csv");
        out << "position,exposure\n" << std::setprecision(10);
        for (std::size_t p = 1; p <= command.k; ++p) out << p << ',' << position_exposure(p, command.options.formula) << '\n';
    }
    auto precision = log.precision();
    log << std::setprecision(6);
    for (auto const &h : histograms) {
        log << "k=" << h.k << " m=" << h.m << " mode=" << to_string(h.mode) << " subsets=" << h.subsets
            << " min=" << h.min_exposure << " max=" << h.max_exposure << " mean=" << h.mean_exposure << '\n';
    }
    log << "log10(" << command.k << "!)=" << log_orderings(command.k) << '\n';
    log.precision(precision);
    return success;
}

// ---------------------------------------------------------------------------

int main(int argc, char const *const *argv, std::ostream &out, std::ostream &err)
{
    CLI::App app{"Query exposure prediction toolkit"};
    app.require_subcommand(1);

    IndexCommand index_command;
    auto *index_app = app.add_subcommand("index", "Build and persist a collection index");
    index_app->add_option("--corpus", index_command.corpus, "JSON Lines corpus")->required();
    index_app->add_option("--categories", index_command.categories, "Category definitions (JSON)")->required();
    index_app->add_option("--out", index_command.out, "Index file to write")->required();

    auto add_rank_options = [](CLI::App *sub, RankCommand &command) {
        sub->add_option("--index", command.index, "Index file")->required();
        sub->add_option("--queries", command.queries, "Query TSV (qid<TAB>text)")->required();
        sub->add_option("--out", command.out, "Output file")->required();
        sub->add_option("--model", command.model, "bm25 | tfidf")->capture_default_str();
        sub->add_option("--expander", command.expander, "none | rm3 | klq")->capture_default_str();
        sub->add_option("--k", command.k, "Ranking depth")->capture_default_str();
        sub->add_option("--fb-docs", command.expansion.fb_docs, "Feedback documents")->capture_default_str();
        sub->add_option("--fb-terms", command.expansion.fb_terms, "Expansion terms")->capture_default_str();
        sub->add_option("--lambda", command.expansion.lambda, "RM3 interpolation")->capture_default_str();
        sub->add_option("--bm25-k1", command.bm25.k1, "BM25 k1")->capture_default_str();
        sub->add_option("--bm25-b", command.bm25.b, "BM25 b")->capture_default_str();
    };
    RankCommand rank_command;
    auto *rank_app = app.add_subcommand("rank", "Rank queries and write a TREC run file");
    add_rank_options(rank_app, rank_command);
    rank_app->add_option("--tag", rank_command.tag, "Run tag")->capture_default_str();

    RankCommand expand_command;
    auto *expand_app = app.add_subcommand("expand", "Expand queries with pseudo-relevance feedback (JSON Lines)");
    add_rank_options(expand_app, expand_command);
    expand_command.expander = "rm3";

    PredictCommand predict_command;
    std::string predict_idf_mode = "floored";
    std::string predict_query_idf = "bm25";
    auto *predict_app = app.add_subcommand("predict", "Predict per-group exposure distributions (JSON Lines)");
    predict_app->add_option("--index", predict_command.index, "Index file")->required();
    predict_app->add_option("--queries", predict_command.queries, "Query TSV (qid<TAB>text)")->required();
    predict_app->add_option("--out", predict_command.out, "Output file")->required();
    predict_app->add_option("--category", predict_command.categories, "Category (repeatable; default all)");
    predict_app->add_option("--predictor", predict_command.predictors, "Predictor (repeatable)")->capture_default_str();
    predict_app->add_option("--k", predict_command.k, "Ranking depth being predicted")->capture_default_str();
    predict_app->add_option("--gep-k", predict_command.config.gep_k, "GEP top-k (0: use --k)");
    predict_app->add_option("--idf-mode", predict_idf_mode, "floored | raw")->capture_default_str();
    predict_app->add_option("--query-idf", predict_query_idf, "bm25 | classic")->capture_default_str();
    predict_app->add_option("--cori-b", predict_command.config.cori_b, "CORI default belief")->capture_default_str();
    predict_command.config.gep_k = 0;

    ExperimentConfig run_flags;
    std::filesystem::path run_config_path;
    std::vector<std::string> run_file_specs;
    auto *run_app = app.add_subcommand("run", "Run a full prediction experiment");
    run_app->add_option("--config", run_config_path, "Experiment config (JSON); flags override it");
    std::vector<std::pair<CLI::Option *, std::function<void(ExperimentConfig &)>>> overrides;
    auto bind = [&](std::string const &name, auto member, std::string const &help) {
        auto *option = run_app->add_option(name, run_flags.*member, help)->capture_default_str();
        overrides.emplace_back(option, [member, &run_flags](ExperimentConfig &target) {
            target.*member = run_flags.*member;
        });
    };
    bind("--corpus", &ExperimentConfig::corpus, "JSON Lines corpus");
    bind("--categories", &ExperimentConfig::categories, "Category definitions (JSON)");
    bind("--index", &ExperimentConfig::index, "Prebuilt index (instead of --corpus)");
    bind("--queries", &ExperimentConfig::queries, "Query TSV (qid<TAB>text)");
    bind("--out", &ExperimentConfig::output_dir, "Output directory");
    bind("--ranker", &ExperimentConfig::rankers, "bm25 | tfidf (repeatable)");
    bind("--expander", &ExperimentConfig::expanders, "none | rm3 | klq (repeatable)");
    bind("--predictor", &ExperimentConfig::predictors, "Predictor (repeatable)");
    bind("--category", &ExperimentConfig::category_names, "Category (repeatable; default all)");
    bind("--k", &ExperimentConfig::k, "Ranking depth");
    bind("--gep-k", &ExperimentConfig::gep_k, "GEP top-k (0: use --k)");
    bind("--seed", &ExperimentConfig::seed, "Seed recorded in the resolved config");
    bind("--idf-mode", &ExperimentConfig::idf_mode, "floored | raw");
    bind("--query-idf", &ExperimentConfig::query_idf, "bm25 | classic");
    bind("--exposure-formula", &ExperimentConfig::exposure_formula, "dcg | typeset");
    bind("--cv-deviation", &ExperimentConfig::cv_deviation, "population | sample");
    bind("--lambda", &ExperimentConfig::lambda, "RM3 interpolation");
    bind("--fb-docs", &ExperimentConfig::fb_docs, "Feedback documents");
    bind("--fb-terms", &ExperimentConfig::fb_terms, "Expansion terms");
    bind("--alpha", &ExperimentConfig::alpha, "Significance level");
    bind("--bonferroni-m", &ExperimentConfig::bonferroni_m, "Number of comparisons");
    bind("--cori-b", &ExperimentConfig::cori_b, "CORI default belief");
    bind("--bm25-k1", &ExperimentConfig::bm25_k1, "BM25 k1");
    bind("--bm25-b", &ExperimentConfig::bm25_b, "BM25 b");
    auto *run_file_option =
        run_app->add_option("--run-file", run_file_specs, "External ranking as name=path (repeatable)");

    AnalyzeExposureCommand analyze_command;
    std::string analyze_mode = "exact";
    std::string analyze_formula = "dcg";
    std::optional<std::size_t> analyze_m;
    auto *analyze_app = app.add_subcommand("analyze-exposure", "Achievable exposure histograms and ordering counts");
    analyze_app->add_option("--k", analyze_command.k, "Ranking size")->capture_default_str();
    analyze_app->add_option("--m", analyze_m, "Single group size (sets --m-min and --m-max)");
    analyze_app->add_option("--m-min", analyze_command.m_min, "Smallest group size")->capture_default_str();
    analyze_app->add_option("--m-max", analyze_command.m_max, "Largest group size")->capture_default_str();
    analyze_app->add_option("--mode", analyze_mode, "exact | sampled")->capture_default_str();
    analyze_app->add_option("--bins", analyze_command.options.bins, "Histogram bins")->capture_default_str();
    analyze_app->add_option("--samples", analyze_command.options.samples, "Samples (sampled mode)")->capture_default_str();
    analyze_app->add_option("--seed", analyze_command.options.seed, "Sampling seed")->capture_default_str();
    analyze_app->add_option("--budget", analyze_command.options.exact_budget, "Max subsets in exact mode")
        ->capture_default_str();
    analyze_app->add_option("--formula", analyze_formula, "dcg | typeset")->capture_default_str();
    analyze_app->add_option("--out", analyze_command.out, "Output directory")->required();

    try {
        try {
            app.parse(argc, argv);
        } catch (CLI::CallForHelp const &e) {
            out << app.help();
            return success;
        } catch (CLI::CallForAllHelp const &e) {
            out << app.help("", CLI::AppFormatMode::All);
            return success;
        } catch (CLI::ParseError const &e) {
            err << "error: " << e.what() << '\n';
            return validation_error;
        }

        if (*index_app) return cmd_index(index_command, out);
        if (*rank_app) return cmd_rank(rank_command, out);
        if (*expand_app) return cmd_expand(expand_command, out);
        if (*predict_app) {
            predict_command.config.idf_mode = parse_idf_mode(predict_idf_mode);
            predict_command.config.query_idf = parse_query_idf(predict_query_idf);
            return cmd_predict(predict_command, out);
        }
        if (*run_app) {
            ExperimentConfig config = run_flags;
            if (!run_config_path.empty()) {
                std::ifstream in(run_config_path);
                if (!in) throw ValidationError("cannot open config " + run_config_path.string());
                nlohmann::json json;
                try {
                    in >> json;
                } catch (nlohmann::json::parse_error const &e) {
                    throw ValidationError(run_config_path.string() + ": malformed JSON: " + e.what());
                }
                config = ExperimentConfig::from_json(json);
                for (auto const &[option, apply] : overrides) {
                    if (option->count() > 0) apply(config);
                }
            }
            if (run_file_option->count() > 0) {
                config.run_files.clear();
                for (auto const &spec : run_file_specs) config.run_files.push_back(parse_run_file_spec(spec));
            }
            return cmd_run(config, out);
        }
        if (*analyze_app) {
            if (analyze_m) {
                analyze_command.m_min = *analyze_m;
                analyze_command.m_max = *analyze_m;
            } else if (analyze_app->count("--m-max") == 0) {
                analyze_command.m_max = analyze_command.m_min;
            }
            analyze_command.options.mode = parse_enumeration_mode(analyze_mode);
            analyze_command.options.formula = parse_exposure_formula(analyze_formula);
            return cmd_analyze_exposure(analyze_command, out);
        }
    } catch (ValidationError const &e) {
        err << "error: " << e.what() << '\n';
        return validation_error;
    } catch (std::invalid_argument const &e) {
        err << "error: " << e.what() << '\n';
        return validation_error;
    } catch (std::exception const &e) {
        err << "error: " << e.what() << '\n';
        return validation_error;
    }
    return validation_error;
}

} // namespace qep::cli
