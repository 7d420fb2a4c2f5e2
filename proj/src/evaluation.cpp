#include "qep/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <set>
#include <tuple>

namespace qep {

namespace {

void require_distribution(std::span<double const> values, char const *name)
{
    double sum = 0.0;
    for (double v : values) {
        if (!std::isfinite(v) || v < 0.0) {
            throw std::invalid_argument(std::string("jsd: ") + name + " has a negative or non-finite entry");
        }
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-6) {
        throw std::invalid_argument(std::string("jsd: ") + name + " does not sum to 1");
    }
}

double kl_to_midpoint(std::span<double const> p, std::span<double const> e)
{
    double kl = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) continue;
        auto midpoint = 0.5 * (p[i] + e[i]);
        kl += p[i] * std::log2(p[i] / midpoint);
    }
    return kl;
}

// Continued fraction for the incomplete beta function (modified Lentz).
double beta_continued_fraction(double x, double a, double b)
{
    constexpr int max_iterations = 10'000;
    constexpr double epsilon = 1e-16;
    constexpr double tiny = 1e-300;
    double qab = a + b;
    double qap = a + 1.0;
    double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iterations; ++m) {
        double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < epsilon) break;
    }
    return h;
}

std::string csv_field(std::string_view field)
{
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
    std::string quoted = "\"";
    for (char c : field) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    quoted += '"';
    return quoted;
}

} // namespace

double jsd(std::span<double const> p, std::span<double const> e)
{
    if (p.size() != e.size()) throw std::invalid_argument("jsd: dimension mismatch");
    if (p.empty()) throw std::invalid_argument("jsd: empty distributions");
    require_distribution(p, "P");
    require_distribution(e, "E");
    auto divergence = 0.5 * kl_to_midpoint(p, e) + 0.5 * kl_to_midpoint(e, p);
    return std::sqrt(std::clamp(divergence, 0.0, 1.0));
}

double jsd(ExposureDistribution const &p, ExposureDistribution const &e) { return jsd(p.values, e.values); }

double coefficient_of_variation(std::span<double const> values, Deviation deviation)
{
    if (values.empty()) throw std::invalid_argument("coefficient_of_variation: no values");
    if (deviation == Deviation::sample && values.size() < 2) {
        throw std::invalid_argument("coefficient_of_variation: sample deviation needs two values");
    }
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    if (mean == 0.0) throw std::invalid_argument("coefficient_of_variation: zero mean");
    double squares = 0.0;
    for (double v : values) squares += (v - mean) * (v - mean);
    auto n = static_cast<double>(values.size());
    auto variance = squares / (deviation == Deviation::population ? n : n - 1.0);
    return std::sqrt(variance) / mean * 100.0;
}

double regularized_incomplete_beta(double x, double a, double b)
{
    if (!(a > 0.0 && b > 0.0)) throw std::invalid_argument("incomplete beta: a and b must be positive");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double front = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x)
                            + b * std::log1p(-x));
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(x, a, b) / a;
    return 1.0 - front * beta_continued_fraction(1.0 - x, b, a) / b;
}

double student_t_cdf(double t, double dof)
{
    if (!(dof > 0.0)) throw std::invalid_argument("student_t_cdf: degrees of freedom must be positive");
    double x = dof / (dof + t * t);
    double tail = 0.5 * regularized_incomplete_beta(x, 0.5 * dof, 0.5);
    return t > 0.0 ? 1.0 - tail : tail;
}

TTestResult paired_t_test(std::span<double const> a, std::span<double const> b)
{
    if (a.size() != b.size()) throw std::invalid_argument("paired_t_test: length mismatch");
    if (a.size() < 2) throw std::invalid_argument("paired_t_test: needs at least two pairs");
    auto n = static_cast<double>(a.size());
    double mean = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) mean += a[i] - b[i];
    mean /= n;
    double squares = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        auto centered = (a[i] - b[i]) - mean;
        squares += centered * centered;
        scale = std::max({scale, std::abs(a[i]), std::abs(b[i])});
    }
    auto variance = squares / (n - 1.0);
    // rounding noise from equal differences is treated as zero spread
    auto noise = 16.0 * std::numeric_limits<double>::epsilon() * scale;
    if (variance <= noise * noise) throw DegenerateTest("paired_t_test: differences have zero variance");
    auto t = mean / std::sqrt(variance / n);
    auto dof = a.size() - 1;
    auto dof_value = static_cast<double>(dof);
    auto p = regularized_incomplete_beta(dof_value / (dof_value + t * t), 0.5 * dof_value, 0.5);
    return {t, std::clamp(p, 0.0, 1.0), dof};
}

std::vector<double> bonferroni(std::span<double const> p_values, std::size_t m)
{
    if (m == 0) throw std::invalid_argument("bonferroni: m must be at least 1");
    std::vector<double> adjusted;
    adjusted.reserve(p_values.size());
    for (double p : p_values) adjusted.push_back(std::min(1.0, p * static_cast<double>(m)));
    return adjusted;
}

// ---------------------------------------------------------------------------

Pipeline Pipeline::lexical(RankingModel model, ExpansionModel expansion)
{
    Pipeline pipeline;
    pipeline.name = std::string(to_string(model));
    if (expansion != ExpansionModel::none) pipeline.name += "+" + std::string(to_string(expansion));
    pipeline.model = model;
    pipeline.expansion = expansion;
    return pipeline;
}

Pipeline Pipeline::run_file(std::string name, std::map<std::string, Ranking> rankings)
{
    Pipeline pipeline;
    pipeline.name = std::move(name);
    pipeline.external = std::move(rankings);
    return pipeline;
}

Predictor make_predictor(PredictorKind kind, PredictorConfig config)
{
    return {std::string(to_string(kind)), [kind, config](PredictionRequest const &request) {
                auto resolved = config;
                if (resolved.gep_k == 0) resolved.gep_k = request.k;
                return predict(kind, request.index, request.query, request.category, resolved);
            }};
}

PredictionReport run_experiment(CollectionIndex const &index,
                                std::span<Query const> queries,
                                std::span<std::string const> categories,
                                std::span<Pipeline const> pipelines,
                                std::span<Predictor const> predictors,
                                ExperimentOptions const &options)
{
    if (options.k == 0) throw std::invalid_argument("run_experiment: k must be at least 1");
    for (auto const &category : categories) (void)index.category_index(category);

    PredictionReport report;
    report.alpha = options.alpha;
    report.reference = options.reference;

    // Predictions depend only on the original query, so they are shared by
    // every pipeline.
    struct Prediction {
        std::optional<ExposureDistribution> distribution;
        std::string error;
    };
    std::map<std::tuple<std::size_t, std::size_t, std::size_t>, Prediction> predictions;
    for (std::size_t q = 0; q < queries.size(); ++q) {
        for (std::size_t c = 0; c < categories.size(); ++c) {
            for (std::size_t p = 0; p < predictors.size(); ++p) {
                Prediction prediction;
                try {
                    prediction.distribution =
                        predictors[p].predict({index, queries[q], categories[c], options.k}).distribution;
                } catch (std::exception const &e) {
                    prediction.error = e.what();
                }
                predictions.emplace(std::make_tuple(q, c, p), std::move(prediction));
            }
        }
    }

    auto fail_rows = [&](Query const &query, std::string const &pipeline, std::string const &reason,
                         std::optional<std::size_t> only_category) {
        for (std::size_t c = 0; c < categories.size(); ++c) {
            if (only_category && *only_category != c) continue;
            for (auto const &predictor : predictors) {
                report.failures.push_back({query.query_id, pipeline, categories[c], predictor.name, reason});
            }
        }
    };

    for (auto const &pipeline : pipelines) {
        std::vector<JsdRow> rows;
        std::vector<CvRow> cv_rows;
        for (std::size_t q = 0; q < queries.size(); ++q) {
            auto const &query = queries[q];
            Ranking ranking;
            try {
                if (pipeline.external) {
                    auto it = pipeline.external->find(query.query_id);
                    if (it == pipeline.external->end()) throw ValidationError("no ranking in run file");
                    ranking = it->second;
                    if (ranking.entries.size() > options.k) ranking.entries.resize(options.k);
                } else {
                    if (query.empty()) throw std::invalid_argument("empty query");
                    ranking = rank_with_feedback(index, query, pipeline.model, pipeline.expansion, options.k,
                                                 options.expansion, options.bm25);
                }
                if (ranking.entries.empty()) throw ValidationError("empty ranking");
            } catch (std::exception const &e) {
                fail_rows(query, pipeline.name, e.what(), std::nullopt);
                continue;
            }

            for (std::size_t c = 0; c < categories.size(); ++c) {
                ExposureDistribution realized;
                try {
                    realized = realized_exposure(ranking, index, categories[c], options.formula);
                } catch (std::exception const &e) {
                    fail_rows(query, pipeline.name, e.what(), c);
                    continue;
                }
                cv_rows.push_back({query.query_id, pipeline.name, categories[c],
                                   coefficient_of_variation(realized.values, options.cv_deviation)});
                for (std::size_t p = 0; p < predictors.size(); ++p) {
                    auto const &prediction = predictions.at(std::make_tuple(q, c, p));
                    if (!prediction.distribution) {
                        report.failures.push_back(
                            {query.query_id, pipeline.name, categories[c], predictors[p].name, prediction.error});
                        continue;
                    }
                    try {
                        rows.push_back({query.query_id, pipeline.name, categories[c], predictors[p].name,
                                        jsd(*prediction.distribution, realized),
                                        prediction.distribution->degenerate});
                    } catch (std::exception const &e) {
                        report.failures.push_back(
                            {query.query_id, pipeline.name, categories[c], predictors[p].name, e.what()});
                    }
                }
            }
        }
        std::stable_sort(rows.begin(), rows.end(), [](JsdRow const &a, JsdRow const &b) {
            return std::tie(a.query_id, a.category, a.predictor) < std::tie(b.query_id, b.category, b.predictor);
        });
        std::stable_sort(cv_rows.begin(), cv_rows.end(), [](CvRow const &a, CvRow const &b) {
            return std::tie(a.query_id, a.category) < std::tie(b.query_id, b.category);
        });
        report.rows.insert(report.rows.end(), rows.begin(), rows.end());
        report.cv_rows.insert(report.cv_rows.end(), cv_rows.begin(), cv_rows.end());
    }

    // Aggregation and significance of the reference predictor vs each baseline.
    bool has_reference = std::any_of(predictors.begin(), predictors.end(),
                                     [&](Predictor const &p) { return p.name == options.reference; });
    std::size_t baselines = 0;
    for (auto const &predictor : predictors) baselines += predictor.name == options.reference ? 0 : 1;
    report.bonferroni_m = options.bonferroni_m != 0 ? options.bonferroni_m : std::max<std::size_t>(baselines, 1);

    for (auto const &pipeline : pipelines) {
        for (auto const &category : categories) {
            std::map<std::string, std::map<std::string, double>> by_predictor; // predictor -> query -> jsd
            for (auto const &row : report.rows) {
                if (row.pipeline == pipeline.name && row.category == category) {
                    by_predictor[row.predictor][row.query_id] = row.jsd;
                }
            }
            for (auto const &predictor : predictors) {
                SummaryCell cell;
                cell.pipeline = pipeline.name;
                cell.category = category;
                cell.predictor = predictor.name;
                auto const &values = by_predictor[predictor.name];
                cell.queries = values.size();
                double sum = 0.0;
                for (auto const &[query, value] : values) sum += value;
                cell.mean_jsd = values.empty() ? std::numeric_limits<double>::quiet_NaN()
                                               : sum / static_cast<double>(values.size());
                if (has_reference && predictor.name != options.reference) {
                    auto const &reference = by_predictor[options.reference];
                    std::vector<double> a;
                    std::vector<double> b;
                    for (auto const &[query, value] : values) {
                        auto it = reference.find(query);
                        if (it == reference.end()) continue;
                        a.push_back(it->second);
                        b.push_back(value);
                    }
                    try {
                        auto test = paired_t_test(a, b);
                        cell.t = test.t;
                        cell.p = test.p;
                        cell.p_adjusted = bonferroni(std::span<double const>(&test.p, 1), report.bonferroni_m)[0];
                        cell.significant = *cell.p_adjusted < options.alpha;
                    } catch (DegenerateTest const &) {
                        cell.note = "zero-variance differences";
                    } catch (std::invalid_argument const &) {
                        cell.note = "fewer than two paired queries";
                    }
                }
                report.summary.push_back(std::move(cell));
            }
        }
    }
    return report;
}

void write_jsd_csv(std::ostream &out, PredictionReport const &report)
{
    auto precision = out.precision();
    out << "query_id,pipeline,category,predictor,jsd\n" << std::setprecision(12);
    for (auto const &row : report.rows) {
        out << csv_field(row.query_id) << ',' << csv_field(row.pipeline) << ',' << csv_field(row.category) << ','
            << csv_field(row.predictor) << ',' << row.jsd << '\n';
    }
    out.precision(precision);
}

void write_cv_csv(std::ostream &out, PredictionReport const &report)
{
    auto precision = out.precision();
    out << "query_id,pipeline,category,cv_percent\n" << std::setprecision(12);
    for (auto const &row : report.cv_rows) {
        out << csv_field(row.query_id) << ',' << csv_field(row.pipeline) << ',' << csv_field(row.category) << ','
            << row.cv_percent << '\n';
    }
    out.precision(precision);
}

nlohmann::ordered_json summary_json(PredictionReport const &report)
{
    nlohmann::ordered_json root;
    root["reference"] = report.reference;
    root["alpha"] = report.alpha;
    root["bonferroni_m"] = report.bonferroni_m;
    auto &tables = root["pipelines"] = nlohmann::ordered_json::array();
    std::vector<std::string> pipeline_order;
    for (auto const &cell : report.summary) {
        if (std::find(pipeline_order.begin(), pipeline_order.end(), cell.pipeline) == pipeline_order.end()) {
            pipeline_order.push_back(cell.pipeline);
        }
    }
    for (auto const &pipeline : pipeline_order) {
        nlohmann::ordered_json table;
        table["pipeline"] = pipeline;
        auto &rows = table["predictors"] = nlohmann::ordered_json::object();
        for (auto const &cell : report.summary) {
            if (cell.pipeline != pipeline) continue;
            nlohmann::ordered_json entry;
            if (std::isnan(cell.mean_jsd)) {
                entry["mean_jsd"] = nullptr;
            } else {
                entry["mean_jsd"] = cell.mean_jsd;
            }
            entry["queries"] = cell.queries;
            if (cell.p) {
                entry["t"] = *cell.t;
                entry["p"] = *cell.p;
                entry["p_adjusted"] = *cell.p_adjusted;
                entry["significant"] = cell.significant;
            }
            if (!cell.note.empty()) entry["note"] = cell.note;
            rows[cell.predictor][cell.category] = std::move(entry);
        }
        tables.push_back(std::move(table));
    }
    auto &failures = root["failures"] = nlohmann::ordered_json::array();
    for (auto const &failure : report.failures) {
        failures.push_back({{"query_id", failure.query_id},
                            {"pipeline", failure.pipeline},
                            {"category", failure.category},
                            {"predictor", failure.predictor},
                            {"reason", failure.reason}});
    }
    return root;
}

} // namespace qep
