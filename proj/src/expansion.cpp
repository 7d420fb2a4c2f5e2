#include "qep/expansion.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include <json.hpp>

namespace qep {

void ExpansionConfig::validate() const
{
    if (fb_docs < 1) throw std::invalid_argument("expansion: fb_docs must be at least 1");
    if (fb_terms < 1) throw std::invalid_argument("expansion: fb_terms must be at least 1");
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("expansion: lambda must lie in [0, 1]");
}

namespace {

struct FeedbackDoc {
    DocNo doc;
    double score;
};

std::vector<FeedbackDoc> feedback_docs(CollectionIndex const &index, Ranking const &ranking, std::size_t fb_docs)
{
    std::vector<FeedbackDoc> docs;
    auto depth = std::min(fb_docs, ranking.entries.size());
    for (std::size_t i = 0; i < depth; ++i) {
        auto const &entry = ranking.entries[i];
        auto doc = index.doc_number(entry.doc_id);
        if (!doc) throw ValidationError("feedback doc '" + entry.doc_id + "' is not in the index");
        docs.push_back({*doc, entry.score});
    }
    return docs;
}

bool by_weight_then_term(std::pair<std::string, double> const &a, std::pair<std::string, double> const &b)
{
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
}

} // namespace

ExpansionResult expand_rm3(CollectionIndex const &index,
                           Query const &query,
                           Ranking const &ranking,
                           ExpansionConfig const &config)
{
    config.validate();
    if (ranking.entries.empty()) return {query, false};
    auto original = query.term_weights();
    double query_mass = 0.0;
    for (auto const &[term, weight] : original) query_mass += weight;

    auto feedback = feedback_docs(index, ranking, config.fb_docs);
    double low = feedback.front().score;
    double high = feedback.front().score;
    for (auto const &f : feedback) {
        low = std::min(low, f.score);
        high = std::max(high, f.score);
    }

    std::map<TermId, double> relevance;
    for (auto const &f : feedback) {
        auto prior = high > low ? (f.score - low) / (high - low) : 1.0;
        auto length = static_cast<double>(index.doc_length(f.doc));
        if (prior == 0.0 || length == 0.0) continue;
        for (auto const &[term, tf] : index.doc_terms(f.doc)) {
            relevance[term] += static_cast<double>(tf) / length * prior;
        }
    }
    double relevance_mass = 0.0;
    for (auto const &[term, p] : relevance) relevance_mass += p;

    std::vector<std::pair<std::string, double>> model;
    for (auto const &[term, p] : relevance) model.emplace_back(index.term(term), p / relevance_mass);
    std::sort(model.begin(), model.end(), by_weight_then_term);
    auto p_rm = [&](std::string const &term) {
        auto it = std::find_if(model.begin(), model.end(), [&](auto const &e) { return e.first == term; });
        return it == model.end() ? 0.0 : it->second;
    };

    std::vector<std::pair<std::string, double>> expanded;
    for (auto const &[term, weight] : original) {
        auto p_ml = query_mass > 0.0 ? weight / query_mass : 0.0;
        expanded.emplace_back(term, (1.0 - config.lambda) * p_ml + config.lambda * p_rm(term));
    }
    auto original_count = expanded.size();
    std::size_t taken = 0;
    for (auto const &[term, p] : model) {
        if (taken == config.fb_terms) break;
        ++taken;
        auto is_original = std::any_of(original.begin(), original.end(), [&](auto const &e) { return e.first == term; });
        if (is_original) continue;
        auto weight = config.lambda * p;
        if (weight > 0.0) expanded.emplace_back(term, weight);
    }
    std::sort(expanded.begin() + static_cast<std::ptrdiff_t>(original_count), expanded.end(), by_weight_then_term);

    double total = 0.0;
    for (auto const &[term, weight] : expanded) total += weight;
    Query result{query.query_id, {}, {}};
    for (auto const &[term, weight] : expanded) {
        result.terms.push_back(term);
        result.weights.push_back(total > 0.0 ? weight / total : 0.0);
    }
    return {std::move(result), true};
}

std::vector<std::pair<std::string, double>> klq_candidate_weights(CollectionIndex const &index,
                                                                  Ranking const &ranking,
                                                                  std::size_t fb_docs)
{
    std::map<TermId, std::uint64_t> counts;
    std::uint64_t tokens = 0;
    for (auto const &f : feedback_docs(index, ranking, fb_docs)) {
        tokens += index.doc_length(f.doc);
        for (auto const &[term, tf] : index.doc_terms(f.doc)) counts[term] += tf;
    }
    std::vector<std::pair<std::string, double>> weights;
    if (tokens == 0) return weights;
    auto collection = static_cast<double>(index.total_tokens());
    for (auto const &[term, cf] : counts) {
        auto p_feedback = static_cast<double>(cf) / static_cast<double>(tokens);
        auto p_collection = static_cast<double>(index.cf(term)) / collection;
        weights.emplace_back(index.term(term), p_feedback * std::log2(p_feedback / p_collection));
    }
    std::sort(weights.begin(), weights.end(), by_weight_then_term);
    return weights;
}

ExpansionResult expand_klq(CollectionIndex const &index,
                           Query const &query,
                           Ranking const &ranking,
                           ExpansionConfig const &config)
{
    config.validate();
    if (ranking.entries.empty()) return {query, false};
    auto original = query.term_weights();
    double query_mass = 0.0;
    for (auto const &[term, weight] : original) query_mass += weight;

    std::vector<std::pair<std::string, double>> selected;
    for (auto const &[term, weight] : klq_candidate_weights(index, ranking, config.fb_docs)) {
        if (selected.size() == config.fb_terms || weight <= 0.0) break;
        auto is_original = std::any_of(original.begin(), original.end(), [&](auto const &e) { return e.first == term; });
        if (!is_original) selected.emplace_back(term, weight);
    }
    double selected_mass = 0.0;
    for (auto const &[term, weight] : selected) selected_mass += weight;

    Query result{query.query_id, {}, {}};
    for (auto const &[term, weight] : original) {
        result.terms.push_back(term);
        result.weights.push_back(weight);
    }
    for (auto const &[term, weight] : selected) {
        result.terms.push_back(term);
        result.weights.push_back(weight / selected_mass * query_mass);
    }
    return {std::move(result), true};
}

std::string_view to_string(ExpansionModel model)
{
    switch (model) {
    case ExpansionModel::none:
        return "none";
    case ExpansionModel::rm3:
        return "rm3";
    case ExpansionModel::klq:
        return "klq";
    }
    return "unknown";
}

ExpansionModel parse_expansion_model(std::string_view name)
{
    if (name == "none") return ExpansionModel::none;
    if (name == "rm3") return ExpansionModel::rm3;
    if (name == "klq") return ExpansionModel::klq;
    throw ValidationError("unknown expansion model '" + std::string(name) + "'");
}

ExpansionResult expand(ExpansionModel model,
                       CollectionIndex const &index,
                       Query const &query,
                       Ranking const &ranking,
                       ExpansionConfig const &config)
{
    switch (model) {
    case ExpansionModel::none:
        return {query, false};
    case ExpansionModel::rm3:
        return expand_rm3(index, query, ranking, config);
    case ExpansionModel::klq:
        return expand_klq(index, query, ranking, config);
    }
    throw std::logic_error("unhandled expansion model");
}

Ranking rank_with_feedback(CollectionIndex const &index,
                           Query const &query,
                           RankingModel model,
                           ExpansionModel expansion,
                           std::size_t k,
                           ExpansionConfig const &config,
                           Bm25Params params)
{
    auto first = rank(index, query, model, k, params);
    if (expansion == ExpansionModel::none) return first;
    auto expanded = expand(expansion, index, query, first, config);
    if (!expanded.applied) return first;
    return rank(index, expanded.query, model, k, params);
}

std::string query_to_json(Query const &query)
{
    nlohmann::json object;
    object["query_id"] = query.query_id;
    object["terms"] = query.terms;
    object["weights"] = query.weights;
    return object.dump();
}

Query query_from_json(std::string_view json_text)
{
    nlohmann::json object;
    try {
        object = nlohmann::json::parse(json_text);
        Query query{object.at("query_id").get<std::string>(),
                    object.at("terms").get<std::vector<std::string>>(),
                    object.at("weights").get<std::vector<double>>()};
        query.validate();
        return query;
    } catch (nlohmann::json::exception const &e) {
        throw ValidationError(std::string("malformed query JSON: ") + e.what());
    } catch (std::invalid_argument const &e) {
        throw ValidationError(e.what());
    }
}

} // namespace qep
