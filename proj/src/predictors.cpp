#include "qep/predictors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace qep {

namespace {

constexpr double zero_count_substitute = 0.5;

void require_terms(Query const &query, std::string_view predictor)
{
    if (query.empty()) {
        throw std::invalid_argument(std::string(predictor) + ": empty query '" + query.query_id + "'");
    }
    query.validate();
}

double apply_floor(double idf, IdfMode mode) { return mode == IdfMode::floored ? std::max(0.0, idf) : idf; }

double bm25_idf(double docs, double df) { return std::log2((docs - df + 0.5) / (df + 0.5)); }

double smoothed(std::uint64_t count)
{
    return count == 0 ? zero_count_substitute : static_cast<double>(count);
}

// tf values of `term` for every document of each group in `category`.
std::vector<std::vector<std::uint32_t>> group_tfs(CollectionIndex const &index, std::size_t category, TermId term)
{
    std::vector<std::vector<std::uint32_t>> tfs(index.num_groups(category));
    for (auto const &posting : index.postings(term)) {
        tfs[index.group_of(category, posting.doc)].push_back(posting.tf);
    }
    return tfs;
}

// Mean of the k largest values among the group's tf * idf scores, where the
// group contributes max(group size, k) scores and the ones not backed by a
// posting are zero.
double top_k_mean(std::vector<std::uint32_t> tfs, double idf, std::size_t group_docs, std::size_t k)
{
    if (tfs.empty() || idf == 0.0) return 0.0;
    auto slots = std::max(group_docs, k);
    auto zeros = slots - tfs.size();
    double sum = 0.0;
    if (idf > 0.0) {
        std::sort(tfs.begin(), tfs.end(), std::greater<>());
        auto take = std::min(k, tfs.size());
        for (std::size_t i = 0; i < take; ++i) sum += static_cast<double>(tfs[i]) * idf;
    } else {
        // negative idf (raw mode): zeros outrank every posting score
        auto from_postings = k > zeros ? k - zeros : 0;
        std::sort(tfs.begin(), tfs.end());
        for (std::size_t i = 0; i < from_postings; ++i) sum += static_cast<double>(tfs[i]) * idf;
    }
    return sum / static_cast<double>(k);
}

double gep_term_score(CollectionIndex const &index, std::size_t category, std::size_t group,
                      std::vector<std::uint32_t> tfs, std::size_t k, IdfMode idf_mode)
{
    auto docs = static_cast<double>(index.group_num_docs(category, group));
    auto df = static_cast<double>(tfs.size());
    auto idf = apply_floor(bm25_idf(docs, df), idf_mode);
    return top_k_mean(std::move(tfs), idf, index.group_num_docs(category, group), k);
}

struct WeightedTerm {
    std::optional<TermId> id;
    double weight;
};

std::vector<WeightedTerm> resolve(CollectionIndex const &index, Query const &query)
{
    std::vector<WeightedTerm> terms;
    for (auto const &[term, weight] : query.term_weights()) terms.push_back({index.term_id(term), weight});
    return terms;
}

std::uint64_t group_df(CollectionIndex const &index, std::size_t c, std::optional<TermId> term, std::size_t g)
{
    return term ? index.group_df(c, *term, g) : 0;
}

std::uint64_t group_cf(CollectionIndex const &index, std::size_t c, std::optional<TermId> term, std::size_t g)
{
    return term ? index.group_cf(c, *term, g) : 0;
}

std::vector<double> avidf_scores(CollectionIndex const &index, std::size_t c, std::vector<WeightedTerm> const &terms)
{
    double total = 0.0;
    for (auto const &t : terms) total += t.weight;
    std::vector<double> raw(index.num_groups(c), 0.0);
    if (total == 0.0) return raw;
    for (std::size_t g = 0; g < raw.size(); ++g) {
        auto docs = static_cast<double>(index.group_num_docs(c, g));
        if (docs == 0.0) continue;
        double sum = 0.0;
        for (auto const &t : terms) sum += t.weight * std::log2(docs / smoothed(group_df(index, c, t.id, g)));
        raw[g] = sum / total;
    }
    return raw;
}

} // namespace

double gep_group_term_score(CollectionIndex const &index,
                            std::string_view term,
                            std::string_view category,
                            std::string_view group,
                            std::size_t k,
                            IdfMode idf_mode)
{
    if (k == 0) throw std::invalid_argument("gep_group_term_score: k must be at least 1");
    auto c = index.category_index(category);
    auto g = index.group_index(c, group);
    auto id = index.term_id(term);
    if (!id) return 0.0;
    auto tfs = group_tfs(index, c, *id);
    return gep_term_score(index, c, g, std::move(tfs[g]), k, idf_mode);
}

std::vector<std::pair<std::string, double>> gep_query_vector(CollectionIndex const &index,
                                                             Query const &query,
                                                             QueryIdf query_idf,
                                                             IdfMode idf_mode)
{
    auto weights = query.term_weights();
    auto docs = static_cast<double>(index.num_docs());
    for (auto &[term, weight] : weights) {
        auto id = index.term_id(term);
        if (!id) {
            weight = 0.0;
            continue;
        }
        auto df = static_cast<double>(index.df(*id));
        auto idf = query_idf == QueryIdf::bm25 ? bm25_idf(docs, df) : std::log2(docs / df);
        weight *= apply_floor(idf, idf_mode);
    }
    return weights;
}

PredictorOutput finish_prediction(std::string predictor,
                                  CollectionIndex const &index,
                                  std::size_t category,
                                  std::vector<double> raw)
{
    std::vector<double> floored(raw.size());
    for (std::size_t g = 0; g < raw.size(); ++g) {
        if (!std::isfinite(raw[g])) {
            throw std::runtime_error(predictor + ": non-finite group score");
        }
        floored[g] = std::max(0.0, raw[g]);
    }
    PredictorOutput output;
    output.predictor = std::move(predictor);
    output.distribution = normalize_exposure(floored);
    auto const &cat = index.categories()[category];
    output.category = cat.name;
    output.distribution.category = cat.name;
    output.distribution.groups = cat.groups;
    output.raw = std::move(raw);
    return output;
}

PredictorOutput predict_gep(CollectionIndex const &index,
                            Query const &query,
                            std::string_view category,
                            PredictorConfig const &config)
{
    require_terms(query, "gep");
    if (config.gep_k == 0) throw std::invalid_argument("gep: k must be at least 1");
    auto c = index.category_index(category);
    auto query_vector = gep_query_vector(index, query, config.query_idf, config.idf_mode);
    std::vector<double> raw(index.num_groups(c), 0.0);
    for (auto const &[term, weight] : query_vector) {
        auto id = index.term_id(term);
        if (!id || weight == 0.0) continue;
        auto tfs = group_tfs(index, c, *id);
        for (std::size_t g = 0; g < raw.size(); ++g) {
            raw[g] += gep_term_score(index, c, g, std::move(tfs[g]), config.gep_k, config.idf_mode) * weight;
        }
    }
    return finish_prediction("gep", index, c, std::move(raw));
}

PredictorOutput predict_avidf(CollectionIndex const &index,
                              Query const &query,
                              std::string_view category,
                              PredictorConfig const &)
{
    require_terms(query, "avidf");
    auto c = index.category_index(category);
    return finish_prediction("avidf", index, c, avidf_scores(index, c, resolve(index, query)));
}

PredictorOutput predict_avictf(CollectionIndex const &index,
                               Query const &query,
                               std::string_view category,
                               PredictorConfig const &)
{
    require_terms(query, "avictf");
    auto c = index.category_index(category);
    auto terms = resolve(index, query);
    double total = 0.0;
    for (auto const &t : terms) total += t.weight;
    std::vector<double> raw(index.num_groups(c), 0.0);
    for (std::size_t g = 0; g < raw.size() && total > 0.0; ++g) {
        auto tokens = static_cast<double>(index.group_tokens(c, g));
        if (tokens == 0.0) continue;
        double sum = 0.0;
        for (auto const &t : terms) sum += t.weight * std::log2(tokens / smoothed(group_cf(index, c, t.id, g)));
        raw[g] = sum / total;
    }
    return finish_prediction("avictf", index, c, std::move(raw));
}

PredictorOutput predict_scs(CollectionIndex const &index,
                            Query const &query,
                            std::string_view category,
                            PredictorConfig const &)
{
    require_terms(query, "scs");
    auto c = index.category_index(category);
    auto terms = resolve(index, query);
    double total = 0.0;
    for (auto const &t : terms) total += t.weight;
    std::vector<double> raw(index.num_groups(c), 0.0);
    for (std::size_t g = 0; g < raw.size() && total > 0.0; ++g) {
        auto tokens = static_cast<double>(index.group_tokens(c, g));
        if (tokens == 0.0) continue;
        double sum = 0.0;
        for (auto const &t : terms) {
            if (t.weight == 0.0) continue;
            auto p_query = t.weight / total;
            auto p_group = smoothed(group_cf(index, c, t.id, g)) / tokens;
            sum += p_query * std::log2(p_query / p_group);
        }
        raw[g] = sum;
    }
    return finish_prediction("scs", index, c, std::move(raw));
}

PredictorOutput predict_avpmi(CollectionIndex const &index,
                              Query const &query,
                              std::string_view category,
                              PredictorConfig const &)
{
    require_terms(query, "avpmi");
    auto c = index.category_index(category);
    auto terms = resolve(index, query);
    std::erase_if(terms, [](WeightedTerm const &t) { return t.weight == 0.0; });
    if (terms.size() < 2) {
        return finish_prediction("avpmi", index, c, avidf_scores(index, c, terms));
    }

    auto groups = index.num_groups(c);
    std::vector<double> sums(groups, 0.0);
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        for (std::size_t j = i + 1; j < terms.size(); ++j) {
            ++pairs;
            std::vector<std::uint64_t> joint(groups, 0);
            if (terms[i].id && terms[j].id) {
                auto a = index.postings(*terms[i].id);
                auto b = index.postings(*terms[j].id);
                for (auto x = a.begin(), y = b.begin(); x != a.end() && y != b.end();) {
                    if (x->doc < y->doc) {
                        ++x;
                    } else if (y->doc < x->doc) {
                        ++y;
                    } else {
                        joint[index.group_of(c, x->doc)] += 1;
                        ++x;
                        ++y;
                    }
                }
            }
            for (std::size_t g = 0; g < groups; ++g) {
                auto docs = static_cast<double>(index.group_num_docs(c, g));
                if (docs == 0.0) continue;
                auto p_joint = (static_cast<double>(joint[g]) + 0.5) / (docs + 1.0);
                auto p_i = (static_cast<double>(group_df(index, c, terms[i].id, g)) + 0.5) / (docs + 1.0);
                auto p_j = (static_cast<double>(group_df(index, c, terms[j].id, g)) + 0.5) / (docs + 1.0);
                sums[g] += std::log2(p_joint / (p_i * p_j));
            }
        }
    }
    for (auto &s : sums) s /= static_cast<double>(pairs);
    return finish_prediction("avpmi", index, c, std::move(sums));
}

PredictorOutput predict_cori(CollectionIndex const &index,
                             Query const &query,
                             std::string_view category,
                             PredictorConfig const &config)
{
    require_terms(query, "cori");
    auto c = index.category_index(category);
    auto groups = index.num_groups(c);
    auto group_count = static_cast<double>(groups);
    double avg_cw = 0.0;
    for (std::size_t g = 0; g < groups; ++g) avg_cw += static_cast<double>(index.group_tokens(c, g));
    avg_cw /= group_count;

    std::vector<double> beliefs(groups, 0.0);
    double used_weight = 0.0;
    for (auto const &t : resolve(index, query)) {
        if (!t.id || t.weight == 0.0) continue;
        std::size_t containing = 0;
        for (std::size_t g = 0; g < groups; ++g) containing += index.group_df(c, *t.id, g) > 0 ? 1 : 0;
        if (containing == 0) continue;
        auto inverse = std::log((group_count + 0.5) / static_cast<double>(containing)) / std::log(group_count + 1.0);
        for (std::size_t g = 0; g < groups; ++g) {
            auto df = static_cast<double>(index.group_df(c, *t.id, g));
            auto cw = static_cast<double>(index.group_tokens(c, g));
            auto term_belief = df / (df + config.cori_df_base + config.cori_cw_factor * cw / avg_cw);
            beliefs[g] += t.weight * (config.cori_b + (1.0 - config.cori_b) * term_belief * inverse);
        }
        used_weight += t.weight;
    }
    if (used_weight > 0.0) {
        for (auto &b : beliefs) b /= used_weight;
    }
    return finish_prediction("cori", index, c, std::move(beliefs));
}

std::string_view to_string(PredictorKind kind)
{
    switch (kind) {
    case PredictorKind::gep:
        return "gep";
    case PredictorKind::avidf:
        return "avidf";
    case PredictorKind::avictf:
        return "avictf";
    case PredictorKind::scs:
        return "scs";
    case PredictorKind::avpmi:
        return "avpmi";
    case PredictorKind::cori:
        return "cori";
    }
    return "unknown";
}

PredictorKind parse_predictor(std::string_view name)
{
    for (auto kind : all_predictors()) {
        if (to_string(kind) == name) return kind;
    }
    throw ValidationError("unknown predictor '" + std::string(name) + "'");
}

std::span<PredictorKind const> all_predictors()
{
    static constexpr PredictorKind kinds[] = {
        PredictorKind::gep, PredictorKind::scs,   PredictorKind::avidf,
        PredictorKind::avictf, PredictorKind::avpmi, PredictorKind::cori,
    };
    return kinds;
}

PredictorOutput predict(PredictorKind kind,
                        CollectionIndex const &index,
                        Query const &query,
                        std::string_view category,
                        PredictorConfig const &config)
{
    switch (kind) {
    case PredictorKind::gep:
        return predict_gep(index, query, category, config);
    case PredictorKind::avidf:
        return predict_avidf(index, query, category, config);
    case PredictorKind::avictf:
        return predict_avictf(index, query, category, config);
    case PredictorKind::scs:
        return predict_scs(index, query, category, config);
    case PredictorKind::avpmi:
        return predict_avpmi(index, query, category, config);
    case PredictorKind::cori:
        return predict_cori(index, query, category, config);
    }
    throw std::logic_error("unhandled predictor kind");
}

} // namespace qep
