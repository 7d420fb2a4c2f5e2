#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "qep/expansion.hpp"
#include "qep/text.hpp"

using namespace qep;

namespace {

std::map<std::string, double> weights_of(Query const &q)
{
    std::map<std::string, double> out;
    for (std::size_t i = 0; i < q.terms.size(); ++i) out[q.terms[i]] += q.weights[i];
    return out;
}

struct Fixture {
    std::vector<Document> docs;
    CollectionIndex index;
};

Fixture three_feedback_docs()
{
    Fixture f;
    f.docs = {{"d1", "kiwi kiwi plum fig", {}},
              {"d2", "kiwi plum date", {}},
              {"d3", "kiwi lime", {}},
              {"d4", "pear lime date", {}},
              {"d5", "pear fig", {}}};
    f.index = build_index(f.docs, std::vector<Category>{});
    return f;
}

} // namespace

TEST(Rm3, LambdaZeroKeepsOriginalModel)
{
    auto f = three_feedback_docs();
    Query query{"q", {"kiwi", "plum", "kiwi"}, {1.0, 1.0, 1.0}};
    auto ranking = rank(f.index, query, RankingModel::bm25, 10);
    auto result = expand_rm3(f.index, query, ranking, {.fb_docs = 3, .fb_terms = 10, .lambda = 0.0});
    ASSERT_TRUE(result.applied);
    auto w = weights_of(result.query);
    ASSERT_EQ(w.size(), 2u);
    EXPECT_NEAR(w["kiwi"], 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(w["plum"], 1.0 / 3.0, 1e-12);
}

TEST(Rm3, LambdaOneSingleDocIsDocumentModel)
{
    auto f = three_feedback_docs();
    auto query = Query::from_terms("q", {"kiwi"});
    auto ranking = rank(f.index, query, RankingModel::bm25, 10);
    ASSERT_EQ(ranking.entries.front().doc_id, "d1");
    auto result = expand_rm3(f.index, query, ranking, {.fb_docs = 1, .fb_terms = 10, .lambda = 1.0});
    auto w = weights_of(result.query);
    ASSERT_EQ(w.size(), 3u);
    EXPECT_NEAR(w["kiwi"], 0.5, 1e-12);
    EXPECT_NEAR(w["plum"], 0.25, 1e-12);
    EXPECT_NEAR(w["fig"], 0.25, 1e-12);

    auto truncated = expand_rm3(f.index, query, ranking, {.fb_docs = 1, .fb_terms = 1, .lambda = 1.0});
    EXPECT_EQ(truncated.query.terms, (std::vector<std::string>{"kiwi"}));
    EXPECT_NEAR(truncated.query.weights[0], 1.0, 1e-12);
}

// Hand enumeration: P(t|d) for every term of the three feedback documents,
// weighted by min-max normalized retrieval scores, then interpolated.
TEST(Rm3, MatchesHandEnumeration)
{
    auto f = three_feedback_docs();
    auto query = Query::from_terms("q", {"kiwi"});
    auto ranking = rank(f.index, query, RankingModel::bm25, 10);
    ASSERT_EQ(ranking.entries.size(), 3u);

    std::map<std::string, double> relevance;
    auto high = ranking.entries.front().score;
    auto low = ranking.entries.back().score;
    for (auto const &entry : ranking.entries) {
        auto const &docref = *std::find_if(f.docs.begin(), f.docs.end(),
                                           [&](Document const &d) { return d.doc_id == entry.doc_id; });
        auto tokens = text::tokenize(docref.text);
        auto prior = (entry.score - low) / (high - low);
        for (auto const &t : tokens) relevance[t] += prior / static_cast<double>(tokens.size());
    }
    double mass = 0.0;
    for (auto const &[t, p] : relevance) mass += p;
    std::map<std::string, double> expected;
    for (auto const &[t, p] : relevance) expected[t] = 0.5 * p / mass + (t == "kiwi" ? 0.5 : 0.0);
    double total = 0.0;
    for (auto const &[t, w] : expected) total += w;

    auto result = expand_rm3(f.index, query, ranking, {.fb_docs = 3, .fb_terms = 10, .lambda = 0.5});
    auto got = weights_of(result.query);
    // the lowest-scored feedback document has prior 0 and adds nothing
    auto positive = std::count_if(expected.begin(), expected.end(), [](auto const &e) { return e.second > 0; });
    EXPECT_EQ(got.size(), static_cast<std::size_t>(positive));
    for (auto const &[t, w] : expected) {
        if (w > 0) {
            EXPECT_NEAR(got[t], w / total, 1e-12) << t;
        }
    }
    EXPECT_NEAR(result.query.total_weight(), 1.0, 1e-12);
}

TEST(Rm3, EmptyRankingLeavesQueryUnchanged)
{
    auto f = three_feedback_docs();
    auto query = Query::from_terms("q", {"nowhere"});
    Ranking empty{"q", 10, {}};
    auto result = expand_rm3(f.index, query, empty);
    EXPECT_FALSE(result.applied);
    EXPECT_EQ(result.query.terms, query.terms);
    EXPECT_FALSE(expand_klq(f.index, query, empty).applied);
}

TEST(Klq, EqualDistributionsGiveZeroWeight)
{
    std::vector<Document> docs{{"d1", "kiwi plum", {}}, {"d2", "kiwi plum", {}}};
    auto index = build_index(docs, std::vector<Category>{});
    auto query = Query::from_terms("q", {"kiwi"});
    auto ranking = rank(index, query, RankingModel::bm25, 10);
    auto candidates = klq_candidate_weights(index, ranking, 3);
    for (auto const &[t, w] : candidates) EXPECT_NEAR(w, 0.0, 1e-15) << t;
    auto result = expand_klq(index, query, ranking);
    EXPECT_EQ(result.query.terms, query.terms);
}

TEST(Klq, FeedbackOnlyTermIsPositive)
{
    auto f = three_feedback_docs();
    auto query = Query::from_terms("q", {"kiwi"});
    auto ranking = rank(f.index, query, RankingModel::bm25, 10);
    auto candidates = klq_candidate_weights(f.index, ranking, 3);
    auto it = std::find_if(candidates.begin(), candidates.end(), [](auto const &c) { return c.first == "kiwi"; });
    ASSERT_NE(it, candidates.end());
    EXPECT_GT(it->second, 0.0);
}

TEST(Klq, TopTermsMatchExhaustiveScoring)
{
    auto f = three_feedback_docs();
    auto query = Query::from_terms("q", {"kiwi"});
    auto ranking = rank(f.index, query, RankingModel::bm25, 10);

    std::map<std::string, double> feedback_counts;
    std::map<std::string, double> collection_counts;
    double feedback_tokens = 0.0;
    double collection_tokens = 0.0;
    for (auto const &d : f.docs) {
        auto tokens = text::tokenize(d.text);
        bool in_feedback = std::any_of(ranking.entries.begin(), ranking.entries.begin() + 3,
                                       [&](RankedDoc const &e) { return e.doc_id == d.doc_id; });
        for (auto const &t : tokens) {
            collection_counts[t] += 1.0;
            if (in_feedback) feedback_counts[t] += 1.0;
        }
        collection_tokens += static_cast<double>(tokens.size());
        if (in_feedback) feedback_tokens += static_cast<double>(tokens.size());
    }
    std::vector<std::pair<std::string, double>> scored;
    for (auto const &[t, count] : feedback_counts) {
        auto pf = count / feedback_tokens;
        auto pc = collection_counts[t] / collection_tokens;
        scored.emplace_back(t, pf * std::log2(pf / pc));
    }
    std::sort(scored.begin(), scored.end(), [](auto const &a, auto const &b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });

    auto candidates = klq_candidate_weights(f.index, ranking, 3);
    ASSERT_EQ(candidates.size(), scored.size());
    for (std::size_t i = 0; i < scored.size(); ++i) {
        EXPECT_EQ(candidates[i].first, scored[i].first);
        EXPECT_NEAR(candidates[i].second, scored[i].second, 1e-12);
    }

    auto result = expand_klq(f.index, query, ranking, {.fb_docs = 3, .fb_terms = 10});
    std::vector<std::pair<std::string, double>> selected;
    for (auto const &s : scored) {
        if (s.first != "kiwi" && s.second > 0.0 && selected.size() < 10) selected.push_back(s);
    }
    double selected_mass = 0.0;
    for (auto const &s : selected) selected_mass += s.second;
    ASSERT_EQ(result.query.terms.size(), 1 + selected.size());
    EXPECT_EQ(result.query.terms[0], "kiwi");
    EXPECT_DOUBLE_EQ(result.query.weights[0], 1.0);
    for (std::size_t i = 0; i < selected.size(); ++i) {
        EXPECT_EQ(result.query.terms[i + 1], selected[i].first);
        EXPECT_NEAR(result.query.weights[i + 1], selected[i].second / selected_mass, 1e-12);
    }
}

TEST(ExpansionProperty, WeightsValidAndOriginalsKept)
{
    std::mt19937_64 rng(8);
    auto vocabulary = fixtures::pseudo_words(30, 1);
    auto corpus = fixtures::random_ranking_corpus(rng, 120, vocabulary);
    auto index = build_index(corpus.docs, corpus.categories);
    std::uniform_int_distribution<std::size_t> pick(0, vocabulary.size() - 1);
    for (int trial = 0; trial < 40; ++trial) {
        auto query = Query::from_terms("q", {vocabulary[pick(rng)], vocabulary[pick(rng)]});
        auto ranking = rank(index, query, RankingModel::bm25, 50);
        for (auto model : {ExpansionModel::rm3, ExpansionModel::klq}) {
            for (double lambda : {0.0, 0.3, 1.0}) {
                ExpansionConfig config{.fb_docs = 1 + rng() % 5, .fb_terms = 1 + rng() % 12, .lambda = lambda};
                auto result = expand(model, index, query, ranking, config);
                EXPECT_NO_THROW(result.query.validate());
                for (auto w : result.query.weights) {
                    EXPECT_GE(w, 0.0);
                    EXPECT_TRUE(std::isfinite(w));
                }
                auto w = weights_of(result.query);
                for (auto const &t : query.terms) EXPECT_TRUE(w.count(t)) << t;
                EXPECT_LE(w.size(), query.term_weights().size() + config.fb_terms);
            }
        }
    }
}

TEST(ExpansionProperty, LargeFbTermsSelectsAllPositiveTerms)
{
    auto f = three_feedback_docs();
    auto query = Query::from_terms("q", {"kiwi"});
    auto ranking = rank(f.index, query, RankingModel::bm25, 10);
    auto result = expand_klq(f.index, query, ranking, {.fb_docs = 3, .fb_terms = 1000});
    std::size_t positive = 0;
    for (auto const &[t, w] : klq_candidate_weights(f.index, ranking, 3)) positive += (w > 0.0 && t != "kiwi") ? 1 : 0;
    EXPECT_EQ(result.query.terms.size(), 1 + positive);
}

TEST(ExpansionConfigCheck, RejectsInvalid)
{
    EXPECT_THROW((ExpansionConfig{.fb_docs = 0}).validate(), std::invalid_argument);
    EXPECT_THROW((ExpansionConfig{.fb_terms = 0}).validate(), std::invalid_argument);
    EXPECT_THROW((ExpansionConfig{.lambda = 1.5}).validate(), std::invalid_argument);
    ExpansionConfig defaults;
    EXPECT_EQ(defaults.fb_docs, 3u);
    EXPECT_EQ(defaults.fb_terms, 10u);
    EXPECT_EQ(defaults.lambda, 0.5);
}

TEST(ExpandedQueryJson, RoundTrip)
{
    Query q{"q7", {"kiwi", "plum"}, {0.75, 0.25}};
    auto text = query_to_json(q);
    EXPECT_EQ(text, R"({"query_id":"q7","terms":["kiwi","plum"],"weights":[0.75,0.25]})");
    auto back = query_from_json(text);
    EXPECT_EQ(back.terms, q.terms);
    EXPECT_EQ(back.weights, q.weights);
    EXPECT_THROW((void)query_from_json(R"({"query_id":"x","terms":["a"],"weights":[]})"), ValidationError);
    EXPECT_THROW((void)query_from_json("nope"), ValidationError);
}

TEST(RankWithFeedback, NoneIsSinglePass)
{
    auto f = three_feedback_docs();
    auto query = Query::from_terms("q", {"kiwi"});
    EXPECT_EQ(rank_with_feedback(f.index, query, RankingModel::bm25, ExpansionModel::none, 10).entries,
              rank(f.index, query, RankingModel::bm25, 10).entries);
    auto expanded = rank_with_feedback(f.index, query, RankingModel::bm25, ExpansionModel::rm3, 10);
    EXPECT_GE(expanded.entries.size(), 3u);
    EXPECT_EQ(parse_expansion_model("klq"), ExpansionModel::klq);
    EXPECT_THROW((void)parse_expansion_model("bo1"), ValidationError);
}
