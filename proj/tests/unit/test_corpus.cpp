#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "qep/corpus.hpp"

using namespace qep;
using qep::fixtures::FixtureCorpus;

namespace {

CollectionIndex build(FixtureCorpus const &corpus) { return build_index(corpus.docs, corpus.categories); }

std::string error_of(auto &&fn)
{
    try {
        fn();
    } catch (ValidationError const &e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST(BuildIndex, FourDocFixtureCounts)
{
    auto index = build(fixtures::four_doc_corpus());
    EXPECT_EQ(index.num_docs(), 4u);
    auto stats = index.term_stats("museum");
    EXPECT_EQ(stats.df, 3u);
    EXPECT_EQ(stats.cf, 3u);
    auto a = group_stats(index, "museum", "region", "A");
    auto b = group_stats(index, "museum", "region", "B");
    EXPECT_EQ(a.df, 2u);
    EXPECT_EQ(b.df, 1u);
    EXPECT_EQ(a.df + b.df, stats.df);
}

TEST(BuildIndex, SingleDocCounts)
{
    std::vector<Document> docs{{"only", "kiwi kiwi plum", {}}};
    auto index = build_index(docs, std::vector<Category>{});
    auto kiwi = index.term_stats("kiwi");
    EXPECT_EQ(kiwi.cf, 2u);
    EXPECT_EQ(kiwi.df, 1u);
    EXPECT_EQ(index.total_tokens(), 3u);
    EXPECT_DOUBLE_EQ(index.avg_doc_len(), 3.0);
    EXPECT_EQ(index.term_stats("absent").df, 0u);
}

TEST(BuildIndex, RejectsEmptyCorpus)
{
    EXPECT_NE(error_of([] { (void)build_index(std::vector<Document>{}, std::vector<Category>{}); }).find("empty corpus"),
              std::string::npos);
}

TEST(BuildIndex, RejectsBadDocumentsNamingThem)
{
    std::vector<Category> cats{{"region", {"A", "B"}}};
    std::vector<Document> dup{{"d1", "x", {{"region", "A"}}}, {"d1", "y", {{"region", "B"}}}};
    EXPECT_NE(error_of([&] { (void)build_index(dup, cats); }).find("d1"), std::string::npos);

    std::vector<Document> missing{{"d1", "x", {{"region", "A"}}}, {"d2", "y", {}}};
    auto message = error_of([&] { (void)build_index(missing, cats); });
    EXPECT_NE(message.find("d2"), std::string::npos);
    EXPECT_NE(message.find("region"), std::string::npos);

    std::vector<Document> unknown{{"d7", "x", {{"region", "Atlantis"}}}};
    message = error_of([&] { (void)build_index(unknown, cats); });
    EXPECT_NE(message.find("d7"), std::string::npos);
    EXPECT_NE(message.find("Atlantis"), std::string::npos);
}

TEST(BuildIndex, MissingLabelGoesToUnknownGroupWhenDefined)
{
    std::vector<Category> cats{{"geo", {"Europe", "Unknown"}}};
    std::vector<Document> docs{{"d1", "x", {{"geo", "Europe"}}}, {"d2", "y", {}}};
    auto index = build_index(docs, cats);
    EXPECT_EQ(index.group_of(0, 1), 1u);
    EXPECT_EQ(index.group_num_docs(0, 1), 1u);

    std::vector<Category> short_name{{"age", {"old", "unk"}}};
    std::vector<Document> one{{"d1", "x", {}}};
    EXPECT_EQ(build_index(one, short_name).group_num_docs(0, 1), 1u);
}

TEST(GroupStats, CountsWithinGroup)
{
    std::vector<Category> cats{{"region", {"A", "B"}}};
    std::vector<Document> docs{
        {"a1", "kiwi kiwi kiwi plum", {{"region", "A"}}}, {"a2", "plum", {{"region", "A"}}},
        {"a3", "kiwi fig", {{"region", "A"}}},           {"a4", "fig", {{"region", "A"}}},
        {"a5", "date", {{"region", "A"}}},               {"b1", "kiwi", {{"region", "B"}}},
    };
    auto index = build_index(docs, cats);
    auto a = group_stats(index, "kiwi", "region", "A");
    EXPECT_EQ(a.df, 2u);
    EXPECT_EQ(a.cf, 4u);
    EXPECT_EQ(a.postings.size(), 2u);
    auto absent = group_stats(index, "fig", "region", "B");
    EXPECT_EQ(absent.df, 0u);
    EXPECT_EQ(absent.cf, 0u);
    EXPECT_TRUE(absent.postings.empty());
    EXPECT_THROW((void)group_stats(index, "kiwi", "region", "Atlantis"), ValidationError);
    EXPECT_THROW((void)group_stats(index, "kiwi", "planet", "A"), ValidationError);
}

TEST(CorpusProperty, GroupsPartitionCollectionStats)
{
    std::mt19937_64 rng(11);
    auto vocabulary = fixtures::pseudo_words(10, 3);
    for (int trial = 0; trial < 50; ++trial) {
        auto corpus = fixtures::random_corpus(rng, 20, 4, vocabulary);
        auto index = build(corpus);
        for (std::size_t c = 0; c < index.categories().size(); ++c) {
            std::size_t docs = 0;
            for (std::size_t g = 0; g < index.num_groups(c); ++g) docs += index.group_num_docs(c, g);
            EXPECT_EQ(docs, index.num_docs());
            for (TermId t = 0; t < index.num_terms(); ++t) {
                std::uint64_t df = 0;
                std::uint64_t cf = 0;
                for (std::size_t g = 0; g < index.num_groups(c); ++g) {
                    df += index.group_df(c, t, g);
                    cf += index.group_cf(c, t, g);
                }
                EXPECT_EQ(df, index.df(t));
                EXPECT_EQ(cf, index.cf(t));
            }
        }
        for (TermId t = 0; t < index.num_terms(); ++t) {
            EXPECT_GE(index.df(t), 1u);
            EXPECT_LE(index.df(t), index.num_docs());
            EXPECT_GE(index.cf(t), index.df(t));
            EXPECT_EQ(index.postings(t).size(), index.df(t));
        }
    }
}

TEST(CorpusProperty, RebuildIsDeterministic)
{
    std::mt19937_64 rng(5);
    auto vocabulary = fixtures::pseudo_words(10, 3);
    for (int trial = 0; trial < 20; ++trial) {
        auto corpus = fixtures::random_corpus(rng, 20, 4, vocabulary);
        EXPECT_TRUE(build(corpus) == build(corpus));
    }
}

TEST(IndexFile, RoundTrip)
{
    std::mt19937_64 rng(9);
    auto corpus = fixtures::random_corpus(rng, 20, 4, fixtures::pseudo_words(10, 3));
    auto index = build(corpus);
    std::stringstream buffer;
    save_index(index, buffer);
    auto bytes = buffer.str();
    EXPECT_EQ(bytes.substr(0, 8), "QEPINDEX");
    std::istringstream in(bytes);
    auto loaded = load_index(in);
    EXPECT_TRUE(loaded == index);
    EXPECT_EQ(loaded.group_df(0, 0, 0), index.group_df(0, 0, 0));
}

TEST(IndexFile, RejectsForeignOrTruncatedInput)
{
    std::istringstream junk("NOTANINDEX");
    EXPECT_THROW((void)load_index(junk), ValidationError);

    auto index = build(fixtures::four_doc_corpus());
    std::stringstream buffer;
    save_index(index, buffer);
    auto bytes = buffer.str();
    auto wrong_version = bytes;
    wrong_version[8] = static_cast<char>(99);
    std::istringstream in(wrong_version);
    EXPECT_THROW((void)load_index(in), ValidationError);
    std::istringstream truncated(bytes.substr(0, bytes.size() / 2));
    EXPECT_THROW((void)load_index(truncated), ValidationError);
}

TEST(DocumentReader, ReadsJsonLines)
{
    std::istringstream in(R"({"doc_id": "d1", "text": "Museum", "labels": {"region": "A"}}

{"doc_id": "d2", "text": "Library", "labels": {}})");
    auto docs = read_documents(in);
    ASSERT_EQ(docs.size(), 2u);
    EXPECT_EQ(docs[0].labels.at("region"), "A");
    EXPECT_EQ(docs[1].text, "Library");
}

TEST(DocumentReader, MalformedLineIsNamed)
{
    std::istringstream in("{\"doc_id\": \"d1\", \"text\": \"x\", \"labels\": {}}\n{\"doc_id\": \"d2\", \"text\": \n");
    auto message = error_of([&] { (void)read_documents(in, "docs.jsonl"); });
    EXPECT_NE(message.find("docs.jsonl:2"), std::string::npos) << message;

    std::istringstream missing_field("{\"text\": \"x\"}\n");
    EXPECT_NE(error_of([&] { (void)read_documents(missing_field, "f"); }).find("f:1"), std::string::npos);
}

TEST(CategoryReader, AcceptsObjectOrArray)
{
    auto one = parse_categories(R"({"name": "region", "groups": ["A", "B"]})");
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one[0].groups, (std::vector<std::string>{"A", "B"}));
    auto two = parse_categories(R"([{"name": "a", "groups": ["x"]}, {"name": "b", "groups": ["y", "z"]}])");
    EXPECT_EQ(two.size(), 2u);
}

TEST(CategoryReader, RejectsInvalidDefinitions)
{
    EXPECT_THROW((void)parse_categories(R"({"name": "r", "groups": []})"), ValidationError);
    EXPECT_THROW((void)parse_categories(R"({"name": "r", "groups": ["A", "A"]})"), ValidationError);
    EXPECT_THROW((void)parse_categories(R"([{"name": "r", "groups": ["A"]}, {"name": "r", "groups": ["B"]}])"),
                 ValidationError);
    EXPECT_THROW((void)parse_categories("{"), ValidationError);
}

TEST(BuildIndex, RelabelingChangesOnlyGroupStats)
{
    auto corpus = fixtures::four_doc_corpus();
    auto first = build(corpus);
    corpus.docs[0].labels["region"] = "B";
    auto second = build(corpus);
    EXPECT_EQ(first.num_terms(), second.num_terms());
    EXPECT_EQ(first.total_tokens(), second.total_tokens());
    for (TermId t = 0; t < first.num_terms(); ++t) {
        EXPECT_EQ(first.term(t), second.term(t));
        EXPECT_TRUE(first.term_stats(first.term(t)) == second.term_stats(second.term(t)));
    }
    EXPECT_NE(first.group_num_docs(0, 0), second.group_num_docs(0, 0));
}
