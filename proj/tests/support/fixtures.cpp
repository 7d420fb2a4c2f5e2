#include "fixtures.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "qep/text.hpp"

namespace qep::fixtures {

std::vector<std::string> pseudo_words(std::size_t count, std::uint64_t seed)
{
    static constexpr std::string_view consonants = "bdfgklmnprstvz";
    static constexpr std::string_view vowels = "aou";
    std::vector<std::string> all;
    for (char c1 : consonants) {
        for (char v1 : vowels) {
            for (char c2 : consonants) {
                for (char v2 : vowels) {
                    std::string word{c1, v1, c2, v2};
                    if (!text::Tokenizer::english().is_stopword(word)) all.push_back(word);
                }
            }
        }
    }
    std::mt19937_64 rng(seed);
    std::shuffle(all.begin(), all.end(), rng);
    all.resize(std::min(count, all.size()));
    return all;
}

namespace {

// Zipf-like draw: word i has weight 1 / (i + 1).
std::string const &draw(std::mt19937_64 &rng, std::vector<std::string> const &vocabulary)
{
    std::vector<double> weights(vocabulary.size());
    for (std::size_t i = 0; i < weights.size(); ++i) weights[i] = 1.0 / static_cast<double>(i + 1);
    std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
    return vocabulary[pick(rng)];
}

std::string join(std::vector<std::string> const &words)
{
    std::string out;
    for (auto const &w : words) {
        if (!out.empty()) out += ' ';
        out += w;
    }
    return out;
}

} // namespace

FixtureCorpus random_corpus(std::mt19937_64 &rng, std::size_t max_docs, std::size_t max_groups,
                            std::vector<std::string> const &vocabulary)
{
    std::uniform_int_distribution<std::size_t> doc_count(2, max_docs);
    std::uniform_int_distribution<std::size_t> group_count(1, max_groups);
    std::uniform_int_distribution<std::size_t> length(1, 12);
    std::bernoulli_distribution noise(0.2);

    FixtureCorpus corpus;
    auto groups = group_count(rng);
    Category category{"group", {}};
    for (std::size_t g = 0; g < groups; ++g) category.groups.push_back("g" + std::to_string(g));
    corpus.categories = {category, Category{"half", {"even", "odd"}}};

    std::uniform_int_distribution<std::size_t> group_of(0, groups - 1);
    auto docs = doc_count(rng);
    for (std::size_t d = 0; d < docs; ++d) {
        std::vector<std::string> words;
        auto n = length(rng);
        for (std::size_t i = 0; i < n; ++i) {
            words.push_back(draw(rng, vocabulary));
            if (noise(rng)) words.push_back("the");
        }
        Document doc;
        doc.doc_id = "d" + std::to_string(d);
        doc.text = join(words) + ".";
        doc.labels["group"] = category.groups[group_of(rng)];
        doc.labels["half"] = d % 2 == 0 ? "even" : "odd";
        corpus.docs.push_back(std::move(doc));
    }
    return corpus;
}

FixtureCorpus random_ranking_corpus(std::mt19937_64 &rng, std::size_t docs, std::vector<std::string> const &vocabulary)
{
    std::uniform_int_distribution<std::size_t> length(5, 60);
    FixtureCorpus corpus;
    corpus.categories = {Category{"half", {"even", "odd"}}};
    for (std::size_t d = 0; d < docs; ++d) {
        std::vector<std::string> words;
        auto n = length(rng);
        for (std::size_t i = 0; i < n; ++i) words.push_back(draw(rng, vocabulary));
        Document doc;
        auto number = std::to_string(d);
        doc.doc_id = "doc" + std::string(number.size() < 4 ? 4 - number.size() : 0, '0') + number;
        doc.text = join(words);
        doc.labels["half"] = d % 2 == 0 ? "even" : "odd";
        corpus.docs.push_back(std::move(doc));
    }
    return corpus;
}

SkewedCollection planted_skew_collection(std::uint64_t seed, std::size_t queries)
{
    constexpr std::size_t groups = 4;
    constexpr std::size_t docs_per_group = 30;
    constexpr std::size_t topics_per_group = 10;
    constexpr std::size_t background_size = 60;
    constexpr std::size_t background_length = 20;

    auto words = pseudo_words(groups * topics_per_group + background_size, seed);
    std::vector<std::string> topics(words.begin(), words.begin() + groups * topics_per_group);
    std::vector<std::string> background(words.begin() + groups * topics_per_group, words.end());

    std::mt19937_64 rng(seed);
    std::bernoulli_distribution hot_use(0.25);
    std::bernoulli_distribution cold_use(0.015);
    std::uniform_int_distribution<std::uint32_t> hot_tf(1, 4);
    std::uniform_int_distribution<std::size_t> background_pick(0, background.size() - 1);

    SkewedCollection collection;
    collection.corpus.categories = {Category{"region", {"north", "south", "east", "west"}}};
    auto const &names = collection.corpus.categories[0].groups;
    for (std::size_t g = 0; g < groups; ++g) {
        for (std::size_t i = 0; i < docs_per_group; ++i) {
            std::vector<std::string> tokens;
            for (std::size_t j = 0; j < background_length; ++j) tokens.push_back(background[background_pick(rng)]);
            for (std::size_t t = 0; t < topics.size(); ++t) {
                bool hot = t / topics_per_group == g;
                std::uint32_t tf = 0;
                if (hot && hot_use(rng)) tf = hot_tf(rng);
                if (!hot && cold_use(rng)) tf = 1;
                for (std::uint32_t r = 0; r < tf; ++r) tokens.push_back(topics[t]);
            }
            std::shuffle(tokens.begin(), tokens.end(), rng);
            Document doc;
            doc.doc_id = names[g] + "-" + std::to_string(100 + i);
            doc.text = join(tokens);
            doc.labels["region"] = names[g];
            collection.corpus.docs.push_back(std::move(doc));
        }
    }

    std::uniform_int_distribution<std::size_t> topic_pick(0, topics_per_group - 1);
    for (std::size_t q = 0; q < queries; ++q) {
        auto g = q % groups;
        auto a = topic_pick(rng);
        auto b = topic_pick(rng);
        while (b == a) b = topic_pick(rng);
        auto text = topics[g * topics_per_group + a] + " " + topics[g * topics_per_group + b];
        auto number = std::to_string(q + 1);
        auto id = "q" + std::string(number.size() < 3 ? 3 - number.size() : 0, '0') + number;
        collection.queries.push_back(Query::parse(id, text));
        collection.hot_group.push_back(g);
    }
    return collection;
}

FixtureCorpus four_doc_corpus()
{
    FixtureCorpus corpus;
    corpus.categories = {Category{"region", {"A", "B"}}};
    corpus.docs = {
        {"d1", "Baroque museum with a library.", {{"region", "A"}}},
        {"d2", "The museum of baroque architecture and its library", {{"region", "A"}}},
        {"d3", "Library architecture; a museum!", {{"region", "B"}}},
        {"d4", "Gardens and fountains", {{"region", "B"}}},
    };
    return corpus;
}

TempDir::TempDir(std::string const &prefix)
{
    std::random_device device;
    auto base = std::filesystem::temp_directory_path();
    for (;;) {
        auto candidate = base / (prefix + "-" + std::to_string(device()));
        if (std::filesystem::create_directory(candidate)) {
            m_path = candidate;
            break;
        }
    }
}

TempDir::~TempDir()
{
    std::error_code ignored;
    std::filesystem::remove_all(m_path, ignored);
}

void write_text(std::filesystem::path const &path, std::string const &contents)
{
    std::ofstream out(path, std::ios::binary);
    out << contents;
}

std::string read_text(std::filesystem::path const &path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_corpus_files(FixtureCorpus const &corpus, std::filesystem::path const &docs_path,
                        std::filesystem::path const &categories_path)
{
    std::ostringstream docs;
    for (auto const &doc : corpus.docs) {
        nlohmann::json line;
        line["doc_id"] = doc.doc_id;
        line["text"] = doc.text;
        line["labels"] = doc.labels;
        docs << line.dump() << '\n';
    }
    write_text(docs_path, docs.str());
    auto categories = nlohmann::json::array();
    for (auto const &category : corpus.categories) {
        categories.push_back({{"name", category.name}, {"groups", category.groups}});
    }
    write_text(categories_path, categories.dump(2));
}

} // namespace qep::fixtures
