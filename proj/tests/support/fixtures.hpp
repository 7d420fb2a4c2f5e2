#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "qep/corpus.hpp"
#include "qep/retrieval.hpp"

namespace qep::fixtures {

struct FixtureCorpus {
    std::vector<Document> docs;
    std::vector<Category> categories;
};

/// Four-letter consonant-vowel words; distinct words keep distinct stems.
std::vector<std::string> pseudo_words(std::size_t count, std::uint64_t seed);

/// Small random corpus for oracle comparisons: up to `max_docs` documents,
/// one category "group" with up to `max_groups` groups (some may be empty),
/// and a second category "half" splitting documents by parity.
FixtureCorpus random_corpus(std::mt19937_64 &rng, std::size_t max_docs, std::size_t max_groups,
                            std::vector<std::string> const &vocabulary);

/// Corpus of `docs` documents with random term frequencies, for ranking checks.
FixtureCorpus random_ranking_corpus(std::mt19937_64 &rng, std::size_t docs, std::vector<std::string> const &vocabulary);

/// Planted-skew collection: every topic word belongs to one "hot" group that
/// holds most of its occurrences.
struct SkewedCollection {
    FixtureCorpus corpus;
    std::vector<Query> queries;
    std::vector<std::size_t> hot_group; // per query
};
SkewedCollection planted_skew_collection(std::uint64_t seed, std::size_t queries = 40);

/// The classic 4-doc fixture: groups A and B with two documents each.
FixtureCorpus four_doc_corpus();

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
   public:
    explicit TempDir(std::string const &prefix);
    ~TempDir();
    TempDir(TempDir const &) = delete;
    TempDir &operator=(TempDir const &) = delete;
    [[nodiscard]] std::filesystem::path const &path() const { return m_path; }

   private:
    std::filesystem::path m_path;
};

void write_text(std::filesystem::path const &path, std::string const &contents);
[[nodiscard]] std::string read_text(std::filesystem::path const &path);
void write_corpus_files(FixtureCorpus const &corpus, std::filesystem::path const &docs_path,
                        std::filesystem::path const &categories_path);

} // namespace qep::fixtures
