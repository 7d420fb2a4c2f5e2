#include "qep/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace qep {

Query Query::from_terms(std::string query_id, std::vector<std::string> terms)
{
    std::vector<double> weights(terms.size(), 1.0);
    return {std::move(query_id), std::move(terms), std::move(weights)};
}

Query Query::parse(std::string query_id, std::string_view text, text::Tokenizer const &tokenizer)
{
    return from_terms(std::move(query_id), tokenizer.tokenize(text));
}

void Query::validate() const
{
    if (weights.size() != terms.size()) {
        throw std::invalid_argument("query '" + query_id + "': weights and terms differ in length");
    }
    for (double w : weights) {
        if (!std::isfinite(w) || w < 0.0) {
            throw std::invalid_argument("query '" + query_id + "': weights must be finite and nonnegative");
        }
    }
}

std::vector<std::pair<std::string, double>> Query::term_weights() const
{
    validate();
    std::vector<std::pair<std::string, double>> merged;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        auto it = std::find_if(merged.begin(), merged.end(),
                               [&](auto const &entry) { return entry.first == terms[i]; });
        if (it == merged.end()) {
            merged.emplace_back(terms[i], weights[i]);
        } else {
            it->second += weights[i];
        }
    }
    return merged;
}

double Query::total_weight() const
{
    double total = 0.0;
    for (double w : weights) total += w;
    return total;
}

std::string_view to_string(RankingModel model)
{
    switch (model) {
    case RankingModel::bm25:
        return "bm25";
    case RankingModel::tfidf:
        return "tfidf";
    }
    return "unknown";
}

RankingModel parse_ranking_model(std::string_view name)
{
    if (name == "bm25") return RankingModel::bm25;
    if (name == "tfidf" || name == "tf-idf") return RankingModel::tfidf;
    throw ValidationError("unknown ranking model '" + std::string(name) + "'");
}

namespace {

// Per-term scorer shared by single-document scoring and ranking so both
// paths evaluate identical floating point expressions.
struct TermScorer {
    CollectionIndex const &index;
    RankingModel model;
    Bm25Params params;

    [[nodiscard]] double idf(TermId term) const
    {
        auto n = static_cast<double>(index.num_docs());
        auto df = static_cast<double>(index.df(term));
        if (model == RankingModel::bm25) return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
        return std::max(0.0, std::log2(n / df));
    }

    [[nodiscard]] double operator()(double idf, std::uint32_t tf, DocNo doc) const
    {
        auto f = static_cast<double>(tf);
        if (model == RankingModel::tfidf) return f * idf;
        auto norm = 1.0 - params.b + params.b * index.doc_length(doc) / index.avg_doc_len();
        return idf * f * (params.k1 + 1.0) / (f + params.k1 * norm);
    }
};

double score_document(CollectionIndex const &index,
                      std::string_view doc_id,
                      Query const &query,
                      RankingModel model,
                      Bm25Params params)
{
    auto doc = index.doc_number(doc_id);
    if (!doc) throw std::invalid_argument("unknown doc_id '" + std::string(doc_id) + "'");
    TermScorer scorer{index, model, params};
    double score = 0.0;
    for (auto const &[term, weight] : query.term_weights()) {
        auto id = index.term_id(term);
        if (!id || weight == 0.0) continue;
        auto postings = index.postings(*id);
        auto it = std::lower_bound(postings.begin(), postings.end(), *doc,
                                   [](Posting const &p, DocNo d) { return p.doc < d; });
        if (it == postings.end() || it->doc != *doc) continue;
        score += weight * scorer(scorer.idf(*id), it->tf, *doc);
    }
    return score;
}

} // namespace

double score_bm25(CollectionIndex const &index, std::string_view doc_id, Query const &query, Bm25Params params)
{
    return score_document(index, doc_id, query, RankingModel::bm25, params);
}

double score_tfidf(CollectionIndex const &index, std::string_view doc_id, Query const &query)
{
    return score_document(index, doc_id, query, RankingModel::tfidf, {});
}

Ranking rank(CollectionIndex const &index, Query const &query, RankingModel model, std::size_t k, Bm25Params params)
{
    if (k == 0) throw std::invalid_argument("rank: k must be at least 1");
    Ranking ranking{query.query_id, k, {}};
    TermScorer scorer{index, model, params};

    std::vector<double> accumulators(index.num_docs(), 0.0);
    std::vector<DocNo> touched;
    for (auto const &[term, weight] : query.term_weights()) {
        auto id = index.term_id(term);
        if (!id || weight == 0.0) continue;
        auto idf = scorer.idf(*id);
        for (auto const &posting : index.postings(*id)) {
            if (accumulators[posting.doc] == 0.0) touched.push_back(posting.doc);
            accumulators[posting.doc] += weight * scorer(idf, posting.tf, posting.doc);
        }
    }
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());

    std::vector<RankedDoc> candidates;
    for (auto doc : touched) {
        if (accumulators[doc] > 0.0) candidates.push_back({index.doc_id(doc), accumulators[doc]});
    }
    auto better = [](RankedDoc const &a, RankedDoc const &b) {
        if (a.score != b.score) return a.score > b.score;
        return a.doc_id < b.doc_id;
    };
    auto depth = std::min(k, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(depth),
                      candidates.end(), better);
    candidates.resize(depth);
    ranking.entries = std::move(candidates);
    return ranking;
}

void write_run(std::ostream &out, std::span<Ranking const> rankings, std::string_view tag)
{
    for (auto const &ranking : rankings) {
        for (std::size_t i = 0; i < ranking.entries.size(); ++i) {
            auto const &entry = ranking.entries[i];
            out << ranking.query_id << " Q0 " << entry.doc_id << ' ' << (i + 1) << ' '
                << std::setprecision(10) << entry.score << ' ' << tag << '\n';
        }
    }
}

std::map<std::string, Ranking> read_run(std::istream &in, std::size_t k, std::string_view source)
{
    if (k == 0) throw std::invalid_argument("read_run: k must be at least 1");
    struct Row {
        long rank;
        std::size_t order;
        RankedDoc doc;
    };
    std::map<std::string, std::vector<Row>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream fields(line);
        std::string qid, q0, doc_id, tag;
        long position = 0;
        double score = 0.0;
        if (!(fields >> qid >> q0 >> doc_id >> position >> score)) {
            throw ValidationError(std::string(source) + ":" + std::to_string(line_no)
                                  + ": expected 'qid Q0 docid rank score tag'");
        }
        auto &list = rows[qid];
        list.push_back({position, list.size(), {doc_id, score}});
    }
    std::map<std::string, Ranking> rankings;
    for (auto &[qid, list] : rows) {
        std::stable_sort(list.begin(), list.end(), [](Row const &a, Row const &b) { return a.rank < b.rank; });
        Ranking ranking{qid, k, {}};
        for (auto const &row : list) {
            for (auto const &seen : ranking.entries) {
                if (seen.doc_id == row.doc.doc_id) {
                    throw ValidationError(std::string(source) + ": query '" + qid + "' lists doc '"
                                          + row.doc.doc_id + "' twice");
                }
            }
            if (ranking.entries.size() == k) break;
            ranking.entries.push_back(row.doc);
        }
        rankings.emplace(qid, std::move(ranking));
    }
    return rankings;
}

std::map<std::string, Ranking> load_run(std::filesystem::path const &path, std::size_t k)
{
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open run file " + path.string());
    return read_run(in, k, path.string());
}

} // namespace qep
