#include "qep/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <limits>
#include <set>

#include <json.hpp>

namespace qep {

namespace {

std::string lowercase(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

void validate_categories(std::span<Category const> categories)
{
    std::set<std::string_view> names;
    for (auto const &category : categories) {
        if (category.name.empty()) throw ValidationError("category with empty name");
        if (!names.insert(category.name).second) {
            throw ValidationError("duplicate category '" + category.name + "'");
        }
        if (category.groups.empty()) {
            throw ValidationError("category '" + category.name + "' has no groups");
        }
        if (category.groups.size() > std::numeric_limits<GroupNo>::max()) {
            throw ValidationError("category '" + category.name + "' has too many groups");
        }
        std::set<std::string_view> groups;
        for (auto const &group : category.groups) {
            if (!groups.insert(group).second) {
                throw ValidationError("category '" + category.name + "' repeats group '" + group + "'");
            }
        }
    }
}

} // namespace

std::optional<std::size_t> Category::unknown_group() const
{
    for (std::size_t g = 0; g < groups.size(); ++g) {
        auto name = lowercase(groups[g]);
        if (name == "unknown" || name == "unk") return g;
    }
    return std::nullopt;
}

double CollectionIndex::avg_doc_len() const
{
    return num_docs() == 0 ? 0.0 : static_cast<double>(m_total_tokens) / static_cast<double>(num_docs());
}

std::optional<TermId> CollectionIndex::term_id(std::string_view term) const
{
    auto it = m_term_lookup.find(std::string(term));
    if (it == m_term_lookup.end()) return std::nullopt;
    return it->second;
}

TermStats CollectionIndex::term_stats(std::string_view term) const
{
    auto id = term_id(term);
    if (!id) return {};
    auto postings = m_postings[*id];
    return {postings.size(), m_cf[*id], postings};
}

std::optional<DocNo> CollectionIndex::doc_number(std::string_view doc_id) const
{
    auto it = m_doc_lookup.find(std::string(doc_id));
    if (it == m_doc_lookup.end()) return std::nullopt;
    return it->second;
}

std::size_t CollectionIndex::category_index(std::string_view name) const
{
    for (std::size_t c = 0; c < m_categories.size(); ++c) {
        if (m_categories[c].name == name) return c;
    }
    throw ValidationError("unknown category '" + std::string(name) + "'");
}

std::size_t CollectionIndex::group_index(std::size_t category, std::string_view group) const
{
    auto const &groups = m_categories.at(category).groups;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        if (groups[g] == group) return g;
    }
    throw ValidationError("unknown group '" + std::string(group) + "' in category '"
                          + m_categories[category].name + "'");
}

std::size_t CollectionIndex::num_groups(std::size_t category) const
{
    return m_categories.at(category).groups.size();
}

GroupNo CollectionIndex::group_of(std::size_t category, DocNo doc) const
{
    return m_labels.at(category).at(doc);
}

std::size_t CollectionIndex::group_num_docs(std::size_t category, std::size_t group) const
{
    return m_group_docs.at(category).at(group);
}

std::uint64_t CollectionIndex::group_tokens(std::size_t category, std::size_t group) const
{
    return m_group_tokens.at(category).at(group);
}

std::uint64_t CollectionIndex::group_df(std::size_t category, TermId term, std::size_t group) const
{
    return m_group_df.at(category).at(static_cast<std::size_t>(term) * num_groups(category) + group);
}

std::uint64_t CollectionIndex::group_cf(std::size_t category, TermId term, std::size_t group) const
{
    return m_group_cf.at(category).at(static_cast<std::size_t>(term) * num_groups(category) + group);
}

void CollectionIndex::finalize_derived_stats()
{
    m_forward.assign(num_docs(), {});
    for (TermId t = 0; t < num_terms(); ++t) {
        for (auto const &posting : m_postings[t]) m_forward[posting.doc].emplace_back(t, posting.tf);
    }
    auto categories = m_categories.size();
    m_group_docs.assign(categories, {});
    m_group_tokens.assign(categories, {});
    m_group_df.assign(categories, {});
    m_group_cf.assign(categories, {});
    for (std::size_t c = 0; c < categories; ++c) {
        auto groups = m_categories[c].groups.size();
        auto const &labels = m_labels[c];
        m_group_docs[c].assign(groups, 0);
        m_group_tokens[c].assign(groups, 0);
        for (DocNo d = 0; d < num_docs(); ++d) {
            m_group_docs[c][labels[d]] += 1;
            m_group_tokens[c][labels[d]] += m_doc_lengths[d];
        }
        m_group_df[c].assign(num_terms() * groups, 0);
        m_group_cf[c].assign(num_terms() * groups, 0);
        for (TermId t = 0; t < num_terms(); ++t) {
            auto base = static_cast<std::size_t>(t) * groups;
            for (auto const &posting : m_postings[t]) {
                m_group_df[c][base + labels[posting.doc]] += 1;
                m_group_cf[c][base + labels[posting.doc]] += posting.tf;
            }
        }
    }
}

class IndexBuilder {
   public:
    static CollectionIndex build(std::span<Document const> docs,
                                 std::span<Category const> categories,
                                 text::Tokenizer const &tokenizer)
    {
        if (docs.empty()) throw ValidationError("empty corpus");
        validate_categories(categories);

        CollectionIndex index;
        index.m_categories.assign(categories.begin(), categories.end());
        index.m_labels.assign(categories.size(), std::vector<GroupNo>(docs.size()));

        std::vector<std::optional<std::size_t>> unknown;
        for (auto const &category : categories) unknown.push_back(category.unknown_group());

        std::map<std::string, std::vector<Posting>, std::less<>> postings;
        std::map<std::string, std::uint32_t, std::less<>> counts;
        for (std::size_t i = 0; i < docs.size(); ++i) {
            auto const &doc = docs[i];
            auto doc_no = static_cast<DocNo>(i);
            if (!index.m_doc_lookup.emplace(doc.doc_id, doc_no).second) {
                throw ValidationError("duplicate doc_id '" + doc.doc_id + "'");
            }
            index.m_doc_ids.push_back(doc.doc_id);

            for (std::size_t c = 0; c < categories.size(); ++c) {
                auto const &category = categories[c];
                auto label = doc.labels.find(category.name);
                if (label == doc.labels.end()) {
                    if (!unknown[c]) {
                        throw ValidationError("doc_id '" + doc.doc_id + "' has no label for category '"
                                              + category.name + "'");
                    }
                    index.m_labels[c][i] = static_cast<GroupNo>(*unknown[c]);
                    continue;
                }
                auto group = std::find(category.groups.begin(), category.groups.end(), label->second);
                if (group == category.groups.end()) {
                    throw ValidationError("doc_id '" + doc.doc_id + "' has unknown group '" + label->second
                                          + "' for category '" + category.name + "'");
                }
                index.m_labels[c][i] = static_cast<GroupNo>(group - category.groups.begin());
            }

            auto terms = tokenizer.tokenize(doc.text);
            index.m_doc_lengths.push_back(static_cast<std::uint32_t>(terms.size()));
            index.m_total_tokens += terms.size();
            counts.clear();
            for (auto &term : terms) counts[std::move(term)] += 1;
            for (auto const &[term, tf] : counts) {
                auto it = postings.find(term);
                if (it == postings.end()) it = postings.emplace(term, std::vector<Posting>{}).first;
                it->second.push_back({doc_no, tf});
            }
        }

        index.m_terms.reserve(postings.size());
        index.m_postings.reserve(postings.size());
        for (auto &[term, list] : postings) {
            auto id = static_cast<TermId>(index.m_terms.size());
            index.m_term_lookup.emplace(term, id);
            index.m_terms.push_back(term);
            std::uint64_t cf = 0;
            for (auto const &posting : list) cf += posting.tf;
            index.m_cf.push_back(cf);
            index.m_postings.push_back(std::move(list));
        }
        index.finalize_derived_stats();
        return index;
    }
};

CollectionIndex build_index(std::span<Document const> docs,
                            std::span<Category const> categories,
                            text::Tokenizer const &tokenizer)
{
    return IndexBuilder::build(docs, categories, tokenizer);
}

TermStats group_stats(CollectionIndex const &index,
                      std::string_view term,
                      std::string_view category,
                      std::string_view group)
{
    auto c = index.category_index(category);
    auto g = index.group_index(c, group);
    TermStats stats;
    auto id = index.term_id(term);
    if (!id) return stats;
    for (auto const &posting : index.postings(*id)) {
        if (index.group_of(c, posting.doc) != g) continue;
        stats.postings.push_back(posting);
        stats.df += 1;
        stats.cf += posting.tf;
    }
    return stats;
}

// ---------------------------------------------------------------------------
// Input formats

std::vector<Document> read_documents(std::istream &in, std::string_view source)
{
    std::vector<Document> docs;
    std::string line;
    std::size_t line_no = 0;
    auto fail = [&](std::string const &what) {
        throw ValidationError(std::string(source) + ":" + std::to_string(line_no) + ": " + what);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json object;
        try {
            object = nlohmann::json::parse(line);
        } catch (nlohmann::json::parse_error const &e) {
            fail(std::string("malformed JSON: ") + e.what());
        }
        if (!object.is_object()) fail("expected a JSON object");
        auto id = object.find("doc_id");
        if (id == object.end() || !id->is_string()) fail("missing string field 'doc_id'");
        auto text = object.find("text");
        if (text == object.end() || !text->is_string()) fail("missing string field 'text'");
        Document doc{id->get<std::string>(), text->get<std::string>(), {}};
        if (auto labels = object.find("labels"); labels != object.end()) {
            if (!labels->is_object()) fail("'labels' must be an object");
            for (auto const &[category, group] : labels->items()) {
                if (!group.is_string()) fail("label for '" + category + "' must be a string");
                doc.labels.emplace(category, group.get<std::string>());
            }
        }
        docs.push_back(std::move(doc));
    }
    return docs;
}

std::vector<Document> load_documents(std::filesystem::path const &path)
{
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open corpus file " + path.string());
    return read_documents(in, path.string());
}

std::vector<Category> parse_categories(std::string_view json_text, std::string_view source)
{
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(json_text);
    } catch (nlohmann::json::parse_error const &e) {
        throw ValidationError(std::string(source) + ": malformed JSON: " + e.what());
    }
    auto parse_one = [&](nlohmann::json const &object) {
        if (!object.is_object() || !object.contains("name") || !object.contains("groups")
            || !object["name"].is_string() || !object["groups"].is_array()) {
            throw ValidationError(std::string(source) + ": category needs string 'name' and array 'groups'");
        }
        Category category{object["name"].get<std::string>(), {}};
        for (auto const &group : object["groups"]) {
            if (!group.is_string()) {
                throw ValidationError(std::string(source) + ": group names must be strings");
            }
            category.groups.push_back(group.get<std::string>());
        }
        return category;
    };
    std::vector<Category> categories;
    if (root.is_array()) {
        for (auto const &object : root) categories.push_back(parse_one(object));
    } else {
        categories.push_back(parse_one(root));
    }
    validate_categories(categories);
    return categories;
}

std::vector<Category> load_categories(std::filesystem::path const &path)
{
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open category file " + path.string());
    std::string contents((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_categories(contents, path.string());
}

// ---------------------------------------------------------------------------
// Binary persistence. Layout (little endian):
//   magic "QEPINDEX", u8 version,
//   u64 docs, per doc: str id, u32 length
//   u64 categories, per category: str name, u64 groups, str group..., u16 label per doc
//   u64 terms, per term: str term, u64 postings, (u32 doc, u32 tf)...
// Strings are u64 length + bytes. Group statistics are rebuilt on load.

namespace {

constexpr char index_magic[8] = {'Q', 'E', 'P', 'I', 'N', 'D', 'E', 'X'};

template <typename T>
void write_pod(std::ostream &out, T value)
{
    unsigned char bytes[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        bytes[i] = static_cast<unsigned char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF);
    }
    out.write(reinterpret_cast<char const *>(bytes), sizeof(T));
}

void write_string(std::ostream &out, std::string_view s)
{
    write_pod<std::uint64_t>(out, s.size());
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <typename T>
T read_pod(std::istream &in)
{
    unsigned char bytes[sizeof(T)];
    if (!in.read(reinterpret_cast<char *>(bytes), sizeof(T))) {
        throw ValidationError("truncated index file");
    }
    std::uint64_t value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    return static_cast<T>(value);
}

std::string read_string(std::istream &in)
{
    auto size = read_pod<std::uint64_t>(in);
    if (size > (std::uint64_t{1} << 32)) throw ValidationError("corrupt index file: string too long");
    std::string s(size, '\0');
    if (size > 0 && !in.read(s.data(), static_cast<std::streamsize>(size))) {
        throw ValidationError("truncated index file");
    }
    return s;
}

} // namespace

void save_index(CollectionIndex const &index, std::ostream &out)
{
    out.write(index_magic, sizeof(index_magic));
    write_pod<std::uint8_t>(out, CollectionIndex::format_version);
    write_pod<std::uint64_t>(out, index.num_docs());
    for (DocNo d = 0; d < index.num_docs(); ++d) {
        write_string(out, index.doc_id(d));
        write_pod<std::uint32_t>(out, index.doc_length(d));
    }
    auto categories = index.categories();
    write_pod<std::uint64_t>(out, categories.size());
    for (std::size_t c = 0; c < categories.size(); ++c) {
        write_string(out, categories[c].name);
        write_pod<std::uint64_t>(out, categories[c].groups.size());
        for (auto const &group : categories[c].groups) write_string(out, group);
        for (DocNo d = 0; d < index.num_docs(); ++d) write_pod<std::uint16_t>(out, index.group_of(c, d));
    }
    write_pod<std::uint64_t>(out, index.num_terms());
    for (TermId t = 0; t < index.num_terms(); ++t) {
        write_string(out, index.term(t));
        auto postings = index.postings(t);
        write_pod<std::uint64_t>(out, postings.size());
        for (auto const &posting : postings) {
            write_pod<std::uint32_t>(out, posting.doc);
            write_pod<std::uint32_t>(out, posting.tf);
        }
    }
    if (!out) throw std::runtime_error("failed writing index");
}

void save_index(CollectionIndex const &index, std::filesystem::path const &path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write index file " + path.string());
    save_index(index, out);
}

CollectionIndex load_index(std::istream &in)
{
    char magic[sizeof(index_magic)];
    if (!in.read(magic, sizeof(magic)) || !std::equal(magic, magic + sizeof(magic), index_magic)) {
        throw ValidationError("not a qep index (bad magic)");
    }
    auto version = read_pod<std::uint8_t>(in);
    if (version != CollectionIndex::format_version) {
        throw ValidationError("unsupported index format version " + std::to_string(version));
    }
    CollectionIndex index;
    auto docs = read_pod<std::uint64_t>(in);
    for (std::uint64_t d = 0; d < docs; ++d) {
        auto id = read_string(in);
        index.m_doc_lookup.emplace(id, static_cast<DocNo>(d));
        index.m_doc_ids.push_back(std::move(id));
        auto length = read_pod<std::uint32_t>(in);
        index.m_doc_lengths.push_back(length);
        index.m_total_tokens += length;
    }
    auto categories = read_pod<std::uint64_t>(in);
    for (std::uint64_t c = 0; c < categories; ++c) {
        Category category{read_string(in), {}};
        auto groups = read_pod<std::uint64_t>(in);
        for (std::uint64_t g = 0; g < groups; ++g) category.groups.push_back(read_string(in));
        std::vector<GroupNo> labels(docs);
        for (auto &label : labels) {
            label = read_pod<std::uint16_t>(in);
            if (label >= groups) throw ValidationError("corrupt index file: group label out of range");
        }
        index.m_categories.push_back(std::move(category));
        index.m_labels.push_back(std::move(labels));
    }
    auto terms = read_pod<std::uint64_t>(in);
    for (std::uint64_t t = 0; t < terms; ++t) {
        auto term = read_string(in);
        index.m_term_lookup.emplace(term, static_cast<TermId>(t));
        index.m_terms.push_back(std::move(term));
        auto count = read_pod<std::uint64_t>(in);
        std::vector<Posting> postings;
        std::uint64_t cf = 0;
        for (std::uint64_t p = 0; p < count; ++p) {
            Posting posting{read_pod<std::uint32_t>(in), read_pod<std::uint32_t>(in)};
            if (posting.doc >= docs) throw ValidationError("corrupt index file: posting doc out of range");
            cf += posting.tf;
            postings.push_back(posting);
        }
        index.m_cf.push_back(cf);
        index.m_postings.push_back(std::move(postings));
    }
    index.finalize_derived_stats();
    return index;
}

CollectionIndex load_index(std::filesystem::path const &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open index file " + path.string());
    return load_index(in);
}

} // namespace qep
