#include "qep/exposure.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>
#include <random>
#include <stdexcept>
#include <unordered_map>

namespace qep {

std::string_view to_string(ExposureFormula formula)
{
    return formula == ExposureFormula::dcg ? "dcg" : "typeset";
}

ExposureFormula parse_exposure_formula(std::string_view name)
{
    if (name == "dcg") return ExposureFormula::dcg;
    if (name == "typeset") return ExposureFormula::typeset;
    throw ValidationError("unknown exposure formula '" + std::string(name) + "'");
}

double position_exposure(std::size_t p, ExposureFormula formula)
{
    if (p < 1) throw std::invalid_argument("position_exposure: positions start at 1");
    auto position = static_cast<double>(p);
    if (formula == ExposureFormula::typeset) return 1.0 / (std::log2(position) + 1.0);
    return 1.0 / std::log2(position + 1.0);
}

std::vector<double> group_exposure(Ranking const &ranking,
                                   CollectionIndex const &index,
                                   std::string_view category,
                                   ExposureFormula formula)
{
    auto c = index.category_index(category);
    std::vector<double> totals(index.num_groups(c), 0.0);
    for (std::size_t i = 0; i < ranking.entries.size(); ++i) {
        auto const &doc_id = ranking.entries[i].doc_id;
        auto doc = index.doc_number(doc_id);
        if (!doc) {
            throw ValidationError("ranked doc '" + doc_id + "' has no label for category '"
                                  + std::string(category) + "'");
        }
        totals[index.group_of(c, *doc)] += position_exposure(i + 1, formula);
    }
    return totals;
}

ExposureDistribution normalize_exposure(std::span<double const> raw)
{
    if (raw.empty()) throw std::invalid_argument("normalize_exposure: no groups");
    double sum = 0.0;
    for (double v : raw) {
        if (!std::isfinite(v) || v < 0.0) {
            throw std::invalid_argument("normalize_exposure: values must be finite and nonnegative");
        }
        sum += v;
    }
    ExposureDistribution distribution;
    if (sum == 0.0) {
        distribution.values.assign(raw.size(), 1.0 / static_cast<double>(raw.size()));
        distribution.degenerate = true;
        return distribution;
    }
    distribution.values.reserve(raw.size());
    for (double v : raw) distribution.values.push_back(v / sum);
    return distribution;
}

ExposureDistribution realized_exposure(Ranking const &ranking,
                                       CollectionIndex const &index,
                                       std::string_view category,
                                       ExposureFormula formula)
{
    auto raw = group_exposure(ranking, index, category, formula);
    auto distribution = normalize_exposure(raw);
    auto const &cat = index.categories()[index.category_index(category)];
    distribution.category = cat.name;
    distribution.groups = cat.groups;
    return distribution;
}

std::string_view to_string(EnumerationMode mode)
{
    return mode == EnumerationMode::exact ? "exact" : "sampled";
}

EnumerationMode parse_enumeration_mode(std::string_view name)
{
    if (name == "exact") return EnumerationMode::exact;
    if (name == "sampled") return EnumerationMode::sampled;
    throw ValidationError("unknown enumeration mode '" + std::string(name) + "'");
}

double binomial(std::size_t k, std::size_t m)
{
    if (m > k) return 0.0;
    m = std::min(m, k - m);
    long double result = 1.0L;
    for (std::size_t i = 1; i <= m; ++i) {
        result = result * static_cast<long double>(k - m + i) / static_cast<long double>(i);
    }
    return static_cast<double>(std::round(result));
}

double log_orderings(std::size_t k) { return std::lgamma(static_cast<double>(k) + 1.0) / std::log(10.0); }

std::optional<std::uint64_t> exact_orderings(std::size_t k)
{
    if (k > 20) return std::nullopt;
    std::uint64_t result = 1;
    for (std::uint64_t i = 2; i <= k; ++i) result *= i;
    return result;
}

namespace {

class Binner {
   public:
    Binner(double low, double high, std::size_t bins) : m_low(low), m_high(high)
    {
        if (bins == 0) throw std::invalid_argument("achievable_exposure: bins must be positive");
        m_counts.assign(high > low ? bins : 1, 0);
    }

    void add(double value)
    {
        std::size_t bin = 0;
        if (m_counts.size() > 1) {
            auto position = (value - m_low) / (m_high - m_low) * static_cast<double>(m_counts.size());
            bin = position <= 0.0 ? 0 : static_cast<std::size_t>(position);
            bin = std::min(bin, m_counts.size() - 1);
        }
        m_counts[bin] += 1;
    }

    [[nodiscard]] std::vector<HistogramBin> bins(double scale) const
    {
        std::vector<HistogramBin> out;
        auto n = m_counts.size();
        auto width = n > 1 ? (m_high - m_low) / static_cast<double>(n) : 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            auto low = m_low + width * static_cast<double>(i);
            auto high = i + 1 == n ? m_high : m_low + width * static_cast<double>(i + 1);
            out.push_back({low, high, static_cast<double>(m_counts[i]) * scale});
        }
        return out;
    }

   private:
    double m_low;
    double m_high;
    std::vector<std::uint64_t> m_counts;
};

// Sum over positions in ascending order so equal subsets give equal bits.
double subset_exposure(std::span<std::size_t const> positions, std::span<double const> exposure)
{
    double sum = 0.0;
    for (auto p : positions) sum += exposure[p - 1];
    return sum;
}

} // namespace

ExposureHistogram achievable_exposure(std::size_t k, std::size_t m, AchievableOptions const &options)
{
    if (m > k) throw std::invalid_argument("achievable_exposure: m must not exceed k");
    ExposureHistogram histogram;
    histogram.k = k;
    histogram.m = m;
    histogram.mode = options.mode;
    histogram.subsets = binomial(k, m);

    std::vector<double> exposure(k);
    for (std::size_t p = 1; p <= k; ++p) exposure[p - 1] = position_exposure(p, options.formula);

    std::vector<std::size_t> top(m);
    std::vector<std::size_t> bottom(m);
    for (std::size_t i = 0; i < m; ++i) {
        top[i] = i + 1;
        bottom[i] = k - m + 1 + i;
    }
    histogram.max_exposure = subset_exposure(top, exposure);
    histogram.min_exposure = subset_exposure(bottom, exposure);
    Binner binner(histogram.min_exposure, histogram.max_exposure, options.bins);

    if (options.mode == EnumerationMode::exact) {
        if (histogram.subsets > options.exact_budget) {
            throw BudgetExceeded("exact enumeration of C(" + std::to_string(k) + "," + std::to_string(m)
                                 + ") subsets exceeds the budget; use sampled mode");
        }
        std::unordered_map<double, std::uint64_t> distinct;
        bool keep_distinct = true;
        double total = 0.0;
        std::uint64_t visited = 0;

        // Lexicographic m-subsets of 1..k; partial[i] holds the exposure sum of
        // the first i chosen positions.
        std::vector<std::size_t> chosen(m);
        std::vector<double> partial(m + 1, 0.0);
        auto visit = [&](double value) {
            ++visited;
            total += value;
            binner.add(value);
            if (keep_distinct) {
                distinct[value] += 1;
                if (distinct.size() > options.distinct_limit) {
                    keep_distinct = false;
                    distinct.clear();
                }
            }
        };
        if (m == 0) {
            visit(0.0);
        } else {
            for (std::size_t i = 0; i < m; ++i) {
                chosen[i] = i + 1;
                partial[i + 1] = partial[i] + exposure[chosen[i] - 1];
            }
            while (true) {
                visit(partial[m]);
                // advance to the next subset
                std::size_t i = m;
                while (i > 0 && chosen[i - 1] == k - m + i) --i;
                if (i == 0) break;
                chosen[i - 1] += 1;
                partial[i] = partial[i - 1] + exposure[chosen[i - 1] - 1];
                for (std::size_t j = i; j < m; ++j) {
                    chosen[j] = chosen[j - 1] + 1;
                    partial[j + 1] = partial[j] + exposure[chosen[j] - 1];
                }
            }
        }
        histogram.samples = visited;
        histogram.mean_exposure = total / static_cast<double>(visited);
        histogram.bins = binner.bins(1.0);
        if (keep_distinct) {
            std::vector<ExposureValue> values;
            values.reserve(distinct.size());
            for (auto const &[value, count] : distinct) values.push_back({value, count});
            std::sort(values.begin(), values.end(),
                      [](ExposureValue const &a, ExposureValue const &b) { return a.exposure < b.exposure; });
            histogram.distinct = std::move(values);
        }
        return histogram;
    }

    if (options.samples == 0) throw std::invalid_argument("achievable_exposure: samples must be positive");
    std::mt19937_64 rng(options.seed);
    std::vector<std::size_t> subset;
    subset.reserve(m);
    double total = 0.0;
    for (std::uint64_t s = 0; s < options.samples; ++s) {
        // Floyd's algorithm: uniform m-subset of 1..k
        subset.clear();
        for (std::size_t j = k - m + 1; j <= k; ++j) {
            std::uniform_int_distribution<std::size_t> pick(1, j);
            auto t = pick(rng);
            if (std::find(subset.begin(), subset.end(), t) == subset.end()) {
                subset.push_back(t);
            } else {
                subset.push_back(j);
            }
        }
        std::sort(subset.begin(), subset.end());
        auto value = subset_exposure(subset, exposure);
        total += value;
        binner.add(value);
    }
    histogram.samples = options.samples;
    histogram.mean_exposure = total / static_cast<double>(options.samples);
    histogram.bins = binner.bins(histogram.subsets / static_cast<double>(options.samples));
    return histogram;
}

void write_histogram_csv(std::ostream &out, std::span<ExposureHistogram const> histograms, bool header)
{
    if (header) out << "k,m,bin_low,bin_high,count\n";
    auto flags = out.flags();
    auto precision = out.precision();
    for (auto const &histogram : histograms) {
        if (histogram.distinct) {
            for (auto const &value : *histogram.distinct) {
                out << histogram.k << ',' << histogram.m << ',' << std::setprecision(10) << value.exposure << ','
                    << value.exposure << ',' << value.count << '\n';
            }
            continue;
        }
        for (auto const &bin : histogram.bins) {
            out << histogram.k << ',' << histogram.m << ',' << std::setprecision(10) << bin.low << ','
                << bin.high << ',';
            if (histogram.mode == EnumerationMode::exact) {
                out << std::setprecision(17) << bin.count;
            } else {
                out << std::setprecision(6) << bin.count;
            }
            out << '\n';
        }
    }
    out.flags(flags);
    out.precision(precision);
}

} // namespace qep
