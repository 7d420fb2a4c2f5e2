#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qep/corpus.hpp"
#include "qep/error.hpp"
#include "qep/retrieval.hpp"

namespace qep {

/// Position-bias drop-off. `dcg` is 1 / log2(p + 1); `typeset` is the
/// 1 / (log2(p) + 1) variant, kept for sensitivity checks only.
enum class ExposureFormula { dcg, typeset };

[[nodiscard]] std::string_view to_string(ExposureFormula formula);
[[nodiscard]] ExposureFormula parse_exposure_formula(std::string_view name);

/// Exposure of rank position p >= 1. Throws std::invalid_argument for p < 1.
[[nodiscard]] double position_exposure(std::size_t p, ExposureFormula formula = ExposureFormula::dcg);

/// Per-group weights aligned to the category's group order.
struct ExposureDistribution {
    std::string category;
    std::vector<std::string> groups;
    std::vector<double> values;
    bool degenerate = false; // all-zero input replaced by the uniform distribution
};

/// Raw exposure per group: the sum of position_exposure over the positions the
/// group's documents occupy. Throws ValidationError if a ranked document is not
/// in the index.
[[nodiscard]] std::vector<double> group_exposure(Ranking const &ranking,
                                                 CollectionIndex const &index,
                                                 std::string_view category,
                                                 ExposureFormula formula = ExposureFormula::dcg);

/// Divide by the sum. All-zero input becomes uniform with the degenerate flag.
/// Throws std::invalid_argument on empty, negative or non-finite input.
[[nodiscard]] ExposureDistribution normalize_exposure(std::span<double const> raw);

/// group_exposure followed by normalize_exposure, labelled with the category.
[[nodiscard]] ExposureDistribution realized_exposure(Ranking const &ranking,
                                                     CollectionIndex const &index,
                                                     std::string_view category,
                                                     ExposureFormula formula = ExposureFormula::dcg);

// ---------------------------------------------------------------------------
// Achievable exposure for one group with m documents in a ranking of size k.

enum class EnumerationMode { exact, sampled };

[[nodiscard]] std::string_view to_string(EnumerationMode mode);
[[nodiscard]] EnumerationMode parse_enumeration_mode(std::string_view name);

/// Raised when exact enumeration would visit more subsets than allowed.
class BudgetExceeded : public ValidationError {
   public:
    using ValidationError::ValidationError;
};

struct AchievableOptions {
    EnumerationMode mode = EnumerationMode::exact;
    std::size_t bins = 200;
    double exact_budget = 1e8;          // max C(k, m) for exact mode
    std::uint64_t samples = 200'000;    // sampled mode
    std::uint64_t seed = 42;
    std::size_t distinct_limit = 10'000; // keep exact distinct values up to this many
    ExposureFormula formula = ExposureFormula::dcg;
};

struct HistogramBin {
    double low;
    double high;
    double count; // exact count, or estimate scaled to C(k, m) when sampled
};

struct ExposureValue {
    double exposure;
    std::uint64_t count;
};

struct ExposureHistogram {
    std::size_t k = 0;
    std::size_t m = 0;
    EnumerationMode mode = EnumerationMode::exact;
    double subsets = 0.0;        // C(k, m)
    std::uint64_t samples = 0;   // subsets drawn (sampled) or visited (exact)
    double min_exposure = 0.0;   // the m lowest positions
    double max_exposure = 0.0;   // the m top positions
    double mean_exposure = 0.0;  // over all subsets (exact) or drawn ones (sampled)
    std::vector<HistogramBin> bins;
    /// Exact mode only, and only when there are at most distinct_limit values.
    std::optional<std::vector<ExposureValue>> distinct;
};

/// Throws BudgetExceeded in exact mode when C(k, m) > exact_budget and
/// std::invalid_argument when m > k.
[[nodiscard]] ExposureHistogram achievable_exposure(std::size_t k, std::size_t m, AchievableOptions const &options = {});

/// C(k, m) as a floating point number (exact for values below 2^53).
[[nodiscard]] double binomial(std::size_t k, std::size_t m);

/// log10(k!) via log-gamma.
[[nodiscard]] double log_orderings(std::size_t k);
/// k! for k <= 20, empty otherwise.
[[nodiscard]] std::optional<std::uint64_t> exact_orderings(std::size_t k);

/// Columns k,m,bin_low,bin_high,count. Uses distinct values when available
/// (bin_low == bin_high) and the equal-width bins otherwise.
void write_histogram_csv(std::ostream &out, std::span<ExposureHistogram const> histograms, bool header = true);

} // namespace qep
