#pragma once

// Double-coding sample selection and inter-rater agreement.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aipi/evidence_model.hpp"
#include "aipi/json_util.hpp"
#include "aipi/normalize.hpp"

namespace aipi {

using SampleManifest = std::vector<ItemKey>;

/// Stratified by pillar x indicator kind. Each stratum (sorted by subject,
/// indicator) is shuffled by a splitmix64 Fisher-Yates keyed on the seed and
/// the stratum label; the first ceil(fraction * size) items are kept.
/// Throws E_EMPTY, E_RANGE.
[[nodiscard]] SampleManifest select_sample(const Dataset& d, double fraction, std::uint64_t seed);

/// Rows are items, columns are coders; nullopt marks a missing code.
using CodingMatrix = std::vector<std::vector<std::optional<double>>>;

enum class AlphaMetric { nominal, interval };

struct AlphaResult {
  std::optional<double> alpha;
  /// Why alpha is undefined: NO_PAIRABLE_VALUES, TOO_FEW_ITEMS or NO_EXPECTED_DISAGREEMENT.
  std::string reason;
  std::size_t pairable_items = 0;
  std::size_t pairable_values = 0;
};

/// Krippendorff's alpha from the coincidence matrix of pairable values.
[[nodiscard]] AlphaResult krippendorff_alpha(const CodingMatrix& codes, AlphaMetric metric);

/// Share of agreeing coder pairs per item, averaged over items with >= 2
/// codes. Unknown is a value like any other here. Throws E_NO_PAIRS.
[[nodiscard]] double percent_agreement(std::span<const std::vector<CodeValue>> items);

struct ReliabilityReport {
  AlphaResult alpha_overall;
  std::map<IndicatorKind, AlphaResult> alpha_by_kind;
  std::optional<double> percent_agreement;
  std::size_t n_items = 0;  // sampled items coded by >= 2 coders
  std::size_t n_coders = 0;
  std::size_t n_sampled = 0;
  double fraction = 0.0;
  std::uint64_t seed = 0;
  double threshold = 0.667;
  SampleManifest sample_manifest;
};

/// Agreement over the sampled items: nominal alpha on raw binary codes,
/// interval alpha on normalized values for ordinal3, count and overall.
[[nodiscard]] ReliabilityReport reliability_report(const Dataset& d, const CountReferenceTable& c_ref,
                                                   double fraction, std::uint64_t seed, double threshold);

[[nodiscard]] json reliability_to_json(const ReliabilityReport& r);

}  // namespace aipi
