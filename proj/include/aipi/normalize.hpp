#pragma once

// Maps adjudicated codes onto [0,1]: yes/no -> 1/0, ordinal {0,1,2} -> {0, .5, 1},
// counts through the tempered log transform against a frozen reference count.

#include <map>
#include <optional>
#include <span>
#include <string>

#include "aipi/evidence_model.hpp"
#include "aipi/json_util.hpp"

namespace aipi {

/// A value in [0,1] rounded to 9 decimals, or unknown.
class NormalizedValue {
 public:
  NormalizedValue() = default;

  [[nodiscard]] static NormalizedValue unknown() noexcept { return {}; }
  /// Clamps into [0,1] and rounds half-even at 9 decimals.
  [[nodiscard]] static NormalizedValue of(double v) noexcept;

  [[nodiscard]] bool known() const noexcept { return value_.has_value(); }
  [[nodiscard]] double value() const { return value_.value(); }
  [[nodiscard]] const std::optional<double>& get() const noexcept { return value_; }

  friend bool operator==(const NormalizedValue&, const NormalizedValue&) = default;

 private:
  std::optional<double> value_;
};

/// indicator_id -> c_ref, one entry per count indicator, every value >= 1.
using CountReferenceTable = std::map<std::string, double, std::less<>>;

/// Nearest-rank 95th percentile (rank = ceil(0.95 n), 1-based) of the known
/// adjudicated counts of each count indicator; floored at 1.
[[nodiscard]] CountReferenceTable compute_c_ref(std::span<const IndicatorDef> indicators,
                                                const AdjudicatedTable& adjudicated);
[[nodiscard]] CountReferenceTable compute_c_ref(const Dataset& d);

/// min(1, ln(1+c) / ln(1+c_ref)), unrounded.
[[nodiscard]] double count_transform(double c, double c_ref);

/// Stale codes are capped at 0.5. Throws E_KIND_MISMATCH, E_MISSING_CREF.
[[nodiscard]] NormalizedValue normalize_code(const AdjudicatedCode& code, const IndicatorDef& def,
                                             const CountReferenceTable& refs);

[[nodiscard]] json c_ref_to_json(const CountReferenceTable& refs);
/// Throws E_CREF_FORMAT on malformed input.
[[nodiscard]] CountReferenceTable c_ref_from_json(const json& j);

}  // namespace aipi
