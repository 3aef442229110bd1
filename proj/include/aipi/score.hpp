#pragma once

// Pillar and overall scores under the three treatments of Unknown:
//   evid  - Unknown counts as 0 (lower bound)
//   known - mean over indicators with evidence (undefined at zero coverage)
//   opt   - Unknown counts as 1 (upper bound)
// plus coverage intervals, provider rollups and the procurement floor checks.

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "aipi/evidence_model.hpp"
#include "aipi/json_util.hpp"
#include "aipi/normalize.hpp"

namespace aipi {

using ValueMap = std::map<std::string, NormalizedValue, std::less<>>;
using ClassMap = std::map<std::string, EvidenceClass, std::less<>>;

struct PillarScore {
  Pillar pillar = Pillar::PG;
  double s_evid = 0.0;
  std::optional<double> s_known;
  double s_opt = 0.0;
  double coverage = 0.0;
  double coverage_min = 0.0;  // primary-attributable evidence only
  double coverage_max = 0.0;  // attributable plus third-party-neutral
  std::size_t n_indicators = 0;
  std::size_t n_known = 0;
  std::size_t n_attributable = 0;
};

/// Convex pillar weights; equal quarters unless a sensitivity run perturbs them.
struct PillarWeights {
  PerPillar<double> w{0.25, 0.25, 0.25, 0.25};

  [[nodiscard]] double operator[](Pillar p) const noexcept { return w[index_of(p)]; }
  /// Throws E_WEIGHTS unless every weight is >= 0 and they sum to 1 (1e-9).
  void check() const;

  friend bool operator==(const PillarWeights&, const PillarWeights&) = default;
};

struct SubjectScore {
  std::string subject_id;
  SubjectKind kind = SubjectKind::provider;
  std::optional<std::string> provider_id;
  PerPillar<PillarScore> pillars{};
  double aipi_evid = 0.0;
  std::optional<double> aipi_known;
  double aipi_opt = 0.0;
  /// Share of all indicators with evidence-coded values.
  double coverage = 0.0;
  double coverage_min = 0.0;
  double coverage_max = 0.0;
  /// Mean of the four pillar coverages (the "average coverage" floor).
  double mean_pillar_coverage = 0.0;
  std::size_t n_indicators = 0;
  std::size_t n_known = 0;
};

/// Per-pillar means over a provider's systems.
struct PillarRollup {
  double s_evid = 0.0;
  std::optional<double> s_known;
  double s_opt = 0.0;
  double coverage = 0.0;
};

struct ProviderScore {
  std::string provider_id;
  double aipi_evid = 0.0;
  std::optional<double> aipi_known;
  double aipi_opt = 0.0;
  std::size_t k_systems = 0;
  double coverage = 0.0;
  PerPillar<PillarRollup> pillars{};
};

struct FloorPolicy {
  double min_overall_evid = 0.25;
  double min_pillar_evid = 0.15;
  double min_pillar_coverage = 0.25;
  double min_mean_coverage = 0.30;
  /// Indicators that must carry a known value > 0 (vulnerability disclosure,
  /// redress channel, model card).
  std::set<std::string> required_artifacts;

  /// Throws E_FLOOR_RANGE if a threshold lies outside [0,1].
  void check() const;

  friend bool operator==(const FloorPolicy&, const FloorPolicy&) = default;
};

struct FloorReason {
  std::string code;    // e.g. PILLAR_EVID_BELOW, REQ_ARTIFACT_MISSING
  std::string target;  // pillar, indicator id or "overall"
  std::string detail;

  friend bool operator==(const FloorReason&, const FloorReason&) = default;
};

struct FloorVerdict {
  std::string subject_id;
  bool pass = false;
  std::vector<FloorReason> reasons;
};

/// Throws E_EMPTY_PILLAR when `defs` is empty and E_MISSING_VALUE when a def
/// has no entry in `values`.
[[nodiscard]] PillarScore pillar_scores(Pillar pillar, std::span<const IndicatorDef> defs, const ValueMap& values,
                                        const ClassMap& classes);

/// Throws E_MISSING_PILLAR unless exactly one score per pillar is given.
[[nodiscard]] SubjectScore subject_score(const std::string& subject_id, std::span<const PillarScore> pillars,
                                         const PillarWeights& weights = {});

/// Mean over the provider's systems; with none, the provider's own score is
/// promoted unchanged. Throws E_WRONG_PROVIDER, E_NOT_PROVIDER.
[[nodiscard]] ProviderScore provider_score(const Subject& provider, const SubjectScore& own,
                                           std::span<const SubjectScore> systems);

/// Throws E_UNKNOWN_REQUIRED_ID when a required indicator is absent from `values`.
[[nodiscard]] FloorVerdict check_floors(const SubjectScore& score, const FloorPolicy& policy, const ValueMap& values);

/// Everything scoring derives from a validated dataset.
struct ScoredDataset {
  CountReferenceTable c_ref;
  AdjudicatedTable adjudicated;
  std::map<std::string, ValueMap, std::less<>> values;   // subject -> indicator -> value
  std::map<std::string, ClassMap, std::less<>> classes;  // subject -> indicator -> class (known only)
  std::vector<SubjectScore> subjects;                    // sorted by subject_id
  std::vector<ProviderScore> providers;                  // sorted by provider_id
};

/// Scores every subject against `c_ref`. Subjects are independent and may be
/// spread over `threads`; the result does not depend on the thread count.
[[nodiscard]] ScoredDataset score_dataset(const Dataset& d, const CountReferenceTable& c_ref,
                                          const PillarWeights& weights = {}, unsigned threads = 1);

/// Systems plus providers without systems: the units that carry scores of
/// their own and are ranked against each other.
[[nodiscard]] std::vector<std::string> scoring_units(const Dataset& d);

/// One row per provider of the known-only report: each pillar's weighted
/// contribution (a quarter of the pillar score by default) and coverage.
struct KnownOnlyRow {
  std::string provider_id;
  PerPillar<std::optional<double>> contribution{};
  std::optional<double> aipi_known;
  double coverage = 0.0;
};

[[nodiscard]] std::vector<KnownOnlyRow> known_only_report(const ScoredDataset& scored,
                                                          const PillarWeights& weights = {});
[[nodiscard]] std::string known_only_report_csv(std::span<const KnownOnlyRow> rows);

[[nodiscard]] json scores_to_json(std::span<const SubjectScore> scores);
[[nodiscard]] std::vector<SubjectScore> scores_from_json(const json& j);
[[nodiscard]] json providers_to_json(std::span<const ProviderScore> providers);
[[nodiscard]] json floor_verdicts_to_json(std::span<const FloorVerdict> verdicts, const FloorPolicy& policy);
/// One row per (subject, pillar) plus one "overall" row per subject.
[[nodiscard]] std::string scores_to_csv(std::span<const SubjectScore> scores);

}  // namespace aipi
