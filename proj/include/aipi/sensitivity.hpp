#pragma once

// Rank stability of the evidence score under pillar, indicator and weight
// perturbations; indicator-bootstrap intervals; coverage dependence.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "aipi/json_util.hpp"
#include "aipi/score.hpp"

namespace aipi {

struct RankedSubject {
  std::string subject_id;
  double score = 0.0;
  double rank = 0.0;  // 1 = highest score; ties share the mean rank
};

/// Sorted by descending score, ties by subject_id (display order only).
using RankVector = std::vector<RankedSubject>;

/// Scores are rounded to 9 decimals before ranking so that equal published
/// values tie.
[[nodiscard]] RankVector rank_scores(std::span<const std::pair<std::string, double>> scores);

/// Tau-b between two rankings of the same subjects, O(n log n). Undefined when
/// either ranking is constant. Throws E_SUBJECT_MISMATCH, E_TOO_FEW_SUBJECTS.
[[nodiscard]] std::optional<double> kendall_tau(const RankVector& a, const RankVector& b);

/// Dense subject x indicator view of a scored cohort.
struct ScoreMatrix {
  std::vector<std::string> subjects;                        // scoring units, sorted
  std::vector<IndicatorDef> indicators;                     // sorted by id
  std::vector<std::vector<std::optional<double>>> values;   // [subject][indicator]
  std::vector<std::size_t> n_known;                         // per subject
  std::vector<std::optional<double>> aipi_known;            // per subject
};

[[nodiscard]] ScoreMatrix make_score_matrix(const Dataset& d, const ScoredDataset& scored);

/// Evidence score of every subject with indicator multiplicities (0 drops an
/// indicator, >1 repeats it) and pillar weights. A pillar whose weight is 0
/// may have all multiplicities 0.
[[nodiscard]] std::vector<double> evid_scores(const ScoreMatrix& m, std::span<const unsigned> multiplicity,
                                              const PillarWeights& weights);

[[nodiscard]] PerPillar<std::optional<double>> leave_one_pillar_out(const ScoreMatrix& m);

struct JackknifeSummary {
  std::optional<double> min, mean, max;
  std::optional<std::string> argmin;
  std::map<std::string, std::optional<double>> per_indicator;
  std::vector<std::string> skipped;  // W_PILLAR_MIN: sole indicator of its pillar
};

[[nodiscard]] JackknifeSummary indicator_jackknife(const ScoreMatrix& m);

/// The 12 ordered pillar pairs (p, q): p's weight x1.1, q's x0.9, renormalized.
/// Keyed "+p-q".
[[nodiscard]] std::vector<std::pair<std::string, PillarWeights>> weight_perturbations();
[[nodiscard]] std::map<std::string, std::optional<double>> weight_perturbation(const ScoreMatrix& m);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Indicators resampled with replacement within each pillar; nearest-rank
/// percentile interval at `level`. Deterministic in (seed, n_resamples) for
/// any thread count. Throws E_RANGE when n_resamples < 100.
[[nodiscard]] std::map<std::string, Interval> bootstrap_intervals(const ScoreMatrix& m, std::size_t n_resamples,
                                                                  std::uint64_t seed, double level = 0.95,
                                                                  unsigned threads = 1);

struct CoverageBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  std::optional<double> mean_evid;
  std::optional<double> mean_known;
};

struct RankFlip {
  std::string subject_a;
  std::string subject_b;
  std::string condition;

  friend bool operator==(const RankFlip&, const RankFlip&) = default;
};

struct CoverageDependence {
  std::vector<CoverageBin> bins;
  std::vector<RankFlip> rank_flips;
};

/// Equal-width coverage bins over [0,1] (last bin closed) and the subject
/// pairs ordered oppositely by the evidence and known-only scores.
/// Throws E_RANGE when n_bins < 2.
[[nodiscard]] CoverageDependence coverage_dependence(const ScoreMatrix& m, std::size_t n_bins);

struct RankInterval {
  double baseline = 0.0;
  double min_rank = 0.0;
  double max_rank = 0.0;
};

struct SensitivityOptions {
  std::size_t n_resamples = 1000;
  std::uint64_t bootstrap_seed = 0;
  std::size_t n_bins = 10;
  unsigned threads = 1;
};

struct SensitivityReport {
  std::vector<std::string> cohort;
  PerPillar<std::optional<double>> tau_leave_one_pillar_out{};
  JackknifeSummary tau_indicator_jackknife;
  std::map<std::string, std::optional<double>> weight_perturbation;
  std::map<std::string, Interval> bootstrap;
  std::map<std::string, double> point_estimate;
  CoverageDependence coverage;
  /// Min/max rank per subject across baseline, leave-one-pillar-out,
  /// weight perturbations and the indicator jackknife.
  std::map<std::string, RankInterval> rank_intervals;
  SensitivityOptions options;
};

/// Full analysis. Cohorts with fewer than two subjects get undefined taus.
[[nodiscard]] SensitivityReport sensitivity_report(const ScoreMatrix& m, const SensitivityOptions& options);

[[nodiscard]] json sensitivity_to_json(const SensitivityReport& r);
/// bin,count,mean_evid,mean_known
[[nodiscard]] std::string coverage_dependence_csv(const CoverageDependence& c);

}  // namespace aipi
