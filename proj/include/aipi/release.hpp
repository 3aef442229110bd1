#pragma once

// Deterministic release builds: validate -> freeze c_ref -> score -> analyze
// -> emit a hash-manifested directory; plus release diffs and rescoring
// against a frozen reference table.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aipi/evidence_model.hpp"
#include "aipi/json_util.hpp"
#include "aipi/normalize.hpp"
#include "aipi/score.hpp"
#include "aipi/validation.hpp"

namespace aipi {

[[nodiscard]] std::string_view tool_version() noexcept;

/// Lowercase hex SHA-256.
[[nodiscard]] std::string sha256_hex(std::string_view bytes);

struct ReleaseConfig {
  std::string version;
  std::optional<Date> cutoff_date;
  FloorPolicy floors;
  PillarWeights pillar_weights;
  std::uint64_t sampling_seed = 1;
  std::uint64_t bootstrap_seed = 1;
  double sample_fraction = 0.2;
  std::size_t n_resamples = 1000;
  std::size_t n_bins = 10;
  double reliability_threshold = 0.667;

  /// Range checks; throws E_CONFIG.
  void check() const;
};

/// Closed schema; keys listed in `extra_keys` are tolerated and ignored.
/// Throws E_CONFIG.
[[nodiscard]] ReleaseConfig release_config_from_json(const json& j, std::span<const std::string_view> extra_keys = {});
[[nodiscard]] json release_config_to_json(const ReleaseConfig& c);

/// Thrown when a dataset has error-severity violations.
class ValidationFailed : public Error {
 public:
  explicit ValidationFailed(std::vector<Violation> violations);
  [[nodiscard]] const std::vector<Violation>& violations() const noexcept { return violations_; }

 private:
  std::vector<Violation> violations_;
};

struct FileDigest {
  std::string name;
  std::string sha256;
  std::size_t bytes = 0;

  friend bool operator==(const FileDigest&, const FileDigest&) = default;
};

struct ReleaseManifest {
  std::string version;
  std::string cutoff_date;
  std::string config_hash;
  std::string dataset_hash;
  std::string tool_version;
  std::map<std::string, std::uint64_t> seed_registry;
  std::vector<FileDigest> files;  // every emitted file except manifest.json, by name

  friend bool operator==(const ReleaseManifest&, const ReleaseManifest&) = default;
};

[[nodiscard]] json manifest_to_json(const ReleaseManifest& m);
[[nodiscard]] ReleaseManifest manifest_from_json(const json& j);

/// A rendered release held in memory: file name -> bytes (manifest.json included).
struct ReleaseContents {
  std::map<std::string, std::string> files;
  ReleaseManifest manifest;
};

/// Renders every release file from an already-parsed dataset. Validation
/// errors throw ValidationFailed before anything is produced.
[[nodiscard]] ReleaseContents render_release(const Dataset& d, const ReleaseConfig& config, unsigned threads = 1);

/// Loads, renders and writes the release to `out_dir`. Output is staged and
/// moved into place, so a failed build leaves no directory behind. An
/// existing `out_dir` is replaced only if it is empty or holds a release.
ReleaseManifest build_release(const std::filesystem::path& dataset_dir, const ReleaseConfig& config,
                              const std::filesystem::path& out_dir, unsigned threads = 1);

struct MetadataChange {
  std::string field;
  std::string a;
  std::string b;
};

struct ScoreChange {
  std::string subject_id;
  std::string level;  // PG, ID, TR, AC or overall
  std::string field;
  std::optional<double> a;
  std::optional<double> b;
  std::optional<double> delta;  // b - a when both are defined
};

struct IndicatorChange {
  std::string subject_id;
  std::string indicator_id;
  std::string change;  // added, removed, value_changed, evidence_changed
  std::optional<std::string> value_a, value_b;
  std::vector<std::string> refs_a, refs_b;
};

struct ReleaseDiff {
  std::vector<MetadataChange> metadata;
  std::vector<std::string> subjects_removed;
  std::vector<SubjectScore> subjects_added;
  std::vector<ScoreChange> scores;
  std::vector<IndicatorChange> indicators;

  [[nodiscard]] bool empty() const noexcept {
    return metadata.empty() && subjects_removed.empty() && subjects_added.empty() && scores.empty() &&
           indicators.empty();
  }
};

/// Verifies both manifests against the bytes on disk (E_TAMPERED on any
/// mismatch, or when equal versions carry different datasets) and diffs
/// scores and adjudicated codes. Throws E_NO_MANIFEST.
[[nodiscard]] ReleaseDiff diff_releases(const std::filesystem::path& dir_a, const std::filesystem::path& dir_b);

/// Replays a diff's score changes onto release A's scores.
[[nodiscard]] std::vector<SubjectScore> apply_diff(std::vector<SubjectScore> scores_a, const ReleaseDiff& diff);

[[nodiscard]] json diff_to_json(const ReleaseDiff& diff);

/// Scoring with compute_c_ref skipped. Throws E_MISSING_CREF when a count
/// indicator has no frozen entry.
[[nodiscard]] ScoredDataset rescore_against(const Dataset& d, const CountReferenceTable& frozen,
                                            const PillarWeights& weights = {}, unsigned threads = 1);

[[nodiscard]] json adjudicated_to_json(const ScoredDataset& scored);

}  // namespace aipi
