#pragma once

// Evidence graph: indicators, subjects, artifacts and coder codes, plus the
// conservative adjudication of multi-coder codes.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "aipi/common.hpp"

namespace aipi {

enum class IndicatorKind { binary, ordinal3, count };

[[nodiscard]] std::string_view to_string(IndicatorKind k) noexcept;
[[nodiscard]] std::optional<IndicatorKind> parse_indicator_kind(std::string_view text) noexcept;

struct IndicatorDef {
  std::string id;
  Pillar pillar = Pillar::PG;
  IndicatorKind kind = IndicatorKind::binary;
  std::string title;

  friend bool operator==(const IndicatorDef&, const IndicatorDef&) = default;
};

enum class SourceKind {
  policy,
  model_card,
  datasheet,
  audit_report,
  registry_entry,
  consultation_record,
  release_note,
  other
};

[[nodiscard]] std::string_view to_string(SourceKind k) noexcept;
[[nodiscard]] std::optional<SourceKind> parse_source_kind(std::string_view text) noexcept;

struct EvidenceArtifact {
  std::string artifact_id;
  std::string url;
  std::optional<Date> published_date;
  Date retrieved_date;
  std::optional<std::string> archive_url;
  SourceKind source_kind = SourceKind::other;

  friend bool operator==(const EvidenceArtifact&, const EvidenceArtifact&) = default;
};

enum class SubjectKind { provider, system };

[[nodiscard]] std::string_view to_string(SubjectKind k) noexcept;
[[nodiscard]] std::optional<SubjectKind> parse_subject_kind(std::string_view text) noexcept;

struct Subject {
  std::string subject_id;
  std::string name;
  SubjectKind kind = SubjectKind::provider;
  std::optional<std::string> provider_id;  // set iff kind == system

  friend bool operator==(const Subject&, const Subject&) = default;
};

/// Declaration order is strength order: primary_attributable is the stronger class.
enum class EvidenceClass { third_party_neutral, primary_attributable };

[[nodiscard]] std::string_view to_string(EvidenceClass c) noexcept;
[[nodiscard]] std::optional<EvidenceClass> parse_evidence_class(std::string_view text) noexcept;

/// A coded value. The variant must agree with the indicator kind; `unknown`
/// is compatible with every kind.
class CodeValue {
 public:
  enum class Variant { unknown, binary, ordinal, count };

  CodeValue() = default;

  [[nodiscard]] static CodeValue unknown() noexcept { return {}; }
  [[nodiscard]] static CodeValue binary(bool yes) noexcept { return {Variant::binary, yes ? 1 : 0}; }
  [[nodiscard]] static CodeValue ordinal(std::int64_t level) noexcept { return {Variant::ordinal, level}; }
  [[nodiscard]] static CodeValue count(std::int64_t n) noexcept { return {Variant::count, n}; }

  [[nodiscard]] Variant variant() const noexcept { return variant_; }
  [[nodiscard]] bool is_unknown() const noexcept { return variant_ == Variant::unknown; }
  /// yes/no as 1/0, ordinal level, or count. Zero for unknown.
  [[nodiscard]] std::int64_t magnitude() const noexcept { return magnitude_; }

  [[nodiscard]] bool matches(IndicatorKind kind) const noexcept;
  /// Whether the magnitude is inside the domain of its variant ({0,1}, {0,1,2}, >= 0).
  [[nodiscard]] bool in_domain() const noexcept;

  [[nodiscard]] std::string str() const;

  friend bool operator==(const CodeValue&, const CodeValue&) = default;

 private:
  CodeValue(Variant v, std::int64_t m) noexcept : variant_(v), magnitude_(m) {}

  Variant variant_ = Variant::unknown;
  std::int64_t magnitude_ = 0;
};

[[nodiscard]] CodeValue::Variant variant_for(IndicatorKind kind) noexcept;

struct RawCode {
  std::string subject_id;
  std::string indicator_id;
  std::string coder_id;
  CodeValue value;
  std::vector<std::string> evidence_refs;
  EvidenceClass evidence_class = EvidenceClass::primary_attributable;
  bool stale = false;
  Date coded_date;

  friend bool operator==(const RawCode&, const RawCode&) = default;
};

struct AdjudicatedCode {
  std::string subject_id;
  std::string indicator_id;
  CodeValue value;
  std::optional<EvidenceClass> evidence_class;  // empty when the value is unknown
  bool stale = false;
  std::vector<std::string> contributing_coders;
  bool conflict_resolved = false;
  /// Refs cited by the codes that attain the adjudicated value.
  std::vector<std::string> evidence_refs;

  friend bool operator==(const AdjudicatedCode&, const AdjudicatedCode&) = default;
};

struct Dataset {
  std::vector<IndicatorDef> indicators;
  std::vector<Subject> subjects;
  std::vector<EvidenceArtifact> artifacts;
  std::vector<RawCode> codes;

  /// Sorts every collection by its key so that equal content compares equal.
  void canonicalize();

  [[nodiscard]] const IndicatorDef* find_indicator(std::string_view id) const;
  [[nodiscard]] const Subject* find_subject(std::string_view id) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// (subject_id, indicator_id)
using ItemKey = std::pair<std::string, std::string>;
using AdjudicatedTable = std::map<ItemKey, AdjudicatedCode>;

/// Conservative merge of all codes for one (subject, indicator).
///
/// Unknown entries are ignored when any coder found evidence; the result is
/// the minimum over the natural order (no < yes, 0 < 1 < 2, counts by value).
/// Evidence class and staleness come from the codes attaining that minimum.
/// Throws E_EMPTY, E_MIXED_ITEMS or E_KIND_MISMATCH.
[[nodiscard]] AdjudicatedCode merge_codes(std::span<const RawCode> codes);

/// Adjudicates every subject x indicator pair. Pairs nobody coded are unknown
/// with no contributing coders.
[[nodiscard]] AdjudicatedTable adjudicate(const Dataset& d);

}  // namespace aipi
