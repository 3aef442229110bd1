#include "aipi/evidence_model.hpp"

#include <algorithm>
#include <set>

namespace aipi {

namespace {

template <class Enum, std::size_t N>
std::optional<Enum> parse_enum(std::string_view text, const std::array<Enum, N>& values) {
  for (Enum v : values) {
    if (to_string(v) == text) return v;
  }
  return std::nullopt;
}

}  // namespace

std::string_view to_string(IndicatorKind k) noexcept {
  switch (k) {
    case IndicatorKind::binary: return "binary";
    case IndicatorKind::ordinal3: return "ordinal3";
    case IndicatorKind::count: return "count";
  }
  return "?";
}

std::optional<IndicatorKind> parse_indicator_kind(std::string_view text) noexcept {
  return parse_enum(text, std::array{IndicatorKind::binary, IndicatorKind::ordinal3, IndicatorKind::count});
}

std::string_view to_string(SourceKind k) noexcept {
  switch (k) {
    case SourceKind::policy: return "policy";
    case SourceKind::model_card: return "model_card";
    case SourceKind::datasheet: return "datasheet";
    case SourceKind::audit_report: return "audit_report";
    case SourceKind::registry_entry: return "registry_entry";
    case SourceKind::consultation_record: return "consultation_record";
    case SourceKind::release_note: return "release_note";
    case SourceKind::other: return "other";
  }
  return "?";
}

std::optional<SourceKind> parse_source_kind(std::string_view text) noexcept {
  return parse_enum(text, std::array{SourceKind::policy, SourceKind::model_card, SourceKind::datasheet,
                                     SourceKind::audit_report, SourceKind::registry_entry,
                                     SourceKind::consultation_record, SourceKind::release_note,
                                     SourceKind::other});
}

std::string_view to_string(SubjectKind k) noexcept {
  return k == SubjectKind::provider ? "provider" : "system";
}

std::optional<SubjectKind> parse_subject_kind(std::string_view text) noexcept {
  return parse_enum(text, std::array{SubjectKind::provider, SubjectKind::system});
}

std::string_view to_string(EvidenceClass c) noexcept {
  return c == EvidenceClass::primary_attributable ? "primary_attributable" : "third_party_neutral";
}

std::optional<EvidenceClass> parse_evidence_class(std::string_view text) noexcept {
  return parse_enum(text, std::array{EvidenceClass::primary_attributable, EvidenceClass::third_party_neutral});
}

CodeValue::Variant variant_for(IndicatorKind kind) noexcept {
  switch (kind) {
    case IndicatorKind::binary: return CodeValue::Variant::binary;
    case IndicatorKind::ordinal3: return CodeValue::Variant::ordinal;
    case IndicatorKind::count: return CodeValue::Variant::count;
  }
  return CodeValue::Variant::unknown;
}

bool CodeValue::matches(IndicatorKind kind) const noexcept {
  return is_unknown() || variant_ == variant_for(kind);
}

bool CodeValue::in_domain() const noexcept {
  switch (variant_) {
    case Variant::unknown: return true;
    case Variant::binary: return magnitude_ == 0 || magnitude_ == 1;
    case Variant::ordinal: return magnitude_ >= 0 && magnitude_ <= 2;
    case Variant::count: return magnitude_ >= 0;
  }
  return false;
}

std::string CodeValue::str() const {
  switch (variant_) {
    case Variant::unknown: return "unknown";
    case Variant::binary: return magnitude_ != 0 ? "yes" : "no";
    case Variant::ordinal:
    case Variant::count: return std::to_string(magnitude_);
  }
  return "?";
}

void Dataset::canonicalize() {
  std::ranges::sort(indicators, {}, &IndicatorDef::id);
  std::ranges::sort(subjects, {}, &Subject::subject_id);
  std::ranges::sort(artifacts, {}, &EvidenceArtifact::artifact_id);
  for (RawCode& c : codes) std::ranges::sort(c.evidence_refs);
  std::ranges::sort(codes, [](const RawCode& a, const RawCode& b) {
    return std::tie(a.subject_id, a.indicator_id, a.coder_id) < std::tie(b.subject_id, b.indicator_id, b.coder_id);
  });
}

const IndicatorDef* Dataset::find_indicator(std::string_view id) const {
  auto it = std::ranges::find(indicators, id, &IndicatorDef::id);
  return it == indicators.end() ? nullptr : &*it;
}

const Subject* Dataset::find_subject(std::string_view id) const {
  auto it = std::ranges::find(subjects, id, &Subject::subject_id);
  return it == subjects.end() ? nullptr : &*it;
}

AdjudicatedCode merge_codes(std::span<const RawCode> codes) {
  if (codes.empty()) throw Error("E_EMPTY", "merge_codes needs at least one code");
  const RawCode& first = codes.front();

  std::optional<CodeValue::Variant> variant;
  std::set<std::string> coders;
  for (const RawCode& c : codes) {
    if (c.subject_id != first.subject_id || c.indicator_id != first.indicator_id) {
      throw Error("E_MIXED_ITEMS", "codes for " + first.subject_id + "/" + first.indicator_id + " and " +
                                       c.subject_id + "/" + c.indicator_id + " cannot be merged");
    }
    coders.insert(c.coder_id);
    if (c.value.is_unknown()) continue;
    if (variant && *variant != c.value.variant()) {
      throw Error("E_KIND_MISMATCH", "mixed value variants for " + first.subject_id + "/" + first.indicator_id);
    }
    variant = c.value.variant();
  }

  AdjudicatedCode out;
  out.subject_id = first.subject_id;
  out.indicator_id = first.indicator_id;
  out.contributing_coders.assign(coders.begin(), coders.end());

  if (!variant) {
    out.value = CodeValue::unknown();
    return out;
  }

  std::int64_t lo = 0, hi = 0;
  bool seen = false;
  for (const RawCode& c : codes) {
    if (c.value.is_unknown()) continue;
    const std::int64_t m = c.value.magnitude();
    lo = seen ? std::min(lo, m) : m;
    hi = seen ? std::max(hi, m) : m;
    seen = true;
  }

  std::set<std::string> refs;
  bool all_stale = true;
  EvidenceClass strongest = EvidenceClass::third_party_neutral;
  for (const RawCode& c : codes) {
    if (c.value.is_unknown() || c.value.magnitude() != lo) continue;
    all_stale = all_stale && c.stale;
    strongest = std::max(strongest, c.evidence_class);
    refs.insert(c.evidence_refs.begin(), c.evidence_refs.end());
  }

  switch (*variant) {
    case CodeValue::Variant::binary: out.value = CodeValue::binary(lo != 0); break;
    case CodeValue::Variant::ordinal: out.value = CodeValue::ordinal(lo); break;
    case CodeValue::Variant::count: out.value = CodeValue::count(lo); break;
    case CodeValue::Variant::unknown: break;
  }
  out.evidence_class = strongest;
  out.stale = all_stale;
  out.conflict_resolved = lo != hi;
  out.evidence_refs.assign(refs.begin(), refs.end());
  return out;
}

AdjudicatedTable adjudicate(const Dataset& d) {
  std::map<ItemKey, std::vector<RawCode>> grouped;
  for (const RawCode& c : d.codes) grouped[{c.subject_id, c.indicator_id}].push_back(c);

  AdjudicatedTable table;
  for (const Subject& s : d.subjects) {
    for (const IndicatorDef& def : d.indicators) {
      ItemKey key{s.subject_id, def.id};
      auto it = grouped.find(key);
      if (it == grouped.end()) {
        AdjudicatedCode none;
        none.subject_id = s.subject_id;
        none.indicator_id = def.id;
        table.emplace(std::move(key), std::move(none));
      } else {
        table.emplace(std::move(key), merge_codes(it->second));
      }
    }
  }
  return table;
}

}  // namespace aipi
