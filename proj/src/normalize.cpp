#include "aipi/normalize.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace aipi {

NormalizedValue NormalizedValue::of(double v) noexcept {
  NormalizedValue out;
  if (std::isnan(v)) v = 0.0;
  out.value_ = round9(std::clamp(v, 0.0, 1.0));
  return out;
}

CountReferenceTable compute_c_ref(std::span<const IndicatorDef> indicators, const AdjudicatedTable& adjudicated) {
  std::map<std::string, std::vector<std::int64_t>, std::less<>> samples;
  for (const IndicatorDef& def : indicators) {
    if (def.kind == IndicatorKind::count) samples[def.id];
  }
  for (const auto& [key, code] : adjudicated) {
    auto it = samples.find(key.second);
    if (it == samples.end() || code.value.variant() != CodeValue::Variant::count) continue;
    it->second.push_back(code.value.magnitude());
  }

  CountReferenceTable refs;
  for (auto& [id, counts] : samples) {
    double c_ref = 1.0;
    if (!counts.empty()) {
      std::ranges::sort(counts);
      const std::size_t n = counts.size();
      const std::size_t rank = (95 * n + 99) / 100;  // ceil(0.95 n) in integers
      c_ref = std::max(1.0, static_cast<double>(counts[rank - 1]));
    }
    refs.emplace(id, c_ref);
  }
  return refs;
}

CountReferenceTable compute_c_ref(const Dataset& d) { return compute_c_ref(d.indicators, adjudicate(d)); }

double count_transform(double c, double c_ref) {
  if (c <= 0.0) return 0.0;
  if (c >= c_ref) return 1.0;
  return std::min(1.0, std::log1p(c) / std::log1p(c_ref));
}

NormalizedValue normalize_code(const AdjudicatedCode& code, const IndicatorDef& def, const CountReferenceTable& refs) {
  if (!code.value.matches(def.kind)) {
    throw Error("E_KIND_MISMATCH", code.subject_id + "/" + code.indicator_id + ": value " + code.value.str() +
                                       " on a " + std::string(to_string(def.kind)) + " indicator");
  }
  if (code.value.is_unknown()) return NormalizedValue::unknown();

  double s = 0.0;
  switch (def.kind) {
    case IndicatorKind::binary: s = code.value.magnitude() != 0 ? 1.0 : 0.0; break;
    case IndicatorKind::ordinal3: s = static_cast<double>(code.value.magnitude()) / 2.0; break;
    case IndicatorKind::count: {
      auto it = refs.find(def.id);
      if (it == refs.end()) throw Error("E_MISSING_CREF", "no reference count for " + def.id);
      s = count_transform(static_cast<double>(code.value.magnitude()), it->second);
      break;
    }
  }
  if (code.stale) s = std::min(s, 0.5);
  return NormalizedValue::of(s);
}

json c_ref_to_json(const CountReferenceTable& refs) {
  json table = json::object();
  for (const auto& [id, v] : refs) table[id] = num(v);
  return {{"c_ref", table}};
}

CountReferenceTable c_ref_from_json(const json& j) {
  if (!j.is_object() || j.size() != 1 || !j.contains("c_ref") || !j.at("c_ref").is_object()) {
    throw Error("E_CREF_FORMAT", "expected {\"c_ref\": {indicator_id: number}}");
  }
  CountReferenceTable refs;
  for (const auto& [id, v] : j.at("c_ref").items()) {
    if (!v.is_number() || v.get<double>() < 1.0) {
      throw Error("E_CREF_FORMAT", "c_ref for " + id + " must be a number >= 1");
    }
    refs.emplace(id, v.get<double>());
  }
  return refs;
}

}  // namespace aipi
