#include "aipi/reliability.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "aipi/rng.hpp"

namespace aipi {

SampleManifest select_sample(const Dataset& d, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw Error("E_RANGE", "sample fraction must be in (0, 1]");
  if (d.subjects.empty() || d.indicators.empty()) throw Error("E_EMPTY", "dataset has no items to sample");

  std::map<std::string, std::vector<ItemKey>> strata;
  std::vector<const Subject*> subjects;
  for (const Subject& s : d.subjects) subjects.push_back(&s);
  std::ranges::sort(subjects, {}, &Subject::subject_id);
  std::vector<const IndicatorDef*> indicators;
  for (const IndicatorDef& def : d.indicators) indicators.push_back(&def);
  std::ranges::sort(indicators, {}, &IndicatorDef::id);

  for (const Subject* s : subjects) {
    for (const IndicatorDef* def : indicators) {
      const std::string label = std::string(to_string(def->pillar)) + "/" + std::string(to_string(def->kind));
      strata[label].emplace_back(s->subject_id, def->id);
    }
  }

  SampleManifest out;
  for (auto& [label, items] : strata) {
    SplitMix64 rng(seed ^ mix64(fnv1a(label)));
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[rng.below(i)]);
    }
    // Guard against fraction * n landing a hair above an integer.
    const auto n = static_cast<double>(items.size());
    auto take = static_cast<std::size_t>(std::ceil(fraction * n - 1e-9));
    take = std::clamp<std::size_t>(take, 1, items.size());
    out.insert(out.end(), items.begin(), items.begin() + static_cast<std::ptrdiff_t>(take));
  }
  std::ranges::sort(out);
  return out;
}

AlphaResult krippendorff_alpha(const CodingMatrix& codes, AlphaMetric metric) {
  AlphaResult out;

  std::vector<std::vector<double>> units;
  for (const auto& row : codes) {
    std::vector<double> vals;
    for (const auto& v : row) {
      if (v) vals.push_back(*v);
    }
    if (vals.size() >= 2) units.push_back(std::move(vals));
  }
  out.pairable_items = units.size();
  for (const auto& u : units) out.pairable_values += u.size();
  if (units.empty()) {
    out.reason = "NO_PAIRABLE_VALUES";
    return out;
  }
  if (units.size() < 2) {
    out.reason = "TOO_FEW_ITEMS";
    return out;
  }

  std::vector<double> categories;
  for (const auto& u : units) categories.insert(categories.end(), u.begin(), u.end());
  std::ranges::sort(categories);
  categories.erase(std::unique(categories.begin(), categories.end()), categories.end());
  const std::size_t q = categories.size();
  auto category = [&](double v) {
    return static_cast<std::size_t>(std::ranges::lower_bound(categories, v) - categories.begin());
  };

  // Coincidence matrix: each ordered pair of values within a unit adds 1/(m_u - 1).
  std::vector<double> coincidence(q * q, 0.0);
  std::vector<double> counts(q);
  for (const auto& u : units) {
    std::ranges::fill(counts, 0.0);
    for (double v : u) counts[category(v)] += 1.0;
    const double scale = 1.0 / static_cast<double>(u.size() - 1);
    for (std::size_t c = 0; c < q; ++c) {
      if (counts[c] == 0.0) continue;
      for (std::size_t k = 0; k < q; ++k) {
        const double pairs = c == k ? counts[c] * (counts[c] - 1.0) : counts[c] * counts[k];
        coincidence[c * q + k] += pairs * scale;
      }
    }
  }

  std::vector<double> marginal(q, 0.0);
  double n = 0.0;
  for (std::size_t c = 0; c < q; ++c) {
    for (std::size_t k = 0; k < q; ++k) marginal[c] += coincidence[c * q + k];
    n += marginal[c];
  }

  auto delta2 = [&](std::size_t c, std::size_t k) {
    if (metric == AlphaMetric::nominal) return c == k ? 0.0 : 1.0;
    const double diff = categories[c] - categories[k];
    return diff * diff;
  };

  double observed = 0.0;
  double expected = 0.0;
  for (std::size_t c = 0; c < q; ++c) {
    for (std::size_t k = 0; k < q; ++k) {
      const double w = delta2(c, k);
      observed += coincidence[c * q + k] * w;
      expected += marginal[c] * marginal[k] * w;
    }
  }
  if (expected == 0.0) {
    out.reason = "NO_EXPECTED_DISAGREEMENT";
    return out;
  }
  // 1 - D_o / D_e with D_o = observed / n and D_e = expected / (n (n - 1)).
  out.alpha = 1.0 - (n - 1.0) * observed / expected;
  return out;
}

double percent_agreement(std::span<const std::vector<CodeValue>> items) {
  double total = 0.0;
  std::size_t n_items = 0;
  for (const auto& codes : items) {
    if (codes.size() < 2) continue;
    std::size_t pairs = 0, agree = 0;
    for (std::size_t i = 0; i < codes.size(); ++i) {
      for (std::size_t j = i + 1; j < codes.size(); ++j) {
        ++pairs;
        if (codes[i] == codes[j]) ++agree;
      }
    }
    total += static_cast<double>(agree) / static_cast<double>(pairs);
    ++n_items;
  }
  if (n_items == 0) throw Error("E_NO_PAIRS", "no item is coded by two or more coders");
  return total / static_cast<double>(n_items);
}

ReliabilityReport reliability_report(const Dataset& d, const CountReferenceTable& c_ref, double fraction,
                                     std::uint64_t seed, double threshold) {
  ReliabilityReport r;
  r.fraction = fraction;
  r.seed = seed;
  r.threshold = threshold;
  r.sample_manifest = select_sample(d, fraction, seed);
  r.n_sampled = r.sample_manifest.size();

  std::map<ItemKey, std::vector<const RawCode*>> by_item;
  for (const RawCode& c : d.codes) by_item[{c.subject_id, c.indicator_id}].push_back(&c);

  std::set<std::string> coders;
  std::vector<std::pair<const IndicatorDef*, std::vector<const RawCode*>>> items;
  for (const ItemKey& key : r.sample_manifest) {
    auto it = by_item.find(key);
    if (it == by_item.end() || it->second.size() < 2) continue;
    const IndicatorDef* def = d.find_indicator(key.second);
    if (!def) continue;
    for (const RawCode* c : it->second) coders.insert(c->coder_id);
    items.emplace_back(def, it->second);
  }
  r.n_items = items.size();
  r.n_coders = coders.size();
  const std::vector<std::string> coder_list(coders.begin(), coders.end());
  auto column = [&](const std::string& coder) {
    return static_cast<std::size_t>(std::ranges::lower_bound(coder_list, coder) - coder_list.begin());
  };

  CodingMatrix overall;
  std::map<IndicatorKind, CodingMatrix> by_kind;
  std::vector<std::vector<CodeValue>> raw;
  for (const auto& [def, codes] : items) {
    std::vector<std::optional<double>> normalized(coder_list.size());
    std::vector<std::optional<double>> native(coder_list.size());
    std::vector<CodeValue> raw_row;
    for (const RawCode* c : codes) {
      raw_row.push_back(c->value);
      if (c->value.is_unknown()) continue;
      const std::size_t col = column(c->coder_id);
      normalized[col] = normalize_code(merge_codes(std::span(c, 1)), *def, c_ref).get();
      native[col] = static_cast<double>(c->value.magnitude());
    }
    raw.push_back(std::move(raw_row));
    overall.push_back(normalized);
    by_kind[def->kind].push_back(def->kind == IndicatorKind::binary ? native : normalized);
  }

  r.alpha_overall = krippendorff_alpha(overall, AlphaMetric::interval);
  for (IndicatorKind k : {IndicatorKind::binary, IndicatorKind::ordinal3, IndicatorKind::count}) {
    const AlphaMetric metric = k == IndicatorKind::binary ? AlphaMetric::nominal : AlphaMetric::interval;
    r.alpha_by_kind[k] = krippendorff_alpha(by_kind[k], metric);
  }
  if (!raw.empty()) r.percent_agreement = percent_agreement(raw);
  return r;
}

namespace {

json alpha_json(const AlphaResult& a) {
  return {{"alpha", num(a.alpha)},
          {"undefined_reason", a.alpha ? json(nullptr) : json(a.reason)},
          {"pairable_items", a.pairable_items},
          {"pairable_values", a.pairable_values}};
}

}  // namespace

json reliability_to_json(const ReliabilityReport& r) {
  json by_kind = json::object();
  for (const auto& [k, a] : r.alpha_by_kind) by_kind[std::string(to_string(k))] = alpha_json(a);
  json manifest = json::array();
  for (const auto& [subject, indicator] : r.sample_manifest) {
    manifest.push_back({{"subject_id", subject}, {"indicator_id", indicator}});
  }
  json meets = nullptr;
  if (r.alpha_overall.alpha) meets = round9(*r.alpha_overall.alpha) >= round9(r.threshold);
  return {{"alpha_overall", alpha_json(r.alpha_overall)},
          {"alpha_by_kind", std::move(by_kind)},
          {"percent_agreement", num(r.percent_agreement)},
          {"n_items", r.n_items},
          {"n_coders", r.n_coders},
          {"n_sampled", r.n_sampled},
          {"sample_fraction", num(r.fraction)},
          {"seed", r.seed},
          {"threshold", {{"value", num(r.threshold)}, {"normative", false}, {"met", meets}}},
          {"sample_manifest", std::move(manifest)}};
}

}  // namespace aipi
