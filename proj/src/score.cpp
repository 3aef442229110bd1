#include "aipi/score.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "aipi/parallel.hpp"

namespace aipi {

void PillarWeights::check() const {
  double sum = 0.0;
  for (double x : w) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw Error("E_WEIGHTS", "pillar weights must be finite and non-negative");
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw Error("E_WEIGHTS", "pillar weights must sum to 1");
}

void FloorPolicy::check() const {
  for (double t : {min_overall_evid, min_pillar_evid, min_pillar_coverage, min_mean_coverage}) {
    if (!(t >= 0.0 && t <= 1.0)) throw Error("E_FLOOR_RANGE", "floor thresholds must lie in [0,1]");
  }
}

PillarScore pillar_scores(Pillar pillar, std::span<const IndicatorDef> defs, const ValueMap& values,
                          const ClassMap& classes) {
  if (defs.empty()) throw Error("E_EMPTY_PILLAR", std::string(to_string(pillar)) + " has no indicators");

  PillarScore out;
  out.pillar = pillar;
  out.n_indicators = defs.size();
  double sum = 0.0;
  for (const IndicatorDef& def : defs) {
    auto it = values.find(def.id);
    if (it == values.end()) throw Error("E_MISSING_VALUE", "no value for indicator " + def.id);
    if (!it->second.known()) continue;
    sum += it->second.value();
    ++out.n_known;
    auto cls = classes.find(def.id);
    if (cls != classes.end() && cls->second == EvidenceClass::primary_attributable) ++out.n_attributable;
  }

  const auto n = static_cast<double>(out.n_indicators);
  const auto k = static_cast<double>(out.n_known);
  out.s_evid = sum / n;
  out.s_opt = (sum + (n - k)) / n;
  if (out.n_known > 0) out.s_known = sum / k;
  out.coverage = k / n;
  out.coverage_min = static_cast<double>(out.n_attributable) / n;
  out.coverage_max = out.coverage;
  return out;
}

SubjectScore subject_score(const std::string& subject_id, std::span<const PillarScore> pillars,
                           const PillarWeights& weights) {
  PerPillar<const PillarScore*> by_pillar{};
  for (const PillarScore& ps : pillars) {
    auto& slot = by_pillar[index_of(ps.pillar)];
    if (slot) throw Error("E_MISSING_PILLAR", subject_id + ": pillar " + std::string(to_string(ps.pillar)) + " given twice");
    slot = &ps;
  }
  for (Pillar p : kPillars) {
    if (!by_pillar[index_of(p)]) {
      throw Error("E_MISSING_PILLAR", subject_id + ": no score for pillar " + std::string(to_string(p)));
    }
  }

  SubjectScore out;
  out.subject_id = subject_id;
  double known = 0.0;
  bool known_defined = true;
  std::size_t n_attributable = 0;
  for (Pillar p : kPillars) {
    const PillarScore& ps = *by_pillar[index_of(p)];
    out.pillars[index_of(p)] = ps;
    out.aipi_evid += weights[p] * ps.s_evid;
    out.aipi_opt += weights[p] * ps.s_opt;
    if (ps.s_known) {
      known += weights[p] * *ps.s_known;
    } else {
      known_defined = false;
    }
    out.mean_pillar_coverage += ps.coverage / 4.0;
    out.n_indicators += ps.n_indicators;
    out.n_known += ps.n_known;
    n_attributable += ps.n_attributable;
  }
  if (known_defined) out.aipi_known = known;
  const auto n = static_cast<double>(out.n_indicators);
  out.coverage = static_cast<double>(out.n_known) / n;
  out.coverage_min = static_cast<double>(n_attributable) / n;
  out.coverage_max = out.coverage;
  return out;
}

ProviderScore provider_score(const Subject& provider, const SubjectScore& own, std::span<const SubjectScore> systems) {
  if (provider.kind != SubjectKind::provider) {
    throw Error("E_NOT_PROVIDER", provider.subject_id + " is not a provider");
  }
  for (const SubjectScore& s : systems) {
    if (s.provider_id != provider.subject_id) {
      throw Error("E_WRONG_PROVIDER", s.subject_id + " does not belong to " + provider.subject_id);
    }
  }

  ProviderScore out;
  out.provider_id = provider.subject_id;
  out.k_systems = systems.size();

  std::span<const SubjectScore> members = systems;
  if (systems.empty()) members = std::span<const SubjectScore>(&own, 1);
  const auto k = static_cast<double>(members.size());

  double known = 0.0;
  bool known_defined = true;
  PerPillar<double> pillar_known{};
  PerPillar<bool> pillar_known_defined{true, true, true, true};
  for (const SubjectScore& s : members) {
    out.aipi_evid += s.aipi_evid;
    out.aipi_opt += s.aipi_opt;
    out.coverage += s.coverage;
    if (s.aipi_known) {
      known += *s.aipi_known;
    } else {
      known_defined = false;
    }
    for (Pillar p : kPillars) {
      const std::size_t i = index_of(p);
      const PillarScore& ps = s.pillars[i];
      out.pillars[i].s_evid += ps.s_evid;
      out.pillars[i].s_opt += ps.s_opt;
      out.pillars[i].coverage += ps.coverage;
      if (ps.s_known) {
        pillar_known[i] += *ps.s_known;
      } else {
        pillar_known_defined[i] = false;
      }
    }
  }
  if (members.size() == 1) {
    // Promote unchanged: no division, so values are bit-identical to the member's.
    out.aipi_known = members.front().aipi_known;
    for (Pillar p : kPillars) out.pillars[index_of(p)].s_known = members.front().pillars[index_of(p)].s_known;
    return out;
  }
  out.aipi_evid /= k;
  out.aipi_opt /= k;
  out.coverage /= k;
  if (known_defined) out.aipi_known = known / k;
  for (Pillar p : kPillars) {
    const std::size_t i = index_of(p);
    out.pillars[i].s_evid /= k;
    out.pillars[i].s_opt /= k;
    out.pillars[i].coverage /= k;
    if (pillar_known_defined[i]) out.pillars[i].s_known = pillar_known[i] / k;
  }
  return out;
}

FloorVerdict check_floors(const SubjectScore& score, const FloorPolicy& policy, const ValueMap& values) {
  policy.check();
  for (const std::string& id : policy.required_artifacts) {
    if (!values.contains(id)) throw Error("E_UNKNOWN_REQUIRED_ID", "required indicator " + id + " is not in the release");
  }

  FloorVerdict v;
  v.subject_id = score.subject_id;
  auto below = [](double x, double floor) { return round9(x) < round9(floor); };
  auto fmt = [](double x, double floor) { return format_number(round9(x)) + " < " + format_number(floor); };

  if (below(score.aipi_evid, policy.min_overall_evid)) {
    v.reasons.push_back({"OVERALL_EVID_BELOW", "overall", fmt(score.aipi_evid, policy.min_overall_evid)});
  }
  for (Pillar p : kPillars) {
    const PillarScore& ps = score.pillars[index_of(p)];
    if (below(ps.s_evid, policy.min_pillar_evid)) {
      v.reasons.push_back({"PILLAR_EVID_BELOW", std::string(to_string(p)), fmt(ps.s_evid, policy.min_pillar_evid)});
    }
  }
  for (Pillar p : kPillars) {
    const PillarScore& ps = score.pillars[index_of(p)];
    if (below(ps.coverage, policy.min_pillar_coverage)) {
      v.reasons.push_back(
          {"PILLAR_COVERAGE_BELOW", std::string(to_string(p)), fmt(ps.coverage, policy.min_pillar_coverage)});
    }
  }
  if (below(score.mean_pillar_coverage, policy.min_mean_coverage)) {
    v.reasons.push_back(
        {"MEAN_COVERAGE_BELOW", "overall", fmt(score.mean_pillar_coverage, policy.min_mean_coverage)});
  }
  for (const std::string& id : policy.required_artifacts) {
    const NormalizedValue& nv = values.find(id)->second;
    if (!nv.known()) {
      v.reasons.push_back({"REQ_ARTIFACT_MISSING", id, "no evidence-coded value"});
    } else if (nv.value() <= 0.0) {
      v.reasons.push_back({"REQ_ARTIFACT_MISSING", id, "coded as absent"});
    }
  }
  v.pass = v.reasons.empty();
  return v;
}

std::vector<std::string> scoring_units(const Dataset& d) {
  std::set<std::string> with_systems;
  for (const Subject& s : d.subjects) {
    if (s.kind == SubjectKind::system && s.provider_id) with_systems.insert(*s.provider_id);
  }
  std::vector<std::string> units;
  for (const Subject& s : d.subjects) {
    if (s.kind == SubjectKind::system || !with_systems.contains(s.subject_id)) units.push_back(s.subject_id);
  }
  std::ranges::sort(units);
  return units;
}

ScoredDataset score_dataset(const Dataset& d, const CountReferenceTable& c_ref, const PillarWeights& weights,
                            unsigned threads) {
  weights.check();
  ScoredDataset out;
  out.c_ref = c_ref;
  out.adjudicated = adjudicate(d);

  PerPillar<std::vector<IndicatorDef>> defs_by_pillar;
  for (const IndicatorDef& def : d.indicators) defs_by_pillar[index_of(def.pillar)].push_back(def);
  std::map<std::string_view, const IndicatorDef*> defs;
  for (const IndicatorDef& def : d.indicators) defs.emplace(def.id, &def);

  std::vector<const Subject*> subjects;
  for (const Subject& s : d.subjects) subjects.push_back(&s);
  std::ranges::sort(subjects, {}, &Subject::subject_id);

  std::vector<ValueMap> values(subjects.size());
  std::vector<ClassMap> classes(subjects.size());
  out.subjects.resize(subjects.size());

  parallel_for(subjects.size(), threads, [&](std::size_t i) {
    const Subject& s = *subjects[i];
    for (const IndicatorDef& def : d.indicators) {
      const AdjudicatedCode& code = out.adjudicated.at({s.subject_id, def.id});
      values[i].emplace(def.id, normalize_code(code, def, c_ref));
      if (!code.value.is_unknown() && code.evidence_class) classes[i].emplace(def.id, *code.evidence_class);
    }
    std::vector<PillarScore> pillars;
    for (Pillar p : kPillars) pillars.push_back(pillar_scores(p, defs_by_pillar[index_of(p)], values[i], classes[i]));
    SubjectScore score = subject_score(s.subject_id, pillars, weights);
    score.kind = s.kind;
    score.provider_id = s.provider_id;
    out.subjects[i] = std::move(score);
  });

  for (std::size_t i = 0; i < subjects.size(); ++i) {
    out.values.emplace(subjects[i]->subject_id, std::move(values[i]));
    out.classes.emplace(subjects[i]->subject_id, std::move(classes[i]));
  }

  for (std::size_t i = 0; i < subjects.size(); ++i) {
    const Subject& s = *subjects[i];
    if (s.kind != SubjectKind::provider) continue;
    std::vector<SubjectScore> systems;
    for (const SubjectScore& sc : out.subjects) {
      if (sc.provider_id == s.subject_id) systems.push_back(sc);
    }
    out.providers.push_back(provider_score(s, out.subjects[i], systems));
  }
  return out;
}

std::vector<KnownOnlyRow> known_only_report(const ScoredDataset& scored, const PillarWeights& weights) {
  std::vector<KnownOnlyRow> rows;
  for (const ProviderScore& p : scored.providers) {
    KnownOnlyRow row;
    row.provider_id = p.provider_id;
    for (Pillar pl : kPillars) {
      const auto& known = p.pillars[index_of(pl)].s_known;
      if (known) row.contribution[index_of(pl)] = weights[pl] * *known;
    }
    row.aipi_known = p.aipi_known;
    row.coverage = p.coverage;
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

std::string cell(double x) { return format_number(round9(x)); }
std::string cell(const std::optional<double>& x) { return x ? cell(*x) : std::string{}; }

json pillar_json(const PillarScore& ps) {
  return {{"s_evid", num(ps.s_evid)},
          {"s_known", num(ps.s_known)},
          {"s_opt", num(ps.s_opt)},
          {"coverage", num(ps.coverage)},
          {"coverage_min", num(ps.coverage_min)},
          {"coverage_max", num(ps.coverage_max)},
          {"n_indicators", ps.n_indicators},
          {"n_known", ps.n_known},
          {"n_attributable", ps.n_attributable}};
}

std::optional<double> opt_number(const json& j, const char* key) {
  const json& v = j.at(key);
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

}  // namespace

std::string known_only_report_csv(std::span<const KnownOnlyRow> rows) {
  std::ostringstream out;
  out << "provider_id,PG,ID,TR,AC,aipi_known,coverage\n";
  for (const KnownOnlyRow& r : rows) {
    out << r.provider_id;
    for (const auto& c : r.contribution) out << ',' << cell(c);
    out << ',' << cell(r.aipi_known) << ',' << cell(r.coverage) << '\n';
  }
  return out.str();
}

json scores_to_json(std::span<const SubjectScore> scores) {
  json subjects = json::array();
  for (const SubjectScore& s : scores) {
    json pillars = json::object();
    for (Pillar p : kPillars) pillars[std::string(to_string(p))] = pillar_json(s.pillars[index_of(p)]);
    subjects.push_back({{"subject_id", s.subject_id},
                        {"kind", to_string(s.kind)},
                        {"provider_id", s.provider_id ? json(*s.provider_id) : json(nullptr)},
                        {"aipi_evid", num(s.aipi_evid)},
                        {"aipi_known", num(s.aipi_known)},
                        {"aipi_opt", num(s.aipi_opt)},
                        {"coverage", num(s.coverage)},
                        {"coverage_min", num(s.coverage_min)},
                        {"coverage_max", num(s.coverage_max)},
                        {"mean_pillar_coverage", num(s.mean_pillar_coverage)},
                        {"n_indicators", s.n_indicators},
                        {"n_known", s.n_known},
                        {"pillars", std::move(pillars)}});
  }
  return {{"subjects", std::move(subjects)}};
}

std::vector<SubjectScore> scores_from_json(const json& j) {
  std::vector<SubjectScore> out;
  try {
    for (const json& s : j.at("subjects")) {
      SubjectScore sc;
      sc.subject_id = s.at("subject_id").get<std::string>();
      sc.kind = parse_subject_kind(s.at("kind").get<std::string>()).value();
      if (!s.at("provider_id").is_null()) sc.provider_id = s.at("provider_id").get<std::string>();
      sc.aipi_evid = s.at("aipi_evid").get<double>();
      sc.aipi_known = opt_number(s, "aipi_known");
      sc.aipi_opt = s.at("aipi_opt").get<double>();
      sc.coverage = s.at("coverage").get<double>();
      sc.coverage_min = s.at("coverage_min").get<double>();
      sc.coverage_max = s.at("coverage_max").get<double>();
      sc.mean_pillar_coverage = s.at("mean_pillar_coverage").get<double>();
      sc.n_indicators = s.at("n_indicators").get<std::size_t>();
      sc.n_known = s.at("n_known").get<std::size_t>();
      for (Pillar p : kPillars) {
        const json& pj = s.at("pillars").at(std::string(to_string(p)));
        PillarScore& ps = sc.pillars[index_of(p)];
        ps.pillar = p;
        ps.s_evid = pj.at("s_evid").get<double>();
        ps.s_known = opt_number(pj, "s_known");
        ps.s_opt = pj.at("s_opt").get<double>();
        ps.coverage = pj.at("coverage").get<double>();
        ps.coverage_min = pj.at("coverage_min").get<double>();
        ps.coverage_max = pj.at("coverage_max").get<double>();
        ps.n_indicators = pj.at("n_indicators").get<std::size_t>();
        ps.n_known = pj.at("n_known").get<std::size_t>();
        ps.n_attributable = pj.at("n_attributable").get<std::size_t>();
      }
      out.push_back(std::move(sc));
    }
  } catch (const std::exception& e) {
    throw Error("E_SCORES_FORMAT", std::string("malformed scores document: ") + e.what());
  }
  return out;
}

json providers_to_json(std::span<const ProviderScore> providers) {
  json items = json::array();
  for (const ProviderScore& p : providers) {
    json pillars = json::object();
    for (Pillar pl : kPillars) {
      const PillarRollup& r = p.pillars[index_of(pl)];
      pillars[std::string(to_string(pl))] = {
          {"s_evid", num(r.s_evid)}, {"s_known", num(r.s_known)}, {"s_opt", num(r.s_opt)}, {"coverage", num(r.coverage)}};
    }
    items.push_back({{"provider_id", p.provider_id},
                     {"aipi_evid", num(p.aipi_evid)},
                     {"aipi_known", num(p.aipi_known)},
                     {"aipi_opt", num(p.aipi_opt)},
                     {"coverage", num(p.coverage)},
                     {"k_systems", p.k_systems},
                     {"pillars", std::move(pillars)}});
  }
  return {{"providers", std::move(items)}};
}

json floor_verdicts_to_json(std::span<const FloorVerdict> verdicts, const FloorPolicy& policy) {
  json items = json::array();
  for (const FloorVerdict& v : verdicts) {
    json reasons = json::array();
    for (const FloorReason& r : v.reasons) {
      reasons.push_back({{"code", r.code}, {"target", r.target}, {"detail", r.detail}});
    }
    items.push_back({{"subject_id", v.subject_id}, {"verdict", v.pass ? "pass" : "fail"}, {"reasons", std::move(reasons)}});
  }
  json pol{{"min_overall_evid", num(policy.min_overall_evid)},
           {"min_pillar_evid", num(policy.min_pillar_evid)},
           {"min_pillar_coverage", num(policy.min_pillar_coverage)},
           {"min_mean_coverage", num(policy.min_mean_coverage)},
           {"required_artifacts", policy.required_artifacts},
           {"normative", false}};
  return {{"policy", std::move(pol)}, {"verdicts", std::move(items)}};
}

std::string scores_to_csv(std::span<const SubjectScore> scores) {
  std::ostringstream out;
  out << "subject_id,level,s_evid,s_known,s_opt,coverage,coverage_min,coverage_max,n_indicators,n_known\n";
  for (const SubjectScore& s : scores) {
    for (Pillar p : kPillars) {
      const PillarScore& ps = s.pillars[index_of(p)];
      out << s.subject_id << ',' << to_string(p) << ',' << cell(ps.s_evid) << ',' << cell(ps.s_known) << ','
          << cell(ps.s_opt) << ',' << cell(ps.coverage) << ',' << cell(ps.coverage_min) << ','
          << cell(ps.coverage_max) << ',' << ps.n_indicators << ',' << ps.n_known << '\n';
    }
    out << s.subject_id << ",overall," << cell(s.aipi_evid) << ',' << cell(s.aipi_known) << ',' << cell(s.aipi_opt)
        << ',' << cell(s.coverage) << ',' << cell(s.coverage_min) << ',' << cell(s.coverage_max) << ','
        << s.n_indicators << ',' << s.n_known << '\n';
  }
  return out.str();
}

}  // namespace aipi
