#include "aipi/release.hpp"

#include <algorithm>
#include <set>

#include <openssl/evp.h>

#include "aipi/dataset_io.hpp"
#include "aipi/reliability.hpp"
#include "aipi/sensitivity.hpp"

#ifndef AIPI_VERSION
#define AIPI_VERSION "0.0.0"
#endif

namespace aipi {

namespace fs = std::filesystem;

std::string_view tool_version() noexcept { return "aipi " AIPI_VERSION; }

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("E_HASH", "SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xF]);
  }
  return out;
}

// ---- configuration -------------------------------------------------------

void ReleaseConfig::check() const {
  try {
    floors.check();
    pillar_weights.check();
  } catch (const Error& e) {
    throw Error("E_CONFIG", e.what());
  }
  if (!(sample_fraction > 0.0 && sample_fraction <= 1.0)) throw Error("E_CONFIG", "sample_fraction must be in (0, 1]");
  if (n_resamples < 100) throw Error("E_CONFIG", "n_resamples must be at least 100");
  if (n_bins < 2) throw Error("E_CONFIG", "n_bins must be at least 2");
  if (!(reliability_threshold >= -1.0 && reliability_threshold <= 1.0)) {
    throw Error("E_CONFIG", "reliability_threshold must be in [-1, 1]");
  }
}

namespace {

void require_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                  std::span<const std::string_view> extra, const std::string& where) {
  if (!obj.is_object()) throw Error("E_CONFIG", where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    const bool known = std::ranges::find(allowed, key) != allowed.end() || std::ranges::find(extra, key) != extra.end();
    if (!known) throw Error("E_CONFIG", "unknown key '" + key + "' in " + where);
  }
}

template <class T>
T get_as(const json& obj, const char* key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error("E_CONFIG", std::string(where) + "." + key + " has the wrong type");
  }
}

double get_number(const json& obj, const char* key, const std::string& where) {
  if (!obj.at(key).is_number()) throw Error("E_CONFIG", where + "." + key + " must be a number");
  return obj.at(key).get<double>();
}

std::uint64_t get_unsigned(const json& obj, const char* key, const std::string& where) {
  if (!obj.at(key).is_number_unsigned()) throw Error("E_CONFIG", where + "." + key + " must be a non-negative integer");
  return obj.at(key).get<std::uint64_t>();
}

}  // namespace

ReleaseConfig release_config_from_json(const json& j, std::span<const std::string_view> extra_keys) {
  require_keys(j,
               {"version", "cutoff_date", "floors", "pillar_weights", "seeds", "sample_fraction", "n_resamples",
                "n_bins", "reliability_threshold"},
               extra_keys, "config");
  ReleaseConfig c;
  if (j.contains("version")) c.version = get_as<std::string>(j, "version", "config");
  if (j.contains("cutoff_date")) {
    const auto text = get_as<std::string>(j, "cutoff_date", "config");
    c.cutoff_date = Date::parse(text);
    if (!c.cutoff_date) throw Error("E_CONFIG", "cutoff_date '" + text + "' is not a YYYY-MM-DD date");
  }
  if (j.contains("floors")) {
    const json& f = j.at("floors");
    require_keys(f, {"min_overall_evid", "min_pillar_evid", "min_pillar_coverage", "min_mean_coverage", "required_artifacts"},
                 {}, "floors");
    if (f.contains("min_overall_evid")) c.floors.min_overall_evid = get_number(f, "min_overall_evid", "floors");
    if (f.contains("min_pillar_evid")) c.floors.min_pillar_evid = get_number(f, "min_pillar_evid", "floors");
    if (f.contains("min_pillar_coverage")) c.floors.min_pillar_coverage = get_number(f, "min_pillar_coverage", "floors");
    if (f.contains("min_mean_coverage")) c.floors.min_mean_coverage = get_number(f, "min_mean_coverage", "floors");
    if (f.contains("required_artifacts")) {
      const auto ids = get_as<std::vector<std::string>>(f, "required_artifacts", "floors");
      c.floors.required_artifacts = {ids.begin(), ids.end()};
    }
  }
  if (j.contains("pillar_weights")) {
    const json& w = j.at("pillar_weights");
    require_keys(w, {"PG", "ID", "TR", "AC"}, {}, "pillar_weights");
    for (Pillar p : kPillars) {
      const std::string key(to_string(p));
      if (!w.contains(key)) throw Error("E_CONFIG", "pillar_weights needs all four pillars");
      c.pillar_weights.w[index_of(p)] = get_number(w, key.c_str(), "pillar_weights");
    }
  }
  if (j.contains("seeds")) {
    const json& s = j.at("seeds");
    require_keys(s, {"sampling", "bootstrap"}, {}, "seeds");
    if (s.contains("sampling")) c.sampling_seed = get_unsigned(s, "sampling", "seeds");
    if (s.contains("bootstrap")) c.bootstrap_seed = get_unsigned(s, "bootstrap", "seeds");
  }
  if (j.contains("sample_fraction")) c.sample_fraction = get_number(j, "sample_fraction", "config");
  if (j.contains("n_resamples")) c.n_resamples = get_unsigned(j, "n_resamples", "config");
  if (j.contains("n_bins")) c.n_bins = get_unsigned(j, "n_bins", "config");
  if (j.contains("reliability_threshold")) c.reliability_threshold = get_number(j, "reliability_threshold", "config");
  c.check();
  return c;
}

json release_config_to_json(const ReleaseConfig& c) {
  json weights = json::object();
  for (Pillar p : kPillars) weights[std::string(to_string(p))] = num(c.pillar_weights[p]);
  return {{"version", c.version},
          {"cutoff_date", c.cutoff_date ? json(c.cutoff_date->str()) : json(nullptr)},
          {"floors",
           {{"min_overall_evid", num(c.floors.min_overall_evid)},
            {"min_pillar_evid", num(c.floors.min_pillar_evid)},
            {"min_pillar_coverage", num(c.floors.min_pillar_coverage)},
            {"min_mean_coverage", num(c.floors.min_mean_coverage)},
            {"required_artifacts", c.floors.required_artifacts}}},
          {"pillar_weights", std::move(weights)},
          {"seeds", {{"sampling", c.sampling_seed}, {"bootstrap", c.bootstrap_seed}}},
          {"sample_fraction", num(c.sample_fraction)},
          {"n_resamples", c.n_resamples},
          {"n_bins", c.n_bins},
          {"reliability_threshold", num(c.reliability_threshold)}};
}

// ---- manifest ------------------------------------------------------------

ValidationFailed::ValidationFailed(std::vector<Violation> violations)
    : Error("E_VALIDATION", std::to_string(count(violations, Severity::error)) + " validation error(s)"),
      violations_(std::move(violations)) {}

json manifest_to_json(const ReleaseManifest& m) {
  json files = json::array();
  for (const FileDigest& f : m.files) files.push_back({{"name", f.name}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  return {{"version", m.version},
          {"cutoff_date", m.cutoff_date},
          {"config_hash", m.config_hash},
          {"dataset_hash", m.dataset_hash},
          {"tool_version", m.tool_version},
          {"seed_registry", m.seed_registry},
          {"files", std::move(files)}};
}

ReleaseManifest manifest_from_json(const json& j) {
  try {
    ReleaseManifest m;
    m.version = j.at("version").get<std::string>();
    m.cutoff_date = j.at("cutoff_date").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.dataset_hash = j.at("dataset_hash").get<std::string>();
    m.tool_version = j.at("tool_version").get<std::string>();
    m.seed_registry = j.at("seed_registry").get<std::map<std::string, std::uint64_t>>();
    for (const json& f : j.at("files")) {
      m.files.push_back({f.at("name").get<std::string>(), f.at("sha256").get<std::string>(), f.at("bytes").get<std::size_t>()});
    }
    return m;
  } catch (const json::exception& e) {
    throw Error("E_MANIFEST_FORMAT", std::string("malformed manifest: ") + e.what());
  }
}

// ---- build ---------------------------------------------------------------

json adjudicated_to_json(const ScoredDataset& scored) {
  json codes = json::array();
  for (const auto& [key, code] : scored.adjudicated) {
    json value;
    switch (code.value.variant()) {
      case CodeValue::Variant::unknown:
      case CodeValue::Variant::binary: value = code.value.str(); break;
      case CodeValue::Variant::ordinal:
      case CodeValue::Variant::count: value = code.value.magnitude(); break;
    }
    codes.push_back({{"subject_id", code.subject_id},
                     {"indicator_id", code.indicator_id},
                     {"value", std::move(value)},
                     {"normalized", num(scored.values.at(key.first).at(key.second).get())},
                     {"evidence_class", code.evidence_class ? json(to_string(*code.evidence_class)) : json(nullptr)},
                     {"stale", code.stale},
                     {"contributing_coders", code.contributing_coders},
                     {"conflict_resolved", code.conflict_resolved},
                     {"evidence_refs", code.evidence_refs}});
  }
  return {{"codes", std::move(codes)}};
}

namespace {

std::string dataset_digest(const Dataset& d) {
  const DocumentSet docs = serialize_dataset(d);
  std::string joined;
  for (std::string_view name : kDatasetFiles) {
    joined.append(name).push_back('\n');
    joined += docs.find(name)->second;
  }
  return sha256_hex(joined);
}

}  // namespace

ReleaseContents render_release(const Dataset& d, const ReleaseConfig& config, unsigned threads) {
  config.check();
  if (config.version.empty()) throw Error("E_CONFIG", "a release needs a version");
  if (!config.cutoff_date) throw Error("E_CONFIG", "a release needs a cutoff_date");

  std::vector<Violation> violations = validate_dataset(d, config.cutoff_date);
  if (count(violations, Severity::error) > 0) throw ValidationFailed(std::move(violations));

  const CountReferenceTable c_ref = compute_c_ref(d);
  const ScoredDataset scored = score_dataset(d, c_ref, config.pillar_weights, threads);

  std::vector<FloorVerdict> verdicts;
  for (const std::string& id : scoring_units(d)) {
    const auto it = std::ranges::find(scored.subjects, id, &SubjectScore::subject_id);
    verdicts.push_back(check_floors(*it, config.floors, scored.values.at(id)));
  }

  const ReliabilityReport reliability =
      reliability_report(d, c_ref, config.sample_fraction, config.sampling_seed, config.reliability_threshold);

  SensitivityOptions opts;
  opts.n_resamples = config.n_resamples;
  opts.bootstrap_seed = config.bootstrap_seed;
  opts.n_bins = config.n_bins;
  opts.threads = threads;
  const SensitivityReport sensitivity = sensitivity_report(make_score_matrix(d, scored), opts);

  ReleaseContents out;
  out.files["adjudicated.json"] = canonical_dump(adjudicated_to_json(scored));
  out.files["c_ref.json"] = canonical_dump(c_ref_to_json(c_ref));
  out.files["coverage_dependence.csv"] = coverage_dependence_csv(sensitivity.coverage);
  out.files["floor_verdicts.json"] = canonical_dump(floor_verdicts_to_json(verdicts, config.floors));
  out.files["known_only_report.csv"] = known_only_report_csv(known_only_report(scored, config.pillar_weights));
  out.files["providers.json"] = canonical_dump(providers_to_json(scored.providers));
  out.files["reliability.json"] = canonical_dump(reliability_to_json(reliability));
  out.files["scores.csv"] = scores_to_csv(scored.subjects);
  out.files["scores.json"] = canonical_dump(scores_to_json(scored.subjects));
  out.files["sensitivity.json"] = canonical_dump(sensitivity_to_json(sensitivity));
  out.files["violations.json"] = canonical_dump(violations_to_json(violations));

  ReleaseManifest& m = out.manifest;
  m.version = config.version;
  m.cutoff_date = config.cutoff_date->str();
  m.config_hash = sha256_hex(canonical_dump(release_config_to_json(config)));
  m.dataset_hash = dataset_digest(d);
  m.tool_version = std::string(tool_version());
  m.seed_registry = {{"bootstrap", config.bootstrap_seed}, {"sampling", config.sampling_seed}};
  for (const auto& [name, bytes] : out.files) m.files.push_back({name, sha256_hex(bytes), bytes.size()});
  out.files["manifest.json"] = canonical_dump(manifest_to_json(m));
  return out;
}

ReleaseManifest build_release(const fs::path& dataset_dir, const ReleaseConfig& config, const fs::path& out_dir,
                              unsigned threads) {
  const Dataset d = load_dataset(dataset_dir);
  const ReleaseContents contents = render_release(d, config, threads);

  fs::path target = out_dir.lexically_normal();
  if (target.filename().empty()) target = target.parent_path();
  if (fs::exists(target)) {
    if (!fs::is_directory(target)) throw Error("E_OUT_PATH", target.string() + " exists and is not a directory");
    if (!fs::is_empty(target) && !fs::exists(target / "manifest.json")) {
      throw Error("E_OUT_PATH", target.string() + " is not empty and does not hold a release; refusing to replace it");
    }
  }
  fs::path staging = target;
  staging += ".partial";
  fs::remove_all(staging);
  try {
    fs::create_directories(staging);
    for (const auto& [name, bytes] : contents.files) write_file(staging / name, bytes);
    fs::remove_all(target);
    fs::rename(staging, target);
  } catch (...) {
    std::error_code ec;
    fs::remove_all(staging, ec);
    throw;
  }
  return contents.manifest;
}

ScoredDataset rescore_against(const Dataset& d, const CountReferenceTable& frozen, const PillarWeights& weights,
                              unsigned threads) {
  for (const IndicatorDef& def : d.indicators) {
    if (def.kind == IndicatorKind::count && !frozen.contains(def.id)) {
      throw Error("E_MISSING_CREF", "frozen reference table has no entry for " + def.id);
    }
  }
  return score_dataset(d, frozen, weights, threads);
}

// ---- diff ----------------------------------------------------------------

namespace {

struct LoadedRelease {
  ReleaseManifest manifest;
  std::vector<SubjectScore> scores;
  json adjudicated;
};

LoadedRelease load_release(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  if (!fs::exists(manifest_path)) throw Error("E_NO_MANIFEST", dir.string() + " has no manifest.json");
  LoadedRelease r;
  try {
    r.manifest = manifest_from_json(json::parse(read_file(manifest_path)));
  } catch (const json::parse_error& e) {
    throw Error("E_MANIFEST_FORMAT", e.what());
  }
  for (const FileDigest& f : r.manifest.files) {
    const fs::path p = dir / f.name;
    if (!fs::exists(p)) throw Error("E_TAMPERED", f.name + " listed in the manifest is missing from " + dir.string());
    if (sha256_hex(read_file(p)) != f.sha256) {
      throw Error("E_TAMPERED", f.name + " in " + dir.string() + " does not match its manifest digest");
    }
  }
  r.scores = scores_from_json(json::parse(read_file(dir / "scores.json")));
  r.adjudicated = json::parse(read_file(dir / "adjudicated.json"));
  return r;
}

/// Calls f(level, field, member) for every numeric field of a SubjectScore.
template <class Score, class F>
void visit_fields(Score& s, F&& f) {
  for (Pillar p : kPillars) {
    auto& ps = s.pillars[index_of(p)];
    const std::string level(to_string(p));
    f(level, "s_evid", ps.s_evid);
    f(level, "s_known", ps.s_known);
    f(level, "s_opt", ps.s_opt);
    f(level, "coverage", ps.coverage);
    f(level, "coverage_min", ps.coverage_min);
    f(level, "coverage_max", ps.coverage_max);
    f(level, "n_indicators", ps.n_indicators);
    f(level, "n_known", ps.n_known);
    f(level, "n_attributable", ps.n_attributable);
  }
  const std::string overall = "overall";
  f(overall, "aipi_evid", s.aipi_evid);
  f(overall, "aipi_known", s.aipi_known);
  f(overall, "aipi_opt", s.aipi_opt);
  f(overall, "coverage", s.coverage);
  f(overall, "coverage_min", s.coverage_min);
  f(overall, "coverage_max", s.coverage_max);
  f(overall, "mean_pillar_coverage", s.mean_pillar_coverage);
  f(overall, "n_indicators", s.n_indicators);
  f(overall, "n_known", s.n_known);
}

using FieldKey = std::pair<std::string, std::string>;

std::map<FieldKey, std::optional<double>> flatten(const SubjectScore& s) {
  std::map<FieldKey, std::optional<double>> out;
  visit_fields(s, [&](const std::string& level, const char* field, const auto& member) {
    using T = std::decay_t<decltype(member)>;
    if constexpr (std::is_same_v<T, std::optional<double>>) {
      out[{level, field}] = member;
    } else {
      out[{level, field}] = static_cast<double>(member);
    }
  });
  return out;
}

struct CodeEntry {
  std::string value;
  std::vector<std::string> refs;
};

std::map<ItemKey, CodeEntry> index_codes(const json& adjudicated) {
  std::map<ItemKey, CodeEntry> out;
  for (const json& c : adjudicated.at("codes")) {
    const json& v = c.at("value");
    out[{c.at("subject_id").get<std::string>(), c.at("indicator_id").get<std::string>()}] = {
        v.is_string() ? v.get<std::string>() : v.dump(), c.at("evidence_refs").get<std::vector<std::string>>()};
  }
  return out;
}

json opt_json(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

}  // namespace

ReleaseDiff diff_releases(const fs::path& dir_a, const fs::path& dir_b) {
  const LoadedRelease a = load_release(dir_a);
  const LoadedRelease b = load_release(dir_b);
  if (a.manifest.version == b.manifest.version && a.manifest.dataset_hash != b.manifest.dataset_hash) {
    throw Error("E_TAMPERED", "releases share version " + a.manifest.version + " but were built from different data");
  }

  ReleaseDiff diff;
  auto meta = [&](const char* field, const std::string& x, const std::string& y) {
    if (x != y) diff.metadata.push_back({field, x, y});
  };
  meta("version", a.manifest.version, b.manifest.version);
  meta("cutoff_date", a.manifest.cutoff_date, b.manifest.cutoff_date);
  meta("config_hash", a.manifest.config_hash, b.manifest.config_hash);
  meta("dataset_hash", a.manifest.dataset_hash, b.manifest.dataset_hash);
  meta("tool_version", a.manifest.tool_version, b.manifest.tool_version);

  std::map<std::string, const SubjectScore*> scores_a, scores_b;
  for (const SubjectScore& s : a.scores) scores_a.emplace(s.subject_id, &s);
  for (const SubjectScore& s : b.scores) scores_b.emplace(s.subject_id, &s);
  for (const auto& [id, s] : scores_a) {
    if (!scores_b.contains(id)) diff.subjects_removed.push_back(id);
  }
  for (const auto& [id, s] : scores_b) {
    auto it = scores_a.find(id);
    if (it == scores_a.end()) {
      diff.subjects_added.push_back(*s);
      continue;
    }
    const auto fa = flatten(*it->second);
    const auto fb = flatten(*s);
    for (const auto& [key, va] : fa) {
      const auto& vb = fb.at(key);
      if (va == vb) continue;
      ScoreChange ch{id, key.first, key.second, va, vb, std::nullopt};
      if (va && vb) ch.delta = round9(*vb - *va);
      diff.scores.push_back(std::move(ch));
    }
  }

  const auto codes_a = index_codes(a.adjudicated);
  const auto codes_b = index_codes(b.adjudicated);
  for (const auto& [key, ca] : codes_a) {
    auto it = codes_b.find(key);
    if (it == codes_b.end()) {
      diff.indicators.push_back({key.first, key.second, "removed", ca.value, std::nullopt, ca.refs, {}});
    } else if (ca.value != it->second.value) {
      diff.indicators.push_back({key.first, key.second, "value_changed", ca.value, it->second.value, ca.refs, it->second.refs});
    } else if (ca.refs != it->second.refs) {
      diff.indicators.push_back({key.first, key.second, "evidence_changed", ca.value, it->second.value, ca.refs, it->second.refs});
    }
  }
  for (const auto& [key, cb] : codes_b) {
    if (!codes_a.contains(key)) {
      diff.indicators.push_back({key.first, key.second, "added", std::nullopt, cb.value, {}, cb.refs});
    }
  }
  std::ranges::sort(diff.indicators, [](const IndicatorChange& x, const IndicatorChange& y) {
    return std::tie(x.subject_id, x.indicator_id) < std::tie(y.subject_id, y.indicator_id);
  });
  return diff;
}

std::vector<SubjectScore> apply_diff(std::vector<SubjectScore> scores, const ReleaseDiff& diff) {
  std::erase_if(scores, [&](const SubjectScore& s) {
    return std::ranges::find(diff.subjects_removed, s.subject_id) != diff.subjects_removed.end();
  });
  for (const ScoreChange& ch : diff.scores) {
    auto it = std::ranges::find(scores, ch.subject_id, &SubjectScore::subject_id);
    if (it == scores.end()) throw Error("E_DIFF_APPLY", "diff refers to unknown subject " + ch.subject_id);
    visit_fields(*it, [&](const std::string& level, const char* field, auto& member) {
      if (level != ch.level || ch.field != field) return;
      using T = std::decay_t<decltype(member)>;
      if constexpr (std::is_same_v<T, std::optional<double>>) {
        member = ch.b;
      } else {
        member = static_cast<T>(ch.b.value_or(0.0));
      }
    });
  }
  scores.insert(scores.end(), diff.subjects_added.begin(), diff.subjects_added.end());
  std::ranges::sort(scores, {}, &SubjectScore::subject_id);
  return scores;
}

json diff_to_json(const ReleaseDiff& diff) {
  json metadata = json::array();
  for (const MetadataChange& m : diff.metadata) metadata.push_back({{"field", m.field}, {"a", m.a}, {"b", m.b}});
  json scores = json::array();
  for (const ScoreChange& s : diff.scores) {
    scores.push_back({{"subject_id", s.subject_id},
                      {"level", s.level},
                      {"field", s.field},
                      {"a", opt_json(s.a)},
                      {"b", opt_json(s.b)},
                      {"delta", opt_json(s.delta)}});
  }
  json indicators = json::array();
  for (const IndicatorChange& c : diff.indicators) {
    indicators.push_back({{"subject_id", c.subject_id},
                          {"indicator_id", c.indicator_id},
                          {"change", c.change},
                          {"value_a", c.value_a ? json(*c.value_a) : json(nullptr)},
                          {"value_b", c.value_b ? json(*c.value_b) : json(nullptr)},
                          {"evidence_refs_a", c.refs_a},
                          {"evidence_refs_b", c.refs_b}});
  }
  return {{"empty", diff.empty()},
          {"metadata", std::move(metadata)},
          {"subjects_added", scores_to_json(diff.subjects_added).at("subjects")},
          {"subjects_removed", diff.subjects_removed},
          {"score_changes", std::move(scores)},
          {"indicator_changes", std::move(indicators)}};
}

}  // namespace aipi
