#include "aipi/dataset_io.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "aipi/json_util.hpp"
#include "aipi/validation.hpp"

namespace aipi {

namespace fs = std::filesystem;

ParseError::ParseError(std::vector<ParseIssue> issues)
    : Error(issues.empty() ? "E_PARSE" : issues.front().code,
            std::to_string(issues.size()) + " problem(s) while loading dataset" +
                (issues.empty() ? std::string{} : "; first: " + issues.front().file + " " +
                                                      issues.front().where + " " + issues.front().message)),
      issues_(std::move(issues)) {}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("E_IO", "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, std::string_view bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("E_IO", "cannot write " + p.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("E_IO", "short write to " + p.string());
}

namespace {

class IssueLog {
 public:
  void add(std::string code, std::string file, std::string where, std::string message, std::size_t line = 0) {
    issues_.push_back({std::move(code), std::move(file), line, std::move(where), std::move(message)});
  }
  [[nodiscard]] bool empty() const noexcept { return issues_.empty(); }
  [[nodiscard]] std::vector<ParseIssue> take() {
    std::ranges::sort(issues_, [](const ParseIssue& a, const ParseIssue& b) {
      return std::tie(a.file, a.line, a.where, a.code, a.message) <
             std::tie(b.file, b.line, b.where, b.code, b.message);
    });
    return std::move(issues_);
  }

 private:
  std::vector<ParseIssue> issues_;
};

std::size_t line_of(std::string_view bytes, std::size_t offset) {
  offset = std::min(offset, bytes.size());
  return 1 + static_cast<std::size_t>(std::count(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

/// Parses JSON text, flagging object members that repeat a name.
std::optional<json> parse_document(const std::string& file, const std::string& bytes, IssueLog& log) {
  std::vector<std::set<std::string>> open_objects;
  std::vector<std::string> duplicates;
  json::parser_callback_t cb = [&](int, json::parse_event_t event, json& parsed) {
    switch (event) {
      case json::parse_event_t::object_start: open_objects.emplace_back(); break;
      case json::parse_event_t::object_end:
        if (!open_objects.empty()) open_objects.pop_back();
        break;
      case json::parse_event_t::key:
        if (!open_objects.empty() && !open_objects.back().insert(parsed.get<std::string>()).second) {
          duplicates.push_back(parsed.get<std::string>());
        }
        break;
      default: break;
    }
    return true;
  };
  try {
    json doc = json::parse(bytes, cb);
    for (const std::string& key : duplicates) {
      log.add("E_DUPLICATE_KEY", file, "", "object member '" + key + "' appears more than once");
    }
    if (!duplicates.empty()) return std::nullopt;
    return doc;
  } catch (const json::parse_error& e) {
    log.add("E_SYNTAX", file, "", e.what(), line_of(bytes, e.byte == 0 ? 0 : e.byte - 1));
    return std::nullopt;
  }
}

enum class FieldType { string, boolean, string_list, date, any };

struct FieldSpec {
  std::string_view name;
  FieldType type;
  bool required;
};

/// Checks one record against a closed field list. Returns false if any
/// field is missing, unknown or of the wrong type.
bool check_record(const json& rec, std::span<const FieldSpec> fields, const std::string& file,
                  const std::string& where, IssueLog& log) {
  if (!rec.is_object()) {
    log.add("E_TYPE", file, where, "record must be a JSON object");
    return false;
  }
  bool ok = true;
  for (const auto& [key, _] : rec.items()) {
    if (std::ranges::none_of(fields, [&](const FieldSpec& f) { return f.name == key; })) {
      log.add("E_UNKNOWN_FIELD", file, where + "/" + key, "field '" + key + "' is not part of the schema");
      ok = false;
    }
  }
  for (const FieldSpec& f : fields) {
    const std::string name(f.name);
    auto it = rec.find(name);
    if (it == rec.end() || (it->is_null() && !f.required)) {
      if (f.required) {
        log.add("E_MISSING_FIELD", file, where, "required field '" + name + "' is missing");
        ok = false;
      }
      continue;
    }
    const json& v = *it;
    bool type_ok = true;
    switch (f.type) {
      case FieldType::string: type_ok = v.is_string(); break;
      case FieldType::boolean: type_ok = v.is_boolean(); break;
      case FieldType::string_list:
        type_ok = v.is_array() && std::ranges::all_of(v, [](const json& e) { return e.is_string(); });
        break;
      case FieldType::date:
        type_ok = v.is_string();
        if (type_ok && !Date::parse(v.get<std::string>())) {
          log.add("E_DATE", file, where + "/" + name, "'" + v.get<std::string>() + "' is not a YYYY-MM-DD date");
          ok = false;
        }
        break;
      case FieldType::any: break;
    }
    if (!type_ok) {
      log.add("E_TYPE", file, where + "/" + name, "field '" + name + "' has the wrong JSON type");
      ok = false;
    }
  }
  return ok;
}

std::optional<std::string> opt_string(const json& rec, const char* key) {
  auto it = rec.find(key);
  if (it == rec.end() || it->is_null()) return std::nullopt;
  return it->get<std::string>();
}

std::optional<Date> opt_date(const json& rec, const char* key) {
  auto s = opt_string(rec, key);
  return s ? Date::parse(*s) : std::nullopt;
}

template <class Enum, class ParseFn>
std::optional<Enum> read_enum(const json& rec, const char* key, ParseFn parse, const std::string& file,
                              const std::string& where, IssueLog& log) {
  const std::string text = rec.at(key).get<std::string>();
  auto v = parse(text);
  if (!v) log.add("E_ENUM", file, where + "/" + key, "'" + text + "' is not a valid " + key);
  return v;
}

constexpr std::array kIndicatorFields{
    FieldSpec{"id", FieldType::string, true},
    FieldSpec{"pillar", FieldType::string, true},
    FieldSpec{"kind", FieldType::string, true},
    FieldSpec{"title", FieldType::string, true},
};

constexpr std::array kSubjectFields{
    FieldSpec{"subject_id", FieldType::string, true},
    FieldSpec{"name", FieldType::string, true},
    FieldSpec{"kind", FieldType::string, true},
    FieldSpec{"provider_id", FieldType::string, false},
};

constexpr std::array kArtifactFields{
    FieldSpec{"artifact_id", FieldType::string, true},
    FieldSpec{"url", FieldType::string, true},
    FieldSpec{"published_date", FieldType::date, false},
    FieldSpec{"retrieved_date", FieldType::date, true},
    FieldSpec{"archive_url", FieldType::string, false},
    FieldSpec{"source_kind", FieldType::string, true},
};

constexpr std::array kCodeFields{
    FieldSpec{"subject_id", FieldType::string, true},
    FieldSpec{"indicator_id", FieldType::string, true},
    FieldSpec{"coder_id", FieldType::string, true},
    FieldSpec{"value", FieldType::any, true},
    FieldSpec{"evidence_refs", FieldType::string_list, true},
    FieldSpec{"evidence_class", FieldType::string, true},
    FieldSpec{"stale", FieldType::boolean, true},
    FieldSpec{"coded_date", FieldType::date, true},
};

/// Types a JSON code value against the indicator kind.
std::optional<CodeValue> read_value(const json& v, IndicatorKind kind, const std::string& file,
                                    const std::string& where, IssueLog& log) {
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "unknown") return CodeValue::unknown();
    if (s == "yes" || s == "no") {
      if (kind == IndicatorKind::binary) return CodeValue::binary(s == "yes");
      log.add("E_KIND_MISMATCH", file, where, "value '" + s + "' on a " + std::string(to_string(kind)) + " indicator");
      return std::nullopt;
    }
    log.add("E_VALUE_DOMAIN", file, where, "value '" + s + "' is not recognised");
    return std::nullopt;
  }
  if (v.is_number_integer()) {
    if (kind == IndicatorKind::binary) {
      log.add("E_KIND_MISMATCH", file, where, "integer value on a binary indicator");
      return std::nullopt;
    }
    std::int64_t n = 0;
    if (v.is_number_unsigned()) {
      const auto u = v.get<std::uint64_t>();
      if (u > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
        log.add("E_VALUE_DOMAIN", file, where, "count out of range");
        return std::nullopt;
      }
      n = static_cast<std::int64_t>(u);
    } else {
      n = v.get<std::int64_t>();
    }
    return kind == IndicatorKind::ordinal3 ? CodeValue::ordinal(n) : CodeValue::count(n);
  }
  log.add("E_TYPE", file, where, "value must be \"yes\", \"no\", \"unknown\" or an integer");
  return std::nullopt;
}

std::string pointer(std::size_t i) { return "/" + std::to_string(i); }

}  // namespace

Dataset parse_dataset(const DocumentSet& documents) {
  IssueLog log;
  std::map<std::string, json, std::less<>> docs;
  for (std::string_view name : kDatasetFiles) {
    auto it = documents.find(name);
    const std::string file(name);
    if (it == documents.end()) {
      log.add("E_MISSING_FILE", file, "", "dataset document is missing");
      continue;
    }
    auto doc = parse_document(file, it->second, log);
    if (!doc) continue;
    if (!doc->is_array()) {
      log.add("E_TYPE", file, "", "top-level value must be an array of records");
      continue;
    }
    docs.emplace(file, std::move(*doc));
  }
  for (const auto& [name, _] : documents) {
    if (std::ranges::find(kDatasetFiles, std::string_view(name)) == kDatasetFiles.end()) {
      log.add("E_UNKNOWN_FILE", name, "", "not a dataset document");
    }
  }
  if (!log.empty()) throw ParseError(log.take());

  Dataset d;
  const std::string ind_file = "indicators.json";
  for (std::size_t i = 0; const json& rec : docs.at(ind_file)) {
    const std::string where = pointer(i++);
    if (!check_record(rec, kIndicatorFields, ind_file, where, log)) continue;
    auto pillar = read_enum<Pillar>(rec, "pillar", parse_pillar, ind_file, where, log);
    auto kind = read_enum<IndicatorKind>(rec, "kind", parse_indicator_kind, ind_file, where, log);
    if (!pillar || !kind) continue;
    d.indicators.push_back({rec.at("id").get<std::string>(), *pillar, *kind, rec.at("title").get<std::string>()});
  }

  const std::string subj_file = "subjects.json";
  for (std::size_t i = 0; const json& rec : docs.at(subj_file)) {
    const std::string where = pointer(i++);
    if (!check_record(rec, kSubjectFields, subj_file, where, log)) continue;
    auto kind = read_enum<SubjectKind>(rec, "kind", parse_subject_kind, subj_file, where, log);
    if (!kind) continue;
    d.subjects.push_back({rec.at("subject_id").get<std::string>(), rec.at("name").get<std::string>(), *kind,
                          opt_string(rec, "provider_id")});
  }

  const std::string art_file = "artifacts.json";
  for (std::size_t i = 0; const json& rec : docs.at(art_file)) {
    const std::string where = pointer(i++);
    if (!check_record(rec, kArtifactFields, art_file, where, log)) continue;
    auto kind = read_enum<SourceKind>(rec, "source_kind", parse_source_kind, art_file, where, log);
    if (!kind) continue;
    d.artifacts.push_back({rec.at("artifact_id").get<std::string>(), rec.at("url").get<std::string>(),
                           opt_date(rec, "published_date"), *opt_date(rec, "retrieved_date"),
                           opt_string(rec, "archive_url"), *kind});
  }

  // Codes need indicator kinds to type their values.
  std::map<std::string, IndicatorKind, std::less<>> kinds;
  for (const IndicatorDef& def : d.indicators) kinds.emplace(def.id, def.kind);

  const std::string code_file = "codes.json";
  for (std::size_t i = 0; const json& rec : docs.at(code_file)) {
    const std::string where = pointer(i++);
    if (!check_record(rec, kCodeFields, code_file, where, log)) continue;
    auto cls = read_enum<EvidenceClass>(rec, "evidence_class", parse_evidence_class, code_file, where, log);
    const std::string indicator_id = rec.at("indicator_id").get<std::string>();
    auto kind_it = kinds.find(indicator_id);
    if (kind_it == kinds.end()) {
      log.add("E_DANGLING_REF", code_file, where + "/indicator_id", "unknown indicator '" + indicator_id + "'");
      continue;
    }
    auto value = read_value(rec.at("value"), kind_it->second, code_file, where + "/value", log);
    if (!cls || !value) continue;
    RawCode code;
    code.subject_id = rec.at("subject_id").get<std::string>();
    code.indicator_id = indicator_id;
    code.coder_id = rec.at("coder_id").get<std::string>();
    code.value = *value;
    code.evidence_refs = rec.at("evidence_refs").get<std::vector<std::string>>();
    code.evidence_class = *cls;
    code.stale = rec.at("stale").get<bool>();
    code.coded_date = *opt_date(rec, "coded_date");
    d.codes.push_back(std::move(code));
  }

  // Duplicate refs inside one list would vanish on canonical sort; catch them first.
  for (const RawCode& c : d.codes) {
    std::set<std::string_view> seen;
    for (const std::string& ref : c.evidence_refs) {
      if (!seen.insert(ref).second) {
        log.add("E_DUPLICATE_KEY", code_file, c.subject_id + "/" + c.indicator_id + "/" + c.coder_id,
                "evidence ref '" + ref + "' listed twice");
      }
    }
  }

  d.canonicalize();
  for (const Violation& v : structural_violations(d)) {
    if (v.severity == Severity::error) log.add(v.code, v.file, v.record, v.message);
  }
  if (!log.empty()) throw ParseError(log.take());
  return d;
}

Dataset load_dataset(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw ParseError({{"E_IO", dir.string(), 0, "", "dataset directory does not exist"}});
  }
  DocumentSet docs;
  for (std::string_view name : kDatasetFiles) {
    const fs::path p = dir / name;
    if (fs::exists(p)) docs.emplace(std::string(name), read_file(p));
  }
  return parse_dataset(docs);
}

DocumentSet serialize_dataset(const Dataset& input) {
  Dataset d = input;
  d.canonicalize();

  json indicators = json::array();
  for (const IndicatorDef& def : d.indicators) {
    indicators.push_back({{"id", def.id},
                          {"pillar", to_string(def.pillar)},
                          {"kind", to_string(def.kind)},
                          {"title", def.title}});
  }

  json subjects = json::array();
  for (const Subject& s : d.subjects) {
    json rec{{"subject_id", s.subject_id}, {"name", s.name}, {"kind", to_string(s.kind)}};
    if (s.provider_id) rec["provider_id"] = *s.provider_id;
    subjects.push_back(std::move(rec));
  }

  json artifacts = json::array();
  for (const EvidenceArtifact& a : d.artifacts) {
    json rec{{"artifact_id", a.artifact_id},
             {"url", a.url},
             {"retrieved_date", a.retrieved_date.str()},
             {"source_kind", to_string(a.source_kind)}};
    if (a.published_date) rec["published_date"] = a.published_date->str();
    if (a.archive_url) rec["archive_url"] = *a.archive_url;
    artifacts.push_back(std::move(rec));
  }

  json codes = json::array();
  for (const RawCode& c : d.codes) {
    json value;
    switch (c.value.variant()) {
      case CodeValue::Variant::unknown:
      case CodeValue::Variant::binary: value = c.value.str(); break;
      case CodeValue::Variant::ordinal:
      case CodeValue::Variant::count: value = c.value.magnitude(); break;
    }
    codes.push_back({{"subject_id", c.subject_id},
                     {"indicator_id", c.indicator_id},
                     {"coder_id", c.coder_id},
                     {"value", std::move(value)},
                     {"evidence_refs", c.evidence_refs},
                     {"evidence_class", to_string(c.evidence_class)},
                     {"stale", c.stale},
                     {"coded_date", c.coded_date.str()}});
  }

  return {{"indicators.json", canonical_dump(indicators)},
          {"subjects.json", canonical_dump(subjects)},
          {"artifacts.json", canonical_dump(artifacts)},
          {"codes.json", canonical_dump(codes)}};
}

}  // namespace aipi
