#include "aipi/validation.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <set>

namespace aipi {

std::string_view to_string(Severity s) noexcept { return s == Severity::error ? "error" : "warning"; }

namespace {

constexpr std::string_view kIndicators = "indicators.json";
constexpr std::string_view kSubjects = "subjects.json";
constexpr std::string_view kArtifacts = "artifacts.json";
constexpr std::string_view kCodes = "codes.json";

struct Sink {
  std::vector<Violation>& out;

  void error(std::string code, std::string_view file, std::string record, std::string message) {
    out.push_back({Severity::error, std::move(code), std::string(file), std::move(record), std::move(message)});
  }
  void warning(std::string code, std::string_view file, std::string record, std::string message) {
    out.push_back({Severity::warning, std::move(code), std::string(file), std::move(record), std::move(message)});
  }
};

std::string code_key(const RawCode& c) { return c.subject_id + "/" + c.indicator_id + "/" + c.coder_id; }

template <class T, class Proj>
void check_unique(const std::vector<T>& items, Proj key, std::string_view file, Sink& sink) {
  std::set<std::string> seen;
  for (const T& item : items) {
    const std::string& k = std::invoke(key, item);
    if (k.empty()) sink.error("E_EMPTY_ID", file, k, "identifier must not be empty");
    if (!seen.insert(k).second) sink.error("E_DUPLICATE_KEY", file, k, "identifier '" + k + "' defined twice");
  }
}

bool valid_indicator_id(std::string_view id) {
  // <PILLAR>-<2 digits>
  return id.size() == 5 && parse_pillar(id.substr(0, 2)).has_value() && id[2] == '-' &&
         std::isdigit(static_cast<unsigned char>(id[3])) && std::isdigit(static_cast<unsigned char>(id[4]));
}

void sort_violations(std::vector<Violation>& vs) {
  std::ranges::sort(vs, [](const Violation& a, const Violation& b) {
    return std::tie(a.file, a.record, a.code, a.severity, a.message) <
           std::tie(b.file, b.record, b.code, b.severity, b.message);
  });
  vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
}

}  // namespace

std::string check_public_url(std::string_view url) {
  const auto colon = url.find(':');
  if (colon == std::string_view::npos || colon == 0) return "E_URL_SYNTAX";
  std::string scheme(url.substr(0, colon));
  if (!std::isalpha(static_cast<unsigned char>(scheme[0])) ||
      !std::ranges::all_of(scheme, [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.';
      })) {
    return "E_URL_SYNTAX";
  }
  std::ranges::transform(scheme, scheme.begin(), [](char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); });
  if (scheme != "http" && scheme != "https") return "E_URL_SCHEME";

  std::string_view rest = url.substr(colon + 1);
  if (!rest.starts_with("//")) return "E_URL_SYNTAX";
  rest.remove_prefix(2);
  const std::string_view authority = rest.substr(0, rest.find_first_of("/?#"));
  std::string_view host = authority.substr(authority.find('@') == std::string_view::npos ? 0 : authority.find('@') + 1);
  if (const auto port = host.rfind(':'); port != std::string_view::npos && !host.starts_with("[")) {
    const std::string_view digits = host.substr(port + 1);
    if (digits.empty() || !std::ranges::all_of(digits, [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      return "E_URL_SYNTAX";
    }
    host = host.substr(0, port);
  }
  if (host.empty()) return "E_URL_SYNTAX";
  const bool bad_char = std::ranges::any_of(url, [](char c) {
    return std::isspace(static_cast<unsigned char>(c)) || std::iscntrl(static_cast<unsigned char>(c)) || c == '"' ||
           c == '<' || c == '>' || c == '\\';
  });
  return bad_char ? "E_URL_SYNTAX" : "";
}

std::vector<Violation> structural_violations(const Dataset& d) {
  std::vector<Violation> out;
  Sink sink{out};

  check_unique(d.indicators, &IndicatorDef::id, kIndicators, sink);
  check_unique(d.subjects, &Subject::subject_id, kSubjects, sink);
  check_unique(d.artifacts, &EvidenceArtifact::artifact_id, kArtifacts, sink);

  std::map<std::string_view, const Subject*> subjects;
  for (const Subject& s : d.subjects) subjects.emplace(s.subject_id, &s);
  std::map<std::string_view, const IndicatorDef*> indicators;
  for (const IndicatorDef& def : d.indicators) indicators.emplace(def.id, &def);
  std::set<std::string_view> artifacts;
  for (const EvidenceArtifact& a : d.artifacts) artifacts.insert(a.artifact_id);

  for (const Subject& s : d.subjects) {
    if (s.kind == SubjectKind::provider) {
      if (s.provider_id) {
        sink.error("E_PROVIDER_LINK", kSubjects, s.subject_id, "a provider must not name a provider_id");
      }
      continue;
    }
    if (!s.provider_id) {
      sink.error("E_PROVIDER_LINK", kSubjects, s.subject_id, "a system must name its provider_id");
      continue;
    }
    auto it = subjects.find(*s.provider_id);
    if (it == subjects.end()) {
      sink.error("E_DANGLING_REF", kSubjects, s.subject_id, "provider '" + *s.provider_id + "' does not exist");
    } else if (it->second->kind != SubjectKind::provider) {
      // Systems can only hang off providers, so the subject graph cannot cycle.
      sink.error("E_PROVIDER_KIND", kSubjects, s.subject_id, "'" + *s.provider_id + "' is not a provider");
    }
  }

  std::set<std::string> code_keys;
  for (const RawCode& c : d.codes) {
    const std::string key = code_key(c);
    if (!code_keys.insert(key).second) {
      sink.error("E_DUPLICATE_KEY", kCodes, key, "more than one code for this subject, indicator and coder");
    }
    if (c.coder_id.empty()) sink.error("E_EMPTY_ID", kCodes, key, "coder_id must not be empty");
    if (!subjects.contains(c.subject_id)) {
      sink.error("E_DANGLING_REF", kCodes, key, "subject '" + c.subject_id + "' does not exist");
    }
    auto ind = indicators.find(c.indicator_id);
    if (ind == indicators.end()) {
      sink.error("E_DANGLING_REF", kCodes, key, "indicator '" + c.indicator_id + "' does not exist");
    } else if (!c.value.matches(ind->second->kind)) {
      sink.error("E_KIND_MISMATCH", kCodes, key,
                 "value " + c.value.str() + " does not fit a " + std::string(to_string(ind->second->kind)) +
                     " indicator");
    }
    if (!c.value.in_domain()) {
      sink.error("E_VALUE_DOMAIN", kCodes, key, "value " + c.value.str() + " is outside its domain");
    }
    if (c.value.is_unknown() && !c.evidence_refs.empty()) {
      sink.error("E_UNKNOWN_WITH_EVIDENCE", kCodes, key, "an unknown value must not cite evidence");
    }
    if (!c.value.is_unknown() && c.evidence_refs.empty()) {
      sink.error("E_MISSING_EVIDENCE", kCodes, key, "a coded value needs at least one evidence link");
    }
    for (const std::string& ref : c.evidence_refs) {
      if (!artifacts.contains(ref)) {
        sink.error("E_DANGLING_REF", kCodes, key, "artifact '" + ref + "' does not exist");
      }
    }
  }

  sort_violations(out);
  return out;
}

std::vector<Violation> validate_dataset(const Dataset& d, std::optional<Date> cutoff) {
  std::vector<Violation> out = structural_violations(d);
  Sink sink{out};

  PerPillar<std::size_t> per_pillar{};
  for (const IndicatorDef& def : d.indicators) {
    ++per_pillar[index_of(def.pillar)];
    if (!valid_indicator_id(def.id)) {
      sink.error("E_ID_PATTERN", kIndicators, def.id, "indicator ids look like PG-03");
    } else if (def.id.substr(0, 2) != to_string(def.pillar)) {
      sink.error("E_PILLAR_PREFIX", kIndicators, def.id,
                 "id prefix does not match pillar " + std::string(to_string(def.pillar)));
    }
  }
  for (Pillar p : kPillars) {
    if (per_pillar[index_of(p)] == 0) {
      sink.error("E_EMPTY_PILLAR", kIndicators, std::string(to_string(p)), "pillar has no indicators");
    }
  }

  for (const EvidenceArtifact& a : d.artifacts) {
    if (std::string code = check_public_url(a.url); !code.empty()) {
      sink.error(code, kArtifacts, a.artifact_id, "url '" + a.url + "' is not an absolute http(s) URL");
    }
    if (a.archive_url) {
      if (std::string code = check_public_url(*a.archive_url); !code.empty()) {
        sink.error(code, kArtifacts, a.artifact_id, "archive_url '" + *a.archive_url + "' is not an absolute http(s) URL");
      }
    }
    if (cutoff && a.retrieved_date > *cutoff) {
      sink.error("E_AFTER_CUTOFF", kArtifacts, a.artifact_id,
                 "retrieved " + a.retrieved_date.str() + " after cutoff " + cutoff->str());
    }
    if (!a.published_date) {
      sink.warning("W_NO_PUB_DATE", kArtifacts, a.artifact_id, "artifact has no published_date");
    } else if (*a.published_date > a.retrieved_date) {
      sink.warning("W_PUB_AFTER_RETRIEVAL", kArtifacts, a.artifact_id, "published_date is later than retrieved_date");
    }
  }

  sort_violations(out);
  return out;
}

std::size_t count(std::span<const Violation> vs, Severity s) {
  return static_cast<std::size_t>(std::ranges::count(vs, s, &Violation::severity));
}

json violations_to_json(std::span<const Violation> vs) {
  json items = json::array();
  for (const Violation& v : vs) {
    items.push_back({{"severity", to_string(v.severity)},
                     {"code", v.code},
                     {"file", v.file},
                     {"record", v.record},
                     {"message", v.message}});
  }
  return {{"errors", count(vs, Severity::error)}, {"warnings", count(vs, Severity::warning)}, {"violations", items}};
}

}  // namespace aipi
