#include "support.hpp"

#include <atomic>
#include <unistd.h>

namespace aipi::testing {

namespace fs = std::filesystem;

namespace {

double uniform(SplitMix64& rng) { return static_cast<double>(rng.next() >> 11) * 0x1.0p-53; }

std::string two_digits(std::size_t i) {
  std::string s = std::to_string(i);
  return s.size() < 2 ? "0" + s : s;
}

CodeValue random_value(SplitMix64& rng, IndicatorKind kind) {
  switch (kind) {
    case IndicatorKind::binary: return CodeValue::binary(rng.below(2) == 1);
    case IndicatorKind::ordinal3: return CodeValue::ordinal(static_cast<std::int64_t>(rng.below(3)));
    case IndicatorKind::count: return CodeValue::count(static_cast<std::int64_t>(rng.below(rng.below(2) ? 10 : 200)));
  }
  return CodeValue::unknown();
}

}  // namespace

Dataset random_dataset(SplitMix64& rng, const RandomDatasetOptions& o) {
  Dataset d;
  const std::size_t n_ind = o.min_indicators + rng.below(o.max_indicators - o.min_indicators + 1);
  PerPillar<std::size_t> per_pillar{1, 1, 1, 1};
  for (std::size_t i = 4; i < n_ind; ++i) ++per_pillar[rng.below(4)];
  for (Pillar p : kPillars) {
    for (std::size_t k = 1; k <= per_pillar[index_of(p)]; ++k) {
      const auto kind = static_cast<IndicatorKind>(rng.below(3));
      d.indicators.push_back({std::string(to_string(p)) + "-" + two_digits(k), p, kind, "indicator"});
    }
  }

  const std::size_t n_subj = o.min_subjects + rng.below(o.max_subjects - o.min_subjects + 1);
  std::vector<std::string> providers;
  for (std::size_t i = 0; i < n_subj; ++i) {
    Subject s;
    s.subject_id = "S" + two_digits(i);
    s.name = s.subject_id;
    if (!providers.empty() && rng.below(2) == 0) {
      s.kind = SubjectKind::system;
      s.provider_id = providers[rng.below(providers.size())];
    } else {
      s.kind = SubjectKind::provider;
      providers.push_back(s.subject_id);
    }
    d.subjects.push_back(std::move(s));
  }

  const double unknown_rate = uniform(rng);
  const Date day = *Date::parse("2025-06-01");
  for (const Subject& s : d.subjects) {
    const std::string art = s.subject_id + "-A1";
    d.artifacts.push_back({art, "https://example.org/" + art, day, day, std::nullopt, SourceKind::policy});
    for (const IndicatorDef& def : d.indicators) {
      const std::size_t coders = o.second_coders ? 1 + rng.below(2) : 1;
      for (std::size_t c = 0; c < coders; ++c) {
        RawCode code;
        code.subject_id = s.subject_id;
        code.indicator_id = def.id;
        code.coder_id = "c" + std::to_string(c + 1);
        code.coded_date = day;
        if (uniform(rng) >= unknown_rate) {
          code.value = random_value(rng, def.kind);
          code.evidence_refs = {art};
          code.evidence_class =
              rng.below(4) == 0 ? EvidenceClass::third_party_neutral : EvidenceClass::primary_attributable;
          code.stale = rng.below(8) == 0;
        }
        d.codes.push_back(std::move(code));
      }
    }
  }
  d.canonicalize();
  return d;
}

RawCode raw(std::string subject, std::string indicator, std::string coder, CodeValue value, EvidenceClass cls,
            bool stale) {
  RawCode c;
  c.subject_id = std::move(subject);
  c.indicator_id = std::move(indicator);
  c.coder_id = std::move(coder);
  c.value = value;
  c.evidence_class = cls;
  c.stale = stale;
  c.coded_date = *Date::parse("2025-06-01");
  if (!value.is_unknown()) c.evidence_refs = {"A1"};
  return c;
}

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("aipi-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

fs::path source_dir() { return AIPI_SOURCE_DIR; }

}  // namespace aipi::testing
