#include "aipi/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <ostream>

#include "aipi/dataset_io.hpp"
#include "aipi/link_check.hpp"
#include "aipi/release.hpp"
#include "aipi/reliability.hpp"
#include "aipi/sensitivity.hpp"

namespace aipi {

namespace fs = std::filesystem;

namespace {

struct UsageError : Error {
  explicit UsageError(const std::string& message) : Error("E_USAGE", message) {}
};

struct Options {
  std::optional<std::string> dataset, out, config, version, cutoff, c_ref;
  std::optional<std::uint64_t> sampling_seed, bootstrap_seed;
  std::optional<double> sample_fraction, threshold;
  std::optional<std::size_t> n_resamples, n_bins;
  unsigned threads = 1;
  bool offline = false;
  bool live = false;
  long timeout_ms = 5000;
  std::vector<std::string> releases;
};

struct Run {
  fs::path dataset;
  std::optional<fs::path> out;
  ReleaseConfig config;
  bool offline = false;
  unsigned threads = 1;
};

constexpr std::string_view kRunKeys[] = {"dataset", "out", "offline"};

Run resolve(const Options& o, bool need_dataset, bool need_out) {
  Run r;
  r.threads = o.threads;
  json file_config = json::object();
  if (o.config) {
    if (!fs::is_regular_file(*o.config)) throw UsageError("config file " + *o.config + " does not exist");
    try {
      file_config = json::parse(read_file(*o.config));
    } catch (const json::parse_error& e) {
      throw UsageError("config file " + *o.config + " is not valid JSON: " + e.what());
    }
    r.config = release_config_from_json(file_config, kRunKeys);
    auto path_key = [&](const char* key) -> std::optional<fs::path> {
      if (!file_config.contains(key)) return std::nullopt;
      if (!file_config.at(key).is_string()) throw UsageError(std::string("config key ") + key + " must be a string");
      // Relative paths in a config file are relative to the file.
      return fs::path(*o.config).parent_path() / file_config.at(key).get<std::string>();
    };
    if (auto p = path_key("dataset")) r.dataset = *p;
    r.out = path_key("out");
    if (file_config.contains("offline")) {
      if (!file_config.at("offline").is_boolean()) throw UsageError("config key offline must be a boolean");
      r.offline = file_config.at("offline").get<bool>();
    }
  }

  if (o.dataset) r.dataset = *o.dataset;
  if (o.out) r.out = fs::path(*o.out);
  if (o.offline) r.offline = true;
  ReleaseConfig& c = r.config;
  if (o.version) c.version = *o.version;
  if (o.cutoff) {
    c.cutoff_date = Date::parse(*o.cutoff);
    if (!c.cutoff_date) throw UsageError("--cutoff '" + *o.cutoff + "' is not a YYYY-MM-DD date");
  }
  if (o.sampling_seed) c.sampling_seed = *o.sampling_seed;
  if (o.bootstrap_seed) c.bootstrap_seed = *o.bootstrap_seed;
  if (o.sample_fraction) c.sample_fraction = *o.sample_fraction;
  if (o.threshold) c.reliability_threshold = *o.threshold;
  if (o.n_resamples) c.n_resamples = *o.n_resamples;
  if (o.n_bins) c.n_bins = *o.n_bins;
  try {
    c.check();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }

  if (need_dataset) {
    if (r.dataset.empty()) throw UsageError("--dataset is required");
    if (!fs::is_directory(r.dataset)) throw UsageError("dataset directory " + r.dataset.string() + " does not exist");
  }
  if (need_out && !r.out) throw UsageError("--out is required");
  return r;
}

void write_outputs(const fs::path& dir, const std::map<std::string, std::string>& files) {
  fs::create_directories(dir);
  for (const auto& [name, bytes] : files) write_file(dir / name, bytes);
}

void print_violations(std::ostream& out, std::span<const Violation> vs) {
  for (const Violation& v : vs) {
    out << to_string(v.severity) << ' ' << v.code << ' ' << v.file;
    if (!v.record.empty()) out << ' ' << v.record;
    out << ": " << v.message << '\n';
  }
}

void print_issues(std::ostream& out, std::span<const ParseIssue> issues) {
  for (const ParseIssue& i : issues) {
    out << "error " << i.code << ' ' << i.file;
    if (i.line) out << ':' << i.line;
    if (!i.where.empty()) out << ' ' << i.where;
    out << ": " << i.message << '\n';
  }
}

std::string summary_line(std::span<const Violation> vs) {
  return std::to_string(count(vs, Severity::error)) + " errors, " + std::to_string(count(vs, Severity::warning)) +
         " warnings";
}

/// Loads and validates; prints warnings, throws ValidationFailed on errors.
Dataset load_valid(const Run& r, std::ostream& out) {
  Dataset d = load_dataset(r.dataset);
  std::vector<Violation> vs = validate_dataset(d, r.config.cutoff_date);
  if (count(vs, Severity::error) > 0) throw ValidationFailed(std::move(vs));
  print_violations(out, vs);
  return d;
}

std::map<std::string, std::string> score_files(const ScoredDataset& s, const PillarWeights& w) {
  return {{"adjudicated.json", canonical_dump(adjudicated_to_json(s))},
          {"c_ref.json", canonical_dump(c_ref_to_json(s.c_ref))},
          {"known_only_report.csv", known_only_report_csv(known_only_report(s, w))},
          {"providers.json", canonical_dump(providers_to_json(s.providers))},
          {"scores.csv", scores_to_csv(s.subjects)},
          {"scores.json", canonical_dump(scores_to_json(s.subjects))}};
}

std::string fmt(const std::optional<double>& x) { return x ? format_number(round9(*x)) : "undefined"; }

int cmd_validate(const Options& o, std::ostream& out) {
  const Run r = resolve(o, true, false);
  std::vector<Violation> vs;
  try {
    const Dataset d = load_dataset(r.dataset);
    vs = validate_dataset(d, r.config.cutoff_date);
  } catch (const ParseError& e) {
    for (const ParseIssue& i : e.issues()) {
      std::string where = i.where;
      if (i.line) where = "line " + std::to_string(i.line) + (where.empty() ? "" : " " + where);
      vs.push_back({Severity::error, i.code, i.file, where, i.message});
    }
  }
  print_violations(out, vs);
  if (r.out) write_outputs(*r.out, {{"violations.json", canonical_dump(violations_to_json(vs))}});
  out << summary_line(vs) << '\n';
  return count(vs, Severity::error) > 0 ? 1 : 0;
}

int cmd_score(const Options& o, std::ostream& out) {
  const Run r = resolve(o, true, true);
  const Dataset d = load_valid(r, out);
  const ScoredDataset s = score_dataset(d, compute_c_ref(d), r.config.pillar_weights, r.threads);
  write_outputs(*r.out, score_files(s, r.config.pillar_weights));
  out << "scored " << s.subjects.size() << " subjects, " << s.providers.size() << " providers\n";
  return 0;
}

CountReferenceTable load_frozen(const fs::path& p) {
  const fs::path file = fs::is_directory(p) ? p / "c_ref.json" : p;
  if (!fs::is_regular_file(file)) throw UsageError("frozen reference table " + file.string() + " does not exist");
  try {
    return c_ref_from_json(json::parse(read_file(file)));
  } catch (const json::parse_error& e) {
    throw Error("E_CREF_FORMAT", e.what());
  }
}

int cmd_rescore(const Options& o, std::ostream& out) {
  const Run r = resolve(o, true, true);
  if (!o.c_ref) throw UsageError("--c-ref is required");
  const CountReferenceTable frozen = load_frozen(*o.c_ref);
  const Dataset d = load_valid(r, out);
  const ScoredDataset s = rescore_against(d, frozen, r.config.pillar_weights, r.threads);
  write_outputs(*r.out, score_files(s, r.config.pillar_weights));
  out << "rescored " << s.subjects.size() << " subjects against " << frozen.size() << " frozen references\n";
  return 0;
}

int cmd_reliability(const Options& o, std::ostream& out) {
  const Run r = resolve(o, true, true);
  const Dataset d = load_valid(r, out);
  const ReleaseConfig& c = r.config;
  const ReliabilityReport rep =
      reliability_report(d, compute_c_ref(d), c.sample_fraction, c.sampling_seed, c.reliability_threshold);
  write_outputs(*r.out, {{"reliability.json", canonical_dump(reliability_to_json(rep))}});
  out << "sampled " << rep.n_sampled << " items, " << rep.n_items << " double-coded; alpha " << fmt(rep.alpha_overall.alpha)
      << '\n';
  return 0;
}

int cmd_sensitivity(const Options& o, std::ostream& out) {
  const Run r = resolve(o, true, true);
  const Dataset d = load_valid(r, out);
  const ScoredDataset s = score_dataset(d, compute_c_ref(d), r.config.pillar_weights, r.threads);
  SensitivityOptions opts;
  opts.n_resamples = r.config.n_resamples;
  opts.bootstrap_seed = r.config.bootstrap_seed;
  opts.n_bins = r.config.n_bins;
  opts.threads = r.threads;
  const SensitivityReport rep = sensitivity_report(make_score_matrix(d, s), opts);
  write_outputs(*r.out, {{"coverage_dependence.csv", coverage_dependence_csv(rep.coverage)},
                         {"sensitivity.json", canonical_dump(sensitivity_to_json(rep))}});
  out << "cohort of " << rep.cohort.size() << ", " << rep.coverage.rank_flips.size() << " rank flips\n";
  return 0;
}

int cmd_floors(const Options& o, std::ostream& out) {
  const Run r = resolve(o, true, true);
  const Dataset d = load_valid(r, out);
  const ScoredDataset s = score_dataset(d, compute_c_ref(d), r.config.pillar_weights, r.threads);
  std::vector<FloorVerdict> verdicts;
  std::size_t passed = 0;
  for (const std::string& id : scoring_units(d)) {
    const auto it = std::ranges::find(s.subjects, id, &SubjectScore::subject_id);
    verdicts.push_back(check_floors(*it, r.config.floors, s.values.at(id)));
    if (verdicts.back().pass) ++passed;
  }
  write_outputs(*r.out, {{"floor_verdicts.json", canonical_dump(floor_verdicts_to_json(verdicts, r.config.floors))}});
  out << passed << " pass, " << verdicts.size() - passed << " fail\n";
  return 0;
}

int cmd_build(const Options& o, std::ostream& out) {
  const Run r = resolve(o, true, true);
  if (r.config.version.empty()) throw UsageError("--version is required");
  if (!r.config.cutoff_date) throw UsageError("--cutoff is required");
  const ReleaseManifest m = build_release(r.dataset, r.config, *r.out, r.threads);
  out << "release " << m.version << " written to " << r.out->string() << " (" << m.files.size() + 1
      << " files, dataset " << m.dataset_hash.substr(0, 12) << ")\n";
  return 0;
}

int cmd_diff(const Options& o, std::ostream& out) {
  if (o.releases.size() != 2) throw UsageError("diff takes exactly two release directories");
  const ReleaseDiff diff = diff_releases(o.releases[0], o.releases[1]);
  if (o.out) write_outputs(*o.out, {{"diff.json", canonical_dump(diff_to_json(diff))}});
  if (diff.empty()) {
    out << "no changes\n";
    return 0;
  }
  for (const MetadataChange& m : diff.metadata) out << m.field << ": " << m.a << " -> " << m.b << '\n';
  out << diff.subjects_added.size() << " subjects added, " << diff.subjects_removed.size() << " removed, "
      << diff.scores.size() << " score changes, " << diff.indicators.size() << " indicator changes\n";
  return 0;
}

int cmd_linkcheck(const Options& o, std::ostream& out) {
  const Run r = resolve(o, true, true);
  if (o.live && r.offline) throw UsageError("--live conflicts with --offline");
  LinkCheckOptions opts;
  opts.live = o.live;
  opts.timeout = std::chrono::milliseconds(o.timeout_ms);
  const Dataset d = load_dataset(r.dataset);
  const std::vector<LinkStatus> statuses = link_check(d, opts);
  write_outputs(*r.out, {{"links.json", canonical_dump(link_status_to_json(statuses))}});
  std::map<std::string_view, std::size_t> by_state;
  for (const LinkStatus& s : statuses) ++by_state[to_string(s.state)];
  out << statuses.size() << " links";
  for (const auto& [state, n] : by_state) out << ", " << n << ' ' << state;
  out << '\n';
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"AI Pluralism Index scoring engine", "aipi"};
  app.require_subcommand(1);
  app.set_version_flag("--tool-version", std::string(tool_version()));
  Options o;

  auto common = [&](CLI::App* sub, bool with_out = true) {
    sub->add_option("--dataset", o.dataset, "Dataset directory");
    sub->add_option("--config", o.config, "RunConfig JSON file; flags override it");
    if (with_out) sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--cutoff", o.cutoff, "Eligibility cutoff date (YYYY-MM-DD)");
    sub->add_option("--threads", o.threads, "Worker threads")->check(CLI::Range(1u, 256u));
    sub->add_flag("--offline", o.offline, "Forbid network access (the default for every subcommand)");
  };

  auto* validate = app.add_subcommand("validate", "Check a dataset against every invariant");
  common(validate);
  auto* score = app.add_subcommand("score", "Compute score triples and coverage");
  common(score);
  auto* rescore = app.add_subcommand("rescore", "Score against a frozen c_ref table");
  common(rescore);
  rescore->add_option("--c-ref", o.c_ref, "c_ref.json or a release directory");
  auto* reliability = app.add_subcommand("reliability", "Double-coding sample and agreement statistics");
  common(reliability);
  reliability->add_option("--sample-fraction", o.sample_fraction, "Fraction sampled per stratum");
  reliability->add_option("--sampling-seed", o.sampling_seed, "Sampling seed");
  reliability->add_option("--threshold", o.threshold, "Reported alpha threshold");
  auto* sensitivity = app.add_subcommand("sensitivity", "Rank stability analyses");
  common(sensitivity);
  sensitivity->add_option("--n-resamples", o.n_resamples, "Bootstrap resamples");
  sensitivity->add_option("--bootstrap-seed", o.bootstrap_seed, "Bootstrap seed");
  sensitivity->add_option("--n-bins", o.n_bins, "Coverage bins");
  auto* floors = app.add_subcommand("floors", "Minimum-evidence floor verdicts");
  common(floors);
  auto* build = app.add_subcommand("build", "Build a versioned release directory");
  common(build);
  build->add_option("--version", o.version, "Release version");
  build->add_option("--sample-fraction", o.sample_fraction, "Fraction sampled per stratum");
  build->add_option("--sampling-seed", o.sampling_seed, "Sampling seed");
  build->add_option("--bootstrap-seed", o.bootstrap_seed, "Bootstrap seed");
  build->add_option("--n-resamples", o.n_resamples, "Bootstrap resamples");
  build->add_option("--n-bins", o.n_bins, "Coverage bins");
  auto* diff = app.add_subcommand("diff", "Compare two releases");
  diff->add_option("releases", o.releases, "Release directories A and B")->expected(2);
  diff->add_option("--out", o.out, "Directory for diff.json");
  diff->add_flag("--offline", o.offline, "Accepted for symmetry");
  auto* linkcheck = app.add_subcommand("linkcheck", "Report evidence link accessibility");
  common(linkcheck);
  linkcheck->add_flag("--live", o.live, "Actually contact the hosts");
  linkcheck->add_option("--timeout-ms", o.timeout_ms, "Per-request timeout")->check(CLI::PositiveNumber);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return 2;
  }

  try {
    if (validate->parsed()) return cmd_validate(o, out);
    if (score->parsed()) return cmd_score(o, out);
    if (rescore->parsed()) return cmd_rescore(o, out);
    if (reliability->parsed()) return cmd_reliability(o, out);
    if (sensitivity->parsed()) return cmd_sensitivity(o, out);
    if (floors->parsed()) return cmd_floors(o, out);
    if (build->parsed()) return cmd_build(o, out);
    if (diff->parsed()) return cmd_diff(o, out);
    if (linkcheck->parsed()) return cmd_linkcheck(o, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const ValidationFailed& e) {
    print_violations(out, e.violations());
    out << summary_line(e.violations()) << '\n';
    return 1;
  } catch (const ParseError& e) {
    print_issues(out, e.issues());
    out << e.issues().size() << " errors\n";
    return 1;
  } catch (const Error& e) {
    err << e.what() << '\n';
    return e.code() == "E_CONFIG" ? 2 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace aipi
