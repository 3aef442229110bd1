#include "aipi/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "aipi/parallel.hpp"
#include "aipi/rng.hpp"

namespace aipi {

RankVector rank_scores(std::span<const std::pair<std::string, double>> scores) {
  RankVector out;
  out.reserve(scores.size());
  for (const auto& [id, s] : scores) out.push_back({id, round9(s), 0.0});
  std::ranges::sort(out, [](const RankedSubject& a, const RankedSubject& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.subject_id < b.subject_id;
  });
  for (std::size_t i = 0; i < out.size();) {
    std::size_t j = i;
    while (j < out.size() && out[j].score == out[i].score) ++j;
    // positions i..j-1 hold ranks i+1..j
    const double mean_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) out[k].rank = mean_rank;
    i = j;
  }
  return out;
}

namespace {

/// Counts pairs i < j with y[i] > y[j], sorting y in place.
std::int64_t count_inversions(std::vector<double>& y) {
  std::vector<double> buf(y.size());
  std::int64_t swaps = 0;
  for (std::size_t width = 1; width < y.size(); width *= 2) {
    for (std::size_t lo = 0; lo < y.size(); lo += 2 * width) {
      const std::size_t mid = std::min(lo + width, y.size());
      const std::size_t hi = std::min(lo + 2 * width, y.size());
      std::size_t i = lo, j = mid, k = lo;
      while (i < mid && j < hi) {
        if (y[j] < y[i]) {
          swaps += static_cast<std::int64_t>(mid - i);
          buf[k++] = y[j++];
        } else {
          buf[k++] = y[i++];
        }
      }
      while (i < mid) buf[k++] = y[i++];
      while (j < hi) buf[k++] = y[j++];
    }
    std::swap(y, buf);
  }
  return swaps;
}

template <class It, class Eq>
std::int64_t tied_pairs(It first, It last, Eq eq) {
  std::int64_t total = 0;
  for (It i = first; i != last;) {
    It j = i;
    std::int64_t t = 0;
    while (j != last && eq(*i, *j)) {
      ++j;
      ++t;
    }
    total += t * (t - 1) / 2;
    i = j;
  }
  return total;
}

}  // namespace

std::optional<double> kendall_tau(const RankVector& a, const RankVector& b) {
  if (a.size() != b.size()) throw Error("E_SUBJECT_MISMATCH", "rankings cover different subjects");
  if (a.size() < 2) throw Error("E_TOO_FEW_SUBJECTS", "kendall tau needs at least two subjects");

  std::map<std::string_view, double> rank_b;
  for (const RankedSubject& r : b) rank_b.emplace(r.subject_id, r.rank);
  std::vector<std::pair<double, double>> xy;
  xy.reserve(a.size());
  for (const RankedSubject& r : a) {
    auto it = rank_b.find(r.subject_id);
    if (it == rank_b.end()) throw Error("E_SUBJECT_MISMATCH", r.subject_id + " is missing from the second ranking");
    xy.emplace_back(r.rank, it->second);
  }
  if (rank_b.size() != xy.size()) throw Error("E_SUBJECT_MISMATCH", "duplicate subject in ranking");

  std::ranges::sort(xy);
  const auto n = static_cast<std::int64_t>(xy.size());
  const std::int64_t n0 = n * (n - 1) / 2;
  const std::int64_t tie_x = tied_pairs(xy.begin(), xy.end(), [](const auto& p, const auto& q) { return p.first == q.first; });
  const std::int64_t tie_xy = tied_pairs(xy.begin(), xy.end(), [](const auto& p, const auto& q) { return p == q; });

  std::vector<double> y;
  y.reserve(xy.size());
  for (const auto& p : xy) y.push_back(p.second);
  const std::int64_t swaps = count_inversions(y);
  const std::int64_t tie_y = tied_pairs(y.begin(), y.end(), [](double p, double q) { return p == q; });

  const std::int64_t untied_x = n0 - tie_x;
  const std::int64_t untied_y = n0 - tie_y;
  if (untied_x == 0 || untied_y == 0) return std::nullopt;
  const std::int64_t c_minus_d = n0 - tie_x - tie_y + tie_xy - 2 * swaps;
  return static_cast<double>(c_minus_d) /
         std::sqrt(static_cast<double>(untied_x) * static_cast<double>(untied_y));
}

ScoreMatrix make_score_matrix(const Dataset& d, const ScoredDataset& scored) {
  ScoreMatrix m;
  m.subjects = scoring_units(d);
  m.indicators = d.indicators;
  std::ranges::sort(m.indicators, {}, &IndicatorDef::id);
  for (const std::string& id : m.subjects) {
    const ValueMap& vals = scored.values.at(id);
    std::vector<std::optional<double>> row;
    std::size_t known = 0;
    for (const IndicatorDef& def : m.indicators) {
      row.push_back(vals.at(def.id).get());
      if (row.back()) ++known;
    }
    m.values.push_back(std::move(row));
    m.n_known.push_back(known);
    auto it = std::ranges::find(scored.subjects, id, &SubjectScore::subject_id);
    m.aipi_known.push_back(it->aipi_known);
  }
  return m;
}

std::vector<double> evid_scores(const ScoreMatrix& m, std::span<const unsigned> multiplicity,
                                const PillarWeights& weights) {
  if (multiplicity.size() != m.indicators.size()) throw Error("E_RANGE", "one multiplicity per indicator required");
  PerPillar<double> denom{};
  for (std::size_t j = 0; j < m.indicators.size(); ++j) denom[index_of(m.indicators[j].pillar)] += multiplicity[j];

  std::vector<double> out(m.subjects.size(), 0.0);
  for (std::size_t s = 0; s < m.subjects.size(); ++s) {
    PerPillar<double> sums{};
    for (std::size_t j = 0; j < m.indicators.size(); ++j) {
      if (multiplicity[j] == 0 || !m.values[s][j]) continue;
      sums[index_of(m.indicators[j].pillar)] += multiplicity[j] == 1 ? *m.values[s][j] : multiplicity[j] * *m.values[s][j];
    }
    double total = 0.0;
    for (Pillar p : kPillars) {
      const std::size_t i = index_of(p);
      if (weights.w[i] == 0.0) continue;
      if (denom[i] == 0.0) throw Error("E_EMPTY_PILLAR", std::string(to_string(p)) + " has no indicators left");
      total += weights.w[i] * (sums[i] / denom[i]);
    }
    out[s] = total;
  }
  return out;
}

namespace {

RankVector rank_of(const ScoreMatrix& m, const std::vector<double>& scores) {
  std::vector<std::pair<std::string, double>> pairs;
  for (std::size_t s = 0; s < m.subjects.size(); ++s) pairs.emplace_back(m.subjects[s], scores[s]);
  return rank_scores(pairs);
}

std::vector<unsigned> all_ones(const ScoreMatrix& m) { return std::vector<unsigned>(m.indicators.size(), 1u); }

RankVector baseline_rank(const ScoreMatrix& m) { return rank_of(m, evid_scores(m, all_ones(m), PillarWeights{})); }

std::optional<double> tau_or_undefined(const RankVector& a, const RankVector& b) {
  return a.size() < 2 ? std::nullopt : kendall_tau(a, b);
}

PillarWeights without(Pillar dropped) {
  PillarWeights w;
  for (Pillar p : kPillars) w.w[index_of(p)] = p == dropped ? 0.0 : 1.0 / 3.0;
  return w;
}

std::size_t pillar_size(const ScoreMatrix& m, Pillar p) {
  return static_cast<std::size_t>(std::ranges::count(m.indicators, p, &IndicatorDef::pillar));
}

}  // namespace

PerPillar<std::optional<double>> leave_one_pillar_out(const ScoreMatrix& m) {
  if (m.subjects.size() < 2) throw Error("E_TOO_FEW_SUBJECTS", "leave-one-pillar-out needs at least two subjects");
  const RankVector base = baseline_rank(m);
  PerPillar<std::optional<double>> out{};
  for (Pillar p : kPillars) {
    out[index_of(p)] = kendall_tau(base, rank_of(m, evid_scores(m, all_ones(m), without(p))));
  }
  return out;
}

JackknifeSummary indicator_jackknife(const ScoreMatrix& m) {
  JackknifeSummary out;
  const RankVector base = baseline_rank(m);
  double sum = 0.0;
  std::size_t defined = 0;
  for (std::size_t j = 0; j < m.indicators.size(); ++j) {
    const IndicatorDef& def = m.indicators[j];
    if (pillar_size(m, def.pillar) < 2) {
      out.skipped.push_back(def.id);
      continue;
    }
    std::vector<unsigned> mult = all_ones(m);
    mult[j] = 0;
    const auto tau = tau_or_undefined(base, rank_of(m, evid_scores(m, mult, PillarWeights{})));
    out.per_indicator.emplace(def.id, tau);
    if (!tau) continue;
    if (!out.min || *tau < *out.min) {
      out.min = *tau;
      out.argmin = def.id;
    }
    if (!out.max || *tau > *out.max) out.max = *tau;
    sum += *tau;
    ++defined;
  }
  if (defined > 0) out.mean = std::clamp(sum / static_cast<double>(defined), *out.min, *out.max);
  return out;
}

std::vector<std::pair<std::string, PillarWeights>> weight_perturbations() {
  std::vector<std::pair<std::string, PillarWeights>> out;
  for (Pillar up : kPillars) {
    for (Pillar down : kPillars) {
      if (up == down) continue;
      PillarWeights w;
      w.w[index_of(up)] *= 1.1;
      w.w[index_of(down)] *= 0.9;
      const double total = std::accumulate(w.w.begin(), w.w.end(), 0.0);
      for (double& x : w.w) x /= total;
      out.emplace_back("+" + std::string(to_string(up)) + "-" + std::string(to_string(down)), w);
    }
  }
  return out;
}

std::map<std::string, std::optional<double>> weight_perturbation(const ScoreMatrix& m) {
  const RankVector base = baseline_rank(m);
  std::map<std::string, std::optional<double>> out;
  for (const auto& [id, w] : weight_perturbations()) {
    out.emplace(id, tau_or_undefined(base, rank_of(m, evid_scores(m, all_ones(m), w))));
  }
  return out;
}

std::map<std::string, Interval> bootstrap_intervals(const ScoreMatrix& m, std::size_t n_resamples, std::uint64_t seed,
                                                    double level, unsigned threads) {
  if (n_resamples < 100) throw Error("E_RANGE", "bootstrap needs at least 100 resamples");
  if (!(level > 0.0 && level < 1.0)) throw Error("E_RANGE", "interval level must be in (0,1)");

  PerPillar<std::vector<std::size_t>> members;
  for (std::size_t j = 0; j < m.indicators.size(); ++j) members[index_of(m.indicators[j].pillar)].push_back(j);

  // resample r writes only row r
  std::vector<std::vector<double>> draws(n_resamples);
  parallel_for(n_resamples, threads, [&](std::size_t r) {
    SplitMix64 rng(mix64(seed ^ mix64(static_cast<std::uint64_t>(r))));
    std::vector<unsigned> mult(m.indicators.size(), 0u);
    for (Pillar p : kPillars) {
      const auto& js = members[index_of(p)];
      for (std::size_t k = 0; k < js.size(); ++k) ++mult[js[rng.below(js.size())]];
    }
    draws[r] = evid_scores(m, mult, PillarWeights{});
  });

  const double tail = (1.0 - level) / 2.0;
  const auto b = static_cast<double>(n_resamples);
  auto nearest_rank = [&](double p) {
    auto rank = static_cast<std::size_t>(std::ceil(p * b - 1e-9));
    return std::clamp<std::size_t>(rank, 1, n_resamples) - 1;
  };
  const std::size_t lo_idx = nearest_rank(tail);
  const std::size_t hi_idx = nearest_rank(1.0 - tail);

  std::map<std::string, Interval> out;
  std::vector<double> column(n_resamples);
  for (std::size_t s = 0; s < m.subjects.size(); ++s) {
    for (std::size_t r = 0; r < n_resamples; ++r) column[r] = round9(draws[r][s]);
    std::ranges::sort(column);
    out.emplace(m.subjects[s], Interval{column[lo_idx], column[hi_idx]});
  }
  return out;
}

CoverageDependence coverage_dependence(const ScoreMatrix& m, std::size_t n_bins) {
  if (n_bins < 2) throw Error("E_RANGE", "coverage dependence needs at least two bins");
  const std::vector<double> evid = evid_scores(m, all_ones(m), PillarWeights{});
  const std::size_t n_ind = m.indicators.size();

  CoverageDependence out;
  std::vector<double> sum_evid(n_bins, 0.0), sum_known(n_bins, 0.0);
  std::vector<std::size_t> n_defined(n_bins, 0);
  out.bins.resize(n_bins);
  for (std::size_t i = 0; i < n_bins; ++i) {
    out.bins[i].lo = static_cast<double>(i) / static_cast<double>(n_bins);
    out.bins[i].hi = static_cast<double>(i + 1) / static_cast<double>(n_bins);
  }
  for (std::size_t s = 0; s < m.subjects.size(); ++s) {
    // exact integer binning of n_known / n_ind
    const std::size_t bin = n_ind == 0 ? 0 : std::min(n_bins - 1, m.n_known[s] * n_bins / n_ind);
    ++out.bins[bin].count;
    sum_evid[bin] += evid[s];
    if (m.aipi_known[s]) {
      sum_known[bin] += *m.aipi_known[s];
      ++n_defined[bin];
    }
  }
  for (std::size_t i = 0; i < n_bins; ++i) {
    if (out.bins[i].count > 0) out.bins[i].mean_evid = sum_evid[i] / static_cast<double>(out.bins[i].count);
    if (n_defined[i] > 0) out.bins[i].mean_known = sum_known[i] / static_cast<double>(n_defined[i]);
  }

  for (std::size_t a = 0; a < m.subjects.size(); ++a) {
    if (!m.aipi_known[a]) continue;
    for (std::size_t b = a + 1; b < m.subjects.size(); ++b) {
      if (!m.aipi_known[b]) continue;
      const double de = round9(evid[a]) - round9(evid[b]);
      const double dk = round9(*m.aipi_known[a]) - round9(*m.aipi_known[b]);
      if ((de > 0 && dk < 0) || (de < 0 && dk > 0)) {
        out.rank_flips.push_back({m.subjects[a], m.subjects[b], "evid_vs_known"});
      }
    }
  }
  return out;
}

SensitivityReport sensitivity_report(const ScoreMatrix& m, const SensitivityOptions& options) {
  SensitivityReport r;
  r.options = options;
  r.cohort = m.subjects;

  const std::vector<double> base_scores = evid_scores(m, all_ones(m), PillarWeights{});
  const RankVector base = rank_of(m, base_scores);
  for (std::size_t s = 0; s < m.subjects.size(); ++s) r.point_estimate.emplace(m.subjects[s], round9(base_scores[s]));
  for (const RankedSubject& rs : base) r.rank_intervals[rs.subject_id] = {rs.rank, rs.rank, rs.rank};
  auto widen = [&](const RankVector& rv) {
    for (const RankedSubject& rs : rv) {
      RankInterval& ri = r.rank_intervals[rs.subject_id];
      ri.min_rank = std::min(ri.min_rank, rs.rank);
      ri.max_rank = std::max(ri.max_rank, rs.rank);
    }
  };

  const bool rankable = m.subjects.size() >= 2;
  for (Pillar p : kPillars) {
    const RankVector rv = rank_of(m, evid_scores(m, all_ones(m), without(p)));
    widen(rv);
    if (rankable) r.tau_leave_one_pillar_out[index_of(p)] = kendall_tau(base, rv);
  }
  for (const auto& [id, w] : weight_perturbations()) {
    const RankVector rv = rank_of(m, evid_scores(m, all_ones(m), w));
    widen(rv);
    r.weight_perturbation.emplace(id, tau_or_undefined(base, rv));
  }
  for (std::size_t j = 0; j < m.indicators.size(); ++j) {
    if (pillar_size(m, m.indicators[j].pillar) < 2) continue;
    std::vector<unsigned> mult = all_ones(m);
    mult[j] = 0;
    widen(rank_of(m, evid_scores(m, mult, PillarWeights{})));
  }
  r.tau_indicator_jackknife = indicator_jackknife(m);
  r.bootstrap = bootstrap_intervals(m, options.n_resamples, options.bootstrap_seed, 0.95, options.threads);
  r.coverage = coverage_dependence(m, options.n_bins);
  return r;
}

json sensitivity_to_json(const SensitivityReport& r) {
  json lopo = json::object();
  for (Pillar p : kPillars) lopo[std::string(to_string(p))] = num(r.tau_leave_one_pillar_out[index_of(p)]);

  const JackknifeSummary& jk = r.tau_indicator_jackknife;
  json per_indicator = json::object();
  for (const auto& [id, tau] : jk.per_indicator) per_indicator[id] = num(tau);
  json skipped = json::array();
  for (const std::string& id : jk.skipped) skipped.push_back({{"indicator_id", id}, {"warning", "W_PILLAR_MIN"}});

  json weights = json::object();
  for (const auto& [id, tau] : r.weight_perturbation) weights[id] = num(tau);

  json intervals = json::object();
  for (const auto& [id, iv] : r.bootstrap) {
    intervals[id] = {{"lo", num(iv.lo)}, {"hi", num(iv.hi)}, {"point", num(r.point_estimate.at(id))}};
  }

  json bins = json::array();
  for (const CoverageBin& b : r.coverage.bins) {
    bins.push_back({{"lo", num(b.lo)},
                    {"hi", num(b.hi)},
                    {"count", b.count},
                    {"mean_aipi_evid", num(b.mean_evid)},
                    {"mean_aipi_known", num(b.mean_known)}});
  }
  json flips = json::array();
  for (const RankFlip& f : r.coverage.rank_flips) {
    flips.push_back({{"subject_a", f.subject_a}, {"subject_b", f.subject_b}, {"condition", f.condition}});
  }
  json ranks = json::object();
  for (const auto& [id, ri] : r.rank_intervals) {
    ranks[id] = {{"baseline", num(ri.baseline)}, {"min", num(ri.min_rank)}, {"max", num(ri.max_rank)}};
  }

  return {{"cohort", r.cohort},
          {"score", "aipi_evid"},
          {"tau_leave_one_pillar_out", std::move(lopo)},
          {"tau_indicator_jackknife",
           {{"min", num(jk.min)},
            {"mean", num(jk.mean)},
            {"max", num(jk.max)},
            {"argmin", jk.argmin ? json(*jk.argmin) : json(nullptr)},
            {"per_indicator", std::move(per_indicator)},
            {"skipped", std::move(skipped)}}},
          {"weight_perturbation", std::move(weights)},
          {"bootstrap",
           {{"n_resamples", r.options.n_resamples},
            {"seed", r.options.bootstrap_seed},
            {"level", 0.95},
            {"method", "percentile, indicators resampled within pillar"},
            {"intervals", std::move(intervals)}}},
          {"coverage_dependence", {{"n_bins", r.options.n_bins}, {"bins", std::move(bins)}}},
          {"rank_flips", std::move(flips)},
          {"rank_intervals",
           {{"definition", "min and max rank over baseline, leave-one-pillar-out, weight perturbations and "
                           "indicator jackknife"},
            {"subjects", std::move(ranks)}}}};
}

std::string coverage_dependence_csv(const CoverageDependence& c) {
  std::ostringstream out;
  out << "bin,count,mean_evid,mean_known\n";
  auto cell = [](const std::optional<double>& x) { return x ? format_number(round9(*x)) : std::string{}; };
  for (const CoverageBin& b : c.bins) {
    out << format_number(round9(b.lo)) << ',' << b.count << ',' << cell(b.mean_evid) << ',' << cell(b.mean_known)
        << '\n';
  }
  return out.str();
}

}  // namespace aipi
