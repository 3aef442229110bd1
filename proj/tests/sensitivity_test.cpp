#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "aipi/dataset_io.hpp"
#include "aipi/sensitivity.hpp"
#include "support.hpp"

using namespace aipi;

namespace {

RankVector ranks(const std::vector<double>& xs) {
  std::vector<std::pair<std::string, double>> v;
  for (std::size_t i = 0; i < xs.size(); ++i) v.emplace_back("s" + std::to_string(100 + i), xs[i]);
  return rank_scores(v);
}

// O(n^2) tau-b by pair counting over raw scores (ties = equal scores).
std::optional<double> brute_tau(const std::vector<double>& x, const std::vector<double>& y) {
  double concordant = 0, discordant = 0, tx = 0, ty = 0, n0 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      ++n0;
      const double dx = x[i] - x[j], dy = y[i] - y[j];
      if (dx == 0) ++tx;
      if (dy == 0) ++ty;
      if (dx * dy > 0) ++concordant;
      if (dx * dy < 0) ++discordant;
    }
  }
  const double denom = std::sqrt((n0 - tx) * (n0 - ty));
  if (denom == 0) return std::nullopt;
  return (concordant - discordant) / denom;
}

ScoreMatrix tiny_matrix(const std::vector<std::vector<std::optional<double>>>& values,
                        const std::vector<Pillar>& pillars) {
  ScoreMatrix m;
  PerPillar<int> seen{};
  for (Pillar p : pillars) {
    const int k = ++seen[index_of(p)];
    m.indicators.push_back({std::string(to_string(p)) + "-0" + std::to_string(k), p, IndicatorKind::ordinal3, "x"});
  }
  for (std::size_t s = 0; s < values.size(); ++s) {
    m.subjects.push_back("S" + std::to_string(s));
    m.values.push_back(values[s]);
    std::size_t known = 0;
    for (const auto& v : values[s]) known += v.has_value();
    m.n_known.push_back(known);
    m.aipi_known.push_back(std::nullopt);
  }
  return m;
}

}  // namespace

TEST(KendallTau, WorkedExample) {
  EXPECT_EQ(kendall_tau(ranks({4, 3, 2, 1}), ranks({3, 4, 1, 2})), 1.0 / 3.0);
  EXPECT_EQ(kendall_tau(ranks({1, 2, 3}), ranks({1, 2, 3})), 1.0);
  EXPECT_EQ(kendall_tau(ranks({1, 2, 3}), ranks({3, 2, 1})), -1.0);
  EXPECT_FALSE(kendall_tau(ranks({1, 1, 1}), ranks({1, 2, 3})).has_value());
}

TEST(KendallTau, MatchesBruteForceWithTies) {
  SplitMix64 rng(31337);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 2 + rng.below(49);
    const std::uint64_t levels = 1 + rng.below(12);
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<double>(rng.below(levels)) / 4.0;
      y[i] = static_cast<double>(rng.below(levels)) / 4.0;
    }
    const auto got = kendall_tau(ranks(x), ranks(y));
    const auto want = brute_tau(x, y);
    ASSERT_EQ(got.has_value(), want.has_value());
    if (got) EXPECT_NEAR(*got, *want, 1e-12);
  }
}

TEST(KendallTau, Errors) {
  EXPECT_THROW((void)kendall_tau(ranks({1, 2}), ranks({1, 2, 3})), Error);
  EXPECT_THROW((void)kendall_tau(ranks({1}), ranks({1})), Error);
  std::vector<std::pair<std::string, double>> a{{"x", 1}, {"y", 2}}, b{{"x", 1}, {"z", 2}};
  EXPECT_THROW((void)kendall_tau(rank_scores(a), rank_scores(b)), Error);
}

TEST(RankScores, TiesShareMeanRank) {
  const RankVector r = ranks({0.5, 0.9, 0.5, 0.1});
  EXPECT_EQ(r[0].rank, 1.0);
  EXPECT_EQ(r[1].rank, 2.5);
  EXPECT_EQ(r[2].rank, 2.5);
  EXPECT_EQ(r[3].rank, 4.0);
  // equal after rounding at 9 decimals
  const RankVector close = ranks({0.1 + 0.2, 0.3});
  EXPECT_EQ(close[0].rank, close[1].rank);
}

TEST(EvidScores, MultiplicityAndWeights) {
  const ScoreMatrix m = tiny_matrix({{1.0, std::nullopt, 0.5, 0.0, 1.0}},
                                    {Pillar::PG, Pillar::PG, Pillar::ID, Pillar::TR, Pillar::AC});
  const std::vector<unsigned> ones(5, 1);
  EXPECT_DOUBLE_EQ(evid_scores(m, ones, {})[0], 0.25 * (0.5 + 0.5 + 0.0 + 1.0));
  const std::vector<unsigned> doubled{2, 1, 1, 1, 1};
  EXPECT_DOUBLE_EQ(evid_scores(m, doubled, {})[0], 0.25 * (2.0 / 3.0 + 0.5 + 0.0 + 1.0));
  PillarWeights drop_pg{{0.0, 1.0 / 3, 1.0 / 3, 1.0 / 3}};
  const std::vector<unsigned> no_pg{0, 0, 1, 1, 1};
  EXPECT_NEAR(evid_scores(m, no_pg, drop_pg)[0], (0.5 + 0.0 + 1.0) / 3.0, 1e-15);
}

TEST(Perturbations, TwelveConvexWeightings) {
  const auto ws = weight_perturbations();
  ASSERT_EQ(ws.size(), 12u);
  std::set<std::string> ids;
  for (const auto& [id, w] : ws) {
    ids.insert(id);
    EXPECT_NO_THROW(w.check());
    EXPECT_EQ(id.size(), 6u);
  }
  EXPECT_EQ(ids.size(), 12u);
  EXPECT_TRUE(ids.contains("+PG-ID"));
  const PillarWeights& w = std::ranges::find(ws, std::string("+PG-ID"), [](const auto& p) { return p.first; })->second;
  EXPECT_NEAR(w[Pillar::PG] / w[Pillar::TR], 1.1, 1e-12);
  EXPECT_NEAR(w[Pillar::ID] / w[Pillar::TR], 0.9, 1e-12);
}

TEST(Jackknife, SkipsSoleIndicatorPillars) {
  const ScoreMatrix m = tiny_matrix({{1.0, 0.5, 0.5, 0.0, 1.0}, {0.0, 0.5, 1.0, 1.0, 0.0}, {0.5, 0.5, 0.0, 0.5, 0.5}},
                                    {Pillar::PG, Pillar::PG, Pillar::ID, Pillar::TR, Pillar::AC});
  const JackknifeSummary j = indicator_jackknife(m);
  EXPECT_EQ(std::set<std::string>(j.skipped.begin(), j.skipped.end()), (std::set<std::string>{"AC-01", "ID-01", "TR-01"}));
  EXPECT_EQ(j.per_indicator.size(), 2u);
  EXPECT_TRUE(j.per_indicator.contains("PG-01"));
}

TEST(Bootstrap, EndpointsComeFromTheExactResampleDistribution) {
  // One subject; PG has four indicators, the other pillars one each, so every
  // resample is one of the 4^4 index tuples over PG.
  const std::vector<double> pg{0.0, 0.5, 1.0, 0.25};
  const ScoreMatrix m = tiny_matrix({{pg[0], pg[1], pg[2], pg[3], 0.5, 1.0, 0.0}},
                                    {Pillar::PG, Pillar::PG, Pillar::PG, Pillar::PG, Pillar::ID, Pillar::TR, Pillar::AC});
  std::vector<double> exact;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d)
          exact.push_back(round9(0.25 * (pg[a] + pg[b] + pg[c] + pg[d]) / 4.0 + 0.25 * 1.5));
  ASSERT_EQ(exact.size(), 256u);
  std::ranges::sort(exact);
  const std::set<double> support(exact.begin(), exact.end());

  const auto iv = bootstrap_intervals(m, 20000, 9).at("S0");
  EXPECT_TRUE(support.contains(iv.lo));
  EXPECT_TRUE(support.contains(iv.hi));
  EXPECT_LE(iv.lo, iv.hi);
  // With 20000 draws the 2.5% / 97.5% points sit well inside the 1% / 99% exact quantiles.
  EXPECT_GE(iv.lo, exact[2]);
  EXPECT_LE(iv.hi, exact[253]);
  EXPECT_LE(iv.lo, exact[12]);
  EXPECT_GE(iv.hi, exact[243]);
}

TEST(Bootstrap, DeterministicAcrossThreads) {
  const Dataset d = load_dataset(aipi::testing::source_dir() / "fixtures" / "cohort");
  const ScoredDataset s = score_dataset(d, compute_c_ref(d));
  const ScoreMatrix m = make_score_matrix(d, s);
  const auto a = bootstrap_intervals(m, 500, 77, 0.95, 1);
  const auto b = bootstrap_intervals(m, 500, 77, 0.95, 3);
  ASSERT_EQ(a.size(), b.size());
  for (const auto& [id, iv] : a) {
    EXPECT_EQ(iv.lo, b.at(id).lo);
    EXPECT_EQ(iv.hi, b.at(id).hi);
  }
  const auto c = bootstrap_intervals(m, 500, 78, 0.95, 1);
  bool differs = false;
  for (const auto& [id, iv] : a) differs |= iv.lo != c.at(id).lo || iv.hi != c.at(id).hi;
  EXPECT_TRUE(differs);
  EXPECT_THROW((void)bootstrap_intervals(m, 99, 1), Error);
}

TEST(CoverageDependence, BinsAndFlips) {
  ScoreMatrix m = tiny_matrix({{1.0, std::nullopt, std::nullopt, std::nullopt},  // evid .25, known 1
                               {0.5, 0.5, 0.5, 0.5},                                // evid .5, known .5
                               {std::nullopt, std::nullopt, std::nullopt, std::nullopt}},
                              {Pillar::PG, Pillar::ID, Pillar::TR, Pillar::AC});
  m.aipi_known = {std::nullopt, 0.5, std::nullopt};
  m.aipi_known[0] = std::nullopt;
  const CoverageDependence none = coverage_dependence(m, 4);
  EXPECT_TRUE(none.rank_flips.empty());

  // Give S0 a defined known-only score above S1 while its evid score is below.
  m.aipi_known[0] = 1.0;
  const CoverageDependence c = coverage_dependence(m, 4);
  ASSERT_EQ(c.rank_flips.size(), 1u);
  EXPECT_EQ(c.rank_flips[0], (RankFlip{"S0", "S1", "evid_vs_known"}));
  ASSERT_EQ(c.bins.size(), 4u);
  EXPECT_EQ(c.bins[0].count, 1u);  // coverage 0
  EXPECT_EQ(c.bins[1].count, 1u);  // coverage .25
  EXPECT_EQ(c.bins[3].count, 1u);  // coverage 1 lands in the closed last bin
  EXPECT_THROW((void)coverage_dependence(m, 1), Error);
  EXPECT_EQ(coverage_dependence_csv(c).substr(0, 31), "bin,count,mean_evid,mean_known\n");
}

TEST(CoverageDependence, FlipsMatchPairwiseOracle) {
  SplitMix64 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const Dataset d = aipi::testing::random_dataset(rng);
    const ScoredDataset s = score_dataset(d, compute_c_ref(d));
    const ScoreMatrix m = make_score_matrix(d, s);
    const CoverageDependence c = coverage_dependence(m, 10);
    std::size_t total = 0;
    for (const auto& b : c.bins) total += b.count;
    EXPECT_EQ(total, m.subjects.size());

    std::vector<RankFlip> want;
    for (std::size_t a = 0; a < m.subjects.size(); ++a) {
      for (std::size_t b = a + 1; b < m.subjects.size(); ++b) {
        const auto& sa = *std::ranges::find(s.subjects, m.subjects[a], &SubjectScore::subject_id);
        const auto& sb = *std::ranges::find(s.subjects, m.subjects[b], &SubjectScore::subject_id);
        if (!sa.aipi_known || !sb.aipi_known) continue;
        const double de = round9(sa.aipi_evid) - round9(sb.aipi_evid);
        const double dk = round9(*sa.aipi_known) - round9(*sb.aipi_known);
        if (de * dk < 0) want.push_back({m.subjects[a], m.subjects[b], "evid_vs_known"});
      }
    }
    EXPECT_EQ(c.rank_flips, want);
  }
}

TEST(SensitivityReport, Fixture) {
  const Dataset d = load_dataset(aipi::testing::source_dir() / "fixtures" / "cohort");
  const ScoredDataset s = score_dataset(d, compute_c_ref(d));
  SensitivityOptions o;
  o.n_resamples = 200;
  o.bootstrap_seed = 5;
  const SensitivityReport r = sensitivity_report(make_score_matrix(d, s), o);
  EXPECT_EQ(r.cohort.size(), 16u);
  for (Pillar p : kPillars) EXPECT_TRUE(r.tau_leave_one_pillar_out[index_of(p)].has_value());
  EXPECT_EQ(r.weight_perturbation.size(), 12u);
  EXPECT_EQ(r.tau_indicator_jackknife.per_indicator.size(), 20u);
  for (const auto& [id, ri] : r.rank_intervals) {
    EXPECT_LE(ri.min_rank, ri.baseline);
    EXPECT_GE(ri.max_rank, ri.baseline);
  }
  o.threads = 4;
  EXPECT_EQ(sensitivity_to_json(r), sensitivity_to_json(sensitivity_report(make_score_matrix(d, s), o)));
}

TEST(SensitivityReport, SingleSubjectHasUndefinedTaus) {
  const ScoreMatrix m = tiny_matrix({{1.0, 0.5, 0.5, 0.0}}, {Pillar::PG, Pillar::ID, Pillar::TR, Pillar::AC});
  SensitivityOptions o;
  o.n_resamples = 100;
  const SensitivityReport r = sensitivity_report(m, o);
  EXPECT_FALSE(r.tau_leave_one_pillar_out[0].has_value());
}
