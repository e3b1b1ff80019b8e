#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "percolab/cheeger.hpp"
#include "percolab/errors.hpp"
#include "percolab/rng.hpp"

using namespace percolab;

namespace {

PercConfig sampled(int d, int radius, double p, std::uint64_t seed) {
  return open_at(sample_uniform_field(Region::cube(d, radius), seed), p);
}

std::vector<Vertex> coords(const Region& region, const CandidateSet& h) {
  std::vector<Vertex> out;
  for (auto v : h.vertices) out.push_back(region.vertex(v));
  return out;
}

bool is_square(const std::vector<Vertex>& vs, int side) {
  if (vs.size() != static_cast<std::size_t>(side * side)) return false;
  int lo[2] = {vs[0][0], vs[0][1]}, hi[2] = {vs[0][0], vs[0][1]};
  for (const auto& v : vs)
    for (int i = 0; i < 2; ++i) {
      lo[i] = std::min(lo[i], v[i]);
      hi[i] = std::max(hi[i], v[i]);
    }
  return hi[0] - lo[0] == side - 1 && hi[1] - lo[1] == side - 1;
}

}  // namespace

TEST(OpenBoundary, Singleton) {
  const auto r = Region::cube(2, 2);
  const auto origin = *r->find(Vertex{0, 0});
  const std::uint32_t h[] = {origin};
  EXPECT_EQ(open_boundary(PercConfig::all_closed(r), h), 0);
  EXPECT_EQ(open_boundary(PercConfig::all_open(r), h), 4);
}

TEST(OpenBoundary, RegionTooSmall) {
  const auto r = Region::cube(2, 1);
  const std::uint32_t h[] = {*r->find(Vertex{1, 0})};
  EXPECT_THROW(open_boundary(PercConfig::all_open(r), h), GeometryError);
}

TEST(OpenBoundary, MatchesEdgeScan) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const auto config = sampled(2, 6, 0.6, s);
    const auto& r = config.region();
    std::vector<std::uint32_t> h;
    std::vector<std::uint8_t> in(r.num_vertices(), 0);
    for (std::uint32_t v = 0; v < r.num_vertices(); ++v)
      if (r.has_all_neighbors(v) && counter_uniform(s, 7, v) < 0.3) {
        h.push_back(v);
        in[v] = 1;
      }
    std::int64_t scan = 0;
    for (std::size_t e = 0; e < r.num_edges(); ++e)
      scan += config.is_open(e) && (in[r.edge(e).lower] != in[r.edge(e).upper]);
    EXPECT_EQ(open_boundary(config, h), scan);
  }
}

TEST(ExactProfile, FullLatticeSquares) {
  const auto r = Region::cube(2, 6);
  const auto config = PercConfig::all_open(r);
  auto four = exact_profile(config, 2, 4);
  EXPECT_DOUBLE_EQ(four.value, 2.0);
  EXPECT_EQ(four.witness.open_boundary, 8);
  EXPECT_TRUE(is_square(coords(*r, four.witness), 2));

  const auto r9 = Region::cube(2, 10);
  auto nine = exact_profile(PercConfig::all_open(r9), 3, 9);
  EXPECT_DOUBLE_EQ(nine.value, 4.0 / 3.0);
  EXPECT_EQ(nine.witness.open_boundary, 12);
  EXPECT_TRUE(is_square(coords(*r9, nine.witness), 3));
  EXPECT_TRUE(validate_candidate(PercConfig::all_open(r9), nine.witness, 9));
}

TEST(ExactProfile, CapIsMinOfScaleAndBudget) {
  const auto r = Region::cube(2, 6);
  auto res = exact_profile(PercConfig::all_open(r), 1, 12);
  EXPECT_EQ(res.size_cap, 1u);
  EXPECT_DOUBLE_EQ(res.value, 4.0);
}

TEST(ExactProfile, WholeSmallClusterHasZeroBoundary) {
  const auto r = Region::cube(2, 4);
  std::vector<std::uint8_t> open(r->num_edges(), 0);
  open[*r->find_edge(Vertex{0, 0}, Vertex{1, 0})] = 1;
  open[*r->find_edge(Vertex{1, 0}, Vertex{1, 1})] = 1;
  const PercConfig config(r, open, 0.5);
  auto res = exact_profile(config, 3, 12);
  EXPECT_DOUBLE_EQ(res.value, 0.0);
  EXPECT_EQ(res.witness.size(), 3u);
  EXPECT_FALSE(res.degenerate);
}

TEST(ExactProfile, IsolatedOriginIsFlagged) {
  const auto r = Region::cube(2, 3);
  auto res = exact_profile(PercConfig::all_closed(r), 2, 12);
  EXPECT_TRUE(res.degenerate);
  EXPECT_DOUBLE_EQ(res.value, 0.0);
  ASSERT_EQ(res.witness.size(), 1u);
  EXPECT_EQ(r->vertex(res.witness.vertices[0]), Vertex(2));
}

TEST(ExactProfile, MatchesSubsetOracle) {
  int compared = 0;
  for (std::uint64_t s = 0; compared < 60 && s < 2000; ++s) {
    const auto config = sampled(2, 12, 0.5, derive_seed(31, "cheeger-oracle", {s}));
    const auto comp = oracle::bfs_components(config);
    const auto origin = *config.region().find(Vertex(2));
    const auto size = std::count(comp.begin(), comp.end(), comp[origin]);
    if (size < 2 || size > 16) continue;
    for (int n : {2, 3, 4}) {
      const auto res = exact_profile(config, n, 16);
      const auto [b, k] = oracle::subset_cheeger(config, res.size_cap);
      EXPECT_EQ(res.witness.open_boundary * k, b * static_cast<std::int64_t>(res.witness.size()));
      EXPECT_EQ(static_cast<std::int64_t>(res.witness.size()), k);
      EXPECT_TRUE(validate_candidate(config, res.witness, res.size_cap));
    }
    ++compared;
  }
  EXPECT_EQ(compared, 60);
}

TEST(ExactProfile, NonincreasingInN) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto config = sampled(2, 14, 0.75, s);
    double prev = INFINITY;
    for (int n : {1, 2, 3}) {
      const double v = exact_profile(config, n, 12).value;
      EXPECT_LE(v, prev + 1e-12);
      prev = v;
    }
  }
}

TEST(ExactProfile, ThreeDimensionalCube) {
  // 2x2x2 cube: 8 vertices, 24 boundary edges.
  const auto r = Region::cube(3, 9);
  auto res = exact_profile(PercConfig::all_open(r), 2, 8);
  EXPECT_DOUBLE_EQ(res.value, 3.0);
}

TEST(HeuristicProfile, ZeroBudgetIsSingleton) {
  const auto config = PercConfig::all_open(Region::cube(2, 5));
  auto res = heuristic_profile(config, 3, 0, 1);
  EXPECT_EQ(res.witness.size(), 1u);
  EXPECT_DOUBLE_EQ(res.value, 4.0);
}

TEST(HeuristicProfile, ReachesThreeByThree) {
  const auto config = PercConfig::all_open(Region::cube(2, 10));
  auto res = heuristic_profile(config, 3, 20000, 5);
  EXPECT_DOUBLE_EQ(res.value, 4.0 / 3.0);
  EXPECT_TRUE(validate_candidate(config, res.witness, 9));
}

TEST(HeuristicProfile, DominatesExact) {
  int equal = 0;
  const int trials = 200;
  for (int t = 0; t < trials; ++t) {
    const double p = 0.6 + 0.4 * counter_uniform(99, 3, static_cast<std::uint64_t>(t));
    const auto config = sampled(2, 10, p, derive_seed(2024, "dominance", {static_cast<std::uint64_t>(t)}));
    const auto exact = exact_profile(config, 3, 9);
    const auto heur = heuristic_profile(config, 3, 20000, derive_seed(7, "anneal", {static_cast<std::uint64_t>(t)}));
    ASSERT_TRUE(validate_candidate(config, heur.witness, 9));
    EXPECT_GE(heur.value, exact.value - 1e-12);
    if (heur.witness.open_boundary * static_cast<std::int64_t>(exact.witness.size()) ==
        exact.witness.open_boundary * static_cast<std::int64_t>(heur.witness.size()))
      ++equal;
  }
  EXPECT_GE(equal, 190) << equal << " of " << trials;
}

TEST(HeuristicProfile, WarmStartMustBeAdmissible) {
  const auto config = PercConfig::all_open(Region::cube(2, 5));
  CandidateSet bogus{{0}, 2};
  EXPECT_THROW(heuristic_profile(config, 2, 10, 1, {}, &bogus), ParameterError);
}

TEST(HeuristicProfile, DeterministicGivenSeed) {
  const auto config = sampled(2, 12, 0.8, 4);
  auto a = heuristic_profile(config, 4, 5000, 11);
  auto b = heuristic_profile(config, 4, 5000, 11);
  EXPECT_EQ(a.witness.vertices, b.witness.vertices);
}

TEST(ProfileExperiment, FullLatticeAlwaysConditions) {
  const int ns[] = {2, 3};
  ProfileOptions opt;
  opt.budget = 20000;
  auto out = profile_experiment(2, 1.0, ns, 3, 8, opt);
  ASSERT_EQ(out.rows.size(), 6u);
  for (const auto& row : out.rows) EXPECT_TRUE(row.passed_conditioning);
  ASSERT_EQ(out.summary.size(), 2u);
  EXPECT_EQ(out.summary[0].passed, 3u);
  EXPECT_NEAR(out.summary[1].mean_n_phi, 3 * 4.0 / 3.0, 1e-12);
}

TEST(ProfileExperiment, PhiNonincreasingAlongGrid) {
  const int ns[] = {2, 4, 8};
  ProfileOptions opt;
  opt.budget = 3000;
  auto out = profile_experiment(2, 0.9, ns, 6, 17, opt);
  for (int r = 0; r < 6; ++r) {
    const auto* row = &out.rows[static_cast<std::size_t>(r) * 3];
    if (!row->passed_conditioning) continue;
    EXPECT_LE(row[1].phi, row[0].phi + 1e-12);
    EXPECT_LE(row[2].phi, row[1].phi + 1e-12);
  }
}

TEST(ProfileExperiment, NoPassingReplicaIsAnError) {
  const int ns[] = {3};
  ProfileOptions opt;
  opt.budget = 10;
  EXPECT_THROW(profile_experiment(2, 0.05, ns, 3, 1, opt), ExperimentError);
}

TEST(ProfileExperiment, WritersEmitHeadersAndWitnesses) {
  const int ns[] = {2};
  ProfileOptions opt;
  opt.budget = 500;
  opt.prediction = 3.5;
  auto out = profile_experiment(2, 1.0, ns, 2, 3, opt);
  std::ostringstream csv, summary, nd;
  write_profile_csv(csv, out.rows);
  write_profile_summary_csv(summary, 2, 1.0, out.summary);
  write_witness_ndjson(nd, *out.region, out.rows);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "d,p,n,replica,mode,phi,size,boundary,passedConditioning");
  EXPECT_NE(summary.str().find("3.5"), std::string::npos);
  EXPECT_NE(nd.str().find("\"vertices\":["), std::string::npos);
  EXPECT_NE(nd.str().find("[0,0]"), std::string::npos);
}
