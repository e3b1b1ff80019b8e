#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"
#include "percolab/clusters.hpp"
#include "percolab/errors.hpp"
#include "percolab/rng.hpp"

using namespace percolab;

namespace {

// Configuration on `region` whose open edges are exactly those along the
// given vertex paths (consecutive entries must be lattice neighbours).
PercConfig with_paths(const RegionPtr& region, const std::vector<std::vector<Vertex>>& paths) {
  std::vector<std::uint8_t> open(region->num_edges(), 0);
  for (const auto& path : paths)
    for (std::size_t i = 1; i < path.size(); ++i) open[region->find_edge(path[i - 1], path[i]).value()] = 1;
  return PercConfig(region, std::move(open), 0.5);
}

std::vector<Vertex> straight(Vertex from, int axis, int steps) {
  std::vector<Vertex> out{from};
  for (int k = 0; k < steps; ++k) out.push_back(out.back().shifted(axis, steps > 0 ? 1 : -1));
  return out;
}

std::vector<Vertex> members(const ClusterLabeling& l, std::uint32_t id) {
  std::vector<Vertex> out;
  for (std::uint32_t v = 0; v < l.region().num_vertices(); ++v)
    if (l.label(v) == id) out.push_back(l.region().vertex(v));
  return out;
}

}  // namespace

TEST(Labeling, DegenerateConfigs) {
  const auto r = Region::box(Vertex{0, 0}, Vertex{5, 4});
  EXPECT_EQ(label_clusters(PercConfig::all_closed(r)).num_clusters(), r->num_vertices());
  EXPECT_EQ(label_clusters(PercConfig::all_open(r)).num_clusters(), 1u);
}

TEST(Labeling, MatchesBreadthFirstSearch) {
  const auto r = Region::box(Vertex{0, 0}, Vertex{19, 19});
  for (std::uint64_t trial = 0; trial < 500; ++trial) {
    const double p = 0.3 + 0.4 * counter_uniform(99, 0, trial);
    const auto cfg = open_at(sample_uniform_field(r, trial), p);
    const auto l = label_clusters(cfg);
    std::vector<std::uint32_t> ours(l.labels().begin(), l.labels().end());
    ASSERT_TRUE(oracle::same_partition(ours, oracle::bfs_components(cfg))) << "trial " << trial;
  }
}

TEST(Labeling, StatsConsistentWithMembership) {
  const auto cfg = open_at(sample_uniform_field(Region::cube(3, 4), 5), 0.4);
  const auto l = label_clusters(cfg);
  for (std::uint32_t id = 0; id < l.num_clusters(); ++id) {
    const auto ms = members(l, id);
    ASSERT_EQ(ms.size(), l.stats(id).size);
    for (int i = 0; i < 3; ++i) {
      int lo = ms.front()[i], hi = lo;
      for (const auto& x : ms) {
        lo = std::min(lo, x[i]);
        hi = std::max(hi, x[i]);
      }
      EXPECT_EQ(l.stats(id).min[i], lo);
      EXPECT_EQ(l.stats(id).max[i], hi);
    }
  }
  EXPECT_THROW(l.stats(static_cast<std::uint32_t>(l.num_clusters())), LookupError);
}

TEST(Diameter, SmallCases) {
  const auto r = Region::box(Vertex{-1, -1}, Vertex{4, 1});
  const auto cfg = with_paths(r, {straight(Vertex{0, 0}, 0, 3)});
  const auto l = label_clusters(cfg);
  const auto path_id = l.label(*r->find(Vertex{0, 0}));
  EXPECT_EQ(diameter(l, path_id), 3);
  EXPECT_EQ(diameter(l, l.label(*r->find(Vertex{-1, -1}))), 0);
  EXPECT_THROW(diameter(l, 10'000), LookupError);
}

TEST(Diameter, MatchesPairwiseOracle) {
  const auto r = Region::box(Vertex{0, 0}, Vertex{14, 14});
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto l = label_clusters(open_at(sample_uniform_field(r, seed), 0.5));
    for (std::uint32_t id = 0; id < l.num_clusters(); ++id)
      ASSERT_EQ(diameter(l, id), oracle::brute_diameter(members(l, id)));
  }
}

TEST(Crossing, DegenerateCases) {
  for (int side : {2, 3, 6}) {
    const auto r = Region::box(Vertex{0, 0, 0}, Vertex{side, side, side});
    const Box box{Vertex{0, 0, 0}, Vertex{side - 1, side - 1, side - 1}};
    EXPECT_TRUE(has_crossing_cluster(PercConfig::all_open(r), box));
    EXPECT_FALSE(has_crossing_cluster(PercConfig::all_closed(r), box));
  }
}

TEST(Crossing, MatchesPathSearchOracle) {
  const auto r = Region::box(Vertex{0, 0}, Vertex{9, 9});
  const Box box{Vertex{0, 0}, Vertex{9, 9}};
  int agree = 0;
  for (std::uint64_t s = 0; s < 500; ++s) {
    const auto cfg = open_at(sample_uniform_field(r, derive_seed(8, "crossing", {s})), 0.8);
    agree += has_crossing_cluster(cfg, box) == oracle::crossing_by_search(cfg, box);
  }
  EXPECT_EQ(agree, 500);
}

TEST(Crossing, SingleAxisIsWeaker) {
  const auto r = Region::box(Vertex{0, 0}, Vertex{5, 5});
  const Box box{Vertex{0, 0}, Vertex{5, 5}};
  const auto cfg = with_paths(r, {straight(Vertex{0, 2}, 0, 5)});
  EXPECT_TRUE(has_axis_crossing(cfg, box, 0));
  EXPECT_FALSE(has_axis_crossing(cfg, box, 1));
  EXPECT_FALSE(has_crossing_cluster(cfg, box));
}

TEST(EventT, DegenerateAndCertificate) {
  const int N = 12;
  const auto r = Region::box(Vertex{0, 0}, Vertex{N - 1, N - 1});
  const Box box{Vertex{0, 0}, Vertex{N - 1, N - 1}};
  EXPECT_FALSE(event_T(PercConfig::all_open(r), box, 3));
  EXPECT_FALSE(event_T(PercConfig::all_closed(r), box, 3));
  EXPECT_THROW(event_T(PercConfig::all_open(r), box, 0), ParameterError);
  EXPECT_THROW(event_T(PercConfig::all_open(r), box, N + 1), ParameterError);

  // Grid of rows y = 0, 4, 8 and columns x = 0, 4, 8 plus the column
  // x = N-1 reaching the top face; a separate path sits in row y = 10.
  std::vector<std::vector<Vertex>> paths;
  for (int y : {0, 4, 8}) paths.push_back(straight(Vertex{0, y}, 0, N - 1));
  for (int x : {0, 4, 8}) paths.push_back(straight(Vertex{x, 0}, 1, 8));
  paths.push_back(straight(Vertex{N - 1, 0}, 1, N - 1));
  const int m = 5;
  paths.push_back(straight(Vertex{2, 10}, 0, m));
  auto cfg = with_paths(r, paths);
  EXPECT_TRUE(has_crossing_cluster(cfg, box));
  EXPECT_TRUE(event_T(cfg, box, m));
  EXPECT_FALSE(event_T(cfg, box, m + 1));
}

TEST(BoxGrid, PartitionAndEnlargement) {
  const BoxGrid g(2, 4);
  const auto b = g.box(Vertex{1, -1});
  EXPECT_EQ(b.lo, (Vertex{4, -4}));
  EXPECT_EQ(b.hi, (Vertex{7, -1}));
  const auto e = g.enlarged(Vertex{0, 0});
  EXPECT_EQ(e.lo, (Vertex{-4, -4}));
  EXPECT_EQ(e.hi, (Vertex{7, 7}));
  const auto cubes = g.sub_cubes(Vertex{0, 0});
  ASSERT_EQ(cubes.size(), 9u);
  // Sub-cubes tile the enlarged box exactly.
  for (int x = -4; x <= 7; ++x)
    for (int y = -4; y <= 7; ++y) {
      int hits = 0;
      for (const auto& c : cubes) hits += c.contains(Vertex{x, y});
      EXPECT_EQ(hits, 1);
    }
  EXPECT_EQ(BoxGrid(3, 2).sub_cubes(Vertex{0, 0, 0}).size(), 27u);
}

TEST(Atypical, DegenerateCases) {
  const BoxGrid g(2, 4);
  const Vertex u{0, 0};
  const auto outer = g.enlarged(u);
  const auto r = Region::box(outer.lo, outer.hi);
  EXPECT_FALSE(atypical_event(PercConfig::all_open(r), g, u));
  EXPECT_FALSE(atypical_event(PercConfig::all_closed(r), g, u));
  const auto small = Region::box(Vertex{0, 0}, Vertex{3, 3});
  EXPECT_THROW(has_disjoint_property(PercConfig::all_open(small), g, u), GeometryError);
  EXPECT_THROW(has_blocked_property(PercConfig::all_open(small), g, u), GeometryError);
}

TEST(Atypical, DisjointCertificate) {
  const BoxGrid g(2, 4);
  const Vertex u{0, 0};
  const auto outer = g.enlarged(u);  // [-4, 7]^2, inner [0, 3]^2
  const auto r = Region::box(outer.lo, outer.hi);
  // Two parallel horizontal paths from inside B_t(u) to the right face.
  const auto cfg = with_paths(r, {straight(Vertex{0, 0}, 0, 7), straight(Vertex{0, 2}, 0, 7)});
  const auto ind = atypical_indicators(cfg, g, u);
  EXPECT_TRUE(ind.disjoint);
  EXPECT_TRUE(has_disjoint_property(cfg, g, u));
  EXPECT_TRUE(atypical_event(cfg, g, u));
}

TEST(Atypical, BlockedCertificate) {
  const BoxGrid g(2, 4);
  const Vertex u{0, 0};
  const auto outer = g.enlarged(u);
  const auto r = Region::box(outer.lo, outer.hi);
  // L-shaped path from the inner box up and then right to the boundary;
  // the lower-left sub-cube [-4,-1]^2 is never visited.
  auto leg1 = straight(Vertex{1, 1}, 1, 6);
  auto leg2 = straight(Vertex{1, 7}, 0, 6);
  const auto cfg = with_paths(r, {leg1, leg2});
  const auto ind = atypical_indicators(cfg, g, u);
  EXPECT_FALSE(ind.disjoint);
  EXPECT_TRUE(ind.blocked);
  EXPECT_TRUE(has_blocked_property(cfg, g, u));
  EXPECT_TRUE(atypical_event(cfg, g, u));
}

TEST(Atypical, UnionBoundPerSample) {
  const BoxGrid g(2, 5);
  const Vertex u{0, 0};
  const auto outer = g.enlarged(u);
  const auto r = Region::box(outer.lo, outer.hi);
  for (std::uint64_t s = 0; s < 300; ++s) {
    const auto cfg = open_at(sample_uniform_field(r, s), 0.6);
    const auto ind = atypical_indicators(cfg, g, u);
    EXPECT_EQ(atypical_event(cfg, g, u), has_disjoint_property(cfg, g, u) || has_blocked_property(cfg, g, u));
    EXPECT_EQ(ind.atypical(), ind.disjoint || ind.blocked);
  }
}

TEST(Theta, PEqualsOne) {
  const auto row = estimate_theta(2, 1.0, 8, 50, 3);
  EXPECT_EQ(row.successes, 50);
  EXPECT_DOUBLE_EQ(row.frequency(), 1.0);
  EXPECT_DOUBLE_EQ(row.standard_error(), 0.0);
  EXPECT_THROW(estimate_theta(2, 0.0, 8, 50, 3), ParameterError);
  EXPECT_THROW(estimate_theta(2, 0.5, 0, 50, 3), ParameterError);
}

TEST(Theta, ProxyMonotoneInRadiusAndParameter) {
  const auto r = Region::cube(2, 24);
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto f = sample_uniform_field(r, s);
    const auto cfg = open_at(f, 0.6);
    bool prev = true;
    for (int m : {2, 4, 8, 16, 24}) {
      const bool hit = origin_reaches_boundary(cfg, m);
      EXPECT_LE(hit, prev);
      prev = hit;
    }
    EXPECT_LE(origin_reaches_boundary(open_at(f, 0.55), 12), origin_reaches_boundary(open_at(f, 0.7), 12));
  }
}

TEST(Theta, LazyEvaluationMatchesFieldConfig) {
  const int m = 10;
  const auto r = Region::cube(2, m);
  const auto row = estimate_theta(2, 0.6, m, 200, 17);
  std::int64_t hits = 0;
  for (std::uint64_t k = 0; k < 200; ++k)
    hits += origin_reaches_boundary(open_at(sample_uniform_field(r, derive_seed(17, "theta", {k})), 0.6), m);
  EXPECT_EQ(row.successes, hits);
}

TEST(Theta, ReplicatedLongRunBaseline) {
  // Frozen from a 10^5-replica run at seed 20240101: 98965 successes.
  constexpr double kBaseline = 0.98965;
  constexpr double kBaselineSe = 0.0003200450;
  const auto row = estimate_theta(2, 0.7, 64, 10'000, 777);
  const double se = std::sqrt(row.standard_error() * row.standard_error() + kBaselineSe * kBaselineSe);
  EXPECT_NEAR(row.frequency(), kBaseline, 3.0 * se);
}

TEST(Scan, PEqualsOneAndRanges) {
  const std::vector<double> ps{0.6, 1.0};
  const std::vector<int> ts{2, 4};
  const auto scan = scan_decay(2, ps, ts, 40, 1);
  ASSERT_EQ(scan.rows.size(), 4u);
  for (const auto& row : scan.rows) {
    EXPECT_GE(row.frequency(), 0.0);
    EXPECT_LE(row.frequency(), 1.0);
    if (row.p == 1.0) EXPECT_EQ(row.successes, 0);
  }
  EXPECT_EQ(scan.fits.size(), 2u);
  EXPECT_EQ(scan.fits[1].slope, -std::numeric_limits<double>::infinity());
  const std::vector<int> bad{4, 2};
  EXPECT_THROW(scan_decay(2, ps, bad, 10, 1), ParameterError);
}

TEST(Scan, CsvSchema) {
  const std::vector<double> ps{0.7};
  const std::vector<int> ts{2};
  const auto scan = scan_decay(2, ps, ts, 10, 4);
  std::ostringstream os;
  write_proportion_csv(os, scan.rows, "t");
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "d,p,t,replicas,successes,frequency,stderr,seed");
}
