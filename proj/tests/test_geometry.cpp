#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "percolab/errors.hpp"
#include "percolab/geometry.hpp"
#include "percolab/rng.hpp"

using namespace percolab;

namespace {

std::vector<Direction> axes_and_diagonals(int d) {
  std::vector<Direction> out;
  for (const auto& v : default_directions(d)) {
    out.push_back(v);
    Direction neg = v;
    for (auto& c : neg) c = -c;
    out.push_back(neg);
  }
  return out;
}

Polytope cube(int d, double r = 1.0) {
  std::vector<Halfspace> hs;
  for (int i = 0; i < d; ++i)
    for (double s : {1.0, -1.0}) {
      Point n(static_cast<std::size_t>(d), 0.0);
      n[static_cast<std::size_t>(i)] = s;
      hs.push_back({n, r});
    }
  return polytope_from_halfspaces(d, hs);
}

// Oracle: sup over unit u of |h_P(u) - h_Q(u)| from vertex support
// functions, by a dense grid followed by local pattern search around the
// best grid directions.
double support_gap(const Polytope& p, const Polytope& q, std::size_t k) {
  auto gap = [&](Point u) {
    double n = 0;
    for (double c : u) n += c * c;
    for (auto& c : u) c /= std::sqrt(n);
    return std::abs(p.support(u) - q.support(u));
  };
  std::vector<std::pair<double, Direction>> ranked;
  for (const auto& u : sphere_directions(p.d, k)) ranked.emplace_back(gap(u), u);
  std::partial_sort(ranked.begin(), ranked.begin() + 4, ranked.end(),
                    [](const auto& a, const auto& b) { return a.first > b.first; });
  double best = ranked.front().first;
  for (std::size_t r = 0; r < 4; ++r) {
    Point u = ranked[r].second;
    double val = ranked[r].first;
    for (double step = 0.02; step > 1e-7; step /= 2) {
      for (bool improved = true; improved;) {
        improved = false;
        for (int i = 0; i < p.d; ++i)
          for (double s : {step, -step}) {
            Point w = u;
            w[static_cast<std::size_t>(i)] += s;
            if (double g = gap(w); g > val) {
              val = g;
              u = w;
              improved = true;
            }
          }
      }
    }
    best = std::max(best, val);
  }
  return best;
}

// Table norm with values tau0(v) * (1 + noise * U(-1, 1)).
NormSpec noisy_table(const NormSpec& base, const std::vector<Direction>& dirs, double noise, std::uint64_t seed) {
  std::vector<std::pair<Direction, double>> samples;
  for (std::size_t i = 0; i < dirs.size(); ++i)
    samples.emplace_back(dirs[i], base(dirs[i]) * (1.0 + noise * (2.0 * counter_uniform(seed, 0, i) - 1.0)));
  return NormSpec::table(base.dim(), samples);
}

}  // namespace

TEST(Wulff, L1GivesCubeExactly) {
  for (int d : {2, 3}) {
    const auto dirs = axes_and_diagonals(d);
    const auto w = wulff_polytope(NormSpec::l1(d), dirs);
    EXPECT_EQ(w.vertices.size(), static_cast<std::size_t>(1 << d));
    for (const auto& v : w.vertices)
      for (double c : v) EXPECT_NEAR(std::abs(c), 1.0, 1e-12);
    EXPECT_LE(hausdorff_distance(w, cube(d)), 1e-9);
    EXPECT_EQ(w.facets.size(), static_cast<std::size_t>(2 * d));
    EXPECT_NEAR(w.volume(), std::pow(2.0, d), 1e-9);
  }
}

TEST(Wulff, L2ApproximatesBall) {
  const auto w2 = wulff_polytope(NormSpec::l2(2), sphere_directions(2, 100));
  EXPECT_LE(hausdorff_to_ball(w2, 1.0), 1e-2);
  const auto w3 = wulff_polytope(NormSpec::l2(3), sphere_directions(3, 2000));
  EXPECT_LE(hausdorff_to_ball(w3, 1.0), 1e-2);
  EXPECT_NEAR(w3.volume(), 4.0 / 3.0 * std::numbers::pi, 0.05);
}

TEST(Wulff, BallDistanceMatchesSupportOracle) {
  const auto w = wulff_polytope(NormSpec::l2(2), sphere_directions(2, 12));
  double gap = 0.0;
  for (const auto& u : sphere_directions(2, 100'000)) gap = std::max(gap, std::abs(w.support(u) - 1.0));
  EXPECT_NEAR(hausdorff_to_ball(w, 1.0), gap, 1e-6);
}

TEST(Wulff, HomogeneousInTheNorm) {
  const auto dirs = sphere_directions(3, 200);
  const auto a = wulff_polytope(NormSpec::l2(3), dirs);
  const auto b = wulff_polytope(NormSpec::l2(3).scaled(2.5), dirs);
  EXPECT_LE(hausdorff_distance(scale(a, 2.5), b), 1e-9);
}

TEST(Wulff, MembershipInvariant) {
  for (int d : {2, 3}) {
    const auto dirs = sphere_directions(d, d == 2 ? 37 : 300);
    const auto norm = noisy_table(NormSpec::axis_weighted(d == 2 ? std::vector<double>{1.0, 2.0}
                                                                 : std::vector<double>{1.0, 1.5, 0.7}),
                                  dirs, 0.1, 4);
    const auto w = wulff_polytope(norm, norm_directions(norm));
    for (const auto& x : w.vertices)
      for (const auto& [v, t] : norm.samples()) {
        double s = 0;
        for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * v[i];
        EXPECT_LE(s, t + 1e-9);
      }
    // Facet areas agree with an independent volume: I_tau(W) = d vol(W).
    EXPECT_NEAR(surface_energy(w, norm), d * w.volume(), 1e-9 * w.volume());
  }
}

TEST(Wulff, Errors) {
  const std::vector<Direction> half{{1.0, 0.0}, {0.0, 1.0}, {0.6, 0.8}};
  EXPECT_THROW(wulff_polytope(NormSpec::l2(2), half), GeometryError);
  const std::vector<Direction> two{{1.0, 0.0}, {-1.0, 0.0}};
  EXPECT_THROW(wulff_polytope(NormSpec::l2(2), two), GeometryError);
  const std::vector<Direction> flat{{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}};
  EXPECT_THROW(wulff_polytope(NormSpec::l2(3), flat), GeometryError);
  EXPECT_THROW(wulff_polytope(NormSpec::l2(4), sphere_directions(2, 8)), ParameterError);
}

TEST(Wulff, MonotoneInclusion) {
  const auto dirs = sphere_directions(2, 40);
  const auto small = noisy_table(NormSpec::l2(2), dirs, 0.05, 1);
  std::vector<std::pair<Direction, double>> bigger;
  for (const auto& [v, t] : small.samples()) bigger.emplace_back(v, t * (1.0 + 0.1 * counter_uniform(2, 0, bigger.size())));
  const auto large = NormSpec::table(2, bigger);
  const auto a = wulff_polytope(small, norm_directions(small));
  const auto b = wulff_polytope(large, norm_directions(small));
  for (const auto& x : a.vertices) EXPECT_TRUE(b.contains(x));
  EXPECT_LE(a.volume(), b.volume());
}

TEST(DualNorm, BuiltinDuals) {
  for (int d : {2, 3}) {
    const auto dirs = axes_and_diagonals(d);
    std::vector<Point> tests;
    for (const auto& v : dirs) tests.push_back(v);
    tests.push_back(Point(static_cast<std::size_t>(d), 1.0));
    for (const auto& x : tests) {
      double l1 = 0, l2 = 0, linf = 0;
      for (double c : x) {
        l1 += std::abs(c);
        l2 += c * c;
        linf = std::max(linf, std::abs(c));
      }
      EXPECT_NEAR(dual_norm_eval(NormSpec::l1(d), x, dirs), linf, 1e-12);
      // The l2 maximizer is x itself, sampled except for (1,1,1) in d = 3.
      if (d == 2 || l1 < 2.5)
        EXPECT_NEAR(dual_norm_eval(NormSpec::l2(d), x, dirs), std::sqrt(l2), 1e-12);
      if (d == 2) EXPECT_NEAR(dual_norm_eval(NormSpec::linf(d), x, dirs), l1, 1e-12);
    }
  }
  const std::vector<Direction> dirs2 = axes_and_diagonals(2);
  EXPECT_NEAR(dual_norm_eval(NormSpec::l1(2), Point{1.0, 1.0}, dirs2), 1.0, 1e-12);
  EXPECT_THROW(dual_norm_eval(NormSpec::l2(2), Point{0.0, 0.0}, dirs2), DomainError);
}

TEST(DualNorm, SandwichOnSampledDirections) {
  const auto dirs = sphere_directions(3, 150);
  const auto norm = noisy_table(NormSpec::l2(3), dirs, 0.2, 9);
  double lo = 1e300, hi = 0;
  for (const auto& [v, t] : norm.samples()) lo = std::min(lo, t), hi = std::max(hi, t);
  for (const auto& [v, t] : norm.samples()) {
    const double s = dual_norm_eval(norm, v, norm_directions(norm));
    EXPECT_GE(s, 1.0 / hi - 1e-12);
    EXPECT_LE(s, 1.0 / lo + 1e-12);
  }
}

TEST(DualNorm, BidualityForTables) {
  // Convex table: sampled values of a genuine norm.
  const auto dirs = sphere_directions(2, 64);
  std::vector<std::pair<Direction, double>> samples;
  const auto base = NormSpec::axis_weighted({1.0, 1.7});
  for (const auto& v : dirs) samples.emplace_back(v, base(v));
  const auto table = NormSpec::table(2, samples);
  double max_t = 0;
  for (const auto& [v, t] : table.samples()) max_t = std::max(max_t, t);
  const double mesh = 2.0 * std::sin(std::numbers::pi / 64.0);
  for (const auto& [v, t] : table.samples()) {
    const double bb = bidual_norm_eval(table, v, norm_directions(table));
    EXPECT_LE(bb, t + 1e-9);
    EXPECT_GE(bb, t - max_t * mesh);
  }
  EXPECT_GT(table.resolution(Point{std::cos(0.05), std::sin(0.05)}), 0.0);
  EXPECT_EQ(NormSpec::l2(2).resolution(Point{1.0, 0.3}), 0.0);
}

TEST(NormSpec, TableSymmetrization) {
  const std::vector<std::pair<Direction, double>> samples{{{1.0, 0.0}, 1.0}, {{-1.0, 0.0}, 3.0}, {{0.0, 1.0}, 2.0}};
  const auto t = NormSpec::table(2, samples);
  EXPECT_EQ(t.samples().size(), 4u);
  EXPECT_DOUBLE_EQ(t(Point{1.0, 0.0}), 2.0);
  EXPECT_DOUBLE_EQ(t(Point{-2.0, 0.0}), 4.0);
  EXPECT_DOUBLE_EQ(t(Point{0.0, -1.0}), 2.0);
  EXPECT_THROW(NormSpec::table(2, {{{1.0, 0.0}, -1.0}}), ParameterError);
}

TEST(NormSpec, BuiltinTriangleInequality) {
  for (const auto& n : {NormSpec::l1(3), NormSpec::l2(3), NormSpec::linf(3), NormSpec::axis_weighted({1, 2, 3})})
    for (std::uint64_t k = 0; k < 200; ++k) {
      Point x(3), y(3), s(3);
      for (int i = 0; i < 3; ++i) {
        x[i] = 2 * counter_uniform(k, 1, i) - 1;
        y[i] = 2 * counter_uniform(k, 2, i) - 1;
        s[i] = x[i] + y[i];
      }
      EXPECT_LE(n(s), n(x) + n(y) + 1e-15);
    }
}

TEST(SurfaceEnergy, SquareAndHomogeneity) {
  const auto sq = cube(2);
  EXPECT_NEAR(surface_energy(sq, NormSpec::l2(2)), 8.0, 1e-12);
  EXPECT_NEAR(surface_energy(scale(sq, 2.0), NormSpec::l2(2)), 16.0, 1e-12);
  const auto c3 = cube(3);
  EXPECT_NEAR(surface_energy(scale(c3, 2.0), NormSpec::l1(3)), 4.0 * surface_energy(c3, NormSpec::l1(3)), 1e-9);
}

TEST(SurfaceEnergy, WulffIdentity) {
  for (int d : {2, 3}) {
    const auto dirs = sphere_directions(d, d == 2 ? 200 : 1000);
    for (const auto& n : {NormSpec::l1(d), NormSpec::l2(d), NormSpec::linf(d)}) {
      const auto w = wulff_polytope(n, dirs);
      EXPECT_NEAR(surface_energy(w, n), d * w.volume(), 0.01 * d * w.volume()) << n.name() << " d=" << d;
    }
  }
}

TEST(ScaleToVolume, Contract) {
  const auto w = wulff_polytope(NormSpec::l2(2), sphere_directions(2, 30));
  const auto same = scale_to_volume(w, w.volume());
  EXPECT_LE(hausdorff_distance(same, w), 1e-12);
  const auto doubled = scale_to_volume(w, 2.0 * w.volume());
  EXPECT_NEAR(doubled.circumradius() / w.circumradius(), std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(surface_energy(doubled, NormSpec::l2(2)), std::sqrt(2.0) * surface_energy(w, NormSpec::l2(2)), 1e-9);
  const auto w3 = wulff_polytope(NormSpec::l2(3), sphere_directions(3, 300));
  EXPECT_NEAR(scale_to_volume(w3, 5.0).volume(), 5.0, 5e-6);
  EXPECT_THROW(scale_to_volume(w, 0.0), ParameterError);
}

TEST(Hausdorff, IdentityAndConcentricBalls) {
  const auto dirs = sphere_directions(2, 60);
  const auto a = wulff_polytope(NormSpec::l2(2), dirs);
  EXPECT_EQ(hausdorff_distance(a, a), 0.0);
  const auto b = wulff_polytope(NormSpec::l2(2).scaled(1.5), dirs);
  EXPECT_NEAR(hausdorff_distance(a, b), 0.5 * a.circumradius(), 1e-9);
  EXPECT_NEAR(hausdorff_distance(a, b), 0.5, 0.5 * (a.circumradius() - 1.0) + 1e-12);
}

TEST(Hausdorff, SquareVersusDiscMatchesSupportOracle) {
  const auto sq = cube(2);
  const auto disc = wulff_polytope(NormSpec::l2(2), sphere_directions(2, 200));
  EXPECT_NEAR(hausdorff_distance(sq, disc), support_gap(sq, disc, 20'000), 1e-3);
  const auto c3 = cube(3, 0.8);
  const auto ball = wulff_polytope(NormSpec::l2(3), sphere_directions(3, 400));
  EXPECT_NEAR(hausdorff_distance(c3, ball), support_gap(c3, ball, 20'000), 1e-3);
}

TEST(Hausdorff, MetricAxioms) {
  for (int d : {2, 3}) {
    const auto dirs = sphere_directions(d, d == 2 ? 24 : 120);
    for (std::uint64_t k = 0; k < 6; ++k) {
      const auto p = wulff_polytope(noisy_table(NormSpec::l2(d), dirs, 0.3, 3 * k), dirs);
      const auto q = wulff_polytope(noisy_table(NormSpec::l1(d), dirs, 0.3, 3 * k + 1), dirs);
      const auto r = wulff_polytope(noisy_table(NormSpec::linf(d), dirs, 0.3, 3 * k + 2), dirs);
      const double pq = hausdorff_distance(p, q), qp = hausdorff_distance(q, p);
      EXPECT_NEAR(pq, qp, 1e-12);
      EXPECT_LE(hausdorff_distance(p, r), pq + hausdorff_distance(q, r) + 1e-12);
      EXPECT_GT(pq, 0.0);
      // The sampled oracle is exact to ~1e-5 on a 10^6-angle circle grid; in
      // d = 3 the local search stalls at kinks to within ~1e-3.
      EXPECT_NEAR(hausdorff_distance(p, q), support_gap(p, q, d == 2 ? 1'000'000 : 4000), d == 2 ? 1e-5 : 1e-3);
    }
  }
}

TEST(ChainBound, HoldsForPerturbedTables) {
  const auto dirs = sphere_directions(2, 16);
  for (std::uint64_t k = 0; k < 30; ++k) {
    const auto a = noisy_table(NormSpec::l2(2), dirs, 0.1, k);
    const auto b = noisy_table(NormSpec::l2(2), dirs, 0.1, k + 1000);
    const auto res = hausdorff_chain_bound(wulff_polytope(a, dirs), wulff_polytope(b, dirs));
    EXPECT_TRUE(res.holds) << res.hausdorff << " vs " << res.radial_gap << " + " << res.tolerance;
    EXPECT_LE(res.radial_gap, res.scaled_bound + 1e-12);
  }
  const auto w = wulff_polytope(NormSpec::l2(2), dirs);
  const auto same = hausdorff_chain_bound(w, w);
  EXPECT_EQ(same.hausdorff, 0.0);
  EXPECT_EQ(same.radial_gap, 0.0);
}

TEST(Crystal, ConstantTableScalesToUnitVolume) {
  for (int d : {2, 3}) {
    NormTable table(d, {0.9}, default_directions(d), {4}, 1, 0);
    for (std::size_t vi = 0; vi < table.directions().size(); ++vi) {
      BetaEstimate e;
      e.p = 0.9;
      e.v = table.directions()[vi];
      e.n = 4;
      e.mean = 0.7;
      table.set_cell(0, vi, 0, e);
    }
    const auto c = crystal_pipeline(table, 0, 1.0);
    EXPECT_NEAR(c.volume, 1.0, 1e-6);
    // Same shape as the l2-type body over the symmetrized direction set.
    std::vector<Direction> dirs;
    for (const auto& v : default_directions(d)) {
      dirs.push_back(v);
      Direction neg = v;
      for (auto& x : neg) x = -x;
      dirs.push_back(neg);
    }
    const auto ref = scale_to_volume(wulff_polytope(NormSpec::l2(d), dirs), 1.0);
    EXPECT_LE(hausdorff_distance(c.polytope, ref), 1e-9);

    const auto half = crystal_pipeline(table, 0, 0.5);
    EXPECT_NEAR(half.volume, 2.0, 2e-6);
    EXPECT_NEAR(half.surface_energy, c.surface_energy * std::pow(2.0, (d - 1.0) / d), 1e-9);
  }
}

TEST(Crystal, InsufficientDirectionsAndBadTheta) {
  NormTable table(2, {0.9}, {Direction{1.0, 0.0}}, {4}, 1, 0);
  BetaEstimate e;
  e.mean = 1.0;
  e.v = {1.0, 0.0};
  table.set_cell(0, 0, 0, e);
  EXPECT_THROW(crystal_pipeline(table, 0, 1.0), GeometryError);
  EXPECT_THROW(crystal_from_norm(NormSpec::l2(2), sphere_directions(2, 8), 0.0), ParameterError);
}

TEST(Crystal, MeasuredTableAtPOne) {
  const auto table = build_norm_table(2, {1.0}, default_directions(2), {4, 6}, 2, 3);
  const auto c = crystal_pipeline(table, 0, 1.0);
  EXPECT_TRUE(std::isfinite(c.surface_energy));
  EXPECT_GT(c.surface_energy, 0.0);
  EXPECT_NEAR(c.volume, 1.0, 1e-6);
}

TEST(Json, Keys) {
  const auto c = crystal_from_norm(NormSpec::l1(2), axes_and_diagonals(2), 0.5);
  const auto s = crystal_json(c);
  for (const char* key : {"\"halfspaces\"", "\"normal\"", "\"offset\"", "\"vertices\"", "\"facets\"", "\"area\"",
                          "\"vertexIds\"", "\"theta\"", "\"volume\"", "\"surfaceEnergy\""})
    EXPECT_NE(s.find(key), std::string::npos) << key;
}
