#include <gtest/gtest.h>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <unistd.h>

#include <chrono>
#include <fstream>
#include <sstream>

#include "percolab/errors.hpp"
#include "percolab/experiment.hpp"
#include "percolab/io.hpp"

using namespace percolab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("percolab_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig small(ExperimentKind kind, const fs::path& out) {
  auto c = resolve_config({{"d", "2"}, {"p-grid", "0.6,0.8"}, {"n-grid", "2,4"}, {"replicas", "6"},
                           {"t-grid", "2,4"}, {"theta-radius", "6"}, {"cheeger.budget", "500"},
                           {"cheeger.prediction-n", "2"}, {"cheeger.prediction-replicas", "4"}},
                          kind);
  c.output = out;
  return c;
}

std::vector<std::string> schema_keys(const std::map<std::string, std::string>& values) {
  try {
    resolve_config(values, ExperimentKind::Beta);
  } catch (const SchemaError& e) {
    return e.keys();
  }
  return {};
}

}  // namespace

TEST(ConfigText, CommentsAndBlankLines) {
  const auto kv = parse_key_values("# header\n\nd = 3   # trailing\n p-grid=0.4, 0.5 \n");
  EXPECT_EQ(kv.at("d"), "3");
  EXPECT_EQ(kv.at("p-grid"), "0.4, 0.5");
}

TEST(ConfigText, MalformedAndDuplicateLines) {
  try {
    parse_key_values("d = 2\njunk\nd = 3\n");
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.keys(), (std::vector<std::string>{"line 2", "d"}));
  }
}

TEST(ConfigSchema, ListsEveryOffendingKey) {
  const auto keys = schema_keys({{"bogus", "1"}, {"replicas", "many"}, {"p-grid", "0.4"}, {"n-grid", "4,2"}});
  EXPECT_EQ(keys, (std::vector<std::string>{"bogus", "replicas", "p-grid", "n-grid"}));
}

TEST(ConfigSchema, ValidatedSupercriticalRange) {
  EXPECT_EQ(schema_keys({{"d", "2"}, {"p-grid", "0.4"}}), std::vector<std::string>{"p-grid"});
  EXPECT_TRUE(schema_keys({{"d", "2"}, {"p-grid", "0.55,0.99"}}).empty());
  EXPECT_TRUE(schema_keys({{"d", "3"}, {"p-grid", "0.3"}}).empty());
  EXPECT_EQ(schema_keys({{"d", "3"}, {"p-grid", "0.29"}}), std::vector<std::string>{"p-grid"});
  EXPECT_EQ(schema_keys({{"d", "2"}, {"p-grid", "1.0"}}), std::vector<std::string>{"p-grid"});
}

TEST(ConfigSchema, KindMustMatchCommand) {
  EXPECT_THROW(resolve_config({{"kind", "tau"}}, ExperimentKind::Beta), SchemaError);
  EXPECT_EQ(resolve_config({{"kind", "tau"}}).kind, ExperimentKind::Tau);
  EXPECT_THROW(resolve_config({}), SchemaError);
}

TEST(ConfigSchema, DirectionsNeedDimensionD) {
  EXPECT_EQ(schema_keys({{"directions", "1,0,0"}}), std::vector<std::string>{"directions"});
  const auto c = resolve_config({{"directions", "3,4;0,2"}}, ExperimentKind::Beta);
  const auto dirs = c.effective_directions();
  EXPECT_NEAR(dirs[0][0], 0.6, 1e-15);
  EXPECT_NEAR(dirs[1][1], 1.0, 1e-15);
}

TEST(ConfigSchema, RenderRoundTrips) {
  const auto c = resolve_config({{"d", "3"}, {"p-grid", "0.35,0.5"}, {"seed", "18446744073709551615"},
                                 {"directions", "1,0,0;0,0.6,0.8"}},
                                ExperimentKind::Wulff);
  const auto text = render(c);
  const auto again = resolve_config(parse_key_values(text));
  EXPECT_EQ(render(again), text);
  EXPECT_EQ(again.seed, 18446744073709551615ull);
}

TEST(Capability, OnlyTwoAndThreeDimensions) {
  auto c = resolve_config({{"d", "4"}, {"p-grid", "0.5"}}, ExperimentKind::Tau);
  EXPECT_THROW(check_capability(c), CapabilityError);
  c.d = 3;
  EXPECT_NO_THROW(check_capability(c));
}

TEST(Run, DeterministicAcrossRunsAndThreads) {
  const auto dir = scratch("det");
  for (auto kind : {ExperimentKind::Tau, ExperimentKind::Beta, ExperimentKind::Cheeger, ExperimentKind::Scan}) {
    const auto a = run_experiment(small(kind, dir / "a"));
#ifdef _OPENMP
    const int threads = omp_get_max_threads();
    omp_set_num_threads(3);
#endif
    const auto b = run_experiment(small(kind, dir / "b"));
#ifdef _OPENMP
    omp_set_num_threads(threads);
#endif
    ASSERT_EQ(a.files.size(), b.files.size());
    for (std::size_t i = 0; i < a.files.size(); ++i) EXPECT_EQ(slurp(a.files[i]), slurp(b.files[i])) << a.files[i];
    fs::remove_all(dir / "a");
    fs::remove_all(dir / "b");
  }
  fs::remove_all(dir);
}

TEST(Run, WritesResolvedConfig) {
  const auto dir = scratch("resolved");
  const auto c = small(ExperimentKind::Theta, dir / "out");
  run_experiment(c);
  EXPECT_EQ(slurp(dir / "out" / "resolved.cfg"), render(c));
  EXPECT_FALSE(fs::exists(dir / ".out.partial"));
  fs::remove_all(dir);
}

TEST(Run, BetaSmokeHasReplicaRows) {
  const auto dir = scratch("smoke");
  auto c = resolve_config({{"d", "2"}, {"p-grid", "0.7"}, {"n-grid", "8"}, {"replicas", "20"}}, ExperimentKind::Beta);
  c.output = dir / "out";
  const auto t0 = std::chrono::steady_clock::now();
  run_experiment(c);
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 60.0);
  const auto table = io::read_csv(dir / "out" / "beta_replicas.csv");
  EXPECT_EQ(table.rows.size(), 20u * c.effective_directions().size());
  fs::remove_all(dir);
}

TEST(Cache, HitReturnsIdenticalBytes) {
  const auto dir = scratch("cache");
  const ResultCache cache(dir / "cache");
  const auto c1 = small(ExperimentKind::Quantiles, dir / "first");
  const auto first = run_experiment(c1, &cache);
  EXPECT_FALSE(first.cache_hit);
  EXPECT_TRUE(cache.contains(ResultCache::key(c1)));
  auto c2 = c1;
  c2.output = dir / "second";
  const auto second = run_experiment(c2, &cache);
  EXPECT_TRUE(second.cache_hit);
  ASSERT_EQ(first.files.size(), second.files.size());
  for (std::size_t i = 0; i < first.files.size(); ++i) EXPECT_EQ(slurp(first.files[i]), slurp(second.files[i]));
  for (const auto& e : fs::directory_iterator(dir / "cache"))
    EXPECT_EQ(e.path().filename().string().rfind(".staging", 0), std::string::npos);
  auto c3 = c1;
  c3.seed += 1;
  EXPECT_NE(ResultCache::key(c3), ResultCache::key(c1));
  c3 = c1;
  c3.output = "elsewhere";
  EXPECT_EQ(ResultCache::key(c3), ResultCache::key(c1));
  fs::remove_all(dir);
}

TEST(Cache, FailedRunLeavesNothing) {
  const auto dir = scratch("fail");
  const ResultCache cache(dir / "cache");
  auto c = small(ExperimentKind::Cheeger, dir / "out");
  c.p_grid = {0.55};
  c.n_grid = {1};
  c.replicas = 1;
  c.cheeger_conditioning_radius = 40;
  c.seed = 3;
  // A replica can fail the proxy; search for a seed where it does.
  bool failed = false;
  for (std::uint64_t s = 0; s < 50 && !failed; ++s) {
    c.seed = s;
    try {
      run_experiment(c, &cache);
      fs::remove_all(dir / "out");
    } catch (const ExperimentError&) {
      failed = true;
      EXPECT_FALSE(cache.contains(ResultCache::key(c)));
      EXPECT_FALSE(fs::exists(dir / "out" / "profile.csv"));
    }
  }
  EXPECT_TRUE(failed);
  fs::remove_all(dir);
}

TEST(PlotData, DecaySeriesSortedByT) {
  const auto dir = scratch("decay");
  run_experiment(small(ExperimentKind::Scan, dir));
  const auto path = emit_plotdata(dir, PlotKind::Decay);
  const auto t = io::read_csv(path);
  EXPECT_EQ(t.header, (std::vector<std::string>{"p", "t", "frequency", "log_frequency"}));
  ASSERT_EQ(t.rows.size(), 4u);
  for (std::size_t i = 1; i < t.rows.size(); ++i)
    if (t.rows[i][0] == t.rows[i - 1][0]) EXPECT_LT(io::parse_int(t.rows[i - 1][1]), io::parse_int(t.rows[i][1]));
  fs::remove_all(dir);
}

TEST(PlotData, EmptyResultsGiveHeaderOnly) {
  const auto dir = scratch("empty");
  std::ofstream(dir / "scan.csv") << "d,p,t,replicas,successes,frequency,stderr,seed\n";
  std::ofstream(dir / "theta_slopes.csv") << "quantity,p_lo,p_hi,slope,ci_lo,ci_hi,n,replicas\n";
  std::ofstream(dir / "crystals.ndjson");
  EXPECT_EQ(slurp(emit_plotdata(dir, PlotKind::Decay)), "p,t,frequency,log_frequency\n");
  EXPECT_EQ(slurp(emit_plotdata(dir, PlotKind::Slopes)), "quantity,n,p_lo,p_hi,p_mid,slope,ci_lo,ci_hi\n");
  EXPECT_EQ(slurp(emit_plotdata(dir, PlotKind::Crystal)), "p,index,x,y\n");
  fs::remove_all(dir);
}

TEST(PlotData, MissingInputIsLookupError) {
  const auto dir = scratch("missing");
  EXPECT_THROW(emit_plotdata(dir, PlotKind::Decay), LookupError);
  EXPECT_THROW(emit_plotdata(dir, PlotKind::Slopes), LookupError);
  EXPECT_THROW(emit_plotdata(dir, PlotKind::Crystal), LookupError);
  fs::remove_all(dir);
}

TEST(PlotData, CrystalOutlineIsClosedCounterclockwise) {
  const auto dir = scratch("crystal");
  auto c = small(ExperimentKind::Wulff, dir);
  c.n_grid = {4};
  run_experiment(c);
  const auto t = io::read_csv(emit_plotdata(dir, PlotKind::Crystal));
  std::map<std::string, std::vector<std::pair<double, double>>> loops;
  for (const auto& r : t.rows) loops[r[0]].emplace_back(io::parse_real(r[2]), io::parse_real(r[3]));
  ASSERT_EQ(loops.size(), 2u);
  for (const auto& [p, pts] : loops) {
    ASSERT_GE(pts.size(), 4u);
    EXPECT_EQ(pts.front(), pts.back());
    double area2 = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
      area2 += pts[i].first * pts[i + 1].second - pts[i + 1].first * pts[i].second;
    EXPECT_GT(area2, 0.0);
  }
  fs::remove_all(dir);
}
