#include "percolab/experiment.hpp"

#include <openssl/evp.h>
#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "percolab/clusters.hpp"
#include "percolab/cutset.hpp"
#include "percolab/errors.hpp"
#include "percolab/io.hpp"
#include "percolab/parallel.hpp"
#include "percolab/regularity.hpp"
#include "percolab/rng.hpp"

namespace percolab {

namespace fs = std::filesystem;

SchemaError::SchemaError(const std::string& message, std::vector<std::string> keys)
    : ParameterError(message), keys_(std::move(keys)) {}

namespace {

constexpr const char* kKindNames[] = {"sample", "tau",  "beta",    "quantiles", "theta",
                                      "scan",   "wulff", "cheeger", "regularity"};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::uint64_t parse_u64(std::string_view text) {
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ParameterError("not an unsigned integer: '" + std::string(text) + "'");
  return value;
}

int parse_small_int(std::string_view text) {
  const auto v = io::parse_int(text);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    throw ParameterError("integer out of range: '" + std::string(text) + "'");
  return static_cast<int>(v);
}

std::vector<double> parse_real_list(std::string_view text) {
  std::vector<double> out;
  for (const auto& item : split(text, ',')) out.push_back(io::parse_real(item));
  return out;
}

std::vector<int> parse_int_list(std::string_view text) {
  std::vector<int> out;
  for (const auto& item : split(text, ',')) out.push_back(parse_small_int(item));
  return out;
}

std::vector<Direction> parse_directions(std::string_view text) {
  std::vector<Direction> out;
  if (trim(text).empty() || trim(text) == "default") return out;
  for (const auto& vec : split(text, ';')) out.push_back(parse_real_list(vec));
  return out;
}

template <class T>
std::string join(const std::vector<T>& xs, const char* sep = ",") {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += sep;
    if constexpr (std::is_floating_point_v<T>) {
      out += io::fmt_real(xs[i]);
    } else {
      out += std::to_string(xs[i]);
    }
  }
  return out;
}

struct KeySpec {
  SchemaKey doc;
  std::function<void(ExperimentConfig&, std::string_view)> apply;
  std::function<std::string(const ExperimentConfig&)> show;
};

const std::vector<KeySpec>& key_specs() {
  using C = ExperimentConfig;
  static const std::vector<KeySpec> specs = {
      {{"kind", "enum", "sample|tau|beta|quantiles|theta|scan|wulff|cheeger|regularity"},
       [](C& c, std::string_view v) {
         const auto k = parse_kind(v);
         if (!k) throw ParameterError("unknown experiment kind");
         c.kind = *k;
       },
       [](const C& c) { return to_string(c.kind); }},
      {{"d", "int", "lattice dimension"}, [](C& c, std::string_view v) { c.d = parse_small_int(v); },
       [](const C& c) { return std::to_string(c.d); }},
      {{"p-grid", "real-list", "percolation parameters, strictly increasing"},
       [](C& c, std::string_view v) { c.p_grid = parse_real_list(v); }, [](const C& c) { return join(c.p_grid); }},
      {{"n-grid", "int-list", "cylinder or profile scales, strictly increasing"},
       [](C& c, std::string_view v) { c.n_grid = parse_int_list(v); }, [](const C& c) { return join(c.n_grid); }},
      {{"t-grid", "int-list", "renormalization box scales, strictly increasing"},
       [](C& c, std::string_view v) { c.t_grid = parse_int_list(v); }, [](const C& c) { return join(c.t_grid); }},
      {{"directions", "direction-list", "';'-separated vectors of d comma-separated reals, or 'default'"},
       [](C& c, std::string_view v) { c.directions = parse_directions(v); },
       [](const C& c) {
         if (c.directions.empty()) return std::string("default");
         std::vector<std::string> parts;
         for (const auto& dir : c.directions) parts.push_back(join(dir));
         std::string out;
         for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? ";" : "") + parts[i];
         return out;
       }},
      {{"replicas", "int", "Monte-Carlo replicas per cell"},
       [](C& c, std::string_view v) { c.replicas = parse_small_int(v); },
       [](const C& c) { return std::to_string(c.replicas); }},
      {{"seed", "uint64", "master seed"}, [](C& c, std::string_view v) { c.seed = parse_u64(v); },
       [](const C& c) { return std::to_string(c.seed); }},
      {{"theta-radius", "int", "box radius m of the theta proxy; 0 selects 64 (d=2) or 16 (d=3)"},
       [](C& c, std::string_view v) { c.theta_radius = parse_small_int(v); },
       [](const C& c) { return std::to_string(c.theta_radius); }},
      {{"coupling", "enum", "monotone|two-stage, for coupled beta slopes"},
       [](C& c, std::string_view v) {
         if (v != "monotone" && v != "two-stage") throw ParameterError("unknown coupling");
         c.coupling = std::string(v);
       },
       [](const C& c) { return c.coupling; }},
      {{"cheeger.mode", "enum", "exact|heuristic"},
       [](C& c, std::string_view v) {
         if (v == "exact") {
           c.cheeger_mode = CheegerMode::Exact;
         } else if (v == "heuristic") {
           c.cheeger_mode = CheegerMode::Heuristic;
         } else {
           throw ParameterError("unknown cheeger mode");
         }
       },
       [](const C& c) { return to_string(c.cheeger_mode); }},
      {{"cheeger.exact-cap", "int", "size cap of exact enumeration"},
       [](C& c, std::string_view v) { c.cheeger_exact_cap = parse_u64(v); },
       [](const C& c) { return std::to_string(c.cheeger_exact_cap); }},
      {{"cheeger.budget", "int", "annealing moves per (replica, n)"},
       [](C& c, std::string_view v) { c.cheeger_budget = parse_u64(v); },
       [](const C& c) { return std::to_string(c.cheeger_budget); }},
      {{"cheeger.t-start", "real", "initial annealing temperature"},
       [](C& c, std::string_view v) { c.cheeger_t_start = io::parse_real(v); },
       [](const C& c) { return io::fmt_real(c.cheeger_t_start); }},
      {{"cheeger.t-end", "real", "final annealing temperature"},
       [](C& c, std::string_view v) { c.cheeger_t_end = io::parse_real(v); },
       [](const C& c) { return io::fmt_real(c.cheeger_t_end); }},
      {{"cheeger.conditioning-radius", "int", "proxy radius m; 0 selects the largest n"},
       [](C& c, std::string_view v) { c.cheeger_conditioning_radius = parse_small_int(v); },
       [](const C& c) { return std::to_string(c.cheeger_conditioning_radius); }},
      {{"cheeger.prediction-n", "int", "norm-table scale for the Wulff prediction; 0 disables it"},
       [](C& c, std::string_view v) { c.prediction_n = parse_small_int(v); },
       [](const C& c) { return std::to_string(c.prediction_n); }},
      {{"cheeger.prediction-replicas", "int", "replicas for the prediction's table and theta"},
       [](C& c, std::string_view v) { c.prediction_replicas = parse_small_int(v); },
       [](const C& c) { return std::to_string(c.prediction_replicas); }},
      {{"tol.geometry", "real", "geometric tolerance"},
       [](C& c, std::string_view v) { c.tolerances.geometry = io::parse_real(v); },
       [](const C& c) { return io::fmt_real(c.tolerances.geometry); }},
      {{"tol.volume", "real", "relative volume tolerance"},
       [](C& c, std::string_view v) { c.tolerances.volume = io::parse_real(v); },
       [](const C& c) { return io::fmt_real(c.tolerances.volume); }},
      {{"tol.reporting", "real", "reporting tolerance"},
       [](C& c, std::string_view v) { c.tolerances.reporting = io::parse_real(v); },
       [](const C& c) { return io::fmt_real(c.tolerances.reporting); }},
      {{"output", "path", "output directory"}, [](C& c, std::string_view v) { c.output = fs::path(std::string(v)); },
       [](const C& c) { return c.output.string(); }},
  };
  return specs;
}

bool strictly_increasing(const auto& xs) {
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (!(xs[i] > xs[i - 1])) return false;
  return true;
}

// Range checks; returns "key: reason" entries.
std::vector<std::pair<std::string, std::string>> range_problems(const ExperimentConfig& c) {
  std::vector<std::pair<std::string, std::string>> bad;
  if (c.d < 2) bad.emplace_back("d", "must be >= 2");
  if (c.p_grid.empty() || !strictly_increasing(c.p_grid)) bad.emplace_back("p-grid", "must be nonempty and strictly increasing");
  if (c.d == 2 || c.d == 3) {
    const auto [lo, hi] = validated_p_range(c.d);
    for (double p : c.p_grid)
      if (!(p >= lo && p <= hi)) {
        bad.emplace_back("p-grid", "value " + io::fmt_real(p) + " outside the validated range [" + io::fmt_real(lo) +
                                       ", " + io::fmt_real(hi) + "] for d=" + std::to_string(c.d));
        break;
      }
  }
  if (c.n_grid.empty() || !strictly_increasing(c.n_grid) || c.n_grid.front() < 1)
    bad.emplace_back("n-grid", "must be positive and strictly increasing");
  if (c.t_grid.empty() || !strictly_increasing(c.t_grid) || c.t_grid.front() < 1)
    bad.emplace_back("t-grid", "must be positive and strictly increasing");
  for (const auto& v : c.directions) {
    double norm = 0.0;
    for (double x : v) norm += x * x;
    if (static_cast<int>(v.size()) != c.d || !(norm > 0.0) || !std::isfinite(norm)) {
      bad.emplace_back("directions", "every vector needs d finite components, not all zero");
      break;
    }
  }
  if (c.replicas < 1) bad.emplace_back("replicas", "must be >= 1");
  if (c.theta_radius < 0) bad.emplace_back("theta-radius", "must be >= 0");
  if (c.cheeger_exact_cap < 1) bad.emplace_back("cheeger.exact-cap", "must be >= 1");
  if (!(c.cheeger_t_start > 0.0)) bad.emplace_back("cheeger.t-start", "must be positive");
  if (!(c.cheeger_t_end > 0.0 && c.cheeger_t_end <= c.cheeger_t_start))
    bad.emplace_back("cheeger.t-end", "must be positive and at most cheeger.t-start");
  if (c.cheeger_conditioning_radius < 0) bad.emplace_back("cheeger.conditioning-radius", "must be >= 0");
  if (c.prediction_n < 0) bad.emplace_back("cheeger.prediction-n", "must be >= 0");
  if (c.prediction_replicas < 1) bad.emplace_back("cheeger.prediction-replicas", "must be >= 1");
  if (!(c.tolerances.geometry > 0.0)) bad.emplace_back("tol.geometry", "must be positive");
  if (!(c.tolerances.volume > 0.0)) bad.emplace_back("tol.volume", "must be positive");
  if (!(c.tolerances.reporting > 0.0)) bad.emplace_back("tol.reporting", "must be positive");
  return bad;
}

void log(std::string_view message) { std::clog << "[percolab] " << message << std::endl; }

class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  void write(const std::string& name, const std::function<void(std::ostream&)>& body) {
    const auto path = dir_ / name;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ExperimentError("cannot write " + path.string());
    body(os);
    if (!os) throw ExperimentError("write failed for " + path.string());
    files_.push_back(path);
    log("wrote " + path.string());
  }
  std::vector<fs::path> files() const { return files_; }

 private:
  fs::path dir_;
  std::vector<fs::path> files_;
};

void write_tau_header(std::ostream& os, int d) {
  os << "n";
  for (const auto& c : direction_columns(d)) os << ',' << c;
  os << ",p,replica,tau,N\n";
}

void run_sample(const ExperimentConfig& c, OutputSet& out) {
  out.write("samples.ndjson", [&](std::ostream& os) {
    for (std::size_t k = 0; k < c.n_grid.size(); ++k) {
      const auto region = Region::cube(c.d, c.n_grid[k]);
      for (int r = 0; r < c.replicas; ++r) {
        const auto field = sample_uniform_field(region, derive_seed(c.seed, "sample", {k, static_cast<std::uint64_t>(r)}));
        for (double p : c.p_grid) os << to_ndjson(open_at(field, p)) << '\n';
      }
    }
  });
}

void run_tau(const ExperimentConfig& c, OutputSet& out) {
  const auto dirs = c.effective_directions();
  std::ostringstream csv, cuts;
  write_tau_header(csv, c.d);
  for (std::size_t k = 0; k < c.n_grid.size(); ++k) {
    for (const auto& v : dirs) {
      const auto inst = build_cylinder(c.n_grid[k], v);
      const auto np = c.p_grid.size();
      std::vector<CutResult> cutsets(static_cast<std::size_t>(c.replicas) * np);
      std::vector<std::uint64_t> seeds(static_cast<std::size_t>(c.replicas));
      parallel_for(static_cast<std::size_t>(c.replicas), [&](std::size_t r) {
        seeds[r] = derive_seed(c.seed, "tau", {k, r});
        const auto field = sample_uniform_field(inst.region, seeds[r]);
        for (std::size_t pi = 0; pi < np; ++pi)
          cutsets[r * np + pi] = min_cardinality_min_cut(inst, open_at(field, c.p_grid[pi]));
      });
      for (std::size_t pi = 0; pi < np; ++pi)
        for (std::size_t r = 0; r < seeds.size(); ++r) {
          const auto& cut = cutsets[r * np + pi];
          csv << c.n_grid[k];
          for (double x : v) csv << ',' << io::fmt_real(x);
          csv << ',' << io::fmt_real(c.p_grid[pi]) << ',' << r << ',' << cut.tau << ',' << cut.cardinality << '\n';
          cuts << cut_to_ndjson(inst, cut, c.p_grid[pi], seeds[r]) << '\n';
        }
    }
  }
  out.write("tau.csv", [&](std::ostream& os) { os << csv.str(); });
  out.write("cuts.ndjson", [&](std::ostream& os) { os << cuts.str(); });
}

void run_beta(const ExperimentConfig& c, OutputSet& out) {
  const auto dirs = c.effective_directions();
  std::vector<BetaEstimate> rows;
  std::vector<CoupledPair> pairs;
  const Coupling coupling = c.coupling == "two-stage" ? Coupling::TwoStage : Coupling::Monotone;
  for (std::size_t k = 0; k < c.n_grid.size(); ++k) {
    for (double p : c.p_grid) {
      log("beta n=" + std::to_string(c.n_grid[k]) + " p=" + io::fmt_real(p));
      auto sweep = direction_sweep(p, dirs, c.n_grid[k], c.replicas, derive_seed(c.seed, "beta", {k}));
      rows.insert(rows.end(), sweep.begin(), sweep.end());
    }
    for (std::size_t i = 0; i + 1 < c.p_grid.size(); ++i)
      for (const auto& v : dirs)
        pairs.push_back(coupled_beta_pair(c.p_grid[i], c.p_grid[i + 1], v, c.n_grid[k], c.replicas,
                                          derive_seed(c.seed, "beta-slopes", {k, i}), coupling));
  }
  out.write("beta.csv", [&](std::ostream& os) { write_beta_csv(os, c.d, rows); });
  out.write("beta_replicas.csv", [&](std::ostream& os) {
    os << "d,p";
    for (const auto& col : direction_columns(c.d)) os << ',' << col;
    os << ",n,replica,tau\n";
    for (const auto& b : rows)
      for (std::size_t r = 0; r < b.taus.size(); ++r) {
        os << c.d << ',' << io::fmt_real(b.p);
        for (double x : b.v) os << ',' << io::fmt_real(x);
        os << ',' << b.n << ',' << r << ',' << b.taus[r] << '\n';
      }
  });
  if (!pairs.empty()) out.write("slopes.csv", [&](std::ostream& os) { write_slopes_csv(os, c.d, pairs); });
}

void run_quantiles(const ExperimentConfig& c, OutputSet& out) {
  const auto rows = cutsize_quantiles(c.d, c.p_grid, c.n_grid, c.replicas, c.seed);
  out.write("quantiles.csv", [&](std::ostream& os) { write_quantiles_csv(os, rows); });
}

std::vector<ProportionRow> theta_rows(const ExperimentConfig& c, int replicas, std::uint64_t seed) {
  std::vector<ProportionRow> rows;
  for (double p : c.p_grid) {
    log("theta p=" + io::fmt_real(p));
    rows.push_back(estimate_theta(c.d, p, c.effective_theta_radius(), replicas, seed));
  }
  return rows;
}

void run_theta(const ExperimentConfig& c, OutputSet& out) {
  const auto rows = theta_rows(c, c.replicas, c.seed);
  out.write("theta.csv", [&](std::ostream& os) { write_proportion_csv(os, rows, "m"); });
}

void run_scan(const ExperimentConfig& c, OutputSet& out) {
  const auto scan = scan_decay(c.d, c.p_grid, c.t_grid, c.replicas, c.seed);
  out.write("scan.csv", [&](std::ostream& os) { write_proportion_csv(os, scan.rows, "t"); });
  out.write("decay_fits.csv", [&](std::ostream& os) {
    os << "p,slope,slope_stderr,points\n";
    for (const auto& f : scan.fits)
      os << io::fmt_real(f.p) << ',' << io::fmt_real(f.slope) << ',' << io::fmt_real(f.slope_stderr) << ','
         << f.points << '\n';
  });
}

void write_table(OutputSet& out, const NormTable& table) {
  out.write("norm_table.csv", [&](std::ostream& os) { table.write_csv(os); });
  out.write("norm_table.json", [&](std::ostream& os) { table.write_metadata(os); });
}

void run_wulff(const ExperimentConfig& c, OutputSet& out) {
  log("norm table");
  const auto table = build_norm_table(c.d, c.p_grid, c.effective_directions(), c.n_grid, c.replicas, c.seed);
  const auto thetas = theta_rows(c, c.replicas, derive_seed(c.seed, "wulff-theta", {}));
  write_table(out, table);
  out.write("theta.csv", [&](std::ostream& os) { write_proportion_csv(os, thetas, "m"); });
  out.write("crystals.ndjson", [&](std::ostream& os) {
    for (std::size_t pi = 0; pi < c.p_grid.size(); ++pi) {
      const auto crystal = crystal_pipeline(table, pi, thetas[pi].frequency());
      auto j = nlohmann::ordered_json::parse(crystal_json(crystal));
      j["d"] = c.d;
      j["p"] = c.p_grid[pi];
      os << j.dump() << '\n';
    }
  });
}

void run_cheeger(const ExperimentConfig& c, OutputSet& out) {
  std::ostringstream rows_csv, summary_csv, witnesses;
  for (std::size_t i = 0; i < c.p_grid.size(); ++i) {
    const double p = c.p_grid[i];
    ProfileOptions opt;
    opt.mode = c.cheeger_mode;
    opt.exact_cap = c.cheeger_exact_cap;
    opt.budget = c.cheeger_budget;
    opt.schedule = AnnealingSchedule{c.cheeger_t_start, c.cheeger_t_end, true};
    opt.conditioning_radius = c.cheeger_conditioning_radius;
    if (c.prediction_n > 0) {
      log("cheeger prediction p=" + io::fmt_real(p));
      const auto pseed = derive_seed(c.seed, "cheeger-prediction", {i});
      const auto table =
          build_norm_table(c.d, {p}, c.effective_directions(), {c.prediction_n}, c.prediction_replicas, pseed);
      const auto theta = estimate_theta(c.d, p, c.effective_theta_radius(), c.prediction_replicas, pseed);
      opt.prediction = crystal_pipeline(table, 0, theta.frequency()).surface_energy;
    }
    log("cheeger profile p=" + io::fmt_real(p));
    const auto exp = profile_experiment(c.d, p, c.n_grid, c.replicas, derive_seed(c.seed, "cheeger-run", {i}), opt);
    std::ostringstream a, b;
    write_profile_csv(a, exp.rows);
    write_profile_summary_csv(b, c.d, p, exp.summary);
    auto body = [&](const std::string& s) { return i == 0 ? s : s.substr(s.find('\n') + 1); };
    rows_csv << body(a.str());
    summary_csv << body(b.str());
    write_witness_ndjson(witnesses, *exp.region, exp.rows);
  }
  out.write("profile.csv", [&](std::ostream& os) { os << rows_csv.str(); });
  out.write("profile_summary.csv", [&](std::ostream& os) { os << summary_csv.str(); });
  out.write("witnesses.ndjson", [&](std::ostream& os) { os << witnesses.str(); });
}

void write_report(OutputSet& out, const std::string& stem, const SlopeReport& rep) {
  out.write(stem + ".csv", [&](std::ostream& os) { write_slope_csv(os, rep); });
  out.write(stem + ".json", [&](std::ostream& os) { write_slope_metadata(os, rep); });
}

void run_regularity(const ExperimentConfig& c, OutputSet& out) {
  const auto axis = axis_direction(c.d, 0);
  for (std::size_t k = 0; k < c.n_grid.size(); ++k) {
    log("beta slopes n=" + std::to_string(c.n_grid[k]));
    const auto rep =
        beta_lipschitz_report(c.p_grid, axis, c.n_grid[k], c.replicas, derive_seed(c.seed, "regularity-beta", {k}));
    write_report(out, "beta_slopes_n" + std::to_string(c.n_grid[k]), rep);
  }
  log("theta slopes");
  const auto theta =
      theta_slope_report(c.d, c.p_grid, c.effective_theta_radius(), c.replicas, derive_seed(c.seed, "regularity-theta", {}));
  write_report(out, "theta_slopes", theta);
  log("wulff slopes");
  const auto wulff = wulff_lipschitz_report(c.d, c.p_grid, c.effective_directions(), c.n_grid.back(), c.replicas,
                                            derive_seed(c.seed, "regularity-wulff", {}));
  write_table(out, wulff.table);
  write_report(out, "hausdorff_slopes", wulff.report);
  out.write("chain_bound.csv", [&](std::ostream& os) { write_chain_csv(os, c.p_grid, wulff.chain); });
  const auto limit = cheeger_limit_report(wulff.table, theta.values);
  write_report(out, "cheeger_limit_slopes", limit.report);
  out.write("cheeger_limit.csv", [&](std::ostream& os) { write_cheeger_limit_csv(os, limit.points); });
}

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw ExperimentError("SHA-256 digest failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

}  // namespace

std::string to_string(ExperimentKind kind) { return kKindNames[static_cast<int>(kind)]; }

std::optional<ExperimentKind> parse_kind(std::string_view name) {
  for (int i = 0; i < 9; ++i)
    if (name == kKindNames[i]) return static_cast<ExperimentKind>(i);
  return std::nullopt;
}

std::pair<double, double> validated_p_range(int d) {
  if (d == 2) return {0.55, 0.99};
  if (d == 3) return {0.30, 0.99};
  throw ParameterError("no validated p range for d=" + std::to_string(d));
}

int ExperimentConfig::effective_theta_radius() const {
  if (theta_radius > 0) return theta_radius;
  return d == 2 ? 64 : 16;
}

std::vector<Direction> ExperimentConfig::effective_directions() const {
  if (directions.empty()) return default_directions(d);
  std::vector<Direction> out;
  for (auto v : directions) {
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
    out.push_back(std::move(v));
  }
  return out;
}

const std::vector<SchemaKey>& config_schema() {
  static const std::vector<SchemaKey> docs = [] {
    std::vector<SchemaKey> out;
    for (const auto& s : key_specs()) out.push_back(s.doc);
    return out;
  }();
  return docs;
}

std::map<std::string, std::string> parse_key_values(std::string_view text) {
  std::map<std::string, std::string> out;
  std::vector<std::string> bad;
  std::istringstream is{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      bad.push_back("line " + std::to_string(lineno));
      continue;
    }
    const auto key = trim(std::string_view(body).substr(0, eq));
    if (out.count(key)) bad.push_back(key);
    out[key] = trim(std::string_view(body).substr(eq + 1));
  }
  if (!bad.empty()) {
    std::string msg = "malformed or duplicate entries:";
    for (const auto& b : bad) msg += " " + b;
    throw SchemaError(msg, bad);
  }
  return out;
}

ExperimentConfig resolve_config(const std::map<std::string, std::string>& values, std::optional<ExperimentKind> kind) {
  ExperimentConfig c;
  std::vector<std::string> keys;
  std::string msg;
  auto fail = [&](const std::string& key, const std::string& why) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
    msg += "\n  " + key + ": " + why;
  };
  // d first: it drives the defaults of other keys.
  std::vector<std::string> order;
  if (values.count("d")) order.push_back("d");
  for (const auto& [k, v] : values)
    if (k != "d") order.push_back(k);
  for (const auto& k : order) {
    const auto& specs = key_specs();
    const auto it = std::find_if(specs.begin(), specs.end(), [&](const KeySpec& s) { return s.doc.key == k; });
    if (it == specs.end()) {
      fail(k, "unknown key");
      continue;
    }
    try {
      it->apply(c, values.at(k));
    } catch (const ParameterError& e) {
      fail(k, std::string("expected ") + it->doc.type + ": " + e.what());
    }
  }
  if (kind) {
    if (values.count("kind") && c.kind != *kind)
      fail("kind", "config says '" + to_string(c.kind) + "' but the command is '" + to_string(*kind) + "'");
    c.kind = *kind;
  } else if (!values.count("kind")) {
    fail("kind", "missing");
  }
  const auto parse_failures = keys;
  for (const auto& [k, why] : range_problems(c))
    if (std::find(parse_failures.begin(), parse_failures.end(), k) == parse_failures.end()) fail(k, why);
  if (!keys.empty()) throw SchemaError("invalid configuration:" + msg, keys);
  return c;
}

void check_capability(const ExperimentConfig& config) {
  if (config.d != 2 && config.d != 3)
    throw CapabilityError("experiment '" + to_string(config.kind) + "' is not supported for d=" +
                          std::to_string(config.d) + " (supported: 2, 3)");
}

std::string render(const ExperimentConfig& config) {
  std::string out;
  for (const auto& s : key_specs()) {
    if (s.doc.key == "output") continue;
    out += s.doc.key + " = " + s.show(config) + "\n";
  }
  return out;
}

ResultCache::ResultCache(fs::path root) : root_(std::move(root)) { fs::create_directories(root_); }

std::optional<ResultCache> ResultCache::from_environment() {
  const char* dir = std::getenv("PERCOLAB_CACHE_DIR");
  if (!dir || !*dir) return std::nullopt;
  return ResultCache(dir);
}

std::string ResultCache::key(const ExperimentConfig& config) {
  return sha256_hex(render(config) + "version = " + std::string(kVersionTag) + "\n");
}

bool ResultCache::contains(const std::string& key) const { return fs::is_directory(root_ / key); }

bool ResultCache::restore(const std::string& key, const fs::path& dest) const {
  const auto entry = root_ / key;
  if (!fs::is_directory(entry)) return false;
  fs::create_directories(dest);
  for (const auto& f : fs::directory_iterator(entry))
    if (f.is_regular_file())
      fs::copy_file(f.path(), dest / f.path().filename(), fs::copy_options::overwrite_existing);
  return true;
}

void ResultCache::publish(const std::string& key, const std::vector<fs::path>& files) const {
  const auto final_dir = root_ / key;
  if (fs::exists(final_dir)) return;
  const auto staging = root_ / (".staging-" + key + "-" + std::to_string(::getpid()));
  fs::remove_all(staging);
  fs::create_directories(staging);
  for (const auto& f : files) fs::copy_file(f, staging / f.filename());
  std::error_code ec;
  fs::rename(staging, final_dir, ec);
  if (ec) fs::remove_all(staging);
}

RunOutcome run_experiment(const ExperimentConfig& config, const ResultCache* cache) {
  check_capability(config);
  RunOutcome outcome;
  const auto key = ResultCache::key(config);
  if (cache && cache->restore(key, config.output)) {
    log("cache hit " + key);
    outcome.cache_hit = true;
    for (const auto& f : fs::directory_iterator(cache->root() / key))
      outcome.files.push_back(config.output / f.path().filename());
    std::sort(outcome.files.begin(), outcome.files.end());
    return outcome;
  }
  // Compute into a private directory so a failed run leaves nothing half-written.
  const auto work = config.output.parent_path() / ("." + config.output.filename().string() + ".partial");
  fs::remove_all(work);
  OutputSet out(work);
  log("running " + to_string(config.kind) + " (d=" + std::to_string(config.d) + ")");
  try {
    switch (config.kind) {
      case ExperimentKind::Sample: run_sample(config, out); break;
      case ExperimentKind::Tau: run_tau(config, out); break;
      case ExperimentKind::Beta: run_beta(config, out); break;
      case ExperimentKind::Quantiles: run_quantiles(config, out); break;
      case ExperimentKind::Theta: run_theta(config, out); break;
      case ExperimentKind::Scan: run_scan(config, out); break;
      case ExperimentKind::Wulff: run_wulff(config, out); break;
      case ExperimentKind::Cheeger: run_cheeger(config, out); break;
      case ExperimentKind::Regularity: run_regularity(config, out); break;
    }
    out.write("resolved.cfg", [&](std::ostream& os) { os << render(config); });
  } catch (...) {
    fs::remove_all(work);
    throw;
  }
  fs::create_directories(config.output);
  for (const auto& f : out.files()) {
    const auto dest = config.output / f.filename();
    fs::rename(f, dest);
    outcome.files.push_back(dest);
  }
  fs::remove_all(work);
  std::sort(outcome.files.begin(), outcome.files.end());
  if (cache) cache->publish(key, outcome.files);
  return outcome;
}

}  // namespace percolab
