#include "percolab/flow_constant.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "percolab/errors.hpp"
#include "percolab/io.hpp"
#include "percolab/parallel.hpp"
#include "percolab/rng.hpp"
#include "percolab/stats.hpp"

namespace percolab {

namespace {

void require_replicas(int replicas, const char* who) {
  if (replicas < 1) throw ParameterError(std::string(who) + ": replicas must be >= 1");
}

std::vector<double> normalized(std::span<const std::int64_t> taus, double area) {
  std::vector<double> xs;
  xs.reserve(taus.size());
  for (auto t : taus) xs.push_back(static_cast<double>(t) / area);
  return xs;
}

bool same_direction(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i] - b[i]) > 1e-12) return false;
  return true;
}

void write_direction(std::ostream& os, std::span<const double> v) {
  for (double x : v) os << ',' << io::fmt_real(x);
}

}  // namespace

double cross_section_area(int d, int n) { return std::pow(2.0 * n, d - 1); }

BetaEstimate estimate_beta(const CylinderInstance& instance, double p, int replicas, std::uint64_t seed) {
  require_replicas(replicas, "estimate_beta");
  BetaEstimate est;
  est.p = p;
  est.v = instance.direction;
  est.n = instance.n;
  est.replicas = replicas;
  est.seed = seed;
  est.taus.assign(static_cast<std::size_t>(replicas), 0);
  if (!(p > 0.0 && p <= 1.0)) throw ParameterError("estimate_beta: p must lie in (0,1]");
  parallel_for(est.taus.size(), [&](std::size_t r) {
    const auto field = sample_uniform_field(instance.region, derive_seed(seed, "beta", {r}));
    est.taus[r] = min_open_cut(instance, open_at(field, p)).tau;
  });
  const auto xs = normalized(est.taus, cross_section_area(instance.dim(), instance.n));
  est.mean = stats::mean(xs);
  est.stderr_ = stats::standard_error(xs);
  return est;
}

BetaEstimate estimate_beta(double p, std::span<const double> v, int n, int replicas, std::uint64_t seed) {
  return estimate_beta(build_cylinder(n, v), p, replicas, seed);
}

CoupledPair coupled_beta_pair(double p, double q, std::span<const double> v, int n, int replicas, std::uint64_t seed,
                              Coupling coupling) {
  require_replicas(replicas, "coupled_beta_pair");
  if (q < p) throw ParameterError("coupled_beta_pair: q must be >= p");
  if (coupling == Coupling::TwoStage) (void)two_stage_aux_parameter(p, q);
  const auto instance = build_cylinder(n, v);
  CoupledPair pair;
  pair.p = p;
  pair.q = q;
  pair.v.assign(v.begin(), v.end());
  pair.n = n;
  pair.replicas = replicas;
  pair.seed = seed;
  pair.coupling = coupling;
  pair.tau_p.assign(static_cast<std::size_t>(replicas), 0);
  pair.tau_q.assign(static_cast<std::size_t>(replicas), 0);
  parallel_for(pair.tau_p.size(), [&](std::size_t r) {
    const auto s = derive_seed(seed, "coupled-beta", {r});
    if (coupling == Coupling::Monotone) {
      const auto field = sample_uniform_field(instance.region, s);
      pair.tau_p[r] = min_open_cut(instance, open_at(field, p)).tau;
      pair.tau_q[r] = min_open_cut(instance, open_at(field, q)).tau;
    } else {
      const auto sample = sample_two_stage(instance.region, p, q, s);
      pair.tau_p[r] = min_open_cut(instance, sample.at_p).tau;
      pair.tau_q[r] = min_open_cut(instance, sample.at_q).tau;
    }
  });
  if (q > p) {
    const double scale = cross_section_area(instance.dim(), n) * (q - p);
    std::vector<double> diffs(pair.tau_p.size());
    for (std::size_t r = 0; r < diffs.size(); ++r)
      diffs[r] = static_cast<double>(pair.tau_q[r] - pair.tau_p[r]) / scale;
    pair.slope = stats::mean(diffs);
    pair.slope_stderr = stats::standard_error(diffs);
    pair.ci_lo = *pair.slope - stats::kZ95 * pair.slope_stderr;
    pair.ci_hi = *pair.slope + stats::kZ95 * pair.slope_stderr;
  }
  return pair;
}

std::vector<QuantileRow> cutsize_quantiles(int d, std::span<const double> p_grid, std::span<const int> n_grid,
                                           int replicas, std::uint64_t seed) {
  require_replicas(replicas, "cutsize_quantiles");
  if (p_grid.empty() || n_grid.empty()) throw ParameterError("cutsize_quantiles: grids must be nonempty");
  for (double p : p_grid)
    if (!(p > 0.0 && p <= 1.0)) throw ParameterError("cutsize_quantiles: p must lie in (0,1]");
  const auto axis = axis_direction(d, d - 1);
  std::vector<QuantileRow> rows(p_grid.size() * n_grid.size());
  for (std::size_t k = 0; k < n_grid.size(); ++k) {
    const int n = n_grid[k];
    const auto instance = build_cylinder(n, axis);
    const double norm = std::pow(static_cast<double>(n), d - 1);
    for (std::size_t i = 0; i < p_grid.size(); ++i) {
      auto& row = rows[i * n_grid.size() + k];
      row.d = d;
      row.p = p_grid[i];
      row.n = n;
      row.replicas = replicas;
      row.cardinalities.assign(static_cast<std::size_t>(replicas), 0);
      row.taus.assign(static_cast<std::size_t>(replicas), 0);
    }
    parallel_for(static_cast<std::size_t>(replicas), [&](std::size_t r) {
      const auto field = sample_uniform_field(instance.region, derive_seed(seed, "quantiles", {k, r}));
      for (std::size_t i = 0; i < p_grid.size(); ++i) {
        const auto cut = min_cardinality_min_cut(instance, open_at(field, p_grid[i]));
        auto& row = rows[i * n_grid.size() + k];
        row.cardinalities[r] = static_cast<std::int64_t>(cut.cardinality);
        row.taus[r] = cut.tau;
      }
    });
    for (std::size_t i = 0; i < p_grid.size(); ++i) {
      auto& row = rows[i * n_grid.size() + k];
      std::vector<double> xs;
      for (auto c : row.cardinalities) xs.push_back(static_cast<double>(c) / norm);
      row.q50 = stats::quantile(xs, 0.5);
      row.q99 = stats::quantile(xs, 0.99);
    }
  }
  return rows;
}

std::vector<BetaEstimate> direction_sweep(double p, std::span<const Direction> directions, int n, int replicas,
                                          std::uint64_t seed) {
  std::vector<BetaEstimate> out;
  out.reserve(directions.size());
  for (const auto& v : directions) out.push_back(estimate_beta(p, v, n, replicas, seed));
  return out;
}

Direction axis_direction(int d, int axis) {
  if (d < 2 || d > kMaxDim) throw ParameterError("dimension out of range");
  if (axis < 0 || axis >= d) throw ParameterError("axis out of range");
  Direction v(static_cast<std::size_t>(d), 0.0);
  v[static_cast<std::size_t>(axis)] = 1.0;
  return v;
}

std::vector<Direction> default_directions(int d) {
  std::vector<Direction> out;
  for (int i = 0; i < d; ++i) out.push_back(axis_direction(d, i));
  const double h = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j)
      for (double s : {1.0, -1.0}) {
        Direction v(static_cast<std::size_t>(d), 0.0);
        v[static_cast<std::size_t>(i)] = h;
        v[static_cast<std::size_t>(j)] = s * h;
        out.push_back(std::move(v));
      }
  return out;
}

std::vector<std::string> direction_columns(int d) {
  std::vector<std::string> names;
  for (int i = 0; i < d; ++i) names.push_back(i < 3 ? std::string("v") + "xyz"[i] : "v" + std::to_string(i + 1));
  return names;
}

// ---- NormTable --------------------------------------------------------------

NormTable::NormTable(int d, std::vector<double> p_grid, std::vector<Direction> directions,
                     std::vector<int> n_schedule, int replicas, std::uint64_t seed)
    : d_(d),
      p_grid_(std::move(p_grid)),
      directions_(std::move(directions)),
      n_schedule_(std::move(n_schedule)),
      replicas_(replicas),
      seed_(seed) {
  if (d_ < 2 || d_ > kMaxDim) throw ParameterError("NormTable: dimension out of range");
  if (p_grid_.empty() || directions_.empty() || n_schedule_.empty())
    throw ParameterError("NormTable: grids must be nonempty");
  if (!std::is_sorted(p_grid_.begin(), p_grid_.end()) ||
      std::adjacent_find(p_grid_.begin(), p_grid_.end()) != p_grid_.end())
    throw ParameterError("NormTable: p grid must be strictly increasing");
  if (!std::is_sorted(n_schedule_.begin(), n_schedule_.end()))
    throw ParameterError("NormTable: n schedule must be increasing");
  for (const auto& v : directions_) {
    if (static_cast<int>(v.size()) != d_) throw ParameterError("NormTable: direction has wrong dimension");
    double s = 0.0;
    for (double x : v) s += x * x;
    if (std::abs(std::sqrt(s) - 1.0) > 1e-12) throw ParameterError("NormTable: directions must be unit vectors");
  }
  cells_.resize(p_grid_.size() * directions_.size() * n_schedule_.size());
}

std::size_t NormTable::index(std::size_t pi, std::size_t vi, std::size_t ni) const {
  if (pi >= p_grid_.size() || vi >= directions_.size() || ni >= n_schedule_.size())
    throw LookupError("NormTable: cell index out of range");
  return (pi * directions_.size() + vi) * n_schedule_.size() + ni;
}

const std::optional<BetaEstimate>& NormTable::cell(std::size_t pi, std::size_t vi, std::size_t ni) const {
  return cells_[index(pi, vi, ni)];
}

void NormTable::set_cell(std::size_t pi, std::size_t vi, std::size_t ni, BetaEstimate estimate) {
  cells_[index(pi, vi, ni)] = std::move(estimate);
}

std::optional<BetaEstimate> NormTable::best(std::size_t pi, std::size_t vi) const {
  return cell(pi, vi, n_schedule_.size() - 1);
}

double NormTable::drift(std::size_t pi, std::size_t vi) const {
  const auto k = n_schedule_.size();
  if (k < 2) return std::numeric_limits<double>::quiet_NaN();
  const auto& a = cell(pi, vi, k - 1);
  const auto& b = cell(pi, vi, k - 2);
  if (!a || !b) return std::numeric_limits<double>::quiet_NaN();
  return a->mean - b->mean;
}

std::vector<std::pair<Direction, double>> NormTable::values_at(std::size_t pi) const {
  std::vector<std::pair<Direction, double>> out;
  for (std::size_t vi = 0; vi < directions_.size(); ++vi)
    if (auto b = best(pi, vi)) out.emplace_back(directions_[vi], b->mean);
  return out;
}

double NormTable::min_value() const {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t pi = 0; pi < p_grid_.size(); ++pi)
    for (const auto& [v, x] : values_at(pi)) m = std::min(m, x);
  return m;
}

double NormTable::max_value() const {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t pi = 0; pi < p_grid_.size(); ++pi)
    for (const auto& [v, x] : values_at(pi)) m = std::max(m, x);
  return m;
}

void NormTable::write_csv(std::ostream& os) const {
  std::vector<BetaEstimate> rows;
  for (const auto& c : cells_)
    if (c) rows.push_back(*c);
  write_beta_csv(os, d_, rows);
}

void NormTable::write_metadata(std::ostream& os) const {
  nlohmann::ordered_json j;
  j["d"] = d_;
  j["p-grid"] = p_grid_;
  j["directions"] = directions_;
  j["n-schedule"] = n_schedule_;
  j["replicas"] = replicas_;
  j["seed"] = seed_;
  j["seed-policy"] = "cell (p, v, n_k) uses derive_seed(seed, \"norm-table\", {k}); replica r of a cell uses "
                     "derive_seed(cell seed, \"beta\", {r})";
  nlohmann::json absent = nlohmann::json::array();
  for (std::size_t pi = 0; pi < p_grid_.size(); ++pi)
    for (std::size_t vi = 0; vi < directions_.size(); ++vi)
      for (std::size_t ni = 0; ni < n_schedule_.size(); ++ni)
        if (!cell(pi, vi, ni)) absent.push_back({{"p", p_grid_[pi]}, {"v", directions_[vi]}, {"n", n_schedule_[ni]}});
  j["absent"] = absent;
  os << j.dump(2) << '\n';
}

NormTable NormTable::read(const std::filesystem::path& csv, const std::filesystem::path& metadata) {
  std::ifstream meta(metadata);
  if (!meta) throw LookupError("cannot open norm table metadata " + metadata.string());
  nlohmann::json j;
  try {
    meta >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError("malformed norm table metadata: " + std::string(e.what()));
  }
  NormTable table(j.at("d").get<int>(), j.at("p-grid").get<std::vector<double>>(),
                  j.at("directions").get<std::vector<Direction>>(), j.at("n-schedule").get<std::vector<int>>(),
                  j.at("replicas").get<int>(), j.at("seed").get<std::uint64_t>());
  const auto data = io::read_csv(csv);
  const auto cols = direction_columns(table.d_);
  const auto col = [&](const std::string& name) { return data.column(name); };
  const auto ip = col("p"), in_ = col("n"), ir = col("replicas"), im = col("mean"), is = col("stderr"),
             iseed = col("seed");
  std::vector<std::size_t> iv;
  for (const auto& c : cols) iv.push_back(col(c));
  for (const auto& row : data.rows) {
    BetaEstimate est;
    est.p = io::parse_real(row[ip]);
    for (auto k : iv) est.v.push_back(io::parse_real(row[k]));
    est.n = static_cast<int>(io::parse_int(row[in_]));
    est.replicas = static_cast<int>(io::parse_int(row[ir]));
    est.mean = io::parse_real(row[im]);
    est.stderr_ = io::parse_real(row[is]);
    est.seed = std::stoull(row[iseed]);
    const auto pit = std::find(table.p_grid_.begin(), table.p_grid_.end(), est.p);
    const auto vit = std::find_if(table.directions_.begin(), table.directions_.end(),
                                  [&](const Direction& v) { return same_direction(v, est.v); });
    const auto nit = std::find(table.n_schedule_.begin(), table.n_schedule_.end(), est.n);
    if (pit == table.p_grid_.end() || vit == table.directions_.end() || nit == table.n_schedule_.end())
      throw ParameterError("norm table row outside the declared grid");
    table.set_cell(static_cast<std::size_t>(pit - table.p_grid_.begin()),
                   static_cast<std::size_t>(vit - table.directions_.begin()),
                   static_cast<std::size_t>(nit - table.n_schedule_.begin()), std::move(est));
  }
  return table;
}

NormTable build_norm_table(int d, std::vector<double> p_grid, std::vector<Direction> directions,
                           std::vector<int> n_schedule, int replicas, std::uint64_t seed) {
  NormTable table(d, std::move(p_grid), std::move(directions), std::move(n_schedule), replicas, seed);
  for (std::size_t ni = 0; ni < table.n_schedule().size(); ++ni) {
    const auto cell_seed = derive_seed(seed, "norm-table", {ni});
    for (std::size_t vi = 0; vi < table.directions().size(); ++vi) {
      const auto instance = build_cylinder(table.n_schedule()[ni], table.directions()[vi]);
      for (std::size_t pi = 0; pi < table.p_grid().size(); ++pi)
        table.set_cell(pi, vi, ni, estimate_beta(instance, table.p_grid()[pi], replicas, cell_seed));
    }
  }
  return table;
}

// ---- CSV writers ------------------------------------------------------------

void write_beta_csv(std::ostream& os, int d, std::span<const BetaEstimate> rows) {
  os << "d,p";
  for (const auto& c : direction_columns(d)) os << ',' << c;
  os << ",n,replicas,mean,stderr,seed\n";
  for (const auto& r : rows) {
    os << d << ',' << io::fmt_real(r.p);
    write_direction(os, r.v);
    os << ',' << r.n << ',' << r.replicas << ',' << io::fmt_real(r.mean) << ',' << io::fmt_real(r.stderr_) << ','
       << r.seed << '\n';
  }
}

void write_slopes_csv(std::ostream& os, int d, std::span<const CoupledPair> rows) {
  os << "d,p,q";
  for (const auto& c : direction_columns(d)) os << ',' << c;
  os << ",n,slope,ci_lo,ci_hi\n";
  const auto nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& r : rows) {
    os << d << ',' << io::fmt_real(r.p) << ',' << io::fmt_real(r.q);
    write_direction(os, r.v);
    os << ',' << r.n << ',' << io::fmt_real(r.slope.value_or(nan)) << ',' << io::fmt_real(r.slope ? r.ci_lo : nan)
       << ',' << io::fmt_real(r.slope ? r.ci_hi : nan) << '\n';
  }
}

void write_quantiles_csv(std::ostream& os, std::span<const QuantileRow> rows) {
  os << "d,p,n,q50,q99,replicas\n";
  for (const auto& r : rows)
    os << r.d << ',' << io::fmt_real(r.p) << ',' << r.n << ',' << io::fmt_real(r.q50) << ',' << io::fmt_real(r.q99)
       << ',' << r.replicas << '\n';
}

}  // namespace percolab
