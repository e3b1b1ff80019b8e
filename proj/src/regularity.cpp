#include "percolab/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "percolab/clusters.hpp"
#include "percolab/errors.hpp"
#include "percolab/io.hpp"
#include "percolab/rng.hpp"
#include "percolab/stats.hpp"

namespace percolab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_grid(std::span<const double> p_grid) {
  if (p_grid.empty()) throw ParameterError("p grid is empty");
  for (std::size_t i = 1; i < p_grid.size(); ++i)
    if (!(p_grid[i] > p_grid[i - 1])) throw ParameterError("p grid must be strictly increasing");
}

SlopeRow deterministic_row(double lo, double hi, double value_lo, double value_hi, int n, int replicas) {
  SlopeRow row;
  row.p_lo = lo;
  row.p_hi = hi;
  row.slope = (value_hi - value_lo) / (hi - lo);
  row.stderr_ = kNaN;
  row.ci_lo = kNaN;
  row.ci_hi = kNaN;
  row.n = n;
  row.replicas = replicas;
  return row;
}

}  // namespace

std::optional<SlopeRow> SlopeReport::max_row() const {
  if (rows.empty()) return std::nullopt;
  return *std::max_element(rows.begin(), rows.end(),
                           [](const SlopeRow& a, const SlopeRow& b) { return a.slope < b.slope; });
}

SlopeReport beta_lipschitz_report(std::span<const double> p_grid, std::span<const double> v, int n, int replicas,
                                  std::uint64_t seed) {
  check_grid(p_grid);
  SlopeReport rep;
  rep.quantity = "beta";
  rep.d = static_cast<int>(v.size());
  rep.p_grid.assign(p_grid.begin(), p_grid.end());
  rep.n = n;
  rep.replicas = replicas;
  rep.seed = seed;
  rep.seed_policy = "pair i: derive_seed(seed, beta-lipschitz, {i}); replica r: derive_seed(pair seed, coupled-beta, {r})";
  rep.ci_method = "normal 95% interval on the mean of per-replica coupled differences";
  for (std::size_t i = 0; i + 1 < p_grid.size(); ++i) {
    const auto pair =
        coupled_beta_pair(p_grid[i], p_grid[i + 1], v, n, replicas, derive_seed(seed, "beta-lipschitz", {i}));
    SlopeRow row;
    row.p_lo = pair.p;
    row.p_hi = pair.q;
    row.slope = pair.slope.value_or(0.0);
    row.stderr_ = pair.slope_stderr;
    row.ci_lo = pair.ci_lo;
    row.ci_hi = pair.ci_hi;
    row.n = n;
    row.replicas = replicas;
    rep.rows.push_back(row);
  }
  return rep;
}

SlopeReport theta_slope_report(int d, std::span<const double> p_grid, int m, int replicas, std::uint64_t seed) {
  check_grid(p_grid);
  std::vector<ProportionRow> est;
  for (double p : p_grid) est.push_back(estimate_theta(d, p, m, replicas, seed));
  SlopeReport rep;
  rep.quantity = "theta";
  rep.d = d;
  rep.p_grid.assign(p_grid.begin(), p_grid.end());
  rep.n = m;
  rep.replicas = replicas;
  rep.seed = seed;
  rep.seed_policy = "replica r: derive_seed(seed, theta, {r}) shared by every p";
  rep.ci_method = "normal 95% interval of the nested-indicator difference frequency, divided by the step";
  for (const auto& e : est) rep.values.push_back(e.frequency());
  for (std::size_t i = 0; i + 1 < est.size(); ++i) {
    const double h = p_grid[i + 1] - p_grid[i];
    const stats::Proportion diff{est[i + 1].successes - est[i].successes, replicas};
    SlopeRow row;
    row.p_lo = p_grid[i];
    row.p_hi = p_grid[i + 1];
    row.slope = diff.frequency() / h;
    row.stderr_ = diff.standard_error() / h;
    row.ci_lo = row.slope - stats::kZ95 * row.stderr_;
    row.ci_hi = row.slope + stats::kZ95 * row.stderr_;
    row.n = m;
    row.replicas = replicas;
    rep.rows.push_back(row);
  }
  return rep;
}

bool max_slope_stable(const SlopeReport& a, const SlopeReport& b) {
  const auto ra = a.max_row(), rb = b.max_row();
  if (!ra || !rb) return !ra && !rb;
  return stats::intervals_overlap(ra->slope, stats::kZ95 * ra->stderr_, rb->slope, stats::kZ95 * rb->stderr_);
}

bool WulffLipschitz::chain_holds() const {
  return std::all_of(chain.begin(), chain.end(), [](const ChainBound& c) { return c.holds; });
}

WulffLipschitz wulff_lipschitz_from_table(const NormTable& table) {
  WulffLipschitz out;
  out.table = table;
  const auto& grid = table.p_grid();
  for (std::size_t pi = 0; pi < grid.size(); ++pi) {
    const auto values = table.values_at(pi);
    if (static_cast<int>(values.size()) < table.dim())
      throw GeometryError("norm table has too few directions at this p for a bounded crystal");
    const auto norm = NormSpec::table(table.dim(), values);
    const auto dirs = norm_directions(norm);
    out.crystals.push_back(wulff_polytope(norm, dirs));
  }
  auto& rep = out.report;
  rep.quantity = "hausdorff";
  rep.d = table.dim();
  rep.p_grid = grid;
  rep.n = table.n_schedule().empty() ? 0 : table.n_schedule().back();
  rep.replicas = table.replicas();
  rep.seed = table.seed();
  rep.seed_policy = "norm table cell (p, v, n-index k): derive_seed(seed, norm-table, {k})";
  rep.ci_method = "none: d_H is a deterministic functional of the measured table";
  rep.exploratory = table.dim() < 3;
  if (rep.exploratory) rep.note = "d < 3: outside the hypothesis of the Hausdorff Lipschitz statement";
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const auto& a = out.crystals[i];
    const auto& b = out.crystals[i + 1];
    out.chain.push_back(hausdorff_chain_bound(a, b));
    rep.rows.push_back(deterministic_row(grid[i], grid[i + 1], 0.0, out.chain.back().hausdorff, rep.n, rep.replicas));
  }
  return out;
}

WulffLipschitz wulff_lipschitz_report(int d, std::span<const double> p_grid, std::span<const Direction> directions,
                                      int n, int replicas, std::uint64_t seed) {
  check_grid(p_grid);
  const auto table = build_norm_table(d, {p_grid.begin(), p_grid.end()}, {directions.begin(), directions.end()},
                                      {n}, replicas, seed);
  return wulff_lipschitz_from_table(table);
}

CheegerLimit cheeger_limit_report(const NormTable& table, std::span<const double> thetas) {
  const auto& grid = table.p_grid();
  if (thetas.size() != grid.size()) throw ParameterError("one theta estimate per grid point is required");
  CheegerLimit out;
  for (std::size_t pi = 0; pi < grid.size(); ++pi) {
    const auto crystal = crystal_pipeline(table, pi, thetas[pi]);
    out.points.push_back({grid[pi], thetas[pi], crystal.volume, crystal.surface_energy});
  }
  auto& rep = out.report;
  rep.quantity = "cheegerLimit";
  rep.d = table.dim();
  rep.p_grid = grid;
  rep.n = table.n_schedule().empty() ? 0 : table.n_schedule().back();
  rep.replicas = table.replicas();
  rep.seed = table.seed();
  rep.seed_policy = "inherited from the norm table and theta estimates";
  rep.ci_method = "none: plug-in value of the measured table and theta";
  for (const auto& pt : out.points) rep.values.push_back(pt.surface_energy);
  for (std::size_t i = 0; i + 1 < grid.size(); ++i)
    rep.rows.push_back(deterministic_row(grid[i], grid[i + 1], out.points[i].surface_energy,
                                         out.points[i + 1].surface_energy, rep.n, rep.replicas));
  return out;
}

void write_slope_csv(std::ostream& os, const SlopeReport& report) {
  os << "quantity,p_lo,p_hi,slope,ci_lo,ci_hi,n,replicas\n";
  for (const auto& r : report.rows)
    os << report.quantity << ',' << io::fmt_real(r.p_lo) << ',' << io::fmt_real(r.p_hi) << ','
       << io::fmt_real(r.slope) << ',' << io::fmt_real(r.ci_lo) << ',' << io::fmt_real(r.ci_hi) << ',' << r.n << ','
       << r.replicas << '\n';
}

void write_slope_metadata(std::ostream& os, const SlopeReport& report) {
  nlohmann::ordered_json j;
  j["quantity"] = report.quantity;
  j["d"] = report.d;
  j["p-grid"] = report.p_grid;
  j["n"] = report.n;
  j["replicas"] = report.replicas;
  j["seed"] = report.seed;
  j["seed-policy"] = report.seed_policy;
  j["ci-method"] = report.ci_method;
  j["ci-level"] = 0.95;
  j["exploratory"] = report.exploratory;
  if (!report.note.empty()) j["note"] = report.note;
  j["tolerances"] = {{"geometry", kGeometryTolerances.geometry},
                     {"volume", kGeometryTolerances.volume},
                     {"reporting", kGeometryTolerances.reporting}};
  if (const auto m = report.max_row()) {
    j["max-slope"] = {{"p_lo", m->p_lo}, {"p_hi", m->p_hi}, {"slope", m->slope}};
  } else {
    j["max-slope"] = nullptr;
  }
  os << j.dump(2) << '\n';
}

void write_chain_csv(std::ostream& os, std::span<const double> p_grid, std::span<const ChainBound> chain) {
  os << "p_lo,p_hi,hausdorff,radial_gap,dual_gap,scaled_bound,tolerance,holds\n";
  for (std::size_t i = 0; i < chain.size() && i + 1 < p_grid.size(); ++i) {
    const auto& c = chain[i];
    os << io::fmt_real(p_grid[i]) << ',' << io::fmt_real(p_grid[i + 1]) << ',' << io::fmt_real(c.hausdorff) << ','
       << io::fmt_real(c.radial_gap) << ',' << io::fmt_real(c.dual_gap) << ',' << io::fmt_real(c.scaled_bound)
       << ',' << io::fmt_real(c.tolerance) << ',' << (c.holds ? 1 : 0) << '\n';
  }
}

void write_cheeger_limit_csv(std::ostream& os, std::span<const CheegerLimitPoint> points) {
  os << "p,theta,volume,surfaceEnergy\n";
  for (const auto& pt : points)
    os << io::fmt_real(pt.p) << ',' << io::fmt_real(pt.theta) << ',' << io::fmt_real(pt.volume) << ','
       << io::fmt_real(pt.surface_energy) << '\n';
}

}  // namespace percolab
