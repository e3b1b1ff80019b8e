#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "percolab/cutset.hpp"

namespace percolab {

using Direction = std::vector<double>;

// H^{d-1}(n S(v)) = (2n)^{d-1}.
double cross_section_area(int d, int n);

struct BetaEstimate {
  double p = 0.0;
  Direction v;
  int n = 0;
  int replicas = 0;
  double mean = 0.0;     // mean of tau / (2n)^{d-1}
  double stderr_ = 0.0;  // sample stddev / sqrt(replicas)
  std::uint64_t seed = 0;
  std::vector<std::int64_t> taus;
};

// Replica r draws its field from derive_seed(seed, "beta", {r}).
BetaEstimate estimate_beta(double p, std::span<const double> v, int n, int replicas, std::uint64_t seed);
BetaEstimate estimate_beta(const CylinderInstance& instance, double p, int replicas, std::uint64_t seed);

enum class Coupling { Monotone, TwoStage };

struct CoupledPair {
  double p = 0.0;
  double q = 0.0;
  Direction v;
  int n = 0;
  int replicas = 0;
  std::uint64_t seed = 0;
  Coupling coupling = Coupling::Monotone;
  std::vector<std::int64_t> tau_p;
  std::vector<std::int64_t> tau_q;
  // mean(tau_q - tau_p) / ((2n)^{d-1} (q - p)); absent when p == q.
  std::optional<double> slope;
  double slope_stderr = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

// Per-replica tau_p and tau_q from one shared field (monotone coupling) or
// one (U, V) draw (two-stage coupling; needs q < 1).
CoupledPair coupled_beta_pair(double p, double q, std::span<const double> v, int n, int replicas,
                              std::uint64_t seed, Coupling coupling = Coupling::Monotone);

struct QuantileRow {
  int d = 0;
  double p = 0.0;
  int n = 0;
  int replicas = 0;
  double q50 = 0.0;  // of N / n^{d-1}
  double q99 = 0.0;
  std::vector<std::int64_t> cardinalities;
  std::vector<std::int64_t> taus;
};

// Minimal-cardinality minimal cuts in the axis direction e_d. Replicas share
// fields across p: replica r at n-index k uses derive_seed(seed, "quantiles", {k, r}).
std::vector<QuantileRow> cutsize_quantiles(int d, std::span<const double> p_grid, std::span<const int> n_grid,
                                           int replicas, std::uint64_t seed);

// Same seed for every direction, so v and -v give identical estimates.
std::vector<BetaEstimate> direction_sweep(double p, std::span<const Direction> directions, int n, int replicas,
                                          std::uint64_t seed);

// Monte-Carlo beta estimates over (p grid) x (directions) x (n schedule).
class NormTable {
 public:
  NormTable() = default;
  NormTable(int d, std::vector<double> p_grid, std::vector<Direction> directions, std::vector<int> n_schedule,
            int replicas, std::uint64_t seed);

  int dim() const { return d_; }
  const std::vector<double>& p_grid() const { return p_grid_; }
  const std::vector<Direction>& directions() const { return directions_; }
  const std::vector<int>& n_schedule() const { return n_schedule_; }
  int replicas() const { return replicas_; }
  std::uint64_t seed() const { return seed_; }

  const std::optional<BetaEstimate>& cell(std::size_t pi, std::size_t vi, std::size_t ni) const;
  void set_cell(std::size_t pi, std::size_t vi, std::size_t ni, BetaEstimate estimate);

  // Largest-n estimate for (p, v); nullopt when that cell is absent.
  std::optional<BetaEstimate> best(std::size_t pi, std::size_t vi) const;
  // Difference between the two largest n; nan when unavailable.
  double drift(std::size_t pi, std::size_t vi) const;

  // Present largest-n values at one p, paired with their directions.
  std::vector<std::pair<Direction, double>> values_at(std::size_t pi) const;
  // Extremes over every present largest-n cell (beta^min, beta^max of the grid).
  double min_value() const;
  double max_value() const;

  void write_csv(std::ostream& os) const;
  void write_metadata(std::ostream& os) const;
  static NormTable read(const std::filesystem::path& csv, const std::filesystem::path& metadata);

 private:
  std::size_t index(std::size_t pi, std::size_t vi, std::size_t ni) const;

  int d_ = 0;
  std::vector<double> p_grid_;
  std::vector<Direction> directions_;
  std::vector<int> n_schedule_;
  int replicas_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<std::optional<BetaEstimate>> cells_;
};

// Cell (p, v, n) uses derive_seed(seed, "norm-table", {n-index}) for every p
// and v, so the table is monotonically coupled in p.
NormTable build_norm_table(int d, std::vector<double> p_grid, std::vector<Direction> directions,
                           std::vector<int> n_schedule, int replicas, std::uint64_t seed);

// Axis directions plus the (+-1, +-1)/sqrt(2)-type diagonals (one of each
// antipodal pair).
std::vector<Direction> default_directions(int d);
Direction axis_direction(int d, int axis);

// Header names for the components of v: vx, vy, vz, then v4, v5, ...
std::vector<std::string> direction_columns(int d);

void write_beta_csv(std::ostream& os, int d, std::span<const BetaEstimate> rows);
void write_slopes_csv(std::ostream& os, int d, std::span<const CoupledPair> rows);
void write_quantiles_csv(std::ostream& os, std::span<const QuantileRow> rows);

}  // namespace percolab
