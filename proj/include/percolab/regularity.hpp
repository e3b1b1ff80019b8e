#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "percolab/flow_constant.hpp"
#include "percolab/geometry.hpp"

namespace percolab {

// Finite difference over one adjacent grid pair. ci_lo/ci_hi are nan when
// the quantity carries no sampling interval.
struct SlopeRow {
  double p_lo = 0.0;
  double p_hi = 0.0;
  double slope = 0.0;
  double stderr_ = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  int n = 0;
  int replicas = 0;
};

struct SlopeReport {
  std::string quantity;  // beta | hausdorff | cheegerLimit | theta
  int d = 0;
  std::vector<double> p_grid;
  std::vector<SlopeRow> rows;
  std::vector<double> values;  // per grid point; empty when not tracked
  int n = 0;  // cylinder scale, or box radius m for theta
  int replicas = 0;
  std::uint64_t seed = 0;
  std::string seed_policy;
  std::string ci_method;
  bool exploratory = false;
  std::string note;

  // Row with the largest slope; nullopt for an empty report.
  std::optional<SlopeRow> max_row() const;
};

// Adjacent-pair slopes of beta_p(v) from coupled_beta_pair (monotone
// coupling). Pair i uses derive_seed(seed, "beta-lipschitz", {i}).
SlopeReport beta_lipschitz_report(std::span<const double> p_grid, std::span<const double> v, int n, int replicas,
                                  std::uint64_t seed);

// Adjacent-pair slopes of the finite-volume theta proxy on [-m, m]^d. All p
// share fields, so the event is nested in p and the paired difference of
// indicators is itself a Bernoulli variable.
SlopeReport theta_slope_report(int d, std::span<const double> p_grid, int m, int replicas, std::uint64_t seed);

// The two largest slopes agree: their 95% intervals overlap.
bool max_slope_stable(const SlopeReport& a, const SlopeReport& b);

struct WulffLipschitz {
  NormTable table;
  std::vector<Polytope> crystals;  // unit Wulff bodies, one per p
  std::vector<ChainBound> chain;   // one per adjacent pair
  SlopeReport report;
  bool chain_holds() const;
};

// Builds a NormTable at the single scale n, then compares the unit Wulff
// bodies of adjacent p. Rows are flagged exploratory when d < 3.
WulffLipschitz wulff_lipschitz_report(int d, std::span<const double> p_grid, std::span<const Direction> directions,
                                      int n, int replicas, std::uint64_t seed);
WulffLipschitz wulff_lipschitz_from_table(const NormTable& table);

struct CheegerLimitPoint {
  double p = 0.0;
  double theta = 0.0;
  double volume = 0.0;
  double surface_energy = 0.0;
};

struct CheegerLimit {
  std::vector<CheegerLimitPoint> points;
  SlopeReport report;
};

// I_p(W_p) at every grid point of the table, with W_p scaled to volume
// 1/theta[i].
CheegerLimit cheeger_limit_report(const NormTable& table, std::span<const double> thetas);

// quantity,p_lo,p_hi,slope,ci_lo,ci_hi,n,replicas
void write_slope_csv(std::ostream& os, const SlopeReport& report);
void write_slope_metadata(std::ostream& os, const SlopeReport& report);
// p_lo,p_hi,hausdorff,radial_gap,dual_gap,scaled_bound,tolerance,holds
void write_chain_csv(std::ostream& os, std::span<const double> p_grid, std::span<const ChainBound> chain);
// p,theta,volume,surfaceEnergy
void write_cheeger_limit_csv(std::ostream& os, std::span<const CheegerLimitPoint> points);

}  // namespace percolab
