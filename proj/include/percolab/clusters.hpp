#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "percolab/lattice.hpp"
#include "percolab/stats.hpp"

namespace percolab {

// Closed axis-aligned box [lo, hi] (inclusive on both ends).
struct Box {
  Vertex lo;
  Vertex hi;

  int dim() const { return lo.dim(); }
  bool contains(const Vertex& v) const;
  // Some coordinate sits on a face of the box.
  bool on_boundary(const Vertex& v) const;
};

// Every vertex of `box` is a region vertex.
bool region_covers(const Region& region, const Box& box);

inline constexpr std::uint32_t kNoCluster = std::numeric_limits<std::uint32_t>::max();

struct ClusterStats {
  std::size_t size = 0;
  Vertex min;
  Vertex max;
};

// Open clusters of a configuration, optionally restricted to a box. Ids are
// consecutive and assigned in order of each cluster's smallest vertex.
class ClusterLabeling {
 public:
  ClusterLabeling(RegionPtr region, std::vector<std::uint32_t> labels);

  const Region& region() const { return *region_; }
  std::uint32_t label(std::uint32_t vertex) const { return labels_[vertex]; }
  std::span<const std::uint32_t> labels() const { return labels_; }
  std::size_t num_clusters() const { return stats_.size(); }
  const ClusterStats& stats(std::uint32_t id) const;

 private:
  RegionPtr region_;
  std::vector<std::uint32_t> labels_;
  std::vector<ClusterStats> stats_;
};

ClusterLabeling label_clusters(const PercConfig& config);

// Clusters of the open subgraph induced on the box; vertices outside the
// box get kNoCluster.
ClusterLabeling label_clusters_in_box(const PercConfig& config, const Box& box);

// max over axes and member pairs of |x_i - y_i|.
int diameter(const ClusterLabeling& labeling, std::uint32_t id);

// Ids of clusters (of a box labeling) joining the two opposite faces along
// every axis.
std::vector<std::uint32_t> crossing_clusters(const ClusterLabeling& labeling, const Box& box);

// One open cluster inside the box crosses it in all d directions.
bool has_crossing_cluster(const PercConfig& config, const Box& box);

// Diagnostic single-axis variant; never used by the atypical-event logic.
bool has_axis_crossing(const PercConfig& config, const Box& box, int axis);

// Crossing cluster plus another cluster of diameter >= m, both inside the box.
bool event_T(const PercConfig& config, const Box& box, int m);

// Partition of Z^d into t-boxes B_t(u) = t*u + [0, t)^d.
class BoxGrid {
 public:
  BoxGrid(int dim, int t);

  int dim() const { return dim_; }
  int t() const { return t_; }
  Box box(const Vertex& u) const;
  // Union of the 3^d boxes B_t(w) with |w - u|_inf <= 1.
  Box enlarged(const Vertex& u) const;
  std::vector<Box> sub_cubes(const Vertex& u) const;

 private:
  int dim_;
  int t_;
};

struct AtypicalIndicators {
  bool disjoint = false;
  bool blocked = false;
  bool atypical() const { return disjoint || blocked; }
};

// Both renormalization properties from a single labeling of the enlarged box.
// Throws GeometryError if the enlarged box leaves the region.
AtypicalIndicators atypical_indicators(const PercConfig& config, const BoxGrid& grid, const Vertex& u);

bool has_disjoint_property(const PercConfig& config, const BoxGrid& grid, const Vertex& u);
bool has_blocked_property(const PercConfig& config, const BoxGrid& grid, const Vertex& u);
bool atypical_event(const PercConfig& config, const BoxGrid& grid, const Vertex& u);

// Finite-volume proxy for {0 in C_p}: the origin is joined by open edges
// inside [-m, m]^d to the boundary of that box.
bool origin_reaches_boundary(const PercConfig& config, int m);

// One row of the proportion CSVs: (d, p, t-or-m, replicas, successes,
// frequency, stderr, seed).
struct ProportionRow {
  int d = 0;
  double p = 0.0;
  int scale = 0;
  std::int64_t replicas = 0;
  std::int64_t successes = 0;
  std::uint64_t seed = 0;

  double frequency() const { return stats::Proportion{successes, replicas}.frequency(); }
  double standard_error() const { return stats::Proportion{successes, replicas}.standard_error(); }
};

// Replica r uses the field seeded with derive_seed(seed, "theta", {r}) on
// [-m, m]^d, so different p share fields.
ProportionRow estimate_theta(int d, double p, int m, int replicas, std::uint64_t seed);

struct DecayFit {
  double p = 0.0;
  // Slope of log-frequency against t; -inf when fewer than two t values
  // have a positive count.
  double slope = 0.0;
  double slope_stderr = 0.0;
  std::size_t points = 0;
};

struct DecayScan {
  std::vector<ProportionRow> rows;  // p-major, t-minor
  std::vector<DecayFit> fits;       // one per p
};

// Replica r at scale index k uses derive_seed(seed, "scan", {k, r}); the
// same field serves every p, which makes the rows monotonically coupled.
DecayScan scan_decay(int d, std::span<const double> p_grid, std::span<const int> t_grid, int replicas,
                     std::uint64_t seed);

DecayFit fit_log_decay(double p, std::span<const ProportionRow> rows);

void write_proportion_csv(std::ostream& os, std::span<const ProportionRow> rows, std::string_view scale_column);

}  // namespace percolab
