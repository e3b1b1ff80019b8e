#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "percolab/lattice.hpp"

namespace percolab {

// Open-connected vertex set containing the origin, with its open edge
// boundary. `vertices` holds region ids in ascending order.
struct CandidateSet {
  std::vector<std::uint32_t> vertices;
  std::int64_t open_boundary = 0;
  std::size_t size() const { return vertices.size(); }
  double ratio() const { return static_cast<double>(open_boundary) / static_cast<double>(vertices.size()); }
};

enum class CheegerMode { Exact, Heuristic };
std::string to_string(CheegerMode mode);

struct CheegerResult {
  double value = 0.0;
  CandidateSet witness;
  CheegerMode mode = CheegerMode::Exact;
  int n = 0;
  std::size_t size_cap = 0;
  // The origin has no open incident edge: value 0 with witness {0}.
  bool degenerate = false;
  std::uint64_t work = 0;  // sets enumerated or moves proposed
};

// Open edges with exactly one endpoint in H. Throws GeometryError when some
// vertex of H has a lattice neighbour outside the region.
std::int64_t open_boundary(const PercConfig& config, std::span<const std::uint32_t> vertices);

// Origin in H, H connected through open edges inside H, |H| <= cap, no
// duplicates, and the stored boundary count is right.
bool validate_candidate(const PercConfig& config, const CandidateSet& candidate, std::size_t cap);

// Largest admissible |H|: min(n^d, size_cap).
std::size_t effective_cap(int d, int n, std::size_t size_cap);

inline constexpr std::size_t kDefaultExactCap = 12;

// Minimum of |boundary| / |H| over every open-connected H containing the
// origin with |H| <= min(n^d, size_cap), by exhaustive enumeration. Ties
// keep the larger set.
CheegerResult exact_profile(const PercConfig& config, int n, std::size_t size_cap = kDefaultExactCap);

struct AnnealingSchedule {
  double t_start = 0.25;
  double t_end = 0.05;
  // Never propose vertices on the region's edge instead of failing; the
  // search then covers a subfamily and still returns an upper bound.
  bool confine_to_region = false;
};

// Metropolis search over single-vertex additions (frontier vertices) and
// articulation-safe removals, with geometric cooling over `budget` moves.
// Starts from `start` when given (it must be admissible), else from {0}.
CheegerResult heuristic_profile(const PercConfig& config, int n, std::size_t budget, std::uint64_t seed,
                                const AnnealingSchedule& schedule = {}, const CandidateSet* start = nullptr);

struct ProfileRow {
  int d = 0;
  double p = 0.0;
  int n = 0;
  int replica = 0;
  CheegerMode mode = CheegerMode::Heuristic;
  double phi = 0.0;  // nan when conditioning failed
  std::size_t size = 0;
  std::int64_t boundary = 0;
  bool passed_conditioning = false;
  CandidateSet witness;
};

struct ProfileSummary {
  int n = 0;
  std::size_t passed = 0;
  double mean_n_phi = 0.0;
  double stderr_ = 0.0;
  std::optional<double> prediction;  // I_p(W_p) when supplied
};

struct ProfileExperiment {
  RegionPtr region;              // shared geometry of every replica
  std::vector<ProfileRow> rows;  // replica-major, n-minor
  std::vector<ProfileSummary> summary;
};

struct ProfileOptions {
  CheegerMode mode = CheegerMode::Heuristic;
  std::size_t exact_cap = kDefaultExactCap;
  std::size_t budget = 20000;
  AnnealingSchedule schedule{0.25, 0.05, true};
  int conditioning_radius = 0;  // 0: largest n
  std::optional<double> prediction;
};

// Replica r samples its configuration on [-L, L]^d, L = max(m, 2 max n) + 1,
// from derive_seed(seed, "cheeger", {r}); replicas whose origin does not
// reach the boundary of [-m, m]^d are recorded but excluded from the means.
// Heuristic runs over increasing n warm-start from the previous witness.
ProfileExperiment profile_experiment(int d, double p, std::span<const int> n_grid, int replicas, std::uint64_t seed,
                                     const ProfileOptions& options = {});

void write_profile_csv(std::ostream& os, std::span<const ProfileRow> rows);
void write_profile_summary_csv(std::ostream& os, int d, double p, std::span<const ProfileSummary> rows);
// One NDJSON line per passed row: {d, p, n, replica, phi, vertices}.
void write_witness_ndjson(std::ostream& os, const Region& region, std::span<const ProfileRow> rows);

}  // namespace percolab
