#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "percolab/lattice.hpp"

namespace percolab {

// Tolerance on the continuous cylinder predicates.
inline constexpr double kCylinderTolerance = 1e-9;

// B(n, v) = cyl(n S(v), n): lattice points x with |x.v| <= n and
// |x.w_j| <= n for the frame vectors w_j completing v.
struct CylinderInstance {
  int n = 0;
  std::vector<double> direction;
  std::vector<std::vector<double>> frame;  // d - 1 unit vectors orthogonal to v
  RegionPtr region;
  std::vector<std::uint32_t> c1;  // C'_1: x.v > 0 with a lattice neighbour outside
  std::vector<std::uint32_t> c2;  // C'_2: x.v < 0 with a lattice neighbour outside
  std::vector<std::uint8_t> side;  // per vertex: 0, 1 (in C'_1) or 2 (in C'_2)

  int dim() const { return static_cast<int>(direction.size()); }
};

// Gram-Schmidt completion of v: each step takes the standard basis vector
// with the largest residual (smallest index on ties) and flips signs so the
// first nonzero component is positive.
std::vector<std::vector<double>> orthonormal_frame(std::span<const double> v);

bool in_cylinder(const Vertex& x, int n, std::span<const double> v, const std::vector<std::vector<double>>& frame);

CylinderInstance build_cylinder(int n, std::span<const double> v);

// Edges of the cylinder with an endpoint in C'_1; always a cutset.
std::vector<std::size_t> trivial_cut(const CylinderInstance& instance);

// Engineering bound c_d = 2d * 3^(d-1) on |trivial_cut| / n^(d-1).
double trivial_cut_constant(int d);

// No path from C'_1 to C'_2 inside the cylinder avoids `edges`.
bool verify_cutset(const CylinderInstance& instance, std::span<const std::size_t> edges);

struct CutResult {
  std::int64_t tau = 0;                // open edges in the cut
  std::vector<std::size_t> cut_edges;  // instance edge indices, ascending
  std::size_t cardinality = 0;
  std::int64_t flow_value = 0;         // max-flow value, decoded to open units
};

// Open/closed bit per instance edge, taken from a configuration whose region
// contains the cylinder's edges.
std::vector<std::uint8_t> instance_open_mask(const CylinderInstance& instance, const PercConfig& config);

std::int64_t open_capacity(std::span<const std::uint8_t> open_mask, std::span<const std::size_t> edges);

// Exact min over cutsets of the number of open edges.
CutResult min_open_cut(const CylinderInstance& instance, const PercConfig& config);
CutResult min_open_cut(const CylinderInstance& instance, std::span<const std::uint8_t> open_mask);

// Among cutsets achieving tau, one of minimal cardinality. Capacities are
// M * open + 1 with M = |edges| + 1, so the cut value M * tau + N splits
// uniquely.
CutResult min_cardinality_min_cut(const CylinderInstance& instance, const PercConfig& config);
CutResult min_cardinality_min_cut(const CylinderInstance& instance, std::span<const std::uint8_t> open_mask);

// NDJSON {n, v, p, seed, tau, cardinality, cut-edge-indices}.
std::string cut_to_ndjson(const CylinderInstance& instance, const CutResult& cut, double p, std::uint64_t seed);

}  // namespace percolab
