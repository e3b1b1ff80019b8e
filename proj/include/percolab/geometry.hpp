#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "percolab/flow_constant.hpp"

namespace percolab {

using Point = std::vector<double>;

// Every geometric tolerance in one place.
struct GeometryTolerances {
  double geometry = 1e-9;   // membership, tightness, duplicate detection
  double volume = 1e-6;     // relative, for volume targets
  double reporting = 1e-3;  // comparisons against sampled oracles
};
inline constexpr GeometryTolerances kGeometryTolerances{};

// A norm on R^d: one of the analytic builtins or a finite table of
// direction -> value samples. Tables are symmetrized (tau(-v) = tau(v),
// averaging when both were sampled) and extended to R^d by
// tau(x) = |x| tau(nearest sampled direction to x / |x|).
class NormSpec {
 public:
  enum class Kind { L1, L2, LInf, AxisWeighted, Table };

  static NormSpec l1(int d);
  static NormSpec l2(int d);
  static NormSpec linf(int d);
  // sum_i w_i |x_i| with all w_i > 0.
  static NormSpec axis_weighted(std::vector<double> weights);
  static NormSpec table(int d, const std::vector<std::pair<Direction, double>>& samples);

  Kind kind() const { return kind_; }
  int dim() const { return d_; }
  std::string name() const;
  NormSpec scaled(double c) const;

  double operator()(std::span<const double> x) const;
  // Symmetrized samples of a table norm; empty for builtins.
  const std::vector<std::pair<Direction, double>>& samples() const { return samples_; }
  // Euclidean distance from x/|x| to the nearest sampled direction (0 for
  // builtins): the interpolation error diagnostic for table norms.
  double resolution(std::span<const double> x) const;

 private:
  NormSpec(Kind kind, int d) : kind_(kind), d_(d) {}
  std::size_t nearest(std::span<const double> unit) const;

  Kind kind_;
  int d_;
  double scale_ = 1.0;
  std::vector<double> weights_;
  std::vector<std::pair<Direction, double>> samples_;
};

struct Halfspace {
  Point normal;  // unit
  double offset = 0.0;
};

struct Facet {
  Point normal;
  double area = 0.0;
  std::vector<std::size_t> vertex_ids;  // counterclockwise about the outward normal
};

// Bounded convex polytope containing the origin in its interior, in both
// H- and V-representation.
struct Polytope {
  int d = 0;
  std::vector<Halfspace> halfspaces;
  std::vector<Point> vertices;  // counterclockwise in d = 2
  std::vector<Facet> facets;

  double volume() const;
  double support(std::span<const double> u) const;
  // max_i (n_i . x) / b_i: the gauge whose unit ball is the polytope.
  double gauge(std::span<const double> x) const;
  bool contains(std::span<const double> x, double tol = kGeometryTolerances.geometry) const;
  double circumradius() const;  // max vertex norm
  double inradius() const;      // min facet offset
};

// Intersection of the halfspaces, with vertices and facets computed through
// the dual convex hull of the points n_i / b_i. d in {2, 3}; offsets must be
// positive. Throws GeometryError for unbounded intersections.
Polytope polytope_from_halfspaces(int d, std::vector<Halfspace> halfspaces);

// W = {x : x . v <= tau(v) for every v in directions}.
Polytope wulff_polytope(const NormSpec& norm, std::span<const Direction> directions);
// Constraint directions of a table norm (its symmetrized samples).
std::vector<Direction> norm_directions(const NormSpec& norm);

// max over sampled v of x . v / tau(v); exact for builtin norms when the
// maximizer is sampled, a lower bound otherwise. Zero x -> DomainError.
double dual_norm_eval(const NormSpec& norm, std::span<const double> x, std::span<const Direction> directions);
// sup{ v . x : dual(x) <= 1 } = support of the Wulff polytope at v.
double bidual_norm_eval(const NormSpec& norm, std::span<const double> v, std::span<const Direction> directions);

// sum over facets of tau(normal) * area; zero-area facets are skipped.
double surface_energy(const Polytope& polytope, const NormSpec& norm);

Polytope scale(const Polytope& polytope, double lambda);
Polytope scale_to_volume(const Polytope& polytope, double target);

// Exact for convex polytopes: distance to a convex set is convex, so each
// one-sided term is attained at a vertex.
double hausdorff_distance(const Polytope& p, const Polytope& q);
// Distance to the centred Euclidean ball of radius r, via support functions.
double hausdorff_to_ball(const Polytope& p, double r);
double distance_to_polytope(std::span<const double> x, const Polytope& q);

// d = 2: `count` equally spaced angles from 0. d = 3: Fibonacci sphere.
std::vector<Direction> sphere_directions(int d, std::size_t count);
// Largest angular gap from any unit vector to the nearest point of
// sphere_directions(d, count) (upper bound, radians).
double sphere_mesh(int d, std::size_t count);

// Hausdorff distance against the radial-function gap sup_y |1/g_P(y) - 1/g_Q(y)|
// over a direction grid. The radial gap bounds d_H from above; the grid
// adds the tolerance 2 R^2 / r * mesh.
struct ChainBound {
  double hausdorff = 0.0;
  double radial_gap = 0.0;    // max over grid of |1/g_P - 1/g_Q|
  double dual_gap = 0.0;      // max over grid of |g_P - g_Q|
  double scaled_bound = 0.0;  // R^2 * dual_gap
  double tolerance = 0.0;
  bool holds = false;  // hausdorff <= radial_gap + tolerance
};
ChainBound hausdorff_chain_bound(const Polytope& p, const Polytope& q, std::size_t grid = 4096);

struct ScaledCrystal {
  Polytope polytope;
  double theta = 1.0;
  double target_volume = 1.0;
  double volume = 1.0;
  double surface_energy = 0.0;
};

// W_p from the largest-n table values at p, scaled to volume 1/theta;
// surface_energy is the Cheeger-limit prediction I_p(W_p).
ScaledCrystal crystal_pipeline(const NormTable& table, std::size_t p_index, double theta);
ScaledCrystal crystal_from_norm(const NormSpec& norm, std::span<const Direction> directions, double theta);

std::string polytope_json(const Polytope& polytope);
std::string crystal_json(const ScaledCrystal& crystal);

}  // namespace percolab
