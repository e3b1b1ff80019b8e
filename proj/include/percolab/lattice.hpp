#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace percolab {

inline constexpr int kMaxDim = 6;

// A point of Z^d. Coordinates past dim() stay zero, so the defaulted
// comparisons are lexicographic in the first dim() entries.
class Vertex {
 public:
  Vertex() = default;
  explicit Vertex(int dim);
  Vertex(std::initializer_list<int> coords);
  static Vertex from_span(std::span<const int> coords);

  int dim() const { return dim_; }
  int operator[](int axis) const { return coords_[axis]; }
  int& operator[](int axis) { return coords_[axis]; }
  Vertex shifted(int axis, int delta) const;
  std::string str() const;

  friend bool operator==(const Vertex&, const Vertex&) = default;
  friend auto operator<=>(const Vertex&, const Vertex&) = default;

 private:
  std::array<int, kMaxDim> coords_{};
  int dim_ = 0;
};

struct VertexHash {
  std::size_t operator()(const Vertex& v) const noexcept;
};

// Nearest-neighbour edge stored by region vertex ids; `upper` is `lower`
// shifted by +1 along `axis`.
struct Edge {
  std::uint32_t lower = 0;
  std::uint32_t upper = 0;
  int axis = 0;
};

struct Incidence {
  std::uint32_t neighbor = 0;
  std::uint32_t edge = 0;
};

// Finite set of lattice vertices with its induced edges.
//
// Vertices are kept in lexicographic order and edges in canonical order:
// lexicographic on (lower endpoint, axis). Edge indices in every file
// format refer to this order.
class Region {
 public:
  static std::shared_ptr<const Region> box(const Vertex& lo, const Vertex& hi);
  // [-radius, radius]^dim
  static std::shared_ptr<const Region> cube(int dim, int radius);
  static std::shared_ptr<const Region> from_vertices(int dim, std::vector<Vertex> vertices);

  int dim() const { return dim_; }
  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_edges() const { return edges_.size(); }

  const Vertex& vertex(std::uint32_t id) const { return vertices_[id]; }
  std::span<const Vertex> vertices() const { return vertices_; }
  std::optional<std::uint32_t> find(const Vertex& v) const;
  bool contains(const Vertex& v) const { return find(v).has_value(); }

  const Edge& edge(std::size_t i) const { return edges_[i]; }
  std::span<const Edge> edges() const { return edges_; }
  std::optional<std::size_t> find_edge(const Vertex& a, const Vertex& b) const;

  std::span<const Incidence> incident(std::uint32_t v) const {
    return {incidence_.data() + offsets_[v], incidence_.data() + offsets_[v + 1]};
  }
  // Lattice degree is 2d; a smaller count means some neighbour lies outside.
  bool has_all_neighbors(std::uint32_t v) const {
    return offsets_[v + 1] - offsets_[v] == static_cast<std::size_t>(2 * dim_);
  }

  const Vertex& bounds_lo() const { return lo_; }
  const Vertex& bounds_hi() const { return hi_; }
  bool is_full_box() const { return full_box_; }

 private:
  Region() = default;
  void finalize();

  int dim_ = 0;
  std::vector<Vertex> vertices_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_;
  std::vector<Incidence> incidence_;
  std::unordered_map<Vertex, std::uint32_t, VertexHash> index_;
  Vertex lo_, hi_;
  bool full_box_ = false;
  std::array<std::size_t, kMaxDim> strides_{};
};

using RegionPtr = std::shared_ptr<const Region>;

// Bond configuration: an open/closed bit per region edge.
class PercConfig {
 public:
  PercConfig(RegionPtr region, std::vector<std::uint8_t> open, double p, std::uint64_t seed = 0);

  static PercConfig all_open(RegionPtr region);
  static PercConfig all_closed(RegionPtr region);

  const Region& region() const { return *region_; }
  const RegionPtr& region_ptr() const { return region_; }
  double p() const { return p_; }
  std::uint64_t seed() const { return seed_; }

  bool is_open(std::size_t edge) const { return open_[edge] != 0; }
  std::span<const std::uint8_t> open_mask() const { return open_; }
  std::vector<std::size_t> open_edges() const;
  std::size_t open_count() const;
  // Edge-wise containment of open sets; both configs must share a region.
  bool open_subset_of(const PercConfig& other) const;

 private:
  RegionPtr region_;
  std::vector<std::uint8_t> open_;
  double p_ = 0.0;
  std::uint64_t seed_ = 0;
};

// Per-edge randomness from which every parameter-indexed configuration is
// derived. u(e) is uniform on [0,1); the optional auxiliary bit is
// Bernoulli(aux_parameter), drawn from an independent stream.
class CouplingField {
 public:
  const RegionPtr& region_ptr() const { return region_; }
  std::uint64_t seed() const { return seed_; }
  std::span<const double> u() const { return u_; }
  bool has_aux() const { return aux_parameter_.has_value(); }
  std::span<const std::uint8_t> aux() const { return aux_; }
  double aux_parameter() const { return aux_parameter_.value_or(0.0); }

 private:
  friend CouplingField sample_uniform_field(RegionPtr region, std::uint64_t seed);
  friend CouplingField sample_coupled_field(RegionPtr region, std::uint64_t seed, double aux_parameter);

  RegionPtr region_;
  std::uint64_t seed_ = 0;
  std::vector<double> u_;
  std::vector<std::uint8_t> aux_;
  std::optional<double> aux_parameter_;
};

CouplingField sample_uniform_field(RegionPtr region, std::uint64_t seed);
CouplingField sample_coupled_field(RegionPtr region, std::uint64_t seed, double aux_parameter);

// Monotone coupling: e is open iff u(e) < p, so open sets are nested in p.
PercConfig open_at(const CouplingField& field, double p);

// (q - p) / (1 - p): the auxiliary parameter that makes P[U=1 or V=1] = q.
double two_stage_aux_parameter(double p, double q);

struct TwoStageSample {
  CouplingField field;
  PercConfig at_p;
  PercConfig at_q;
};

// p-open iff U = 1 (u(e) < p); q-open iff U = 1 or V = 1.
TwoStageSample sample_two_stage(RegionPtr region, double p, double q, std::uint64_t seed);

// NDJSON record {d, region-bounds, seed, p, open-edge-index-list}.
std::string to_ndjson(const PercConfig& config);

struct ConfigRecord {
  int d = 0;
  Vertex lo;
  Vertex hi;
  std::uint64_t seed = 0;
  double p = 0.0;
  std::vector<std::size_t> open_edges;
};

ConfigRecord parse_config_record(std::string_view line);

// Rebuilds a configuration on a full-box region from its record.
PercConfig config_from_record(const ConfigRecord& record);

}  // namespace percolab
