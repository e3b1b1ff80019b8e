#include "percolab/lattice.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "percolab/errors.hpp"
#include "percolab/rng.hpp"

namespace percolab {

Vertex::Vertex(int dim) : dim_(dim) {
  if (dim < 1 || dim > kMaxDim) throw ParameterError("vertex dimension out of range");
}

Vertex::Vertex(std::initializer_list<int> coords) : dim_(static_cast<int>(coords.size())) {
  if (dim_ < 1 || dim_ > kMaxDim) throw ParameterError("vertex dimension out of range");
  std::copy(coords.begin(), coords.end(), coords_.begin());
}

Vertex Vertex::from_span(std::span<const int> coords) {
  Vertex v(static_cast<int>(coords.size()));
  std::copy(coords.begin(), coords.end(), v.coords_.begin());
  return v;
}

Vertex Vertex::shifted(int axis, int delta) const {
  Vertex v = *this;
  v.coords_[axis] += delta;
  return v;
}

std::string Vertex::str() const {
  std::ostringstream os;
  os << '(';
  for (int i = 0; i < dim_; ++i) os << (i ? "," : "") << coords_[i];
  os << ')';
  return os.str();
}

std::size_t VertexHash::operator()(const Vertex& v) const noexcept {
  std::uint64_t h = static_cast<std::uint64_t>(v.dim());
  for (int i = 0; i < v.dim(); ++i) {
    h = mix64(h ^ static_cast<std::uint64_t>(static_cast<std::uint32_t>(v[i])));
  }
  return static_cast<std::size_t>(h);
}

RegionPtr Region::box(const Vertex& lo, const Vertex& hi) {
  if (lo.dim() != hi.dim()) throw ParameterError("box corners differ in dimension");
  const int d = lo.dim();
  std::vector<Vertex> vs;
  std::size_t count = 1;
  for (int i = 0; i < d; ++i) {
    if (hi[i] < lo[i]) throw ParameterError("box with hi < lo");
    count *= static_cast<std::size_t>(hi[i] - lo[i] + 1);
  }
  vs.reserve(count);
  Vertex cur = lo;
  for (std::size_t k = 0; k < count; ++k) {
    vs.push_back(cur);
    for (int axis = d - 1; axis >= 0; --axis) {
      if (cur[axis] < hi[axis]) {
        ++cur[axis];
        break;
      }
      cur[axis] = lo[axis];
    }
  }
  return from_vertices(d, std::move(vs));
}

RegionPtr Region::cube(int dim, int radius) {
  Vertex lo(dim), hi(dim);
  for (int i = 0; i < dim; ++i) {
    lo[i] = -radius;
    hi[i] = radius;
  }
  return box(lo, hi);
}

RegionPtr Region::from_vertices(int dim, std::vector<Vertex> vertices) {
  if (dim < 1 || dim > kMaxDim) throw ParameterError("region dimension out of range");
  for (const auto& v : vertices)
    if (v.dim() != dim) throw ParameterError("region vertex of wrong dimension");
  std::sort(vertices.begin(), vertices.end());
  vertices.erase(std::unique(vertices.begin(), vertices.end()), vertices.end());
  std::shared_ptr<Region> r(new Region());
  r->dim_ = dim;
  r->vertices_ = std::move(vertices);
  r->finalize();
  return r;
}

void Region::finalize() {
  const int d = dim_;
  lo_ = Vertex(d);
  hi_ = Vertex(d);
  if (!vertices_.empty()) {
    lo_ = hi_ = vertices_.front();
    for (const auto& v : vertices_) {
      for (int i = 0; i < d; ++i) {
        lo_[i] = std::min(lo_[i], v[i]);
        hi_[i] = std::max(hi_[i], v[i]);
      }
    }
  }
  std::size_t box_count = vertices_.empty() ? 0 : 1;
  for (int i = 0; i < d && !vertices_.empty(); ++i) box_count *= static_cast<std::size_t>(hi_[i] - lo_[i] + 1);
  full_box_ = !vertices_.empty() && box_count == vertices_.size();
  if (full_box_) {
    std::size_t stride = 1;
    for (int i = d - 1; i >= 0; --i) {
      strides_[i] = stride;
      stride *= static_cast<std::size_t>(hi_[i] - lo_[i] + 1);
    }
  } else {
    index_.reserve(vertices_.size());
    for (std::uint32_t id = 0; id < vertices_.size(); ++id) index_.emplace(vertices_[id], id);
  }

  std::vector<std::size_t> degree(vertices_.size(), 0);
  for (std::uint32_t id = 0; id < vertices_.size(); ++id) {
    for (int axis = 0; axis < d; ++axis) {
      if (auto up = find(vertices_[id].shifted(axis, 1))) {
        edges_.push_back(Edge{id, *up, axis});
        ++degree[id];
        ++degree[*up];
      }
    }
  }
  offsets_.assign(vertices_.size() + 1, 0);
  for (std::size_t i = 0; i < vertices_.size(); ++i) offsets_[i + 1] = offsets_[i] + degree[i];
  incidence_.resize(offsets_.back());
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (std::uint32_t e = 0; e < edges_.size(); ++e) {
    const auto& ed = edges_[e];
    incidence_[fill[ed.lower]++] = Incidence{ed.upper, e};
    incidence_[fill[ed.upper]++] = Incidence{ed.lower, e};
  }
}

std::optional<std::uint32_t> Region::find(const Vertex& v) const {
  if (v.dim() != dim_ || vertices_.empty()) return std::nullopt;
  if (full_box_) {
    std::size_t id = 0;
    for (int i = 0; i < dim_; ++i) {
      if (v[i] < lo_[i] || v[i] > hi_[i]) return std::nullopt;
      id += static_cast<std::size_t>(v[i] - lo_[i]) * strides_[i];
    }
    return static_cast<std::uint32_t>(id);
  }
  auto it = index_.find(v);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Region::find_edge(const Vertex& a, const Vertex& b) const {
  auto ia = find(a);
  auto ib = find(b);
  if (!ia || !ib) return std::nullopt;
  for (const auto& inc : incident(*ia))
    if (inc.neighbor == *ib) return inc.edge;
  return std::nullopt;
}

PercConfig::PercConfig(RegionPtr region, std::vector<std::uint8_t> open, double p, std::uint64_t seed)
    : region_(std::move(region)), open_(std::move(open)), p_(p), seed_(seed) {
  if (!region_) throw ParameterError("configuration without region");
  if (open_.size() != region_->num_edges()) throw ParameterError("open mask size differs from edge count");
  if (!(p_ >= 0.0 && p_ <= 1.0)) throw ParameterError("configuration parameter outside [0,1]");
}

PercConfig PercConfig::all_open(RegionPtr region) {
  const auto m = region->num_edges();
  return PercConfig(std::move(region), std::vector<std::uint8_t>(m, 1), 1.0);
}

PercConfig PercConfig::all_closed(RegionPtr region) {
  const auto m = region->num_edges();
  return PercConfig(std::move(region), std::vector<std::uint8_t>(m, 0), 0.0);
}

std::vector<std::size_t> PercConfig::open_edges() const {
  std::vector<std::size_t> out;
  for (std::size_t e = 0; e < open_.size(); ++e)
    if (open_[e]) out.push_back(e);
  return out;
}

std::size_t PercConfig::open_count() const {
  return static_cast<std::size_t>(std::count(open_.begin(), open_.end(), std::uint8_t{1}));
}

bool PercConfig::open_subset_of(const PercConfig& other) const {
  if (region_ != other.region_ && region_->num_edges() != other.region_->num_edges())
    throw ParameterError("containment check across different regions");
  for (std::size_t e = 0; e < open_.size(); ++e)
    if (open_[e] && !other.open_[e]) return false;
  return true;
}

CouplingField sample_uniform_field(RegionPtr region, std::uint64_t seed) {
  CouplingField f;
  const auto m = region->num_edges();
  f.region_ = std::move(region);
  f.seed_ = seed;
  f.u_.resize(m);
  for (std::size_t e = 0; e < m; ++e) f.u_[e] = counter_uniform(seed, stream::kUniform, e);
  return f;
}

CouplingField sample_coupled_field(RegionPtr region, std::uint64_t seed, double aux_parameter) {
  if (!(aux_parameter >= 0.0 && aux_parameter <= 1.0))
    throw ParameterError("auxiliary parameter outside [0,1]");
  CouplingField f = sample_uniform_field(std::move(region), seed);
  f.aux_parameter_ = aux_parameter;
  f.aux_.resize(f.u_.size());
  for (std::size_t e = 0; e < f.u_.size(); ++e)
    f.aux_[e] = counter_uniform(seed, stream::kAuxiliary, e) < aux_parameter ? 1 : 0;
  return f;
}

PercConfig open_at(const CouplingField& field, double p) {
  if (!(p > 0.0 && p <= 1.0)) throw ParameterError("open_at: p must lie in (0,1]");
  std::vector<std::uint8_t> open(field.u().size());
  for (std::size_t e = 0; e < open.size(); ++e) open[e] = field.u()[e] < p ? 1 : 0;
  return PercConfig(field.region_ptr(), std::move(open), p, field.seed());
}

double two_stage_aux_parameter(double p, double q) {
  if (!(p > 0.0 && p <= q)) throw ParameterError("two-stage coupling needs 0 < p <= q");
  if (!(q < 1.0)) throw ParameterError("two-stage coupling needs q < 1");
  return (q - p) / (1.0 - p);
}

TwoStageSample sample_two_stage(RegionPtr region, double p, double q, std::uint64_t seed) {
  const double r = two_stage_aux_parameter(p, q);
  CouplingField field = sample_coupled_field(std::move(region), seed, r);
  PercConfig at_p = open_at(field, p);
  std::vector<std::uint8_t> open_q(at_p.open_mask().begin(), at_p.open_mask().end());
  for (std::size_t e = 0; e < open_q.size(); ++e) open_q[e] = (open_q[e] || field.aux()[e]) ? 1 : 0;
  PercConfig at_q(field.region_ptr(), std::move(open_q), q, seed);
  return TwoStageSample{std::move(field), std::move(at_p), std::move(at_q)};
}

std::string to_ndjson(const PercConfig& config) {
  const auto& r = config.region();
  nlohmann::json j;
  j["d"] = r.dim();
  std::vector<int> lo(r.dim()), hi(r.dim());
  for (int i = 0; i < r.dim(); ++i) {
    lo[i] = r.bounds_lo()[i];
    hi[i] = r.bounds_hi()[i];
  }
  j["region-bounds"] = {lo, hi};
  j["seed"] = config.seed();
  j["p"] = config.p();
  j["open-edge-index-list"] = config.open_edges();
  return j.dump();
}

ConfigRecord parse_config_record(std::string_view line) {
  ConfigRecord rec;
  try {
    const auto j = nlohmann::json::parse(line);
    rec.d = j.at("d").get<int>();
    const auto lo = j.at("region-bounds").at(0).get<std::vector<int>>();
    const auto hi = j.at("region-bounds").at(1).get<std::vector<int>>();
    if (static_cast<int>(lo.size()) != rec.d || static_cast<int>(hi.size()) != rec.d)
      throw ParameterError("region-bounds dimension mismatch");
    rec.lo = Vertex::from_span(lo);
    rec.hi = Vertex::from_span(hi);
    rec.seed = j.at("seed").get<std::uint64_t>();
    rec.p = j.at("p").get<double>();
    rec.open_edges = j.at("open-edge-index-list").get<std::vector<std::size_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("malformed configuration record: ") + e.what());
  }
  return rec;
}

PercConfig config_from_record(const ConfigRecord& record) {
  auto region = Region::box(record.lo, record.hi);
  std::vector<std::uint8_t> open(region->num_edges(), 0);
  for (auto e : record.open_edges) {
    if (e >= open.size()) throw ParameterError("open edge index out of range");
    open[e] = 1;
  }
  return PercConfig(std::move(region), std::move(open), record.p, record.seed);
}

}  // namespace percolab
