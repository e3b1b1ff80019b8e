#include "percolab/clusters.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <queue>

#include "percolab/errors.hpp"
#include "percolab/io.hpp"
#include "percolab/parallel.hpp"
#include "percolab/rng.hpp"
#include "percolab/union_find.hpp"

namespace percolab {

bool Box::contains(const Vertex& v) const {
  for (int i = 0; i < dim(); ++i)
    if (v[i] < lo[i] || v[i] > hi[i]) return false;
  return true;
}

bool Box::on_boundary(const Vertex& v) const {
  for (int i = 0; i < dim(); ++i)
    if (v[i] == lo[i] || v[i] == hi[i]) return true;
  return false;
}

bool region_covers(const Region& region, const Box& box) {
  if (region.dim() != box.dim()) return false;
  if (region.is_full_box()) {
    for (int i = 0; i < box.dim(); ++i)
      if (box.lo[i] < region.bounds_lo()[i] || box.hi[i] > region.bounds_hi()[i]) return false;
    return true;
  }
  Vertex cur = box.lo;
  while (true) {
    if (!region.contains(cur)) return false;
    int axis = box.dim() - 1;
    while (axis >= 0 && cur[axis] == box.hi[axis]) {
      cur[axis] = box.lo[axis];
      --axis;
    }
    if (axis < 0) return true;
    ++cur[axis];
  }
}

ClusterLabeling::ClusterLabeling(RegionPtr region, std::vector<std::uint32_t> labels)
    : region_(std::move(region)), labels_(std::move(labels)) {
  for (std::uint32_t v = 0; v < labels_.size(); ++v) {
    const auto id = labels_[v];
    if (id == kNoCluster) continue;
    if (id >= stats_.size()) stats_.resize(id + 1);
    auto& s = stats_[id];
    const auto& x = region_->vertex(v);
    if (s.size == 0) {
      s.min = s.max = x;
    } else {
      for (int i = 0; i < x.dim(); ++i) {
        s.min[i] = std::min(s.min[i], x[i]);
        s.max[i] = std::max(s.max[i], x[i]);
      }
    }
    ++s.size;
  }
}

const ClusterStats& ClusterLabeling::stats(std::uint32_t id) const {
  if (id >= stats_.size()) throw LookupError("unknown cluster id " + std::to_string(id));
  return stats_[id];
}

namespace {

template <class Keep>
ClusterLabeling label_with(const PercConfig& config, Keep keep) {
  const auto& region = config.region();
  const auto nv = static_cast<std::uint32_t>(region.num_vertices());
  UnionFind uf(nv);
  const auto edges = region.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (!config.is_open(e)) continue;
    if (!keep(edges[e].lower) || !keep(edges[e].upper)) continue;
    uf.unite(edges[e].lower, edges[e].upper);
  }
  std::vector<std::uint32_t> root_label(nv, kNoCluster);
  std::vector<std::uint32_t> labels(nv, kNoCluster);
  std::uint32_t next = 0;
  for (std::uint32_t v = 0; v < nv; ++v) {
    if (!keep(v)) continue;
    const auto r = uf.find(v);
    if (root_label[r] == kNoCluster) root_label[r] = next++;
    labels[v] = root_label[r];
  }
  return ClusterLabeling(config.region_ptr(), std::move(labels));
}

}  // namespace

ClusterLabeling label_clusters(const PercConfig& config) {
  return label_with(config, [](std::uint32_t) { return true; });
}

ClusterLabeling label_clusters_in_box(const PercConfig& config, const Box& box) {
  const auto& region = config.region();
  std::vector<std::uint8_t> inside(region.num_vertices());
  for (std::uint32_t v = 0; v < inside.size(); ++v) inside[v] = box.contains(region.vertex(v)) ? 1 : 0;
  return label_with(config, [&](std::uint32_t v) { return inside[v] != 0; });
}

int diameter(const ClusterLabeling& labeling, std::uint32_t id) {
  const auto& s = labeling.stats(id);
  int best = 0;
  for (int i = 0; i < s.min.dim(); ++i) best = std::max(best, s.max[i] - s.min[i]);
  return best;
}

std::vector<std::uint32_t> crossing_clusters(const ClusterLabeling& labeling, const Box& box) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t id = 0; id < labeling.num_clusters(); ++id) {
    const auto& s = labeling.stats(id);
    bool crosses = s.size > 0;
    for (int i = 0; i < box.dim() && crosses; ++i) crosses = s.min[i] == box.lo[i] && s.max[i] == box.hi[i];
    if (crosses) out.push_back(id);
  }
  return out;
}

bool has_crossing_cluster(const PercConfig& config, const Box& box) {
  if (!region_covers(config.region(), box)) throw GeometryError("box leaves the configuration region");
  return !crossing_clusters(label_clusters_in_box(config, box), box).empty();
}

bool has_axis_crossing(const PercConfig& config, const Box& box, int axis) {
  if (!region_covers(config.region(), box)) throw GeometryError("box leaves the configuration region");
  const auto labeling = label_clusters_in_box(config, box);
  for (std::uint32_t id = 0; id < labeling.num_clusters(); ++id) {
    const auto& s = labeling.stats(id);
    if (s.min[axis] == box.lo[axis] && s.max[axis] == box.hi[axis]) return true;
  }
  return false;
}

bool event_T(const PercConfig& config, const Box& box, int m) {
  int side = 0;
  for (int i = 0; i < box.dim(); ++i) side = std::max(side, box.hi[i] - box.lo[i] + 1);
  if (m <= 0 || m > side) throw ParameterError("event_T needs 0 < m <= N");
  if (!region_covers(config.region(), box)) throw GeometryError("box leaves the configuration region");
  const auto labeling = label_clusters_in_box(config, box);
  const auto crossing = crossing_clusters(labeling, box);
  if (crossing.empty()) return false;
  std::uint32_t primary = crossing.front();
  for (auto id : crossing)
    if (labeling.stats(id).size > labeling.stats(primary).size) primary = id;
  for (std::uint32_t id = 0; id < labeling.num_clusters(); ++id) {
    if (id == primary) continue;
    if (diameter(labeling, id) >= m) return true;
  }
  return false;
}

BoxGrid::BoxGrid(int dim, int t) : dim_(dim), t_(t) {
  if (dim < 1 || dim > kMaxDim) throw ParameterError("grid dimension out of range");
  if (t < 1) throw ParameterError("box size t must be positive");
}

Box BoxGrid::box(const Vertex& u) const {
  Box b{Vertex(dim_), Vertex(dim_)};
  for (int i = 0; i < dim_; ++i) {
    b.lo[i] = t_ * u[i];
    b.hi[i] = t_ * u[i] + t_ - 1;
  }
  return b;
}

Box BoxGrid::enlarged(const Vertex& u) const {
  Box b = box(u);
  for (int i = 0; i < dim_; ++i) {
    b.lo[i] -= t_;
    b.hi[i] += t_;
  }
  return b;
}

std::vector<Box> BoxGrid::sub_cubes(const Vertex& u) const {
  std::vector<Box> out;
  int count = 1;
  for (int i = 0; i < dim_; ++i) count *= 3;
  for (int k = 0; k < count; ++k) {
    Vertex w = u;
    int code = k;
    for (int i = 0; i < dim_; ++i) {
      w[i] += code % 3 - 1;
      code /= 3;
    }
    out.push_back(box(w));
  }
  return out;
}

AtypicalIndicators atypical_indicators(const PercConfig& config, const BoxGrid& grid, const Vertex& u) {
  const Box inner = grid.box(u);
  const Box outer = grid.enlarged(u);
  const auto& region = config.region();
  if (!region_covers(region, outer)) throw GeometryError("enlarged box exceeds the configuration region");

  const auto labeling = label_clusters_in_box(config, outer);
  const auto nc = labeling.num_clusters();
  std::vector<std::uint8_t> in_inner(nc, 0), on_boundary(nc, 0);
  for (std::uint32_t v = 0; v < region.num_vertices(); ++v) {
    const auto id = labeling.label(v);
    if (id == kNoCluster) continue;
    const auto& x = region.vertex(v);
    if (inner.contains(x)) in_inner[id] = 1;
    if (outer.on_boundary(x)) on_boundary[id] = 1;
  }

  // Clusters meeting both B_t(u) and the boundary of the enlarged box.
  std::vector<std::int64_t> slot(nc, -1);
  std::size_t qualifying = 0;
  for (std::uint32_t id = 0; id < nc; ++id)
    if (in_inner[id] && on_boundary[id]) slot[id] = static_cast<std::int64_t>(qualifying++);

  AtypicalIndicators out;
  out.disjoint = qualifying >= 2;
  if (qualifying == 0) return out;

  int cubes = 1;
  for (int i = 0; i < grid.dim(); ++i) cubes *= 3;
  const std::size_t words = (static_cast<std::size_t>(cubes) + 63) / 64;
  std::vector<std::uint64_t> mask(qualifying * words, 0);
  const int t = grid.t();
  for (std::uint32_t v = 0; v < region.num_vertices(); ++v) {
    const auto id = labeling.label(v);
    if (id == kNoCluster || slot[id] < 0) continue;
    const auto& x = region.vertex(v);
    int code = 0, weight = 1;
    for (int i = 0; i < grid.dim(); ++i) {
      code += ((x[i] - outer.lo[i]) / t) * weight;
      weight *= 3;
    }
    mask[static_cast<std::size_t>(slot[id]) * words + code / 64] |= std::uint64_t{1} << (code % 64);
  }
  for (std::size_t s = 0; s < qualifying && !out.blocked; ++s) {
    int covered = 0;
    for (std::size_t w = 0; w < words; ++w) covered += __builtin_popcountll(mask[s * words + w]);
    out.blocked = covered < cubes;
  }
  return out;
}

bool has_disjoint_property(const PercConfig& config, const BoxGrid& grid, const Vertex& u) {
  return atypical_indicators(config, grid, u).disjoint;
}

bool has_blocked_property(const PercConfig& config, const BoxGrid& grid, const Vertex& u) {
  return atypical_indicators(config, grid, u).blocked;
}

bool atypical_event(const PercConfig& config, const BoxGrid& grid, const Vertex& u) {
  return atypical_indicators(config, grid, u).atypical();
}

namespace {

bool on_cube_boundary(const Vertex& x, int m) {
  for (int i = 0; i < x.dim(); ++i)
    if (x[i] == m || x[i] == -m) return true;
  return false;
}

bool in_cube(const Vertex& x, int m) {
  for (int i = 0; i < x.dim(); ++i)
    if (x[i] < -m || x[i] > m) return false;
  return true;
}

// BFS from the origin inside [-m, m]^d; `open` decides each edge lazily.
template <class OpenFn>
bool origin_search(const Region& region, int m, OpenFn open) {
  const auto origin = region.find(Vertex(region.dim()));
  if (!origin) throw GeometryError("origin outside the region");
  std::vector<std::uint8_t> seen(region.num_vertices(), 0);
  std::queue<std::uint32_t> q;
  q.push(*origin);
  seen[*origin] = 1;
  while (!q.empty()) {
    const auto v = q.front();
    q.pop();
    if (on_cube_boundary(region.vertex(v), m)) return true;
    for (const auto& inc : region.incident(v)) {
      if (seen[inc.neighbor] || !open(inc.edge)) continue;
      if (!in_cube(region.vertex(inc.neighbor), m)) continue;
      seen[inc.neighbor] = 1;
      q.push(inc.neighbor);
    }
  }
  return false;
}

}  // namespace

bool origin_reaches_boundary(const PercConfig& config, int m) {
  if (m < 1) throw ParameterError("conditioning radius must be positive");
  const auto& region = config.region();
  Box cube{Vertex(region.dim()), Vertex(region.dim())};
  for (int i = 0; i < region.dim(); ++i) {
    cube.lo[i] = -m;
    cube.hi[i] = m;
  }
  if (!region_covers(region, cube)) throw GeometryError("conditioning box leaves the region");
  return origin_search(region, m, [&](std::uint32_t e) { return config.is_open(e); });
}

ProportionRow estimate_theta(int d, double p, int m, int replicas, std::uint64_t seed) {
  if (!(p > 0.0 && p <= 1.0)) throw ParameterError("estimate_theta: p must lie in (0,1]");
  if (m < 1) throw ParameterError("estimate_theta: m must be >= 1");
  if (replicas < 1) throw ParameterError("estimate_theta: replicas must be >= 1");
  const auto region = Region::cube(d, m);
  std::vector<std::uint8_t> hit(static_cast<std::size_t>(replicas), 0);
  parallel_for(hit.size(), [&](std::size_t r) {
    const auto s = derive_seed(seed, "theta", {r});
    // Same draws as open_at(sample_uniform_field(region, s), p), evaluated on demand.
    hit[r] = origin_search(*region, m, [&](std::uint32_t e) { return counter_uniform(s, stream::kUniform, e) < p; }) ? 1 : 0;
  });
  ProportionRow row;
  row.d = d;
  row.p = p;
  row.scale = m;
  row.replicas = replicas;
  row.successes = std::count(hit.begin(), hit.end(), std::uint8_t{1});
  row.seed = seed;
  return row;
}

DecayFit fit_log_decay(double p, std::span<const ProportionRow> rows) {
  std::vector<double> x, y, w;
  for (const auto& r : rows) {
    if (r.successes <= 0) continue;
    const double f = r.frequency();
    // delta method: Var(log f) ~ (1 - f) / successes
    const double var = std::max(1.0 - f, 1.0 / static_cast<double>(r.replicas)) / static_cast<double>(r.successes);
    x.push_back(static_cast<double>(r.scale));
    y.push_back(std::log(f));
    w.push_back(1.0 / var);
  }
  DecayFit fit;
  fit.p = p;
  fit.points = x.size();
  if (x.size() < 2) {
    fit.slope = -std::numeric_limits<double>::infinity();
    return fit;
  }
  const auto lf = stats::weighted_linear_fit(x, y, w);
  fit.slope = lf.slope;
  fit.slope_stderr = lf.slope_stderr;
  return fit;
}

DecayScan scan_decay(int d, std::span<const double> p_grid, std::span<const int> t_grid, int replicas,
                     std::uint64_t seed) {
  if (replicas < 1) throw ParameterError("scan_decay: replicas must be >= 1");
  for (double p : p_grid)
    if (!(p > 0.0 && p <= 1.0)) throw ParameterError("scan_decay: p must lie in (0,1]");
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    if (t_grid[k] < 1) throw ParameterError("scan_decay: t must be positive");
    if (k > 0 && t_grid[k] <= t_grid[k - 1]) throw ParameterError("scan_decay: t grid must increase");
  }
  const std::size_t np = p_grid.size(), nt = t_grid.size();
  std::vector<std::int64_t> successes(np * nt, 0);
  const Vertex u0(d);
  for (std::size_t k = 0; k < nt; ++k) {
    const BoxGrid grid(d, t_grid[k]);
    const Box outer = grid.enlarged(u0);
    const auto region = Region::box(outer.lo, outer.hi);
    std::vector<std::uint8_t> hits(static_cast<std::size_t>(replicas) * np, 0);
    parallel_for(static_cast<std::size_t>(replicas), [&](std::size_t r) {
      const auto field = sample_uniform_field(region, derive_seed(seed, "scan", {k, r}));
      for (std::size_t i = 0; i < np; ++i) hits[r * np + i] = atypical_event(open_at(field, p_grid[i]), grid, u0) ? 1 : 0;
    });
    for (int r = 0; r < replicas; ++r)
      for (std::size_t i = 0; i < np; ++i) successes[i * nt + k] += hits[static_cast<std::size_t>(r) * np + i];
  }
  DecayScan scan;
  for (std::size_t i = 0; i < np; ++i) {
    for (std::size_t k = 0; k < nt; ++k) {
      ProportionRow row;
      row.d = d;
      row.p = p_grid[i];
      row.scale = t_grid[k];
      row.replicas = replicas;
      row.successes = successes[i * nt + k];
      row.seed = seed;
      scan.rows.push_back(row);
    }
    scan.fits.push_back(fit_log_decay(p_grid[i], std::span(scan.rows).subspan(i * nt, nt)));
  }
  return scan;
}

void write_proportion_csv(std::ostream& os, std::span<const ProportionRow> rows, std::string_view scale_column) {
  os << "d,p," << scale_column << ",replicas,successes,frequency,stderr,seed\n";
  for (const auto& r : rows) {
    os << r.d << ',' << io::fmt_real(r.p) << ',' << r.scale << ',' << r.replicas << ',' << r.successes << ','
       << io::fmt_real(r.frequency()) << ',' << io::fmt_real(r.standard_error()) << ',' << r.seed << '\n';
  }
}

}  // namespace percolab
