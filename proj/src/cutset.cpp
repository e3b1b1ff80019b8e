#include "percolab/cutset.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include <json.hpp>

#include "percolab/errors.hpp"
#include "percolab/maxflow.hpp"

namespace percolab {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double dot(const Vertex& x, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) s += x[static_cast<int>(i)] * b[i];
  return s;
}

}  // namespace

std::vector<std::vector<double>> orthonormal_frame(std::span<const double> v) {
  const auto d = v.size();
  std::vector<std::vector<double>> basis{std::vector<double>(v.begin(), v.end())};
  std::vector<std::vector<double>> frame;
  for (std::size_t k = 1; k < d; ++k) {
    std::vector<double> best;
    double best_norm = -1.0;
    for (std::size_t i = 0; i < d; ++i) {
      std::vector<double> r(d, 0.0);
      r[i] = 1.0;
      for (const auto& b : basis) {
        const double c = dot(r, b);
        for (std::size_t j = 0; j < d; ++j) r[j] -= c * b[j];
      }
      const double norm = std::sqrt(dot(r, r));
      if (norm > best_norm + 1e-12) {
        best_norm = norm;
        best = std::move(r);
      }
    }
    for (auto& x : best) x /= best_norm;
    for (double x : best) {
      if (std::abs(x) > 1e-12) {
        if (x < 0)
          for (auto& y : best) y = -y;
        break;
      }
    }
    basis.push_back(best);
    frame.push_back(std::move(best));
  }
  return frame;
}

bool in_cylinder(const Vertex& x, int n, std::span<const double> v, const std::vector<std::vector<double>>& frame) {
  const double limit = n + kCylinderTolerance;
  if (std::abs(dot(x, v)) > limit) return false;
  for (const auto& w : frame)
    if (std::abs(dot(x, w)) > limit) return false;
  return true;
}

CylinderInstance build_cylinder(int n, std::span<const double> v) {
  const int d = static_cast<int>(v.size());
  if (d < 2 || d > kMaxDim) throw ParameterError("cylinder dimension out of range");
  if (n < 2) throw ParameterError("cylinder needs n >= 2");
  if (std::abs(std::sqrt(dot(v, v)) - 1.0) > 1e-12) throw ParameterError("cylinder direction is not a unit vector");

  CylinderInstance inst;
  inst.n = n;
  inst.direction.assign(v.begin(), v.end());
  inst.frame = orthonormal_frame(v);

  const int reach = static_cast<int>(std::ceil(n * std::sqrt(static_cast<double>(d)))) + 1;
  std::vector<Vertex> vertices;
  Vertex cur(d);
  for (int i = 0; i < d; ++i) cur[i] = -reach;
  while (true) {
    if (in_cylinder(cur, n, v, inst.frame)) vertices.push_back(cur);
    int axis = d - 1;
    while (axis >= 0 && cur[axis] == reach) {
      cur[axis] = -reach;
      --axis;
    }
    if (axis < 0) break;
    ++cur[axis];
  }
  inst.region = Region::from_vertices(d, std::move(vertices));

  const auto& region = *inst.region;
  inst.side.assign(region.num_vertices(), 0);
  for (std::uint32_t id = 0; id < region.num_vertices(); ++id) {
    const auto& x = region.vertex(id);
    const double t = dot(x, v);
    if (std::abs(t) <= kCylinderTolerance) continue;
    bool exposed = false;
    for (int axis = 0; axis < d && !exposed; ++axis)
      for (int delta : {-1, 1})
        if (!in_cylinder(x.shifted(axis, delta), n, v, inst.frame)) exposed = true;
    if (!exposed) continue;
    if (t > 0) {
      inst.side[id] = 1;
      inst.c1.push_back(id);
    } else {
      inst.side[id] = 2;
      inst.c2.push_back(id);
    }
  }
  if (inst.c1.empty() || inst.c2.empty())
    throw GeometryError("cylinder boundary sets are empty; n too small for this direction");
  return inst;
}

std::vector<std::size_t> trivial_cut(const CylinderInstance& instance) {
  std::vector<std::size_t> out;
  const auto edges = instance.region->edges();
  for (std::size_t e = 0; e < edges.size(); ++e)
    if (instance.side[edges[e].lower] == 1 || instance.side[edges[e].upper] == 1) out.push_back(e);
  return out;
}

double trivial_cut_constant(int d) { return 2.0 * d * std::pow(3.0, d - 1); }

bool verify_cutset(const CylinderInstance& instance, std::span<const std::size_t> edges) {
  const auto& region = *instance.region;
  std::vector<std::uint8_t> removed(region.num_edges(), 0);
  for (auto e : edges) {
    if (e >= removed.size()) throw ParameterError("cut edge index outside the instance");
    removed[e] = 1;
  }
  std::vector<std::uint8_t> seen(region.num_vertices(), 0);
  std::queue<std::uint32_t> q;
  for (auto v : instance.c1) {
    seen[v] = 1;
    q.push(v);
  }
  while (!q.empty()) {
    const auto v = q.front();
    q.pop();
    if (instance.side[v] == 2) return false;
    for (const auto& inc : region.incident(v)) {
      if (removed[inc.edge] || seen[inc.neighbor]) continue;
      seen[inc.neighbor] = 1;
      q.push(inc.neighbor);
    }
  }
  return true;
}

std::vector<std::uint8_t> instance_open_mask(const CylinderInstance& instance, const PercConfig& config) {
  if (config.region_ptr() == instance.region) {
    return {config.open_mask().begin(), config.open_mask().end()};
  }
  const auto& region = *instance.region;
  std::vector<std::uint8_t> mask(region.num_edges(), 0);
  for (std::size_t e = 0; e < mask.size(); ++e) {
    const auto& ed = region.edge(e);
    const auto idx = config.region().find_edge(region.vertex(ed.lower), region.vertex(ed.upper));
    if (!idx) throw GeometryError("configuration region does not contain the cylinder edges");
    mask[e] = config.is_open(*idx) ? 1 : 0;
  }
  return mask;
}

std::int64_t open_capacity(std::span<const std::uint8_t> open_mask, std::span<const std::size_t> edges) {
  std::int64_t c = 0;
  for (auto e : edges) c += open_mask[e] ? 1 : 0;
  return c;
}

namespace {

struct WeightedCut {
  std::int64_t value = 0;
  std::vector<std::size_t> edges;
};

WeightedCut solve_cut(const CylinderInstance& instance, std::span<const std::int64_t> capacity) {
  const auto& region = *instance.region;
  const auto nv = static_cast<std::uint32_t>(region.num_vertices());
  std::int64_t total = 0;
  for (auto c : capacity) total += c;
  const std::int64_t terminal = total + 1;
  MaxFlow flow(nv + 2);
  const std::uint32_t source = nv, sink = nv + 1;
  const auto edges = region.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) flow.add_arc(edges[e].lower, edges[e].upper, capacity[e], capacity[e]);
  for (auto v : instance.c1) flow.add_arc(source, v, terminal);
  for (auto v : instance.c2) flow.add_arc(v, sink, terminal);
  WeightedCut cut;
  cut.value = flow.solve(source, sink);
  const auto reach = flow.source_side();
  for (std::size_t e = 0; e < edges.size(); ++e)
    if (reach[edges[e].lower] != reach[edges[e].upper]) cut.edges.push_back(e);
  return cut;
}

void check_mask(const CylinderInstance& instance, std::span<const std::uint8_t> open_mask) {
  if (open_mask.size() != instance.region->num_edges())
    throw GeometryError("open mask does not match the cylinder edges");
}

}  // namespace

CutResult min_open_cut(const CylinderInstance& instance, std::span<const std::uint8_t> open_mask) {
  check_mask(instance, open_mask);
  std::vector<std::int64_t> cap(open_mask.size());
  for (std::size_t e = 0; e < cap.size(); ++e) cap[e] = open_mask[e] ? 1 : 0;
  auto cut = solve_cut(instance, cap);
  CutResult out;
  out.tau = open_capacity(open_mask, cut.edges);
  out.cardinality = cut.edges.size();
  out.cut_edges = std::move(cut.edges);
  out.flow_value = cut.value;
  if (out.flow_value != out.tau) throw std::logic_error("max-flow/min-cut mismatch");
  return out;
}

CutResult min_open_cut(const CylinderInstance& instance, const PercConfig& config) {
  return min_open_cut(instance, instance_open_mask(instance, config));
}

CutResult min_cardinality_min_cut(const CylinderInstance& instance, std::span<const std::uint8_t> open_mask) {
  check_mask(instance, open_mask);
  const auto big = static_cast<std::int64_t>(open_mask.size()) + 1;
  std::vector<std::int64_t> cap(open_mask.size());
  for (std::size_t e = 0; e < cap.size(); ++e) cap[e] = (open_mask[e] ? big : 0) + 1;
  auto cut = solve_cut(instance, cap);
  CutResult out;
  out.tau = open_capacity(open_mask, cut.edges);
  out.cardinality = cut.edges.size();
  out.cut_edges = std::move(cut.edges);
  out.flow_value = cut.value / big;
  if (out.flow_value != out.tau || cut.value % big != static_cast<std::int64_t>(out.cardinality))
    throw std::logic_error("lexicographic cut value does not decompose");
  return out;
}

CutResult min_cardinality_min_cut(const CylinderInstance& instance, const PercConfig& config) {
  return min_cardinality_min_cut(instance, instance_open_mask(instance, config));
}

std::string cut_to_ndjson(const CylinderInstance& instance, const CutResult& cut, double p, std::uint64_t seed) {
  nlohmann::json j;
  j["n"] = instance.n;
  j["v"] = instance.direction;
  j["p"] = p;
  j["seed"] = seed;
  j["tau"] = cut.tau;
  j["cardinality"] = cut.cardinality;
  j["cut-edge-indices"] = cut.cut_edges;
  return j.dump();
}

}  // namespace percolab
