#include "percolab/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>
#include <numbers>
#include <set>

#include <json.hpp>

#include "percolab/errors.hpp"

namespace percolab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

Point sub(std::span<const double> a, std::span<const double> b) {
  Point out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

Point cross(std::span<const double> a, std::span<const double> b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

Point unit(std::span<const double> x) {
  const double n = norm2(x);
  if (!(n > 0.0)) throw DomainError("zero vector has no direction");
  Point out(x.begin(), x.end());
  for (auto& c : out) c /= n;
  return out;
}

double cross2(std::span<const double> o, std::span<const double> a, std::span<const double> b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

void check_dim(int d) {
  if (d != 2 && d != 3) throw GeometryError("polytope construction supports d = 2 and d = 3 only");
}

// Distance from x to the segment [a, b].
double segment_distance(std::span<const double> x, std::span<const double> a, std::span<const double> b) {
  const auto ab = sub(b, a);
  const auto ax = sub(x, a);
  const double len2 = dot(ab, ab);
  const double t = len2 > 0.0 ? std::clamp(dot(ax, ab) / len2, 0.0, 1.0) : 0.0;
  Point y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = a[i] + t * ab[i] - x[i];
  return norm2(y);
}

// ---- dual hulls -------------------------------------------------------------

// Outward (unit normal, offset) planes of the convex hull of `pts`.
std::vector<std::pair<Point, double>> hull_planes_2d(const std::vector<Point>& pts, double scale) {
  std::vector<std::size_t> idx(pts.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) {
    return pts[a][0] < pts[b][0] || (pts[a][0] == pts[b][0] && pts[a][1] < pts[b][1]);
  });
  const double eps = 1e-12 * scale * scale;
  std::vector<std::size_t> hull(2 * idx.size());
  std::size_t k = 0;
  for (auto i : idx) {
    while (k >= 2 && cross2(pts[hull[k - 2]], pts[hull[k - 1]], pts[i]) <= eps) --k;
    hull[k++] = i;
  }
  for (std::size_t j = idx.size() - 1, lower = k + 1; j-- > 0;) {
    const auto i = idx[j];
    while (k >= lower && cross2(pts[hull[k - 2]], pts[hull[k - 1]], pts[i]) <= eps) --k;
    hull[k++] = i;
  }
  hull.resize(k - 1);
  if (hull.size() < 3) throw GeometryError("directions do not surround the origin; intersection is unbounded");
  std::vector<std::pair<Point, double>> planes;
  for (std::size_t j = 0; j < hull.size(); ++j) {
    const auto& a = pts[hull[j]];
    const auto& b = pts[hull[(j + 1) % hull.size()]];
    Point n{b[1] - a[1], a[0] - b[0]};  // outward for a counterclockwise hull
    const double len = norm2(n);
    n[0] /= len;
    n[1] /= len;
    planes.emplace_back(n, dot(n, a));
  }
  return planes;
}

struct HullFace {
  std::array<std::size_t, 3> v;
  Point normal;  // unit, outward
  double offset;
  bool alive = true;
};

HullFace make_face(const std::vector<Point>& pts, std::size_t a, std::size_t b, std::size_t c) {
  auto n = cross(sub(pts[b], pts[a]), sub(pts[c], pts[a]));
  const double len = norm2(n);
  if (len > 0.0)
    for (auto& x : n) x /= len;
  return HullFace{{a, b, c}, n, dot(n, pts[a])};
}

// Incremental 3D hull. Points are inserted in order of decreasing norm so
// that near-coplanar interior points are met after the extreme ones.
std::vector<std::pair<Point, double>> hull_planes_3d(const std::vector<Point>& pts, double scale) {
  const double eps = 1e-12 * scale;
  const std::size_t m = pts.size();
  if (m < 4) throw GeometryError("fewer than d + 1 constraint directions");
  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return norm2(pts[a]) > norm2(pts[b]); });

  // Initial simplex from extreme points.
  const std::size_t i0 = order[0];
  std::size_t i1 = i0, i2 = i0, i3 = i0;
  double best = 0.0;
  for (auto i : order)
    if (double dd = norm2(sub(pts[i], pts[i0])); dd > best) best = dd, i1 = i;
  best = 0.0;
  for (auto i : order)
    if (double dd = norm2(cross(sub(pts[i1], pts[i0]), sub(pts[i], pts[i0]))); dd > best) best = dd, i2 = i;
  best = 0.0;
  const auto base = make_face(pts, i0, i1, i2);
  for (auto i : order)
    if (double dd = std::abs(dot(base.normal, pts[i]) - base.offset); dd > best) best = dd, i3 = i;
  if (i1 == i0 || i2 == i0 || best <= eps * 1e3)
    throw GeometryError("constraint directions are degenerate; intersection is unbounded");

  std::vector<HullFace> faces;
  Point centroid(3, 0.0);
  for (auto i : {i0, i1, i2, i3})
    for (int k = 0; k < 3; ++k) centroid[k] += pts[i][k] / 4.0;
  auto add_face = [&](std::size_t a, std::size_t b, std::size_t c) {
    auto f = make_face(pts, a, b, c);
    if (dot(f.normal, centroid) > f.offset) f = make_face(pts, a, c, b);
    faces.push_back(std::move(f));
  };
  add_face(i0, i1, i2);
  add_face(i0, i1, i3);
  add_face(i0, i2, i3);
  add_face(i1, i2, i3);

  for (auto p : order) {
    if (p == i0 || p == i1 || p == i2 || p == i3) continue;
    std::vector<std::size_t> visible;
    for (std::size_t f = 0; f < faces.size(); ++f)
      if (faces[f].alive && dot(faces[f].normal, pts[p]) - faces[f].offset > eps) visible.push_back(f);
    if (visible.empty()) continue;
    std::set<std::pair<std::size_t, std::size_t>> edges;
    for (auto f : visible)
      for (int k = 0; k < 3; ++k) edges.emplace(faces[f].v[k], faces[f].v[(k + 1) % 3]);
    for (auto f : visible) faces[f].alive = false;
    for (const auto& [a, b] : edges)
      if (!edges.count({b, a})) faces.push_back(make_face(pts, a, b, p));
  }

  std::vector<std::pair<Point, double>> planes;
  for (const auto& f : faces) {
    if (!f.alive) continue;
    if (std::abs(norm2(f.normal) - 1.0) > 1e-6) continue;  // collinear sliver
    planes.emplace_back(f.normal, f.offset);
  }
  return planes;
}

void order_facet_2d(const Polytope& poly, const Point& n, std::vector<std::size_t>& ids) {
  const Point t{-n[1], n[0]};
  std::sort(ids.begin(), ids.end(), [&](auto a, auto b) { return dot(t, poly.vertices[a]) < dot(t, poly.vertices[b]); });
}

double facet_area(const Polytope& poly, const Point& n, const std::vector<std::size_t>& ids) {
  if (poly.d == 2) return norm2(sub(poly.vertices[ids.back()], poly.vertices[ids.front()]));
  // Shoelace in the facet plane (vertices already ordered).
  Point s(3, 0.0);
  for (std::size_t k = 0; k < ids.size(); ++k) {
    const auto c = cross(poly.vertices[ids[k]], poly.vertices[ids[(k + 1) % ids.size()]]);
    for (int i = 0; i < 3; ++i) s[i] += c[i];
  }
  return std::abs(dot(s, n)) / 2.0;
}

void order_facet_3d(const Polytope& poly, const Point& n, std::vector<std::size_t>& ids) {
  Point c(3, 0.0);
  for (auto i : ids)
    for (int k = 0; k < 3; ++k) c[k] += poly.vertices[i][k] / static_cast<double>(ids.size());
  Point helper = std::abs(n[0]) < 0.9 ? Point{1, 0, 0} : Point{0, 1, 0};
  const auto u = unit(cross(n, helper));
  const auto w = cross(n, u);
  std::vector<std::pair<double, std::size_t>> keyed;
  for (auto i : ids) {
    const auto r = sub(poly.vertices[i], c);
    keyed.emplace_back(std::atan2(dot(r, w), dot(r, u)), i);
  }
  std::sort(keyed.begin(), keyed.end());
  for (std::size_t k = 0; k < ids.size(); ++k) ids[k] = keyed[k].second;
}

}  // namespace

// ---- NormSpec ---------------------------------------------------------------

NormSpec NormSpec::l1(int d) { return NormSpec(Kind::L1, d); }
NormSpec NormSpec::l2(int d) { return NormSpec(Kind::L2, d); }
NormSpec NormSpec::linf(int d) { return NormSpec(Kind::LInf, d); }

NormSpec NormSpec::axis_weighted(std::vector<double> weights) {
  for (double w : weights)
    if (!(w > 0.0)) throw ParameterError("axis weights must be positive");
  NormSpec n(Kind::AxisWeighted, static_cast<int>(weights.size()));
  n.weights_ = std::move(weights);
  return n;
}

NormSpec NormSpec::table(int d, const std::vector<std::pair<Direction, double>>& samples) {
  NormSpec n(Kind::Table, d);
  std::vector<std::pair<Direction, double>> units;
  for (const auto& [v, x] : samples) {
    if (static_cast<int>(v.size()) != d) throw ParameterError("table direction has wrong dimension");
    if (!(x > 0.0) || !std::isfinite(x)) throw ParameterError("table norm values must be positive and finite");
    units.emplace_back(unit(v), x);
  }
  auto find = [&](const Direction& v) -> std::ptrdiff_t {
    for (std::size_t i = 0; i < n.samples_.size(); ++i)
      if (norm2(sub(n.samples_[i].first, v)) <= 1e-9) return static_cast<std::ptrdiff_t>(i);
    return -1;
  };
  // Average repeated directions, then tau(v) and tau(-v).
  std::vector<int> counts;
  for (const auto& [v, x] : units) {
    if (auto i = find(v); i >= 0) {
      n.samples_[static_cast<std::size_t>(i)].second += x;
      ++counts[static_cast<std::size_t>(i)];
    } else {
      n.samples_.emplace_back(v, x);
      counts.push_back(1);
    }
  }
  for (std::size_t i = 0; i < n.samples_.size(); ++i) n.samples_[i].second /= counts[i];
  const std::size_t base = n.samples_.size();
  for (std::size_t i = 0; i < base; ++i) {
    Direction neg = n.samples_[i].first;
    for (auto& c : neg) c = -c;
    if (auto j = find(neg); j >= 0) {
      if (static_cast<std::size_t>(j) > i) {
        const double avg = (n.samples_[i].second + n.samples_[static_cast<std::size_t>(j)].second) / 2.0;
        n.samples_[i].second = avg;
        n.samples_[static_cast<std::size_t>(j)].second = avg;
      }
    } else {
      n.samples_.emplace_back(std::move(neg), n.samples_[i].second);
    }
  }
  if (n.samples_.empty()) throw ParameterError("table norm needs samples");
  return n;
}

std::string NormSpec::name() const {
  switch (kind_) {
    case Kind::L1: return "l1";
    case Kind::L2: return "l2";
    case Kind::LInf: return "linf";
    case Kind::AxisWeighted: return "axis-weighted";
    case Kind::Table: return "table";
  }
  return "unknown";
}

NormSpec NormSpec::scaled(double c) const {
  if (!(c > 0.0)) throw ParameterError("norm scale must be positive");
  NormSpec out = *this;
  out.scale_ *= c;
  return out;
}

std::size_t NormSpec::nearest(std::span<const double> u) const {
  std::size_t best = 0;
  double score = -kInf;
  for (std::size_t i = 0; i < samples_.size(); ++i)
    if (double s = dot(samples_[i].first, u); s > score) score = s, best = i;
  return best;
}

double NormSpec::operator()(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != d_) throw ParameterError("norm argument has wrong dimension");
  double v = 0.0;
  switch (kind_) {
    case Kind::L1:
      for (double c : x) v += std::abs(c);
      break;
    case Kind::L2:
      v = norm2(x);
      break;
    case Kind::LInf:
      for (double c : x) v = std::max(v, std::abs(c));
      break;
    case Kind::AxisWeighted:
      for (std::size_t i = 0; i < x.size(); ++i) v += weights_[i] * std::abs(x[i]);
      break;
    case Kind::Table: {
      const double r = norm2(x);
      if (r == 0.0) return 0.0;
      const auto u = unit(x);
      v = r * samples_[nearest(u)].second;
      break;
    }
  }
  return scale_ * v;
}

double NormSpec::resolution(std::span<const double> x) const {
  if (kind_ != Kind::Table) return 0.0;
  const auto u = unit(x);
  return norm2(sub(samples_[nearest(u)].first, u));
}

// ---- Polytope ---------------------------------------------------------------

double Polytope::volume() const {
  if (d == 2) {
    double s = 0.0;
    for (std::size_t k = 0; k < vertices.size(); ++k) {
      const auto& a = vertices[k];
      const auto& b = vertices[(k + 1) % vertices.size()];
      s += a[0] * b[1] - a[1] * b[0];
    }
    return std::abs(s) / 2.0;
  }
  // Cone decomposition from the origin over each facet.
  double s = 0.0;
  for (const auto& f : facets) s += f.area * dot(f.normal, vertices[f.vertex_ids.front()]);
  return s / d;
}

double Polytope::support(std::span<const double> u) const {
  double best = -kInf;
  for (const auto& v : vertices) best = std::max(best, dot(u, v));
  return best;
}

double Polytope::gauge(std::span<const double> x) const {
  double best = 0.0;
  for (const auto& h : halfspaces) best = std::max(best, dot(h.normal, x) / h.offset);
  return best;
}

bool Polytope::contains(std::span<const double> x, double tol) const {
  for (const auto& h : halfspaces)
    if (dot(h.normal, x) > h.offset + tol * std::max(1.0, h.offset)) return false;
  return true;
}

double Polytope::circumradius() const {
  double r = 0.0;
  for (const auto& v : vertices) r = std::max(r, norm2(v));
  return r;
}

double Polytope::inradius() const {
  double r = kInf;
  for (const auto& h : halfspaces) r = std::min(r, h.offset);
  return r;
}

Polytope polytope_from_halfspaces(int d, std::vector<Halfspace> input) {
  check_dim(d);
  const double tol = kGeometryTolerances.geometry;
  Polytope poly;
  poly.d = d;
  for (auto& h : input) {
    if (static_cast<int>(h.normal.size()) != d) throw ParameterError("halfspace normal has wrong dimension");
    const double len = norm2(h.normal);
    if (!(len > 0.0)) throw ParameterError("halfspace normal is zero");
    if (!(h.offset > 0.0)) throw GeometryError("origin must lie strictly inside every halfspace");
    for (auto& c : h.normal) c /= len;
    h.offset /= len;
    auto same = std::find_if(poly.halfspaces.begin(), poly.halfspaces.end(),
                             [&](const Halfspace& g) { return norm2(sub(g.normal, h.normal)) <= 1e-12; });
    if (same != poly.halfspaces.end())
      same->offset = std::min(same->offset, h.offset);
    else
      poly.halfspaces.push_back(std::move(h));
  }
  if (static_cast<int>(poly.halfspaces.size()) < d + 1)
    throw GeometryError("fewer than d + 1 constraint directions; intersection is unbounded");

  std::vector<Point> dual;
  double scale = 0.0;
  for (const auto& h : poly.halfspaces) {
    Point z = h.normal;
    for (auto& c : z) c /= h.offset;
    scale = std::max(scale, norm2(z));
    dual.push_back(std::move(z));
  }
  const auto planes = d == 2 ? hull_planes_2d(dual, scale) : hull_planes_3d(dual, scale);

  for (const auto& [n, c] : planes) {
    if (!(c > 1e-9 * scale)) throw GeometryError("directions do not surround the origin; intersection is unbounded");
    Point x = n;
    for (auto& v : x) v /= c;
    const double rx = std::max(1.0, norm2(x));
    const bool dup = std::any_of(poly.vertices.begin(), poly.vertices.end(),
                                 [&](const Point& y) { return norm2(sub(x, y)) <= tol * rx; });
    if (!dup) poly.vertices.push_back(std::move(x));
  }
  if (d == 2)
    std::sort(poly.vertices.begin(), poly.vertices.end(),
              [](const Point& a, const Point& b) { return std::atan2(a[1], a[0]) < std::atan2(b[1], b[0]); });

  for (const auto& h : poly.halfspaces) {
    std::vector<std::size_t> ids;
    for (std::size_t i = 0; i < poly.vertices.size(); ++i)
      if (std::abs(dot(h.normal, poly.vertices[i]) - h.offset) <= tol * std::max(1.0, h.offset)) ids.push_back(i);
    if (static_cast<int>(ids.size()) < d) continue;
    if (d == 2)
      order_facet_2d(poly, h.normal, ids);
    else
      order_facet_3d(poly, h.normal, ids);
    const double area = facet_area(poly, h.normal, ids);
    if (area <= tol) continue;
    poly.facets.push_back(Facet{h.normal, area, std::move(ids)});
  }
  return poly;
}

std::vector<Direction> norm_directions(const NormSpec& norm) {
  std::vector<Direction> out;
  for (const auto& [v, x] : norm.samples()) out.push_back(v);
  return out;
}

Polytope wulff_polytope(const NormSpec& norm, std::span<const Direction> directions) {
  if (static_cast<int>(directions.size()) < norm.dim() + 1)
    throw GeometryError("need at least d + 1 directions for a bounded Wulff body");
  std::vector<Halfspace> hs;
  for (const auto& v : directions) {
    if (static_cast<int>(v.size()) != norm.dim()) throw ParameterError("direction has wrong dimension");
    auto u = unit(v);
    const double t = norm(u);
    hs.push_back(Halfspace{std::move(u), t});
  }
  return polytope_from_halfspaces(norm.dim(), std::move(hs));
}

double dual_norm_eval(const NormSpec& norm, std::span<const double> x, std::span<const Direction> directions) {
  if (norm2(x) == 0.0) throw DomainError("dual norm evaluated at the zero vector");
  if (directions.empty()) throw GeometryError("dual norm needs directions");
  double best = -kInf;
  for (const auto& v : directions) {
    const auto u = unit(v);
    best = std::max(best, dot(x, u) / norm(u));
  }
  return best;
}

double bidual_norm_eval(const NormSpec& norm, std::span<const double> v, std::span<const Direction> directions) {
  return wulff_polytope(norm, directions).support(v);
}

double surface_energy(const Polytope& polytope, const NormSpec& norm) {
  double total = 0.0;
  int skipped = 0;
  for (const auto& f : polytope.facets) {
    if (!(f.area > 0.0)) {
      ++skipped;
      continue;
    }
    total += norm(f.normal) * f.area;
  }
  if (skipped > 0) std::clog << "warning: surface_energy skipped " << skipped << " degenerate facet(s)\n";
  return total;
}

Polytope scale(const Polytope& polytope, double lambda) {
  if (!(lambda > 0.0)) throw ParameterError("scale factor must be positive");
  Polytope out = polytope;
  for (auto& h : out.halfspaces) h.offset *= lambda;
  for (auto& v : out.vertices)
    for (auto& c : v) c *= lambda;
  const double area_factor = std::pow(lambda, polytope.d - 1);
  for (auto& f : out.facets) f.area *= area_factor;
  return out;
}

Polytope scale_to_volume(const Polytope& polytope, double target) {
  if (!(target > 0.0)) throw ParameterError("target volume must be positive");
  const double vol = polytope.volume();
  if (!(vol > 0.0)) throw GeometryError("polytope has zero volume");
  return scale(polytope, std::pow(target / vol, 1.0 / polytope.d));
}

double distance_to_polytope(std::span<const double> x, const Polytope& q) {
  if (q.contains(x, 0.0)) return 0.0;
  double best = kInf;
  for (const auto& f : q.facets) {
    const auto& ids = f.vertex_ids;
    if (q.d == 2) {
      best = std::min(best, segment_distance(x, q.vertices[ids.front()], q.vertices[ids.back()]));
      continue;
    }
    const double h = dot(f.normal, x) - dot(f.normal, q.vertices[ids.front()]);
    Point y(x.begin(), x.end());
    for (int i = 0; i < 3; ++i) y[i] -= h * f.normal[i];
    bool inside = true;
    for (std::size_t k = 0; k < ids.size() && inside; ++k) {
      const auto& a = q.vertices[ids[k]];
      const auto& b = q.vertices[ids[(k + 1) % ids.size()]];
      inside = dot(cross(sub(b, a), sub(y, a)), f.normal) >= -1e-12;
    }
    if (inside) {
      best = std::min(best, std::abs(h));
    } else {
      for (std::size_t k = 0; k < ids.size(); ++k)
        best = std::min(best, segment_distance(x, q.vertices[ids[k]], q.vertices[ids[(k + 1) % ids.size()]]));
    }
  }
  return best;
}

double hausdorff_distance(const Polytope& p, const Polytope& q) {
  if (p.d != q.d) throw ParameterError("Hausdorff distance across dimensions");
  if (p.vertices.empty() || q.vertices.empty()) throw GeometryError("Hausdorff distance of an empty polytope");
  double best = 0.0;
  for (const auto& v : p.vertices) best = std::max(best, distance_to_polytope(v, q));
  for (const auto& v : q.vertices) best = std::max(best, distance_to_polytope(v, p));
  return best;
}

double hausdorff_to_ball(const Polytope& p, double r) {
  return std::max({p.circumradius() - r, r - p.inradius(), 0.0});
}

std::vector<Direction> sphere_directions(int d, std::size_t count) {
  check_dim(d);
  std::vector<Direction> out;
  out.reserve(count);
  if (d == 2) {
    for (std::size_t k = 0; k < count; ++k) {
      const double a = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(count);
      out.push_back({std::cos(a), std::sin(a)});
    }
    return out;
  }
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (std::size_t k = 0; k < count; ++k) {
    const double z = 1.0 - (2.0 * static_cast<double>(k) + 1.0) / static_cast<double>(count);
    const double r = std::sqrt(1.0 - z * z);
    const double phi = golden * static_cast<double>(k);
    out.push_back({r * std::cos(phi), r * std::sin(phi), z});
  }
  return out;
}

double sphere_mesh(int d, std::size_t count) {
  check_dim(d);
  if (d == 2) return std::numbers::pi / static_cast<double>(count);
  // Largest nearest-neighbour angle of the Fibonacci grid; the covering
  // radius of a near-equilateral triangulation does not exceed it.
  const auto dirs = sphere_directions(3, count);
  double worst = 0.0;
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    double closest = -1.0;
    for (std::size_t j = 0; j < dirs.size(); ++j)
      if (j != i) closest = std::max(closest, dot(dirs[i], dirs[j]));
    worst = std::max(worst, std::acos(std::clamp(closest, -1.0, 1.0)));
  }
  return worst;
}

ChainBound hausdorff_chain_bound(const Polytope& p, const Polytope& q, std::size_t grid) {
  if (p.d != q.d) throw ParameterError("chain bound across dimensions");
  ChainBound out;
  out.hausdorff = hausdorff_distance(p, q);
  auto ys = sphere_directions(p.d, grid);
  for (const auto* poly : {&p, &q})
    for (const auto& v : poly->vertices) ys.push_back(unit(v));
  for (const auto& y : ys) {
    const double gp = p.gauge(y), gq = q.gauge(y);
    out.dual_gap = std::max(out.dual_gap, std::abs(gp - gq));
    out.radial_gap = std::max(out.radial_gap, std::abs(1.0 / gp - 1.0 / gq));
  }
  const double big_r = std::max(p.circumradius(), q.circumradius());
  const double small_r = std::min(p.inradius(), q.inradius());
  out.scaled_bound = big_r * big_r * out.dual_gap;
  out.tolerance = 2.0 * big_r * big_r / small_r * sphere_mesh(p.d, grid);
  out.holds = out.hausdorff <= out.radial_gap + out.tolerance;
  return out;
}

ScaledCrystal crystal_from_norm(const NormSpec& norm, std::span<const Direction> directions, double theta) {
  if (!(theta > 0.0 && theta <= 1.0)) throw ParameterError("theta must lie in (0,1]");
  ScaledCrystal c;
  c.theta = theta;
  c.target_volume = 1.0 / theta;
  c.polytope = scale_to_volume(wulff_polytope(norm, directions), c.target_volume);
  c.volume = c.polytope.volume();
  c.surface_energy = surface_energy(c.polytope, norm);
  return c;
}

ScaledCrystal crystal_pipeline(const NormTable& table, std::size_t p_index, double theta) {
  const auto values = table.values_at(p_index);
  if (static_cast<int>(values.size()) < table.dim())
    throw GeometryError("norm table has too few directions at this p for a bounded crystal");
  const auto norm = NormSpec::table(table.dim(), values);
  const auto dirs = norm_directions(norm);
  return crystal_from_norm(norm, dirs, theta);
}

std::string polytope_json(const Polytope& polytope) {
  nlohmann::ordered_json j;
  j["halfspaces"] = nlohmann::json::array();
  for (const auto& h : polytope.halfspaces) j["halfspaces"].push_back({{"normal", h.normal}, {"offset", h.offset}});
  j["vertices"] = polytope.vertices;
  j["facets"] = nlohmann::json::array();
  for (const auto& f : polytope.facets)
    j["facets"].push_back({{"normal", f.normal}, {"area", f.area}, {"vertexIds", f.vertex_ids}});
  return j.dump();
}

std::string crystal_json(const ScaledCrystal& crystal) {
  auto j = nlohmann::ordered_json::parse(polytope_json(crystal.polytope));
  j["theta"] = crystal.theta;
  j["targetVolume"] = crystal.target_volume;
  j["volume"] = crystal.volume;
  j["surfaceEnergy"] = crystal.surface_energy;
  return j.dump();
}

}  // namespace percolab
