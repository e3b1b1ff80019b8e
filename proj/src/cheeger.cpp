#include "percolab/cheeger.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include <json.hpp>

#include "percolab/clusters.hpp"
#include "percolab/errors.hpp"
#include "percolab/io.hpp"
#include "percolab/parallel.hpp"
#include "percolab/rng.hpp"
#include "percolab/stats.hpp"

namespace percolab {

namespace {

std::uint32_t origin_id(const Region& region) {
  const auto o = region.find(Vertex(region.dim()));
  if (!o) throw GeometryError("origin outside the region");
  return *o;
}

int open_degree(const PercConfig& config, std::uint32_t v) {
  int k = 0;
  for (const auto& inc : config.region().incident(v)) k += config.is_open(inc.edge);
  return k;
}

// a/b < c/d for positive denominators.
bool ratio_less(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d) { return a * d < c * b; }

// Strictly better witness: smaller ratio, ties to the larger set.
bool better(std::int64_t boundary, std::int64_t size, std::int64_t best_boundary, std::int64_t best_size) {
  if (ratio_less(boundary, size, best_boundary, best_size)) return true;
  return !ratio_less(best_boundary, best_size, boundary, size) && size > best_size;
}

CheegerResult degenerate_result(const PercConfig& config, std::uint32_t origin, int n, std::size_t cap,
                                CheegerMode mode) {
  CheegerResult r;
  r.mode = mode;
  r.n = n;
  r.size_cap = cap;
  r.degenerate = true;
  r.value = 0.0;
  r.witness.vertices = {origin};
  r.witness.open_boundary = 0;
  (void)config;
  return r;
}

// Connected-set enumeration rooted at the origin (Redelmeier's scheme): each
// open-connected set containing the root is visited exactly once.
class Enumerator {
 public:
  Enumerator(const PercConfig& config, std::size_t cap) : config_(config), cap_(cap) {
    const auto nv = config.region().num_vertices();
    seen_.assign(nv, 0);
    in_set_.assign(nv, 0);
  }

  CheegerResult run(std::uint32_t origin) {
    seen_[origin] = 1;
    std::vector<std::uint32_t> untried{origin};
    recurse(untried, 0);
    CheegerResult r;
    r.witness.vertices = best_;
    std::sort(r.witness.vertices.begin(), r.witness.vertices.end());
    r.witness.open_boundary = best_boundary_;
    r.value = r.witness.ratio();
    r.work = visited_;
    return r;
  }

 private:
  void recurse(std::vector<std::uint32_t> untried, std::int64_t boundary) {
    if (!set_.empty()) {
      ++visited_;
      const auto size = static_cast<std::int64_t>(set_.size());
      if (best_.empty() || better(boundary, size, best_boundary_, static_cast<std::int64_t>(best_.size()))) {
        best_ = set_;
        best_boundary_ = boundary;
      }
    }
    if (set_.size() == cap_) return;
    const auto& region = config_.region();
    while (!untried.empty()) {
      const auto w = untried.back();
      untried.pop_back();
      if (!region.has_all_neighbors(w))
        throw GeometryError("region too small: candidate set reaches the region boundary");
      std::vector<std::uint32_t> added;
      int into_set = 0, open_deg = 0;
      for (const auto& inc : region.incident(w)) {
        if (!config_.is_open(inc.edge)) continue;
        ++open_deg;
        if (in_set_[inc.neighbor]) {
          ++into_set;
        } else if (!seen_[inc.neighbor]) {
          seen_[inc.neighbor] = 1;
          added.push_back(inc.neighbor);
        }
      }
      set_.push_back(w);
      in_set_[w] = 1;
      auto next = untried;
      next.insert(next.end(), added.begin(), added.end());
      recurse(std::move(next), boundary + open_deg - 2 * into_set);
      in_set_[w] = 0;
      set_.pop_back();
      for (auto u : added) seen_[u] = 0;
    }
  }

  const PercConfig& config_;
  std::size_t cap_;
  std::vector<std::uint8_t> seen_;
  std::vector<std::uint8_t> in_set_;
  std::vector<std::uint32_t> set_;
  std::vector<std::uint32_t> best_;
  std::int64_t best_boundary_ = 0;
  std::uint64_t visited_ = 0;
};

// Vector with O(1) insert, erase and uniform pick.
class IndexedSet {
 public:
  explicit IndexedSet(std::size_t universe) : pos_(universe, kAbsent) {}
  bool contains(std::uint32_t v) const { return pos_[v] != kAbsent; }
  void insert(std::uint32_t v) {
    if (contains(v)) return;
    pos_[v] = items_.size();
    items_.push_back(v);
  }
  void erase(std::uint32_t v) {
    const auto i = pos_[v];
    if (i == kAbsent) return;
    items_[i] = items_.back();
    pos_[items_[i]] = i;
    items_.pop_back();
    pos_[v] = kAbsent;
  }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  std::uint32_t at(std::size_t i) const { return items_[i]; }
  const std::vector<std::uint32_t>& items() const { return items_; }

 private:
  static constexpr std::size_t kAbsent = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> pos_;
  std::vector<std::uint32_t> items_;
};

}  // namespace

std::string to_string(CheegerMode mode) { return mode == CheegerMode::Exact ? "exact" : "heuristic"; }

std::int64_t open_boundary(const PercConfig& config, std::span<const std::uint32_t> vertices) {
  const auto& region = config.region();
  std::vector<std::uint8_t> in(region.num_vertices(), 0);
  for (auto v : vertices) {
    if (v >= region.num_vertices()) throw LookupError("vertex id outside the region");
    in[v] = 1;
  }
  std::int64_t count = 0;
  for (auto v : vertices) {
    if (!region.has_all_neighbors(v)) throw GeometryError("region does not contain every neighbour of H");
    for (const auto& inc : region.incident(v))
      if (!in[inc.neighbor] && config.is_open(inc.edge)) ++count;
  }
  return count;
}

bool validate_candidate(const PercConfig& config, const CandidateSet& candidate, std::size_t cap) {
  const auto& region = config.region();
  const auto& vs = candidate.vertices;
  if (vs.empty() || vs.size() > cap) return false;
  std::vector<std::uint8_t> in(region.num_vertices(), 0);
  for (auto v : vs) {
    if (v >= region.num_vertices() || in[v]) return false;
    in[v] = 1;
  }
  const auto origin = region.find(Vertex(region.dim()));
  if (!origin || !in[*origin]) return false;
  std::vector<std::uint8_t> reached(region.num_vertices(), 0);
  std::vector<std::uint32_t> stack{*origin};
  reached[*origin] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    for (const auto& inc : region.incident(v))
      if (in[inc.neighbor] && !reached[inc.neighbor] && config.is_open(inc.edge)) {
        reached[inc.neighbor] = 1;
        ++count;
        stack.push_back(inc.neighbor);
      }
  }
  if (count != vs.size()) return false;
  return open_boundary(config, vs) == candidate.open_boundary;
}

std::size_t effective_cap(int d, int n, std::size_t size_cap) {
  if (n < 1) throw ParameterError("profile scale n must be >= 1");
  const double nd = std::pow(static_cast<double>(n), d);
  return nd < static_cast<double>(size_cap) ? static_cast<std::size_t>(nd) : size_cap;
}

CheegerResult exact_profile(const PercConfig& config, int n, std::size_t size_cap) {
  const auto& region = config.region();
  const std::size_t cap = effective_cap(region.dim(), n, size_cap);
  if (cap < 1) throw ParameterError("size cap must be >= 1");
  const auto origin = origin_id(region);
  if (!region.has_all_neighbors(origin)) throw GeometryError("region does not contain the origin's neighbours");
  if (open_degree(config, origin) == 0) return degenerate_result(config, origin, n, cap, CheegerMode::Exact);
  auto r = Enumerator(config, cap).run(origin);
  r.mode = CheegerMode::Exact;
  r.n = n;
  r.size_cap = cap;
  return r;
}

CheegerResult heuristic_profile(const PercConfig& config, int n, std::size_t budget, std::uint64_t seed,
                                const AnnealingSchedule& schedule, const CandidateSet* start) {
  const auto& region = config.region();
  const std::size_t cap = effective_cap(region.dim(), n, std::numeric_limits<std::size_t>::max());
  const auto origin = origin_id(region);
  if (!region.has_all_neighbors(origin)) throw GeometryError("region does not contain the origin's neighbours");
  if (open_degree(config, origin) == 0) return degenerate_result(config, origin, n, cap, CheegerMode::Heuristic);

  const auto nv = region.num_vertices();
  IndexedSet members(nv), frontier(nv);
  std::vector<int> links(nv, 0);  // open edges from a non-member into the set
  std::int64_t boundary = 0;

  auto add = [&](std::uint32_t w) {
    int into = 0, deg = 0;
    for (const auto& inc : region.incident(w)) {
      if (!config.is_open(inc.edge)) continue;
      ++deg;
      if (members.contains(inc.neighbor)) {
        ++into;
      } else if (links[inc.neighbor]++ == 0) {
        frontier.insert(inc.neighbor);
      }
    }
    members.insert(w);
    frontier.erase(w);
    links[w] = 0;
    boundary += deg - 2 * into;
  };
  auto remove = [&](std::uint32_t w) {
    int into = 0, deg = 0;
    for (const auto& inc : region.incident(w)) {
      if (!config.is_open(inc.edge)) continue;
      ++deg;
      if (members.contains(inc.neighbor)) {
        ++into;
      } else if (--links[inc.neighbor] == 0) {
        frontier.erase(inc.neighbor);
      }
    }
    members.erase(w);
    links[w] = into;
    if (into > 0) frontier.insert(w);
    boundary -= deg - 2 * into;
  };
  auto addable = [&](std::uint32_t w) {
    if (region.has_all_neighbors(w)) return true;
    if (schedule.confine_to_region) return false;
    throw GeometryError("region too small: candidate set reaches the region boundary");
  };
  // Removing w keeps the set open-connected through the origin.
  std::vector<std::uint32_t> mark(nv, 0);
  std::uint32_t stamp = 0;
  std::vector<std::uint32_t> stack;
  auto removable = [&](std::uint32_t w) {
    if (w == origin) return false;
    ++stamp;
    mark[w] = stamp;
    mark[origin] = stamp;
    stack.assign(1, origin);
    std::size_t count = 1;
    while (!stack.empty()) {
      const auto v = stack.back();
      stack.pop_back();
      for (const auto& inc : region.incident(v))
        if (config.is_open(inc.edge) && members.contains(inc.neighbor) && mark[inc.neighbor] != stamp) {
          mark[inc.neighbor] = stamp;
          ++count;
          stack.push_back(inc.neighbor);
        }
    }
    return count + 1 == members.size();
  };

  if (start) {
    if (!validate_candidate(config, *start, cap)) throw ParameterError("warm start is not an admissible set");
    add(origin);
    // Insert in breadth-first order from the origin so the set stays connected.
    std::vector<std::uint8_t> want(nv, 0);
    for (auto v : start->vertices) want[v] = 1;
    std::vector<std::uint32_t> queue{origin};
    for (std::size_t head = 0; head < queue.size(); ++head)
      for (const auto& inc : region.incident(queue[head]))
        if (want[inc.neighbor] && !members.contains(inc.neighbor) && config.is_open(inc.edge)) {
          add(inc.neighbor);
          queue.push_back(inc.neighbor);
        }
  } else {
    add(origin);
  }

  std::vector<std::uint32_t> best = members.items();
  std::int64_t best_boundary = boundary;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double t0 = schedule.t_start, t1 = schedule.t_end;
  const double cool = budget > 1 ? std::pow(t1 / t0, 1.0 / static_cast<double>(budget - 1)) : 1.0;
  double temp = t0;
  for (std::size_t step = 0; step < budget; ++step, temp *= cool) {
    const auto size = static_cast<std::int64_t>(members.size());
    const double current = static_cast<double>(boundary) / static_cast<double>(size);
    const bool can_add = members.size() < cap && !frontier.empty();
    const bool can_remove = members.size() > 1;
    if (!can_add && !can_remove) break;
    const bool try_add = can_add && (!can_remove || unif(rng) < 0.5);
    if (try_add) {
      const auto w = frontier.at(static_cast<std::size_t>(unif(rng) * static_cast<double>(frontier.size())));
      if (!addable(w)) continue;
      add(w);
      const double next = static_cast<double>(boundary) / static_cast<double>(size + 1);
      if (next > current && unif(rng) >= std::exp((current - next) / temp)) {
        remove(w);
        continue;
      }
    } else {
      const auto w = members.at(static_cast<std::size_t>(unif(rng) * static_cast<double>(members.size())));
      if (!removable(w)) continue;
      remove(w);
      const double next = static_cast<double>(boundary) / static_cast<double>(size - 1);
      if (next > current && unif(rng) >= std::exp((current - next) / temp)) {
        add(w);
        continue;
      }
    }
    if (better(boundary, static_cast<std::int64_t>(members.size()), best_boundary,
               static_cast<std::int64_t>(best.size()))) {
      best = members.items();
      best_boundary = boundary;
    }
  }

  CheegerResult r;
  r.mode = CheegerMode::Heuristic;
  r.n = n;
  r.size_cap = cap;
  r.work = budget;
  r.witness.vertices = std::move(best);
  std::sort(r.witness.vertices.begin(), r.witness.vertices.end());
  r.witness.open_boundary = best_boundary;
  r.value = r.witness.ratio();
  return r;
}

ProfileExperiment profile_experiment(int d, double p, std::span<const int> n_grid, int replicas, std::uint64_t seed,
                                     const ProfileOptions& options) {
  if (replicas < 1) throw ParameterError("profile_experiment: replicas must be >= 1");
  if (n_grid.empty()) throw ParameterError("profile_experiment: n grid is empty");
  if (!std::is_sorted(n_grid.begin(), n_grid.end()) || n_grid.front() < 1)
    throw ParameterError("profile_experiment: n grid must be positive and increasing");
  const int n_max = n_grid.back();
  const int m = options.conditioning_radius > 0 ? options.conditioning_radius : n_max;
  const int radius = std::max(m, 2 * n_max) + 1;

  ProfileExperiment out;
  out.region = Region::cube(d, radius);
  const std::size_t nn = n_grid.size();
  out.rows.resize(static_cast<std::size_t>(replicas) * nn);
  parallel_for(static_cast<std::size_t>(replicas), [&](std::size_t r) {
    const auto field = sample_uniform_field(out.region, derive_seed(seed, "cheeger", {r}));
    const auto config = open_at(field, p);
    const bool passed = origin_reaches_boundary(config, m);
    std::optional<CandidateSet> previous;
    for (std::size_t k = 0; k < nn; ++k) {
      auto& row = out.rows[r * nn + k];
      row.d = d;
      row.p = p;
      row.n = n_grid[k];
      row.replica = static_cast<int>(r);
      row.mode = options.mode;
      row.passed_conditioning = passed;
      row.phi = std::numeric_limits<double>::quiet_NaN();
      if (!passed) continue;
      CheegerResult res;
      if (options.mode == CheegerMode::Exact) {
        res = exact_profile(config, n_grid[k], options.exact_cap);
      } else {
        res = heuristic_profile(config, n_grid[k], options.budget, derive_seed(seed, "anneal", {k, r}),
                                options.schedule, previous ? &*previous : nullptr);
        previous = res.witness;
      }
      row.phi = res.value;
      row.size = res.witness.size();
      row.boundary = res.witness.open_boundary;
      row.witness = std::move(res.witness);
    }
  });

  for (std::size_t k = 0; k < nn; ++k) {
    std::vector<double> xs;
    for (int r = 0; r < replicas; ++r) {
      const auto& row = out.rows[static_cast<std::size_t>(r) * nn + k];
      if (row.passed_conditioning) xs.push_back(row.n * row.phi);
    }
    if (xs.empty()) throw ExperimentError("no replica passed the conditioning proxy");
    ProfileSummary s;
    s.n = n_grid[k];
    s.passed = xs.size();
    s.mean_n_phi = stats::mean(xs);
    s.stderr_ = stats::standard_error(xs);
    s.prediction = options.prediction;
    out.summary.push_back(s);
  }
  return out;
}

void write_profile_csv(std::ostream& os, std::span<const ProfileRow> rows) {
  os << "d,p,n,replica,mode,phi,size,boundary,passedConditioning\n";
  for (const auto& r : rows)
    os << r.d << ',' << io::fmt_real(r.p) << ',' << r.n << ',' << r.replica << ',' << to_string(r.mode) << ','
       << io::fmt_real(r.phi) << ',' << r.size << ',' << r.boundary << ',' << (r.passed_conditioning ? 1 : 0)
       << '\n';
}

void write_profile_summary_csv(std::ostream& os, int d, double p, std::span<const ProfileSummary> rows) {
  os << "d,p,n,passed,mean_n_phi,stderr,prediction\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& r : rows)
    os << d << ',' << io::fmt_real(p) << ',' << r.n << ',' << r.passed << ',' << io::fmt_real(r.mean_n_phi) << ','
       << io::fmt_real(r.stderr_) << ',' << io::fmt_real(r.prediction.value_or(nan)) << '\n';
}

void write_witness_ndjson(std::ostream& os, const Region& region, std::span<const ProfileRow> rows) {
  for (const auto& r : rows) {
    if (!r.passed_conditioning) continue;
    nlohmann::json j;
    j["d"] = r.d;
    j["p"] = r.p;
    j["n"] = r.n;
    j["replica"] = r.replica;
    j["phi"] = r.phi;
    auto vs = nlohmann::json::array();
    for (auto v : r.witness.vertices) {
      const auto& x = region.vertex(v);
      std::vector<int> c(static_cast<std::size_t>(x.dim()));
      for (int i = 0; i < x.dim(); ++i) c[static_cast<std::size_t>(i)] = x[i];
      vs.push_back(c);
    }
    j["vertices"] = vs;
    os << j.dump() << '\n';
  }
}

}  // namespace percolab
