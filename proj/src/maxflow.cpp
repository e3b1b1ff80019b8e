#include "percolab/maxflow.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <stdexcept>

namespace percolab {

MaxFlow::MaxFlow(std::size_t nodes) : head_(nodes, -1), cursor_(nodes, -1), level_(nodes, -1) {}

std::size_t MaxFlow::add_arc(std::uint32_t from, std::uint32_t to, std::int64_t capacity,
                             std::int64_t reverse_capacity) {
  if (capacity < 0 || reverse_capacity < 0) throw std::invalid_argument("negative capacity");
  const auto idx = arcs_.size();
  arcs_.push_back(Arc{to, capacity, head_[from]});
  head_[from] = static_cast<std::int64_t>(idx);
  arcs_.push_back(Arc{from, reverse_capacity, head_[to]});
  head_[to] = static_cast<std::int64_t>(idx + 1);
  return idx;
}

bool MaxFlow::build_levels(std::uint32_t source, std::uint32_t sink) {
  std::fill(level_.begin(), level_.end(), -1);
  std::queue<std::uint32_t> q;
  level_[source] = 0;
  q.push(source);
  while (!q.empty()) {
    const auto v = q.front();
    q.pop();
    for (auto a = head_[v]; a != -1; a = arcs_[a].next) {
      const auto& arc = arcs_[a];
      if (arc.residual > 0 && level_[arc.to] < 0) {
        level_[arc.to] = level_[v] + 1;
        q.push(arc.to);
      }
    }
  }
  return level_[sink] >= 0;
}

std::int64_t MaxFlow::push(std::uint32_t v, std::uint32_t sink, std::int64_t limit) {
  if (v == sink) return limit;
  for (auto& a = cursor_[v]; a != -1; a = arcs_[a].next) {
    auto& arc = arcs_[a];
    if (arc.residual <= 0 || level_[arc.to] != level_[v] + 1) continue;
    const auto pushed = push(arc.to, sink, std::min(limit, arc.residual));
    if (pushed > 0) {
      arc.residual -= pushed;
      arcs_[a ^ 1].residual += pushed;
      return pushed;
    }
  }
  return 0;
}

std::int64_t MaxFlow::solve(std::uint32_t source, std::uint32_t sink) {
  source_ = source;
  std::int64_t total = 0;
  while (build_levels(source, sink)) {
    cursor_ = head_;
    while (auto pushed = push(source, sink, std::numeric_limits<std::int64_t>::max())) total += pushed;
  }
  return total;
}

std::vector<std::uint8_t> MaxFlow::source_side() const {
  std::vector<std::uint8_t> seen(head_.size(), 0);
  std::queue<std::uint32_t> q;
  seen[source_] = 1;
  q.push(source_);
  while (!q.empty()) {
    const auto v = q.front();
    q.pop();
    for (auto a = head_[v]; a != -1; a = arcs_[a].next) {
      const auto& arc = arcs_[a];
      if (arc.residual > 0 && !seen[arc.to]) {
        seen[arc.to] = 1;
        q.push(arc.to);
      }
    }
  }
  return seen;
}

}  // namespace percolab
