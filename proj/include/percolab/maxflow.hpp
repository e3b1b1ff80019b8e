#pragma once

#include <cstdint>
#include <vector>

namespace percolab {

// Dinic's algorithm on integer capacities. Arcs are stored in pairs so the
// residual partner of arc i is i ^ 1; an undirected edge is one pair with
// capacity on both sides.
class MaxFlow {
 public:
  explicit MaxFlow(std::size_t nodes);

  std::size_t add_arc(std::uint32_t from, std::uint32_t to, std::int64_t capacity,
                      std::int64_t reverse_capacity = 0);

  std::int64_t solve(std::uint32_t source, std::uint32_t sink);

  // After solve(): nodes reachable from the source in the residual graph.
  std::vector<std::uint8_t> source_side() const;

  std::size_t num_nodes() const { return head_.size(); }

 private:
  struct Arc {
    std::uint32_t to;
    std::int64_t residual;
    std::int64_t next;
  };

  bool build_levels(std::uint32_t source, std::uint32_t sink);
  std::int64_t push(std::uint32_t v, std::uint32_t sink, std::int64_t limit);

  std::vector<Arc> arcs_;
  std::vector<std::int64_t> head_;
  std::vector<std::int64_t> cursor_;
  std::vector<int> level_;
  std::uint32_t source_ = 0;
};

}  // namespace percolab
