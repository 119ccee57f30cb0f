#pragma once

#include <cstdint>
#include <vector>

namespace ntlab {

// Primal network simplex for uncapacitated min-cost flow with integral
// supplies and costs. Arcs may be appended between calls to run(); the
// spanning tree of the previous solve is kept as a warm start.
class NetworkSimplex {
 public:
  using Cost = std::int64_t;
  using Flow = std::int64_t;

  enum class Status { Optimal, Unbounded };

  // supply[u] > 0 for sources, < 0 for sinks; the entries must sum to zero.
  // max_arc_cost bounds every arc cost that will ever be added.
  NetworkSimplex(std::vector<Flow> supply, Cost max_arc_cost);

  int node_count() const noexcept { return n_; }
  std::size_t arc_count() const noexcept { return src_.size() - n_; }

  void reserve_arcs(std::size_t count);
  // Returns the arc index (0-based among real arcs).
  std::size_t add_arc(int source, int target, Cost cost);

  Status run();

  Flow flow(std::size_t arc) const noexcept { return flow_[arc + n_]; }
  int arc_source(std::size_t arc) const noexcept { return src_[arc + n_]; }
  int arc_target(std::size_t arc) const noexcept { return tgt_[arc + n_]; }
  Cost arc_cost(std::size_t arc) const noexcept { return cost_[arc + n_]; }
  Cost potential(int node) const noexcept { return pi_[node]; }
  const std::vector<Cost>& potentials() const noexcept { return pi_; }

  // Flow still routed through the artificial root arcs; zero iff the real
  // arcs admit a feasible flow.
  Flow artificial_flow() const noexcept;
  std::uint64_t pivots() const noexcept { return pivots_; }

 private:
  enum : std::int8_t { kUp = 1, kDown = -1 };
  enum : std::int8_t { kTree = 0, kLower = 1 };

  bool find_entering();
  bool pivot();
  void update_tree(int e_in, int u_in, int v_in, int u_out, int join);

  int n_;
  int root_;
  Cost art_cost_;
  std::uint64_t pivots_ = 0;
  std::size_t next_arc_ = 0;
  int in_arc_ = -1;

  std::vector<int> src_, tgt_;
  std::vector<Cost> cost_;
  std::vector<Flow> flow_;
  std::vector<std::int8_t> state_;

  std::vector<int> parent_, pred_, thread_, rev_thread_, succ_num_, last_succ_;
  std::vector<std::int8_t> dir_;
  std::vector<Cost> pi_;

  std::vector<int> dirty_revs_;
};

}  // namespace ntlab
