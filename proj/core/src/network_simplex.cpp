#include "ntlab/network_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ntlab/error.hpp"

namespace ntlab {

NetworkSimplex::NetworkSimplex(std::vector<Flow> supply, Cost max_arc_cost)
    : n_(static_cast<int>(supply.size())), root_(static_cast<int>(supply.size())) {
  if (std::accumulate(supply.begin(), supply.end(), Flow{0}) != 0)
    throw Error(ErrorCode::MassMismatch, "network supplies do not sum to zero");
  if (max_arc_cost < 0) throw Error(ErrorCode::NonPositive, "negative arc cost bound");
  art_cost_ = (max_arc_cost + 1) * static_cast<Cost>(n_ + 1);

  const std::size_t nodes = static_cast<std::size_t>(n_) + 1;
  parent_.assign(nodes, -1);
  pred_.assign(nodes, -1);
  thread_.assign(nodes, 0);
  rev_thread_.assign(nodes, 0);
  succ_num_.assign(nodes, 1);
  dir_.assign(nodes, 0);
  pi_.assign(nodes, 0);
  last_succ_.assign(nodes, 0);

  src_.resize(n_);
  tgt_.resize(n_);
  cost_.resize(n_);
  flow_.resize(n_);
  state_.assign(n_, kTree);

  // Initial tree: every node hangs off the root through an artificial arc.
  // Nodes with zero supply get a downward arc so the tree is strongly
  // feasible from the start.
  succ_num_[root_] = n_ + 1;
  thread_[root_] = n_ > 0 ? 0 : root_;
  rev_thread_[0] = root_;
  for (int u = 0; u < n_; ++u) {
    parent_[u] = root_;
    pred_[u] = u;
    thread_[u] = u + 1 < n_ ? u + 1 : root_;
    if (u + 1 < n_) rev_thread_[u + 1] = u;
    if (supply[u] > 0) {
      dir_[u] = kUp;
      src_[u] = u;
      tgt_[u] = root_;
      cost_[u] = 0;
      flow_[u] = supply[u];
      pi_[u] = 0;
    } else {
      dir_[u] = kDown;
      src_[u] = root_;
      tgt_[u] = u;
      cost_[u] = art_cost_;
      flow_[u] = -supply[u];
      pi_[u] = art_cost_;
    }
  }
  rev_thread_[root_] = n_ > 0 ? n_ - 1 : root_;
  for (int u = 0; u < n_; ++u) last_succ_[u] = u;
  last_succ_[root_] = n_ > 0 ? n_ - 1 : root_;
}

void NetworkSimplex::reserve_arcs(std::size_t count) {
  const std::size_t total = count + n_;
  src_.reserve(total);
  tgt_.reserve(total);
  cost_.reserve(total);
  flow_.reserve(total);
  state_.reserve(total);
}

std::size_t NetworkSimplex::add_arc(int source, int target, Cost cost) {
  src_.push_back(source);
  tgt_.push_back(target);
  cost_.push_back(cost);
  flow_.push_back(0);
  state_.push_back(kLower);
  return src_.size() - 1 - n_;
}

NetworkSimplex::Flow NetworkSimplex::artificial_flow() const noexcept {
  Flow s = 0;
  for (int u = 0; u < n_; ++u) s += flow_[u];
  return s;
}

// Block search pricing over the real arcs; artificial arcs never re-enter.
bool NetworkSimplex::find_entering() {
  const std::size_t first = n_;
  const std::size_t m = src_.size();
  if (m == first) return false;
  const std::size_t count = m - first;
  const std::size_t block =
      std::max<std::size_t>(10, static_cast<std::size_t>(std::sqrt(static_cast<double>(count))));
  if (next_arc_ < first || next_arc_ >= m) next_arc_ = first;

  Cost best = 0;
  std::size_t cnt = block;
  std::size_t e = next_arc_;
  for (std::size_t step = 0; step < count; ++step) {
    if (state_[e] == kLower) {
      const Cost c = cost_[e] + pi_[src_[e]] - pi_[tgt_[e]];
      if (c < best) {
        best = c;
        in_arc_ = static_cast<int>(e);
      }
    }
    if (++e == m) e = first;
    if (--cnt == 0) {
      if (best < 0) {
        next_arc_ = e;
        return true;
      }
      cnt = block;
    }
  }
  if (best < 0) {
    next_arc_ = e;
    return true;
  }
  return false;
}

bool NetworkSimplex::pivot() {
  const int e_in = in_arc_;
  const int s = src_[e_in];
  const int t = tgt_[e_in];

  int u = s, v = t;
  while (u != v) {
    if (succ_num_[u] < succ_num_[v])
      u = parent_[u];
    else
      v = parent_[v];
  }
  const int join = u;

  // Leaving arc: first blocking arc on the source side, last on the target
  // side, which keeps the tree strongly feasible.
  Flow delta = std::numeric_limits<Flow>::max();
  int u_out = -1;
  bool out_on_source_side = false;
  for (u = s; u != join; u = parent_[u]) {
    if (dir_[u] == kUp && flow_[pred_[u]] < delta) {
      delta = flow_[pred_[u]];
      u_out = u;
      out_on_source_side = true;
    }
  }
  for (u = t; u != join; u = parent_[u]) {
    if (dir_[u] == kDown && flow_[pred_[u]] <= delta) {
      delta = flow_[pred_[u]];
      u_out = u;
      out_on_source_side = false;
    }
  }
  if (u_out < 0) return false;

  if (delta > 0) {
    flow_[e_in] += delta;
    for (u = s; u != join; u = parent_[u]) flow_[pred_[u]] += dir_[u] == kUp ? -delta : delta;
    for (u = t; u != join; u = parent_[u]) flow_[pred_[u]] += dir_[u] == kUp ? delta : -delta;
  }

  const int u_in = out_on_source_side ? s : t;
  const int v_in = out_on_source_side ? t : s;
  const int e_out = pred_[u_out];
  state_[e_out] = kLower;
  state_[e_in] = kTree;

  const Cost rc = cost_[e_in] + pi_[s] - pi_[t];
  const Cost shift = u_in == s ? -rc : rc;
  update_tree(e_in, u_in, v_in, u_out, join);
  const int end = thread_[last_succ_[u_in]];
  for (int y = u_in; y != end; y = thread_[y]) pi_[y] += shift;

  ++pivots_;
  return true;
}

// Re-hangs the subtree below u_out from v_in through e_in, reversing the
// stem u_in .. u_out, in time linear in the stem and its side branches.
void NetworkSimplex::update_tree(int e_in, int u_in, int v_in, int u_out, int join) {
  const int old_rev_thread = rev_thread_[u_out];
  const int old_succ_num = succ_num_[u_out];
  const int old_last_succ = last_succ_[u_out];
  const int v_out = parent_[u_out];

  if (u_in == u_out) {
    parent_[u_in] = v_in;
    pred_[u_in] = e_in;
    dir_[u_in] = u_in == src_[e_in] ? kUp : kDown;
    if (thread_[v_in] != u_out) {
      int after = thread_[old_last_succ];
      thread_[old_rev_thread] = after;
      rev_thread_[after] = old_rev_thread;
      after = thread_[v_in];
      thread_[v_in] = u_out;
      rev_thread_[u_out] = v_in;
      thread_[old_last_succ] = after;
      rev_thread_[after] = old_last_succ;
    }
  } else {
    const int thread_continue = old_rev_thread == v_in ? thread_[old_last_succ] : thread_[v_in];
    int stem = u_in;
    int par_stem = v_in;
    int last = last_succ_[u_in];
    int after = thread_[last];
    thread_[v_in] = u_in;
    dirty_revs_.clear();
    dirty_revs_.push_back(v_in);
    while (stem != u_out) {
      const int next_stem = parent_[stem];
      thread_[last] = next_stem;
      dirty_revs_.push_back(last);
      const int before = rev_thread_[stem];
      thread_[before] = after;
      rev_thread_[after] = before;
      parent_[stem] = par_stem;
      par_stem = stem;
      stem = next_stem;
      last = last_succ_[stem] == last_succ_[par_stem] ? rev_thread_[par_stem] : last_succ_[stem];
      after = thread_[last];
    }
    parent_[u_out] = par_stem;
    thread_[last] = thread_continue;
    rev_thread_[thread_continue] = last;
    last_succ_[u_out] = last;
    if (old_rev_thread != v_in) {
      thread_[old_rev_thread] = after;
      rev_thread_[after] = old_rev_thread;
    }
    for (int y : dirty_revs_) rev_thread_[thread_[y]] = y;

    int tmp_sc = 0;
    const int tmp_ls = last_succ_[u_out];
    for (int y = u_out, p = parent_[y]; y != u_in; y = p, p = parent_[y]) {
      pred_[y] = pred_[p];
      dir_[y] = static_cast<std::int8_t>(-dir_[p]);
      tmp_sc += succ_num_[y] - succ_num_[p];
      succ_num_[y] = tmp_sc;
      last_succ_[p] = tmp_ls;
    }
    pred_[u_in] = e_in;
    dir_[u_in] = u_in == src_[e_in] ? kUp : kDown;
    succ_num_[u_in] = old_succ_num;
  }

  const int up_limit_out = last_succ_[join] == v_in ? join : -1;
  const int last_succ_out = last_succ_[u_out];
  for (int y = v_in; y != -1 && last_succ_[y] == v_in; y = parent_[y]) last_succ_[y] = last_succ_out;
  if (join != old_rev_thread && v_in != old_rev_thread) {
    for (int y = v_out; y != up_limit_out && last_succ_[y] == old_last_succ; y = parent_[y])
      last_succ_[y] = old_rev_thread;
  } else if (last_succ_out != old_last_succ) {
    for (int y = v_out; y != up_limit_out && last_succ_[y] == old_last_succ; y = parent_[y])
      last_succ_[y] = last_succ_out;
  }
  for (int y = v_in; y != join; y = parent_[y]) succ_num_[y] += old_succ_num;
  for (int y = v_out; y != join; y = parent_[y]) succ_num_[y] -= old_succ_num;
}

NetworkSimplex::Status NetworkSimplex::run() {
  while (find_entering()) {
    if (!pivot()) return Status::Unbounded;
  }
  return Status::Optimal;
}

}  // namespace ntlab
