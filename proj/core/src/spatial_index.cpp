#include "ntlab/spatial_index.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

namespace ntlab {

namespace {

double interval_gap(double z, double lo, double hi, Metric m) noexcept {
  auto line = [&](double p) { return std::max({lo - p, 0.0, p - hi}); };
  if (m == Metric::Euclidean) return line(z);
  return std::min({line(z), line(z - 1.0), line(z + 1.0)});
}

}  // namespace

BucketGrid::BucketGrid(const std::vector<Point>& points, int dim, Metric metric, int per_bucket)
    : points_(&points), dim_(dim), metric_(metric) {
  const double target = std::max(1.0, static_cast<double>(points.size()) / std::max(1, per_bucket));
  per_axis_ = std::max(1, static_cast<int>(std::floor(std::pow(target, 1.0 / dim))));
  int total = 1;
  for (int a = 0; a < dim; ++a) total *= per_axis_;

  std::vector<int> cell(points.size());
  std::vector<int> count(total + 1, 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    int c = 0;
    for (int a = 0; a < dim; ++a) c = c * per_axis_ + axis_cell(points[i][a]);
    cell[i] = c;
    ++count[c + 1];
  }
  start_.assign(total + 1, 0);
  for (int c = 0; c < total; ++c) start_[c + 1] = start_[c] + count[c + 1];
  items_.resize(points.size());
  std::vector<int> fill(start_.begin(), start_.end() - 1);
  for (std::size_t i = 0; i < points.size(); ++i) items_[fill[cell[i]]++] = static_cast<int>(i);

  const double inf = std::numeric_limits<double>::infinity();
  lo_.assign(total, Point{inf, inf, inf});
  hi_.assign(total, Point{-inf, -inf, -inf});
  for (int c = 0; c < total; ++c) {
    if (start_[c] == start_[c + 1]) continue;
    nonempty_.push_back(c);
    for (int i : members(c)) {
      for (int a = 0; a < 3; ++a) {
        lo_[c][a] = std::min(lo_[c][a], points[i][a]);
        hi_[c][a] = std::max(hi_[c][a], points[i][a]);
      }
    }
  }
}

int BucketGrid::axis_cell(double x) const noexcept {
  const int c = static_cast<int>(std::floor(x * per_axis_));
  return std::clamp(c, 0, per_axis_ - 1);
}

double BucketGrid::box_distance(const Point& z, int b) const noexcept {
  if (start_[b] == start_[b + 1]) return std::numeric_limits<double>::infinity();
  double s = 0.0;
  for (int a = 0; a < dim_; ++a) {
    const double g = interval_gap(z[a], lo_[b][a], hi_[b][a], metric_);
    s += g * g;
  }
  return std::sqrt(s);
}

void BucketGrid::box_distances(const Point& z, std::vector<double>& out) const {
  out.resize(bucket_count());
  for (int b = 0; b < bucket_count(); ++b) out[b] = box_distance(z, b);
}

std::vector<int> BucketGrid::nearest(const Point& z, int k) const {
  const auto& pts = *points_;
  k = std::min<int>(k, static_cast<int>(pts.size()));
  std::vector<int> result;
  if (k <= 0) return result;

  // Expand Chebyshev rings of buckets around the bucket holding z. Ring r
  // lies at least (r-1) bucket widths away, which bounds the search.
  const bool torus = metric_ == Metric::Torus;
  const int p = per_axis_;
  const int lo_off = torus ? -((p - 1) / 2) : -p;
  const int hi_off = torus ? p / 2 : p;
  const double width = 1.0 / p;
  std::array<int, 3> home{0, 0, 0};
  for (int a = 0; a < dim_; ++a) home[a] = axis_cell(z[a]);

  std::priority_queue<std::pair<double, int>> best;
  auto visit = [&](const std::array<int, 3>& off) {
    int c = 0;
    for (int a = 0; a < dim_; ++a) {
      int i = home[a] + off[a];
      if (torus) {
        i = ((i % p) + p) % p;
      } else if (i < 0 || i >= p) {
        return;
      }
      c = c * p + i;
    }
    for (int i : members(c)) {
      const double d = distance(z, pts[i], metric_);
      if (static_cast<int>(best.size()) < k) {
        best.emplace(d, i);
      } else if (d < best.top().first) {
        best.pop();
        best.emplace(d, i);
      }
    }
  };

  const int max_ring = std::max(-lo_off, hi_off);
  for (int r = 0; r <= max_ring; ++r) {
    if (static_cast<int>(best.size()) == k && (r - 1) * width > best.top().first) break;
    const int a0 = std::max(-r, lo_off), b0 = std::min(r, hi_off);
    const int a1 = dim_ > 1 ? a0 : 0, b1 = dim_ > 1 ? b0 : 0;
    const int a2 = dim_ > 2 ? a0 : 0, b2 = dim_ > 2 ? b0 : 0;
    for (int o0 = a0; o0 <= b0; ++o0)
      for (int o1 = a1; o1 <= b1; ++o1)
        for (int o2 = a2; o2 <= b2; ++o2) {
          if (std::max({std::abs(o0), std::abs(o1), std::abs(o2)}) != r) continue;
          visit({o0, o1, o2});
        }
  }
  result.resize(best.size());
  for (std::size_t j = best.size(); j-- > 0;) {
    result[j] = best.top().second;
    best.pop();
  }
  return result;
}

KdTree::KdTree(const std::vector<Point>& points, int dim, Metric metric, int leaf_size)
    : points_(&points), dim_(dim), metric_(metric), order_(points.size()) {
  std::iota(order_.begin(), order_.end(), 0);
  nodes_.reserve(2 * points.size() / std::max(1, leaf_size) + 2);
  if (!points.empty()) build(0, static_cast<int>(points.size()), std::max(1, leaf_size));
}

int KdTree::build(int begin, int end, int leaf_size) {
  const auto& pts = *points_;
  const int id = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  Node nd;
  nd.begin = begin;
  nd.end = end;
  for (int a = 0; a < 3; ++a) {
    nd.lo[a] = std::numeric_limits<double>::infinity();
    nd.hi[a] = -nd.lo[a];
  }
  for (int i = begin; i < end; ++i)
    for (int a = 0; a < dim_; ++a) {
      nd.lo[a] = std::min(nd.lo[a], pts[order_[i]][a]);
      nd.hi[a] = std::max(nd.hi[a], pts[order_[i]][a]);
    }
  for (int a = dim_; a < 3; ++a) nd.lo[a] = nd.hi[a] = 0.0;
  if (end - begin > leaf_size) {
    int axis = 0;
    for (int a = 1; a < dim_; ++a)
      if (nd.hi[a] - nd.lo[a] > nd.hi[axis] - nd.lo[axis]) axis = a;
    const int mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](int x, int y) { return pts[x][axis] < pts[y][axis]; });
    nd.left = build(begin, mid, leaf_size);
    nd.right = build(mid, end, leaf_size);
  }
  nodes_[id] = nd;
  return id;
}

double KdTree::box_distance(const Point& z, int node) const noexcept {
  const Node& nd = nodes_[node];
  double s = 0.0;
  for (int a = 0; a < dim_; ++a) {
    const double g = interval_gap(z[a], nd.lo[a], nd.hi[a], metric_);
    s += g * g;
  }
  return std::sqrt(s);
}

}  // namespace ntlab
