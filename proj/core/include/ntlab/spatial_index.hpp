#pragma once

#include <span>
#include <vector>

#include "ntlab/geometry.hpp"

namespace ntlab {

// Uniform bucketing of points in [0,1]^d. Each bucket keeps the tight
// bounding box of its members so box distances are valid lower bounds for
// both metrics.
class BucketGrid {
 public:
  BucketGrid(const std::vector<Point>& points, int dim, Metric metric, int per_bucket = 8);

  int dim() const noexcept { return dim_; }
  Metric metric() const noexcept { return metric_; }
  int bucket_count() const noexcept { return static_cast<int>(start_.size()) - 1; }
  std::span<const int> members(int b) const noexcept {
    return {items_.data() + start_[b], items_.data() + start_[b + 1]};
  }

  // Lower bound on the distance from z to any member of bucket b.
  double box_distance(const Point& z, int b) const noexcept;
  void box_distances(const Point& z, std::vector<double>& out) const;

  // Indices of the k nearest points to z, nearest first.
  std::vector<int> nearest(const Point& z, int k) const;

 private:
  int axis_cell(double x) const noexcept;

  const std::vector<Point>* points_;
  int dim_;
  Metric metric_;
  int per_axis_;
  std::vector<int> start_;
  std::vector<int> items_;
  std::vector<Point> lo_, hi_;
  std::vector<int> nonempty_;
};

// Balanced kd-tree with tight node boxes. Node 0 is the root; children are
// created after their parent, so a reverse sweep visits children first.
class KdTree {
 public:
  struct Node {
    Point lo{0, 0, 0}, hi{0, 0, 0};
    int begin = 0, end = 0;
    int left = -1, right = -1;
    bool leaf() const noexcept { return left < 0; }
  };

  KdTree(const std::vector<Point>& points, int dim, Metric metric, int leaf_size = 8);

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  std::span<const int> items(const Node& node) const noexcept {
    return {order_.data() + node.begin, order_.data() + node.end};
  }
  // Lower bound on the distance from z to any point under the node.
  double box_distance(const Point& z, int node) const noexcept;

  // Per-node extreme of a per-point value; `better(a, b)` selects a over b.
  template <class T, class Better>
  void aggregate(const std::vector<T>& values, std::vector<T>& out, Better better) const {
    out.resize(nodes_.size());
    for (std::size_t k = nodes_.size(); k-- > 0;) {
      const Node& nd = nodes_[k];
      if (nd.leaf()) {
        T m = values[order_[nd.begin]];
        for (int i = nd.begin + 1; i < nd.end; ++i)
          if (better(values[order_[i]], m)) m = values[order_[i]];
        out[k] = m;
      } else {
        out[k] = better(out[nd.left], out[nd.right]) ? out[nd.left] : out[nd.right];
      }
    }
  }

 private:
  int build(int begin, int end, int leaf_size);

  const std::vector<Point>* points_;
  int dim_;
  Metric metric_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
};

}  // namespace ntlab
