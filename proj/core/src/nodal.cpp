#include "ntlab/nodal.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "json.hpp"
#include "ntlab/clip.hpp"
#include "ntlab/error.hpp"
#include "ntlab/summation.hpp"

namespace ntlab {

namespace {

// Zero crossing on the edge between corners p and q; the edge is always
// oriented from the lower corner so both neighbours and both signs of f
// produce bit-identical points.
Point edge_point(const Point& p, const Point& q, double vp, double vq) {
  const double t = vp / (vp - vq);
  return {p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1]), p[2] + t * (q[2] - p[2])};
}

double segment_length(const Point& a, const Point& b) {
  const double x = b[0] - a[0], y = b[1] - a[1], z = b[2] - a[2];
  return std::sqrt(x * x + y * y + z * z);
}

struct CellCorners {
  std::array<double, 8> value{};
  std::array<Point, 8> pos{};
};

void load_cell(const GridFunction& f, const std::vector<double>& v, const std::array<int, 3>& idx,
               CellCorners& c) {
  const int d = f.dim;
  const double h = f.h();
  for (int mask = 0; mask < (1 << d); ++mask) {
    std::array<int, 3> g{0, 0, 0};
    Point p{0, 0, 0};
    for (int k = 0; k < d; ++k) {
      const int bit = (mask >> k) & 1;
      g[k] = idx[k] + bit;
      p[k] = f.coord(idx[k]) + bit * h;
      if (g[k] == f.n) g[k] = 0;
    }
    c.value[mask] = v[f.flatten(g)];
    c.pos[mask] = p;
  }
}

Point corner_crossing(const CellCorners& c, int a, int b) {
  if (a > b) std::swap(a, b);
  return edge_point(c.pos[a], c.pos[b], c.value[a], c.value[b]);
}

void contour_1d(const GridFunction& f, const std::vector<double>& v, NodalEstimate& out) {
  const int pairs = f.periodic ? f.n : f.n - 1;
  for (int i = 0; i < pairs; ++i) {
    const int j = i + 1 == f.n ? 0 : i + 1;
    if ((v[i] > 0) == (v[j] > 0)) continue;
    const Point a{f.coord(i), 0, 0};
    const Point b{f.coord(i) + f.h(), 0, 0};
    Point x = edge_point(a, b, v[i], v[j]);
    if (f.periodic && x[0] >= 1.0) x[0] -= 1.0;
    out.points.push_back(x);
  }
  out.crossings = static_cast<long long>(out.points.size());
  out.measure = static_cast<double>(out.crossings);
}

void contour_2d(const GridFunction& f, const std::vector<double>& v, NodalEstimate& out) {
  const int m = f.periodic ? f.n : f.n - 1;
  // Corner masks: bit 0 is axis 0. Edges as corner pairs.
  static constexpr int kEdges[4][2] = {{0, 1}, {1, 3}, {2, 3}, {0, 2}};
  CompensatedSum total;
  CellCorners c;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      load_cell(f, v, {i, j, 0}, c);
      const bool s00 = c.value[0] > 0, s10 = c.value[1] > 0, s01 = c.value[2] > 0,
                 s11 = c.value[3] > 0;
      const int count = (s00 != s10) + (s10 != s11) + (s01 != s11) + (s00 != s01);
      if (count == 0) continue;
      Point e[4];
      for (int k = 0; k < 4; ++k) {
        const int a = kEdges[k][0], b = kEdges[k][1];
        if ((c.value[a] > 0) != (c.value[b] > 0)) e[k] = corner_crossing(c, a, b);
      }
      const auto emit = [&](int ea, int eb) {
        out.segments.push_back({e[ea], e[eb]});
        total += segment_length(e[ea], e[eb]);
      };
      if (count == 2) {
        int found[2], n = 0;
        for (int k = 0; k < 4; ++k) {
          const int a = kEdges[k][0], b = kEdges[k][1];
          if ((c.value[a] > 0) != (c.value[b] > 0)) found[n++] = k;
        }
        emit(found[0], found[1]);
        continue;
      }
      // Saddle: the sign of the cell-centre average decides which diagonal
      // pair of corners is connected.
      const double centre = (c.value[0] + c.value[1] + c.value[2] + c.value[3]) / 4.0;
      const bool join_main = centre != 0.0 && (centre > 0) == s00;
      if (join_main) {
        emit(0, 1);  // cut off corner (1,0)
        emit(2, 3);  // cut off corner (0,1)
      } else {
        emit(0, 3);  // cut off corner (0,0)
        emit(1, 2);  // cut off corner (1,1)
      }
    }
  }
  out.measure = total.value();
}

void contour_3d(const GridFunction& f, const std::vector<double>& v, NodalEstimate& out) {
  const int m = f.periodic ? f.n : f.n - 1;
  std::vector<std::array<int, 4>> tets;
  {
    std::array<int, 3> perm{0, 1, 2};
    do {
      std::array<int, 4> t{0, 0, 0, 0};
      for (int i = 1; i <= 3; ++i) t[i] = t[i - 1] | (1 << perm[i - 1]);
      tets.push_back(t);
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  CompensatedSum total;
  CellCorners c;
  const auto emit = [&](const Point& a, const Point& b, const Point& p) {
    out.triangles.push_back({a, b, p});
    total += triangle_area(a, b, p);
  };
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) {
        load_cell(f, v, {i, j, k}, c);
        for (const auto& t : tets) {
          int pos[4], neg[4], np = 0, nn = 0;
          for (int q = 0; q < 4; ++q) {
            if (c.value[t[q]] > 0)
              pos[np++] = t[q];
            else
              neg[nn++] = t[q];
          }
          if (np == 0 || nn == 0) continue;
          if (np == 1 || nn == 1) {
            const int apex = np == 1 ? pos[0] : neg[0];
            const int* others = np == 1 ? neg : pos;
            emit(corner_crossing(c, apex, others[0]), corner_crossing(c, apex, others[1]),
                 corner_crossing(c, apex, others[2]));
            continue;
          }
          const Point x11 = corner_crossing(c, pos[0], neg[0]);
          const Point x12 = corner_crossing(c, pos[0], neg[1]);
          const Point x21 = corner_crossing(c, pos[1], neg[0]);
          const Point x22 = corner_crossing(c, pos[1], neg[1]);
          emit(x11, x12, x22);
          emit(x11, x22, x21);
        }
      }
  out.measure = total.value();
}

}  // namespace

NodalEstimate nodal_measure(const GridFunction& f) {
  f.validate();
  const Norms nm = norms(f);
  if (nm.linf == 0.0) throw Error(ErrorCode::IdenticallyZero, "grid function vanishes everywhere");

  NodalEstimate out;
  out.dim = f.dim;
  out.perturbation = 1e-15 * nm.linf;
  std::vector<double> v = f.values;
  for (double& x : v)
    if (x == 0.0) {
      x = out.perturbation;
      ++out.perturbed_nodes;
    }

  switch (f.dim) {
    case 1: contour_1d(f, v, out); break;
    case 2: contour_2d(f, v, out); break;
    case 3: contour_3d(f, v, out); break;
    default: throw Error(ErrorCode::DimensionError, "nodal estimates need d in {1,2,3}");
  }
  if (f.dim > 1) out.crossings = static_cast<long long>(out.primitive_count());
  return out;
}

double nodal_measure_in(const NodalEstimate& est, const CubeRegion& cube) {
  CompensatedSum s;
  switch (est.dim) {
    case 1:
      for (const Point& p : est.points)
        if (cube.contains(p, 1)) s += 1.0;
      break;
    case 2:
      for (const auto& seg : est.segments) s += clipped_length(seg[0], seg[1], cube, 2);
      break;
    default:
      for (const auto& tri : est.triangles) s += clipped_area(tri, cube);
      break;
  }
  return s.value();
}

std::string nodal_json(const NodalEstimate& est) {
  nlohmann::ordered_json j;
  j["dim"] = est.dim;
  j["measure"] = est.measure;
  j["crossings"] = est.crossings;
  j["primitives"] = est.primitive_count();
  j["perturbed_nodes"] = est.perturbed_nodes;
  j["perturbation"] = est.perturbation;
  return j.dump(2);
}

void write_nodal_csv(const NodalEstimate& est, std::ostream& out) {
  out << std::setprecision(17);
  switch (est.dim) {
    case 1:
      out << "x\n";
      for (const Point& p : est.points) out << p[0] << '\n';
      break;
    case 2:
      out << "x0,y0,x1,y1\n";
      for (const auto& s : est.segments)
        out << s[0][0] << ',' << s[0][1] << ',' << s[1][0] << ',' << s[1][1] << '\n';
      break;
    default:
      out << "x0,y0,z0,x1,y1,z1,x2,y2,z2\n";
      for (const auto& t : est.triangles) {
        for (int v = 0; v < 3; ++v)
          for (int k = 0; k < 3; ++k) out << t[v][k] << (v == 2 && k == 2 ? '\n' : ',');
      }
      break;
  }
}

}  // namespace ntlab
