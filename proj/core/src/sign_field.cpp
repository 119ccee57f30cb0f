#include "ntlab/sign_field.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "ntlab/error.hpp"

namespace ntlab {

namespace {

double tet_det(const Point& a, const Point& b, const Point& c, const Point& d) {
  const double u0 = b[0] - a[0], u1 = b[1] - a[1], u2 = b[2] - a[2];
  const double v0 = c[0] - a[0], v1 = c[1] - a[1], v2 = c[2] - a[2];
  const double w0 = d[0] - a[0], w1 = d[1] - a[1], w2 = d[2] - a[2];
  return std::abs(u0 * (v1 * w2 - v2 * w1) - u1 * (v0 * w2 - v2 * w0) + u2 * (v0 * w1 - v1 * w0));
}

Point lerp(const Point& p, const Point& q, double t) {
  return {p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1]), p[2] + t * (q[2] - p[2])};
}

// Tetrahedron with two positive vertices: {l > 0} is a wedge between the two
// positive vertices and the four edge crossings, split into three tets.
SimplexPart wedge_part(const double* v) {
  static const std::array<Point, 4> ref = {
      Point{0, 0, 0}, Point{1, 0, 0}, Point{0, 1, 0}, Point{0, 0, 1}};
  int pos[2], neg[2], np = 0, nn = 0;
  for (int i = 0; i < 4; ++i) {
    if (v[i] > 0)
      pos[np++] = i;
    else
      neg[nn++] = i;
  }
  const auto cross = [&](int p, int q) {
    return lerp(ref[p], ref[q], v[p] / (v[p] - v[q]));
  };
  const Point& p1 = ref[pos[0]];
  const Point& p2 = ref[pos[1]];
  const double a1 = v[pos[0]], a2 = v[pos[1]];
  const Point x11 = cross(pos[0], neg[0]), x12 = cross(pos[0], neg[1]);
  const Point x21 = cross(pos[1], neg[0]), x22 = cross(pos[1], neg[1]);

  const double d1 = tet_det(p1, x11, x12, p2);
  const double d2 = tet_det(x11, x12, p2, x21);
  const double d3 = tet_det(x12, p2, x21, x22);
  // Each det is 6 x the volume, i.e. the volume fraction of the reference tet.
  SimplexPart r;
  r.fraction = d1 + d2 + d3;
  r.mean = d1 * (a1 + a2) / 4.0 + d2 * a2 / 4.0 + d3 * a2 / 4.0;
  return r;
}

}  // namespace

SimplexPart simplex_positive_part(const double* v, int dim) {
  const int m = dim + 1;
  int k = 0;
  double sum = 0.0;
  for (int i = 0; i < m; ++i) {
    if (v[i] > 0) ++k;
    sum += v[i];
  }
  if (k == 0) return {};
  if (k == m) return {1.0, sum / m};
  if (k == 1) {
    int apex = 0;
    while (!(v[apex] > 0)) ++apex;
    const double a = v[apex];
    double frac = 1.0;
    for (int i = 0; i < m; ++i)
      if (i != apex) frac *= a / (a - v[i]);
    return {frac, frac * a / m};
  }
  if (k == dim) {
    int base = 0;
    while (v[base] > 0) ++base;
    const double b = v[base];
    double corner = 1.0;
    for (int i = 0; i < m; ++i)
      if (i != base) corner *= -b / (v[i] - b);
    return {1.0 - corner, sum / m - corner * b / m};
  }
  return wedge_part(v);
}

SignField::SignField(const GridFunction& f)
    : dim_(f.dim),
      cells_(f.periodic ? f.n : f.n - 1),
      periodic_(f.periodic),
      h_(f.h()),
      cell_volume_(std::pow(f.h(), f.dim)) {
  f.validate();
  const int d = dim_;
  const int n = f.n;
  const int m = cells_;
  const std::size_t side = static_cast<std::size_t>(m) + 1;
  std::size_t total = 1;
  for (int k = 0; k < d; ++k) total *= side;
  plus_.assign(total, 0.0);
  minus_.assign(total, 0.0);
  mass_plus_.assign(total, 0.0);
  mass_minus_.assign(total, 0.0);
  mixed_.assign(total, 0.0);

  // Kuhn simplices: vertex i of simplex s adds axis perm[s][i-1] to vertex i-1.
  std::vector<std::array<int, 4>> simplices;
  {
    std::array<int, 3> perm{0, 1, 2};
    do {
      std::array<int, 4> masks{0, 0, 0, 0};
      for (int i = 1; i <= d; ++i) masks[i] = masks[i - 1] | (1 << perm[i - 1]);
      simplices.push_back(masks);
    } while (std::next_permutation(perm.begin(), perm.begin() + d));
  }
  const double inv_simplices = 1.0 / static_cast<double>(simplices.size());

  std::size_t cell_count = 1;
  for (int k = 0; k < d; ++k) cell_count *= static_cast<std::size_t>(m);

  std::array<double, 8> corner{};
  double vs[4], neg[4];
  for (std::size_t c = 0; c < cell_count; ++c) {
    std::array<int, 3> idx{0, 0, 0};
    std::size_t rest = c;
    for (int k = d - 1; k >= 0; --k) {
      idx[k] = static_cast<int>(rest % m);
      rest /= m;
    }
    bool any_pos = false, any_neg = false;
    for (int mask = 0; mask < (1 << d); ++mask) {
      std::array<int, 3> g{0, 0, 0};
      for (int k = 0; k < d; ++k) {
        g[k] = idx[k] + ((mask >> k) & 1);
        if (g[k] == n) g[k] = 0;
      }
      corner[mask] = f.values[f.flatten(g)];
      any_pos |= corner[mask] > 0;
      any_neg |= corner[mask] < 0;
    }
    double fp = 0, fm = 0, mp = 0, mm = 0;
    for (const auto& s : simplices) {
      for (int i = 0; i <= d; ++i) {
        vs[i] = corner[s[i]];
        neg[i] = -vs[i];
      }
      const SimplexPart p = simplex_positive_part(vs, d);
      const SimplexPart q = simplex_positive_part(neg, d);
      fp += p.fraction;
      mp += p.mean;
      fm += q.fraction;
      mm += q.mean;
    }
    std::size_t at = 0;
    for (int k = 0; k < d; ++k) at = at * side + static_cast<std::size_t>(idx[k] + 1);
    plus_[at] = fp * inv_simplices;
    minus_[at] = fm * inv_simplices;
    mass_plus_[at] = mp * inv_simplices;
    mass_minus_[at] = mm * inv_simplices;
    mixed_[at] = any_pos && any_neg ? 1.0 : 0.0;
  }

  // Cumulative sums along each axis turn cell values into prefix sums.
  std::size_t stride = 1;
  for (int k = d - 1; k >= 0; --k) {
    for (std::vector<double>* arr : {&plus_, &minus_, &mass_plus_, &mass_minus_, &mixed_}) {
      auto& a = *arr;
      for (std::size_t i = 0; i < total; ++i)
        if ((i / stride) % side != 0) a[i] += a[i - stride];
    }
    stride *= side;
  }

  totals_.volume = std::pow(m * h_, d);
  totals_.plus = plus_.back() * cell_volume_;
  totals_.minus = minus_.back() * cell_volume_;
  totals_.mass_plus = mass_plus_.back() * cell_volume_;
  totals_.mass_minus = mass_minus_.back() * cell_volume_;
  totals_.mixed = mixed_.back() * cell_volume_;
}

void SignField::axis_pieces(double lo, double hi, std::vector<Piece>& out) const {
  out.clear();
  const double start = periodic_ ? 0.5 * h_ : 0.0;
  const double stop = start + cells_ * h_;
  if (periodic_ && hi - lo >= 1.0) {
    out.push_back({0, cells_, 1.0});
    return;
  }
  const int first_shift = periodic_ ? -1 : 0;
  const int last_shift = periodic_ ? 1 : 0;
  for (int j = first_shift; j <= last_shift; ++j) {
    const double a = std::max(lo + j, start);
    const double b = std::min(hi + j, stop);
    if (!(b > a)) continue;
    int ca = static_cast<int>(std::floor((a - start) / h_));
    int cb = static_cast<int>(std::ceil((b - start) / h_));
    ca = std::clamp(ca, 0, cells_ - 1);
    cb = std::clamp(cb, ca + 1, cells_);
    if (cb - ca == 1) {
      out.push_back({ca, cb, std::clamp((b - a) / h_, 0.0, 1.0)});
      continue;
    }
    out.push_back({ca, ca + 1, std::clamp((start + (ca + 1) * h_ - a) / h_, 0.0, 1.0)});
    if (cb - ca > 2) out.push_back({ca + 1, cb - 1, 1.0});
    out.push_back({cb - 1, cb, std::clamp((b - (start + (cb - 1) * h_)) / h_, 0.0, 1.0)});
  }
}

double SignField::block_sum(const std::vector<double>& prefix, const int* begin,
                            const int* end) const {
  const std::size_t side = static_cast<std::size_t>(cells_) + 1;
  double s = 0.0;
  for (int mask = 0; mask < (1 << dim_); ++mask) {
    std::size_t at = 0;
    int lows = 0;
    for (int k = 0; k < dim_; ++k) {
      const bool hi = (mask >> k) & 1;
      at = at * side + static_cast<std::size_t>(hi ? end[k] : begin[k]);
      lows += hi ? 0 : 1;
    }
    s += (lows % 2 == 0) ? prefix[at] : -prefix[at];
  }
  return s;
}

CubeStats SignField::stats(const CubeRegion& region) const {
  std::array<std::vector<Piece>, 3> pieces;
  double volume = 1.0;
  for (int k = 0; k < dim_; ++k) {
    axis_pieces(region.center[k] - 0.5 * region.side, region.center[k] + 0.5 * region.side,
                pieces[k]);
    double len = 0.0;
    for (const Piece& p : pieces[k]) len += (p.end - p.begin) * p.fraction * h_;
    volume *= len;
  }
  if (!(volume > 0.0)) throw Error(ErrorCode::EmptyIntersection, "cube misses the grid domain");

  CubeStats s;
  s.volume = volume;
  std::array<std::size_t, 3> pick{0, 0, 0};
  for (;;) {
    int begin[3], end[3];
    double weight = cell_volume_;
    for (int k = 0; k < dim_; ++k) {
      const Piece& p = pieces[k][pick[k]];
      begin[k] = p.begin;
      end[k] = p.end;
      weight *= p.fraction;
    }
    if (weight > 0.0) {
      s.plus += weight * block_sum(plus_, begin, end);
      s.minus += weight * block_sum(minus_, begin, end);
      s.mass_plus += weight * block_sum(mass_plus_, begin, end);
      s.mass_minus += weight * block_sum(mass_minus_, begin, end);
      s.mixed += weight * block_sum(mixed_, begin, end);
    }
    int k = 0;
    while (k < dim_ && ++pick[k] == pieces[k].size()) pick[k++] = 0;
    if (k == dim_) break;
  }
  return s;
}

CubeStats sign_volumes(const GridFunction& f, const CubeRegion& region) {
  return SignField(f).stats(region);
}

}  // namespace ntlab
