#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace lrp {

constexpr int kMaxDim = 4;

using Coord = std::array<std::int64_t, kMaxDim>;

// Finite cubic box of side N in dimension d, with an origin offset. Sites
// are indexed row-major (axis 0 slowest), deterministically.
struct Box {
  int d = 1;
  std::int64_t n = 1;       // sites per side
  Coord origin = {0, 0, 0, 0};

  Box() = default;
  Box(int dim, std::int64_t side, Coord org = {0, 0, 0, 0}) : d(dim), n(side), origin(org) {
    if (d < 1 || d > kMaxDim) throw std::invalid_argument("Box: dimension out of range");
    if (n < 1) throw std::invalid_argument("Box: side must be >= 1");
    double vol = 1;
    for (int i = 0; i < d; ++i) vol *= static_cast<double>(n);
    if (vol > 4.2e9) throw std::invalid_argument("Box: site count exceeds 32-bit address space");
  }

  std::uint32_t site_count() const {
    std::uint64_t v = 1;
    for (int i = 0; i < d; ++i) v *= static_cast<std::uint64_t>(n);
    return static_cast<std::uint32_t>(v);
  }

  std::uint32_t index_of(const Coord& c) const {
    std::uint64_t idx = 0;
    for (int i = 0; i < d; ++i) {
      const std::int64_t off = c[i] - origin[i];
      idx = idx * static_cast<std::uint64_t>(n) + static_cast<std::uint64_t>(off);
    }
    return static_cast<std::uint32_t>(idx);
  }

  Coord coord_of(std::uint32_t idx) const {
    Coord c = {0, 0, 0, 0};
    std::uint64_t rem = idx;
    for (int i = d - 1; i >= 0; --i) {
      c[i] = origin[i] + static_cast<std::int64_t>(rem % static_cast<std::uint64_t>(n));
      rem /= static_cast<std::uint64_t>(n);
    }
    return c;
  }

  bool contains(const Coord& c) const {
    for (int i = 0; i < d; ++i)
      if (c[i] < origin[i] || c[i] >= origin[i] + n) return false;
    return true;
  }

  static std::int64_t l1(const Coord& a, const Coord& b, int d) {
    std::int64_t s = 0;
    for (int i = 0; i < d; ++i) s += a[i] > b[i] ? a[i] - b[i] : b[i] - a[i];
    return s;
  }

  std::int64_t bond_length(std::uint32_t u, std::uint32_t v) const {
    return l1(coord_of(u), coord_of(v), d);
  }
};

// Axis-aligned sub-cube of a box: per-axis [lo, lo+side) ranges, all in
// absolute coordinates. Used for M-cube partitions and K-enlargements.
struct CubeRegion {
  int d = 1;
  Coord lo = {0, 0, 0, 0};
  Coord side = {1, 1, 1, 1};  // per-axis extent (clipping can make them differ)

  bool contains(const Coord& c) const {
    for (int i = 0; i < d; ++i)
      if (c[i] < lo[i] || c[i] >= lo[i] + side[i]) return false;
    return true;
  }

  std::uint64_t volume() const {
    std::uint64_t v = 1;
    for (int i = 0; i < d; ++i) v *= static_cast<std::uint64_t>(side[i]);
    return v;
  }

  // Enumerate the region's sites as indices into `box` (regions are always
  // inside the box by construction).
  std::vector<std::uint32_t> sites(const Box& box) const {
    std::vector<std::uint32_t> out;
    out.reserve(volume());
    Coord c = lo;
    while (true) {
      out.push_back(box.index_of(c));
      int axis = d - 1;
      while (axis >= 0) {
        if (++c[axis] < lo[axis] + side[axis]) break;
        c[axis] = lo[axis];
        --axis;
      }
      if (axis < 0) break;
    }
    return out;
  }
};

// Partition of a box into M-cubes, row-major over cube grid coordinates.
struct CubeGrid {
  Box box;
  std::int64_t m = 1;       // cube side
  std::int64_t per_axis = 1;

  CubeGrid(const Box& b, std::int64_t cube_side) : box(b), m(cube_side) {
    if (m < 1) throw std::invalid_argument("CubeGrid: cube side must be >= 1");
    if (b.n % m != 0)
      throw std::invalid_argument("CubeGrid: cube side " + std::to_string(m) +
                                  " does not divide box side " + std::to_string(b.n));
    per_axis = b.n / m;
  }

  std::uint32_t cube_count() const {
    std::uint64_t v = 1;
    for (int i = 0; i < box.d; ++i) v *= static_cast<std::uint64_t>(per_axis);
    return static_cast<std::uint32_t>(v);
  }

  std::uint32_t cube_of_site(std::uint32_t site) const {
    const Coord c = box.coord_of(site);
    std::uint64_t idx = 0;
    for (int i = 0; i < box.d; ++i) {
      const std::int64_t g = (c[i] - box.origin[i]) / m;
      idx = idx * static_cast<std::uint64_t>(per_axis) + static_cast<std::uint64_t>(g);
    }
    return static_cast<std::uint32_t>(idx);
  }

  Coord cube_coord(std::uint32_t cube) const {
    Coord g = {0, 0, 0, 0};
    std::uint64_t rem = cube;
    for (int i = box.d - 1; i >= 0; --i) {
      g[i] = static_cast<std::int64_t>(rem % static_cast<std::uint64_t>(per_axis));
      rem /= static_cast<std::uint64_t>(per_axis);
    }
    return g;
  }

  CubeRegion cube_region(std::uint32_t cube, std::int64_t enlarge = 0) const {
    const Coord g = cube_coord(cube);
    CubeRegion r;
    r.d = box.d;
    for (int i = 0; i < box.d; ++i) {
      std::int64_t lo = box.origin[i] + g[i] * m - enlarge;
      std::int64_t hi = box.origin[i] + (g[i] + 1) * m + enlarge;  // exclusive
      if (lo < box.origin[i]) lo = box.origin[i];                  // clip at box boundary
      if (hi > box.origin[i] + box.n) hi = box.origin[i] + box.n;
      r.lo[i] = lo;
      r.side[i] = hi - lo;
    }
    return r;
  }
};

}  // namespace lrp
