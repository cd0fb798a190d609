#include "lte/coords.hpp"

#include <algorithm>
#include <cmath>

#include "lte/error.hpp"

namespace lte {

double pixel_center(std::int64_t i, std::int64_t n) {
  return -1.0 + static_cast<double>(2 * i + 1) / static_cast<double>(n);
}

CoordGrid make_grid(int h, int w) {
  if (h < 1 || w < 1) throw InvalidArgument("make_grid: dims must be positive");
  CoordGrid grid{h, w, grid_coords(h, w, 0, static_cast<std::int64_t>(h) * w)};
  return grid;
}

TrackedVector<Coord> grid_coords(int h, int w, std::int64_t begin, std::int64_t end) {
  const std::int64_t total = static_cast<std::int64_t>(h) * w;
  if (h < 1 || w < 1 || begin < 0 || end > total || begin > end) {
    throw InvalidArgument("grid_coords: bad range");
  }
  TrackedVector<Coord> out;
  out.reserve(static_cast<std::size_t>(end - begin));
  for (std::int64_t i = begin; i < end; ++i) out.push_back({pixel_center(i / w, h), pixel_center(i % w, w)});
  return out;
}

Cell make_cell(int h_out, int w_out) {
  if (h_out < 1 || w_out < 1) throw InvalidArgument("make_cell: dims must be positive");
  return {2.0f / static_cast<float>(h_out), 2.0f / static_cast<float>(w_out)};
}

Cell clamp_cell(Cell cell, Cell min_cell) {
  if (!(cell.cy > 0 && cell.cx > 0 && min_cell.cy > 0 && min_cell.cx > 0)) {
    throw InvalidArgument("clamp_cell: cells must be positive");
  }
  return {std::max(cell.cy, min_cell.cy), std::max(cell.cx, min_cell.cx)};
}

Cell relative_cell(Cell cell, int latent_h, int latent_w) {
  return {cell.cy * static_cast<float>(latent_h), cell.cx * static_cast<float>(latent_w)};
}

namespace {

struct AxisNeighbors {
  std::array<int, 2> index;
  std::array<double, 2> weight;
  std::array<double, 2> delta;
};

// Position of `coord` on an n-centre lattice: floor cell, clamped indices and
// bilinear weights. Lattice-exact positions within 1e-9 pixel snap so that a
// query on a centre gets weight exactly 1.
AxisNeighbors axis_neighbors(double coord, int n) {
  double u = (coord + 1.0) * 0.5 * n - 0.5;
  const double nearest = std::round(u);
  if (std::abs(u - nearest) < 1e-9) u = nearest;
  const double lower = std::floor(u);
  const double frac = u - lower;
  AxisNeighbors out{};
  for (int a = 0; a < 2; ++a) {
    const int idx = std::clamp(static_cast<int>(lower) + a, 0, n - 1);
    out.index[static_cast<std::size_t>(a)] = idx;
    out.weight[static_cast<std::size_t>(a)] = a == 0 ? 1.0 - frac : frac;
    out.delta[static_cast<std::size_t>(a)] = (coord - pixel_center(idx, n)) * n;
  }
  return out;
}

}  // namespace

QueryBatch build_query_batch(std::span<const Coord> queries, int latent_h, int latent_w, Cell cell) {
  if (latent_h < 1 || latent_w < 1) throw InvalidArgument("build_query_batch: latent dims must be positive");
  QueryBatch qb;
  qb.size = static_cast<std::int64_t>(queries.size());
  qb.latent_h = latent_h;
  qb.latent_w = latent_w;
  qb.cell = cell;
  const auto q_count = queries.size();
  qb.index.resize(kNeighbors * q_count);
  qb.delta.resize(2 * kNeighbors * q_count);
  qb.weight.resize(kNeighbors * q_count);
  for (std::size_t q = 0; q < q_count; ++q) {
    const AxisNeighbors ny = axis_neighbors(queries[q].y, latent_h);
    const AxisNeighbors nx = axis_neighbors(queries[q].x, latent_w);
    std::array<double, kNeighbors> w{};
    double total = 0.0;
    for (int j = 0; j < kNeighbors; ++j) {
      const auto a = static_cast<std::size_t>(j / 2), b = static_cast<std::size_t>(j % 2);
      w[static_cast<std::size_t>(j)] = ny.weight[a] * nx.weight[b];
      total += w[static_cast<std::size_t>(j)];
      const std::size_t slot = static_cast<std::size_t>(j) * q_count + q;
      qb.index[slot] = ny.index[a] * latent_w + nx.index[b];
      qb.delta[2 * slot] = static_cast<float>(ny.delta[a]);
      qb.delta[2 * slot + 1] = static_cast<float>(nx.delta[b]);
    }
    for (int j = 0; j < kNeighbors; ++j) {
      qb.weight[static_cast<std::size_t>(j) * q_count + q] = static_cast<float>(w[static_cast<std::size_t>(j)] / total);
    }
  }
  return qb;
}

QueryBatch build_query_batch(const CoordGrid& queries, int latent_h, int latent_w) {
  return build_query_batch(queries.coords, latent_h, latent_w, make_cell(queries.height, queries.width));
}

}  // namespace lte
