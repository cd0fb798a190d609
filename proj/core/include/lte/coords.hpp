#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "lte/tensor.hpp"

// Continuous-coordinate machinery. Each axis of an n-pixel grid is mapped to
// (-1, 1) with pixel i centred at -1 + (2i + 1) / n, so LR latents and HR
// queries share one frame regardless of resolution.
namespace lte {

struct Coord {
  double y = 0.0;
  double x = 0.0;
};

double pixel_center(std::int64_t i, std::int64_t n);

struct CoordGrid {
  int height = 0;
  int width = 0;
  TrackedVector<Coord> coords;  // row-major
};

CoordGrid make_grid(int h, int w);

// Row-major coordinates [begin, end) of an h x w grid, without building the
// whole grid.
TrackedVector<Coord> grid_coords(int h, int w, std::int64_t begin, std::int64_t end);

// Output-grid step along each axis in normalized units.
struct Cell {
  float cy = 0.0f;
  float cx = 0.0f;
};

Cell make_cell(int h_out, int w_out);
Cell clamp_cell(Cell cell, Cell min_cell);
// A cell measured in latent pixels: (cy * latent_h, cx * latent_w).
Cell relative_cell(Cell cell, int latent_h, int latent_w);

inline constexpr int kNeighbors = 4;

// Four-neighbour local-ensemble geometry for Q queries against a
// latent_h x latent_w lattice. Arrays are neighbour-major so each neighbour's
// slice is contiguous.
struct QueryBatch {
  std::int64_t size = 0;
  int latent_h = 0;
  int latent_w = 0;
  Cell cell;
  TrackedVector<std::int32_t> index;  // [j][q] flat latent pixel row * latent_w + col
  TrackedVector<float> delta;       // [j][q][2] (dy, dx) in units of half a latent pixel
  TrackedVector<float> weight;      // [j][q] bilinear, sums to 1 over j

  std::span<const std::int32_t> neighbor_index(int j) const {
    return {index.data() + static_cast<std::size_t>(j) * static_cast<std::size_t>(size), static_cast<std::size_t>(size)};
  }
  std::span<const float> neighbor_delta(int j) const {
    return {delta.data() + 2 * static_cast<std::size_t>(j) * static_cast<std::size_t>(size),
            2 * static_cast<std::size_t>(size)};
  }
  std::span<const float> neighbor_weight(int j) const {
    return {weight.data() + static_cast<std::size_t>(j) * static_cast<std::size_t>(size), static_cast<std::size_t>(size)};
  }
  int row(int j, std::int64_t q) const { return neighbor_index(j)[static_cast<std::size_t>(q)] / latent_w; }
  int col(int j, std::int64_t q) const { return neighbor_index(j)[static_cast<std::size_t>(q)] % latent_w; }
};

// Neighbour j = 2a + b is (floor row + a, floor col + b) on the latent-centre
// lattice, clamped into range. delta = (x - x_j) * (latent_h, latent_w), so a
// whole latent pixel spans 2 units and |delta| <= 2 per component. Weights are
// bilinear from the unclamped geometry, renormalized to sum to one.
QueryBatch build_query_batch(std::span<const Coord> queries, int latent_h, int latent_w, Cell cell);
QueryBatch build_query_batch(const CoordGrid& queries, int latent_h, int latent_w);

}  // namespace lte
