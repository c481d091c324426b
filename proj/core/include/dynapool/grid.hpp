#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace dynapool {

/// Row-major 2-D grid with value semantics.
template <typename T>
struct Grid {
  int width = 0;
  int height = 0;
  std::vector<T> values;

  Grid() = default;
  Grid(int w, int h, T fill = T{}) : width(w), height(h) {
    if (w < 0 || h < 0) {
      throw std::invalid_argument("grid dimensions must be nonnegative");
    }
    values.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill);
  }

  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
           static_cast<std::size_t>(x);
  }
  T& at(int x, int y) { return values[index(x, y)]; }
  const T& at(int x, int y) const { return values[index(x, y)]; }

  std::size_t size() const { return values.size(); }
  bool empty() const { return values.empty(); }
  bool same_shape(int w, int h) const { return width == w && height == h; }

  friend bool operator==(const Grid&, const Grid&) = default;
};

/// Real-valued plane (normalized depth, normal component, ...).
using Plane = Grid<double>;

/// Boolean plane; 0 = false, nonzero = true.
using Mask = Grid<std::uint8_t>;

/// Per-frame foreground mask.
using ForegroundMask = Mask;

}  // namespace dynapool
