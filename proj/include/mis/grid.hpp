#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace mis {

/// Dense row-major 2-D array.
template <typename T>
struct Grid {
  int rows = 0;
  int cols = 0;
  std::vector<T> data;

  Grid() = default;
  Grid(int r, int c, T fill = T{})
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {}

  T& operator()(int r, int c) {
    return data[static_cast<std::size_t>(r) * cols + c];
  }
  const T& operator()(int r, int c) const {
    return data[static_cast<std::size_t>(r) * cols + c];
  }

  std::span<T> row(int r) {
    return {data.data() + static_cast<std::size_t>(r) * cols,
            static_cast<std::size_t>(cols)};
  }
  std::span<const T> row(int r) const {
    return {data.data() + static_cast<std::size_t>(r) * cols,
            static_cast<std::size_t>(cols)};
  }

  bool empty() const { return data.empty(); }

  bool operator==(const Grid&) const = default;
};

using Matrix = Grid<double>;
using IntGrid = Grid<int>;

inline double row_sum(const Matrix& m, int r) {
  double s = 0.0;
  for (double x : m.row(r)) s += x;
  return s;
}

/// Divide each row by its sum. Rows summing to zero are left untouched.
inline void normalize_rows(Matrix& m) {
  for (int r = 0; r < m.rows; ++r) {
    const double s = row_sum(m, r);
    if (s <= 0.0) continue;
    for (double& x : m.row(r)) x /= s;
  }
}

}  // namespace mis
