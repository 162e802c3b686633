#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sclab {

/// Error in a user-provided mesh specification (schema, ranges, nesting).
class SpecError : public std::runtime_error {
 public:
  explicit SpecError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure (singular operator, eigensolver breakdown, ...).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Dense boolean grid of cells, row-major with x fastest: (x, y) -> v[y*nx + x].
class BoolGrid {
 public:
  BoolGrid() = default;
  BoolGrid(int nx, int ny, bool value = false)
      : nx_(nx), ny_(ny), v_(static_cast<std::size_t>(nx) * ny, value ? 1 : 0) {}

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  bool at(int x, int y) const { return v_[static_cast<std::size_t>(y) * nx_ + x] != 0; }
  void set(int x, int y, bool value = true) {
    v_[static_cast<std::size_t>(y) * nx_ + x] = value ? 1 : 0;
  }
  long count() const {
    long c = 0;
    for (auto b : v_) c += b;
    return c;
  }
  bool any() const {
    for (auto b : v_)
      if (b) return true;
    return false;
  }
  bool empty_grid() const { return nx_ == 0 || ny_ == 0; }

  /// Each cell becomes a 2x2 block of the doubled grid.
  BoolGrid upsample2() const {
    BoolGrid out(2 * nx_, 2 * ny_);
    for (int y = 0; y < ny_; ++y)
      for (int x = 0; x < nx_; ++x)
        if (at(x, y)) {
          out.set(2 * x, 2 * y);
          out.set(2 * x + 1, 2 * y);
          out.set(2 * x, 2 * y + 1);
          out.set(2 * x + 1, 2 * y + 1);
        }
    return out;
  }

  bool operator==(const BoolGrid& o) const {
    return nx_ == o.nx_ && ny_ == o.ny_ && v_ == o.v_;
  }

  /// True if every set cell of this grid is also set in `other` (same shape).
  bool subset_of(const BoolGrid& other) const {
    if (nx_ != other.nx_ || ny_ != other.ny_) return false;
    for (std::size_t i = 0; i < v_.size(); ++i)
      if (v_[i] && !other.v_[i]) return false;
    return true;
  }

 private:
  int nx_ = 0, ny_ = 0;
  std::vector<std::uint8_t> v_;
};

}  // namespace sclab
