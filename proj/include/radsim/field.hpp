#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace radsim {

/// Grid cell coordinate (row-major; row 0 is the north edge).
struct Cell {
  std::size_t row{0};
  std::size_t col{0};
  friend bool operator==(const Cell&, const Cell&) = default;
};

/// Dense row-major 2D field aligned to a building grid.
template <typename T>
class Grid2D {
 public:
  Grid2D() = default;
  Grid2D(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  T& operator[](Cell cell) { return (*this)(cell.row, cell.col); }
  const T& operator[](Cell cell) const { return (*this)(cell.row, cell.col); }

  T& at(std::size_t r, std::size_t c) {
    if (r >= rows_ || c >= cols_) throw std::out_of_range("Grid2D index out of range");
    return (*this)(r, c);
  }
  const T& at(std::size_t r, std::size_t c) const {
    if (r >= rows_ || c >= cols_) throw std::out_of_range("Grid2D index out of range");
    return (*this)(r, c);
  }

  std::span<T> flat() { return data_; }
  std::span<const T> flat() const { return data_; }

  void fill(const T& value) { std::fill(data_.begin(), data_.end(), value); }

  bool same_shape(std::size_t rows, std::size_t cols) const { return rows_ == rows && cols_ == cols; }
  template <typename U>
  bool same_shape(const Grid2D<U>& other) const {
    return rows_ == other.rows() && cols_ == other.cols();
  }

  friend bool operator==(const Grid2D&, const Grid2D&) = default;

 private:
  std::size_t rows_{0};
  std::size_t cols_{0};
  std::vector<T> data_;
};

using Field = Grid2D<double>;

}  // namespace radsim
