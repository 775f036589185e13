#pragma once

#include <array>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace rlab {

/// Dimensions of a dense array: rank 1 to 4, every extent positive.
class Shape {
 public:
  static constexpr int kMaxRank = 4;

  Shape() = default;
  Shape(std::initializer_list<int> dims);
  explicit Shape(std::span<const int> dims);

  int rank() const noexcept { return rank_; }
  int operator[](int axis) const { return dims_.at(static_cast<std::size_t>(axis)); }
  std::size_t numel() const noexcept;
  std::span<const int> dims() const noexcept { return {dims_.data(), static_cast<std::size_t>(rank_)}; }

  std::string str() const;

  friend bool operator==(const Shape& a, const Shape& b) noexcept {
    return a.rank_ == b.rank_ && a.dims_ == b.dims_;
  }

 private:
  void validate() const;

  std::array<int, kMaxRank> dims_{};
  int rank_ = 0;
};

/// Row-major dense array. The compute path uses `DenseArray` (32-bit); the
/// double instantiation exists for finite-difference gradient checks.
template <typename T>
class BasicArray {
 public:
  using value_type = T;

  BasicArray() = default;
  explicit BasicArray(const Shape& shape) : shape_(shape), data_(shape.numel(), T{}) {}
  BasicArray(const Shape& shape, std::vector<T> values);
  BasicArray(const Shape& shape, T fill) : shape_(shape), data_(shape.numel(), fill) {}

  const Shape& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  // 2-D accessors; callers guarantee rank 2.
  int rows() const { return shape_[0]; }
  int cols() const { return shape_[1]; }
  T& at(int r, int c) { return data_[static_cast<std::size_t>(r) * shape_[1] + c]; }
  const T& at(int r, int c) const { return data_[static_cast<std::size_t>(r) * shape_[1] + c]; }
  T* row(int r) { return data_.data() + static_cast<std::size_t>(r) * shape_[1]; }
  const T* row(int r) const { return data_.data() + static_cast<std::size_t>(r) * shape_[1]; }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::span<T> span() noexcept { return data_; }
  std::span<const T> span() const noexcept { return data_; }
  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }
  const std::vector<T>& values() const noexcept { return data_; }

  /// Same storage, new dims; element count must match.
  BasicArray reshaped(const Shape& shape) const;

  bool all_finite() const noexcept;

  friend bool operator==(const BasicArray& a, const BasicArray& b) noexcept {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  Shape shape_;
  std::vector<T> data_;
};

using DenseArray = BasicArray<float>;

/// Bitwise equality, distinguishing -0/+0 and NaN payloads.
bool bitwise_equal(const DenseArray& a, const DenseArray& b) noexcept;

template <typename To, typename From>
BasicArray<To> array_cast(const BasicArray<From>& src) {
  std::vector<To> out(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) out[i] = static_cast<To>(src[i]);
  return BasicArray<To>(src.shape(), std::move(out));
}

extern template class BasicArray<float>;
extern template class BasicArray<double>;

}  // namespace rlab
