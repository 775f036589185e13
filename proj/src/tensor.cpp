#include "rlab/tensor.hpp"

#include <cmath>
#include <cstring>

#include "rlab/error.hpp"

namespace rlab {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::dimension: return "dimension error";
    case ErrorKind::reuse_violation: return "reuse violation";
    case ErrorKind::numeric: return "numeric error";
    case ErrorKind::invalid_strategy: return "invalid strategy";
    case ErrorKind::config: return "config error";
    case ErrorKind::missing_artifact: return "missing artifact";
    case ErrorKind::budget_exceeded: return "budget exceeded";
    case ErrorKind::training_divergence: return "training diverged";
    case ErrorKind::domain: return "domain error";
    case ErrorKind::search_safeguard: return "search safeguard";
    case ErrorKind::io: return "io error";
  }
  return "error";
}

Shape::Shape(std::initializer_list<int> dims) {
  if (dims.size() == 0 || dims.size() > kMaxRank) {
    fail(ErrorKind::dimension, "shape rank must be in [1, 4]");
  }
  for (int d : dims) dims_[static_cast<std::size_t>(rank_++)] = d;
  validate();
}

Shape::Shape(std::span<const int> dims) {
  if (dims.empty() || dims.size() > kMaxRank) {
    fail(ErrorKind::dimension, "shape rank must be in [1, 4]");
  }
  for (int d : dims) dims_[static_cast<std::size_t>(rank_++)] = d;
  validate();
}

void Shape::validate() const {
  for (int i = 0; i < rank_; ++i) {
    if (dims_[static_cast<std::size_t>(i)] <= 0) {
      fail(ErrorKind::dimension, "shape extents must be positive: " + str());
    }
  }
}

std::size_t Shape::numel() const noexcept {
  if (rank_ == 0) return 0;
  std::size_t n = 1;
  for (int i = 0; i < rank_; ++i) n *= static_cast<std::size_t>(dims_[static_cast<std::size_t>(i)]);
  return n;
}

std::string Shape::str() const {
  std::string s = "[";
  for (int i = 0; i < rank_; ++i) {
    if (i) s += "x";
    s += std::to_string(dims_[static_cast<std::size_t>(i)]);
  }
  return s + "]";
}

template <typename T>
BasicArray<T>::BasicArray(const Shape& shape, std::vector<T> values)
    : shape_(shape), data_(std::move(values)) {
  if (data_.size() != shape_.numel()) {
    fail(ErrorKind::dimension, "data length " + std::to_string(data_.size()) +
                                   " does not match shape " + shape_.str());
  }
}

template <typename T>
BasicArray<T> BasicArray<T>::reshaped(const Shape& shape) const {
  if (shape.numel() != data_.size()) {
    fail(ErrorKind::dimension, "cannot reshape " + shape_.str() + " to " + shape.str());
  }
  return BasicArray(shape, data_);
}

template <typename T>
bool BasicArray<T>::all_finite() const noexcept {
  for (T v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

bool bitwise_equal(const DenseArray& a, const DenseArray& b) noexcept {
  return a.shape() == b.shape() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0;
}

template class BasicArray<float>;
template class BasicArray<double>;

}  // namespace rlab
