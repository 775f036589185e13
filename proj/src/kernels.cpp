#include "rlab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "rlab/error.hpp"

namespace rlab {
namespace {

// Below this many multiply-adds a parallel region costs more than it saves.
constexpr std::int64_t kParallelWork = 1 << 16;

template <typename T>
void require_matrix(const BasicArray<T>& a, const char* what) {
  if (a.shape().rank() != 2) {
    fail(ErrorKind::dimension, std::string(what) + ": expected a matrix, got " + a.shape().str());
  }
}

}  // namespace

template <typename T>
BasicArray<T> matmul(const BasicArray<T>& a, const BasicArray<T>& b) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  if (a.cols() != b.rows()) {
    fail(ErrorKind::dimension, "matmul: inner dims differ " + a.shape().str() + " x " + b.shape().str());
  }
  const int m = a.rows(), k = a.cols(), n = b.cols();
  BasicArray<T> c(Shape{m, n});
  const std::int64_t work = std::int64_t{m} * k * n;
#pragma omp parallel for schedule(static) if (work > kParallelWork)
  for (int i = 0; i < m; ++i) {
    T* ci = c.row(i);
    const T* ai = a.row(i);
    for (int p = 0; p < k; ++p) {
      const T aip = ai[p];
      const T* bp = b.row(p);
      for (int j = 0; j < n; ++j) ci[j] += aip * bp[j];
    }
  }
  return c;
}

template <typename T>
BasicArray<T> transpose(const BasicArray<T>& a) {
  require_matrix(a, "transpose");
  BasicArray<T> t(Shape{a.cols(), a.rows()});
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) t.at(j, i) = a.at(i, j);
  }
  return t;
}

template <typename T>
BasicArray<T> matmul_nt(const BasicArray<T>& a, const BasicArray<T>& b) {
  require_matrix(b, "matmul_nt");
  return matmul(a, transpose(b));
}

template <typename T>
BasicArray<T> matmul_tn(const BasicArray<T>& a, const BasicArray<T>& b) {
  require_matrix(a, "matmul_tn");
  require_matrix(b, "matmul_tn");
  if (a.rows() != b.rows()) {
    fail(ErrorKind::dimension, "matmul_tn: inner dims differ " + a.shape().str() + "^T x " + b.shape().str());
  }
  const int k = a.rows(), m = a.cols(), n = b.cols();
  BasicArray<T> c(Shape{m, n});
  const std::int64_t work = std::int64_t{m} * k * n;
#pragma omp parallel for schedule(static) if (work > kParallelWork)
  for (int i = 0; i < m; ++i) {
    T* ci = c.row(i);
    for (int p = 0; p < k; ++p) {
      const T api = a.at(p, i);
      const T* bp = b.row(p);
      for (int j = 0; j < n; ++j) ci[j] += api * bp[j];
    }
  }
  return c;
}

template <typename T>
BasicArray<T> softmax_rows(const BasicArray<T>& logits) {
  require_matrix(logits, "softmax_rows");
  const int m = logits.rows(), n = logits.cols();
  BasicArray<T> out(logits.shape());
#pragma omp parallel for schedule(static) if (std::int64_t{m} * n > kParallelWork)
  for (int i = 0; i < m; ++i) {
    const T* z = logits.row(i);
    T* p = out.row(i);
    T mx = z[0];
    for (int j = 1; j < n; ++j) mx = std::max(mx, z[j]);
    T sum = 0;
    for (int j = 0; j < n; ++j) {
      p[j] = std::exp(z[j] - mx);
      sum += p[j];
    }
    const T inv = T{1} / sum;
    for (int j = 0; j < n; ++j) p[j] *= inv;
  }
  return out;
}

template <typename T>
void add_inplace(BasicArray<T>& a, const BasicArray<T>& b) {
  if (!(a.shape() == b.shape())) {
    fail(ErrorKind::dimension, "add: shapes differ " + a.shape().str() + " vs " + b.shape().str());
  }
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
}

template <typename T>
void add_row_inplace(BasicArray<T>& a, const BasicArray<T>& bias) {
  require_matrix(a, "add_row");
  if (bias.size() != static_cast<std::size_t>(a.cols())) {
    fail(ErrorKind::dimension, "add_row: bias " + bias.shape().str() + " vs " + a.shape().str());
  }
  for (int i = 0; i < a.rows(); ++i) {
    T* r = a.row(i);
    for (int j = 0; j < a.cols(); ++j) r[j] += bias[static_cast<std::size_t>(j)];
  }
}

namespace reference {

template <typename T>
BasicArray<T> matmul(const BasicArray<T>& a, const BasicArray<T>& b) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  if (a.cols() != b.rows()) {
    fail(ErrorKind::dimension, "matmul: inner dims differ " + a.shape().str() + " x " + b.shape().str());
  }
  BasicArray<T> c(Shape{a.rows(), b.cols()});
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < b.cols(); ++j) {
      T sum = 0;
      for (int p = 0; p < a.cols(); ++p) sum += a.at(i, p) * b.at(p, j);
      c.at(i, j) = sum;
    }
  }
  return c;
}

template <typename T>
BasicArray<T> softmax_rows(const BasicArray<T>& logits) {
  require_matrix(logits, "softmax_rows");
  BasicArray<T> out(logits.shape());
  for (int i = 0; i < logits.rows(); ++i) {
    T mx = logits.at(i, 0);
    for (int j = 1; j < logits.cols(); ++j) mx = std::max(mx, logits.at(i, j));
    T sum = 0;
    for (int j = 0; j < logits.cols(); ++j) {
      out.at(i, j) = std::exp(logits.at(i, j) - mx);
      sum += out.at(i, j);
    }
    const T inv = T{1} / sum;
    for (int j = 0; j < logits.cols(); ++j) out.at(i, j) *= inv;
  }
  return out;
}

}  // namespace reference

#define RLAB_INSTANTIATE_KERNELS(T)                                            \
  template BasicArray<T> matmul(const BasicArray<T>&, const BasicArray<T>&);    \
  template BasicArray<T> matmul_nt(const BasicArray<T>&, const BasicArray<T>&); \
  template BasicArray<T> matmul_tn(const BasicArray<T>&, const BasicArray<T>&); \
  template BasicArray<T> transpose(const BasicArray<T>&);                       \
  template BasicArray<T> softmax_rows(const BasicArray<T>&);                    \
  template void add_inplace(BasicArray<T>&, const BasicArray<T>&);              \
  template void add_row_inplace(BasicArray<T>&, const BasicArray<T>&);          \
  template BasicArray<T> reference::matmul(const BasicArray<T>&, const BasicArray<T>&); \
  template BasicArray<T> reference::softmax_rows(const BasicArray<T>&);

RLAB_INSTANTIATE_KERNELS(float)
RLAB_INSTANTIATE_KERNELS(double)

#undef RLAB_INSTANTIATE_KERNELS

}  // namespace rlab
