#pragma once

#include "rlab/tensor.hpp"

namespace rlab {

// Parallel kernels. Rows of the output are distributed over OpenMP threads;
// each output element is still reduced in a single left-to-right order over
// the inner index, so results are bitwise identical to the serial reference
// below regardless of thread count.

/// [m x k] * [k x n] -> [m x n]
template <typename T>
BasicArray<T> matmul(const BasicArray<T>& a, const BasicArray<T>& b);

/// a * b^T : [m x k] * [n x k]^T -> [m x n]
template <typename T>
BasicArray<T> matmul_nt(const BasicArray<T>& a, const BasicArray<T>& b);

/// a^T * b : [k x m]^T * [k x n] -> [m x n]
template <typename T>
BasicArray<T> matmul_tn(const BasicArray<T>& a, const BasicArray<T>& b);

template <typename T>
BasicArray<T> transpose(const BasicArray<T>& a);

/// Row-wise softmax with per-row max subtraction.
template <typename T>
BasicArray<T> softmax_rows(const BasicArray<T>& logits);

/// In-place a += b (same shape).
template <typename T>
void add_inplace(BasicArray<T>& a, const BasicArray<T>& b);

/// In-place: add `bias` [n] to every row of `a` [m x n].
template <typename T>
void add_row_inplace(BasicArray<T>& a, const BasicArray<T>& bias);

namespace reference {

// Serial textbook versions, kept as test oracles and benchmark baselines.

template <typename T>
BasicArray<T> matmul(const BasicArray<T>& a, const BasicArray<T>& b);

template <typename T>
BasicArray<T> softmax_rows(const BasicArray<T>& logits);

}  // namespace reference

}  // namespace rlab
