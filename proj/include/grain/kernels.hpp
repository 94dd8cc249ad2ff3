#pragma once

#include <span>
#include <vector>

#include "grain/matrix.hpp"

namespace grain::kernels {

// Dense kernels behind the classifier's forward and backward passes.
//
// Each kernel parallelizes with OpenMP over independent output elements only,
// and computes every output element with the same serial accumulation order
// as the reference implementation in kernels::ref. The results are therefore
// bit-identical to the serial versions for any thread count, which the tests
// assert with exact equality.

// out = x * w, plus bias broadcast over rows. x is n x d, w is d x m,
// bias has m entries, out is resized to n x m.
void affine(const Matrix& x, const Matrix& w, std::span<const double> bias, Matrix& out);

// out = a^T * b. a is n x m, b is n x k, out is resized to m x k.
void matmul_at_b(const Matrix& a, const Matrix& b, Matrix& out);

// out = a * b^T. a is n x k, b is m x k, out is resized to n x m.
void matmul_a_bt(const Matrix& a, const Matrix& b, Matrix& out);

// In-place rectifier, max(x, 0).
void relu(Matrix& m);

// Zeroes grad wherever the forward activation was clamped (act == 0).
void relu_backward(const Matrix& act, Matrix& grad);

// In-place row-wise softmax, max-shifted for stability.
void softmax_rows(Matrix& m);

// Column sums; out must have m.cols entries.
void col_sums(const Matrix& m, std::span<double> out);

// Row-wise argmax; ties resolve to the lowest column index.
std::vector<int> argmax_rows(const Matrix& m);

// Serial reference implementations. These are the ground truth the parallel
// kernels are tested against and the baseline the benchmark compares with.
namespace ref {
void affine(const Matrix& x, const Matrix& w, std::span<const double> bias, Matrix& out);
void matmul_at_b(const Matrix& a, const Matrix& b, Matrix& out);
void matmul_a_bt(const Matrix& a, const Matrix& b, Matrix& out);
void relu(Matrix& m);
void relu_backward(const Matrix& act, Matrix& grad);
void softmax_rows(Matrix& m);
void col_sums(const Matrix& m, std::span<double> out);
std::vector<int> argmax_rows(const Matrix& m);
}  // namespace ref

}  // namespace grain::kernels
