#include "grain/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace grain::kernels {

namespace {

void require(bool ok, const char* what) {
  if (!ok) {
    throw std::invalid_argument(what);
  }
}

}  // namespace

// ---- serial reference ----

namespace ref {

void affine(const Matrix& x, const Matrix& w, std::span<const double> bias, Matrix& out) {
  require(x.cols == w.rows, "affine: inner dimensions differ");
  require(bias.size() == w.cols, "affine: bias length differs from output width");
  out = Matrix(x.rows, w.cols);
  for (std::size_t i = 0; i < x.rows; ++i) {
    const double* xi = x.row(i);
    double* oi = out.row(i);
    for (std::size_t j = 0; j < w.cols; ++j) {
      double acc = bias[j];
      for (std::size_t t = 0; t < x.cols; ++t) {
        acc += xi[t] * w(t, j);
      }
      oi[j] = acc;
    }
  }
}

void matmul_at_b(const Matrix& a, const Matrix& b, Matrix& out) {
  require(a.rows == b.rows, "matmul_at_b: row counts differ");
  out = Matrix(a.cols, b.cols);
  for (std::size_t i = 0; i < a.cols; ++i) {
    double* oi = out.row(i);
    for (std::size_t j = 0; j < b.cols; ++j) {
      double acc = 0.0;
      for (std::size_t t = 0; t < a.rows; ++t) {
        acc += a(t, i) * b(t, j);
      }
      oi[j] = acc;
    }
  }
}

void matmul_a_bt(const Matrix& a, const Matrix& b, Matrix& out) {
  require(a.cols == b.cols, "matmul_a_bt: column counts differ");
  out = Matrix(a.rows, b.rows);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* ai = a.row(i);
    double* oi = out.row(i);
    for (std::size_t j = 0; j < b.rows; ++j) {
      const double* bj = b.row(j);
      double acc = 0.0;
      for (std::size_t t = 0; t < a.cols; ++t) {
        acc += ai[t] * bj[t];
      }
      oi[j] = acc;
    }
  }
}

void relu(Matrix& m) {
  for (double& v : m.values) {
    v = std::max(v, 0.0);
  }
}

void relu_backward(const Matrix& act, Matrix& grad) {
  require(act.rows == grad.rows && act.cols == grad.cols,
          "relu_backward: shapes differ");
  for (std::size_t i = 0; i < grad.values.size(); ++i) {
    if (act.values[i] == 0.0) {
      grad.values[i] = 0.0;
    }
  }
}

void softmax_rows(Matrix& m) {
  for (std::size_t i = 0; i < m.rows; ++i) {
    double* r = m.row(i);
    double mx = r[0];
    for (std::size_t j = 1; j < m.cols; ++j) {
      mx = std::max(mx, r[j]);
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < m.cols; ++j) {
      r[j] = std::exp(r[j] - mx);
      sum += r[j];
    }
    for (std::size_t j = 0; j < m.cols; ++j) {
      r[j] /= sum;
    }
  }
}

void col_sums(const Matrix& m, std::span<double> out) {
  require(out.size() == m.cols, "col_sums: output length differs from column count");
  for (std::size_t j = 0; j < m.cols; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < m.rows; ++i) {
      acc += m(i, j);
    }
    out[j] = acc;
  }
}

std::vector<int> argmax_rows(const Matrix& m) {
  require(m.cols > 0, "argmax_rows: matrix has no columns");
  std::vector<int> idx(m.rows);
  for (std::size_t i = 0; i < m.rows; ++i) {
    const double* r = m.row(i);
    int best = 0;
    for (std::size_t j = 1; j < m.cols; ++j) {
      if (r[j] > r[best]) {
        best = static_cast<int>(j);
      }
    }
    idx[i] = best;
  }
  return idx;
}

}  // namespace ref

// ---- OpenMP versions ----
//
// The loops below parallelize the reference implementations over output rows
// (or columns, for col_sums). The bodies are copies of the serial inner
// loops, so each output element goes through the identical sequence of
// floating-point operations regardless of how rows are distributed.

void affine(const Matrix& x, const Matrix& w, std::span<const double> bias, Matrix& out) {
  require(x.cols == w.rows, "affine: inner dimensions differ");
  require(bias.size() == w.cols, "affine: bias length differs from output width");
  out = Matrix(x.rows, w.cols);
  const std::int64_t n = static_cast<std::int64_t>(x.rows);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const double* xi = x.row(i);
    double* oi = out.row(i);
    for (std::size_t j = 0; j < w.cols; ++j) {
      double acc = bias[j];
      for (std::size_t t = 0; t < x.cols; ++t) {
        acc += xi[t] * w(t, j);
      }
      oi[j] = acc;
    }
  }
}

void matmul_at_b(const Matrix& a, const Matrix& b, Matrix& out) {
  require(a.rows == b.rows, "matmul_at_b: row counts differ");
  out = Matrix(a.cols, b.cols);
  const std::int64_t m = static_cast<std::int64_t>(a.cols);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < m; ++i) {
    double* oi = out.row(i);
    for (std::size_t j = 0; j < b.cols; ++j) {
      double acc = 0.0;
      for (std::size_t t = 0; t < a.rows; ++t) {
        acc += a(t, i) * b(t, j);
      }
      oi[j] = acc;
    }
  }
}

void matmul_a_bt(const Matrix& a, const Matrix& b, Matrix& out) {
  require(a.cols == b.cols, "matmul_a_bt: column counts differ");
  out = Matrix(a.rows, b.rows);
  const std::int64_t n = static_cast<std::int64_t>(a.rows);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const double* ai = a.row(i);
    double* oi = out.row(i);
    for (std::size_t j = 0; j < b.rows; ++j) {
      const double* bj = b.row(j);
      double acc = 0.0;
      for (std::size_t t = 0; t < a.cols; ++t) {
        acc += ai[t] * bj[t];
      }
      oi[j] = acc;
    }
  }
}

void relu(Matrix& m) {
  const std::int64_t n = static_cast<std::int64_t>(m.values.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    m.values[i] = std::max(m.values[i], 0.0);
  }
}

void relu_backward(const Matrix& act, Matrix& grad) {
  require(act.rows == grad.rows && act.cols == grad.cols,
          "relu_backward: shapes differ");
  const std::int64_t n = static_cast<std::int64_t>(grad.values.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    if (act.values[i] == 0.0) {
      grad.values[i] = 0.0;
    }
  }
}

void softmax_rows(Matrix& m) {
  const std::int64_t n = static_cast<std::int64_t>(m.rows);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    double* r = m.row(i);
    double mx = r[0];
    for (std::size_t j = 1; j < m.cols; ++j) {
      mx = std::max(mx, r[j]);
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < m.cols; ++j) {
      r[j] = std::exp(r[j] - mx);
      sum += r[j];
    }
    for (std::size_t j = 0; j < m.cols; ++j) {
      r[j] /= sum;
    }
  }
}

void col_sums(const Matrix& m, std::span<double> out) {
  require(out.size() == m.cols, "col_sums: output length differs from column count");
  const std::int64_t c = static_cast<std::int64_t>(m.cols);
#pragma omp parallel for schedule(static)
  for (std::int64_t j = 0; j < c; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < m.rows; ++i) {
      acc += m(i, j);
    }
    out[j] = acc;
  }
}

std::vector<int> argmax_rows(const Matrix& m) {
  require(m.cols > 0, "argmax_rows: matrix has no columns");
  std::vector<int> idx(m.rows);
  const std::int64_t n = static_cast<std::int64_t>(m.rows);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const double* r = m.row(i);
    int best = 0;
    for (std::size_t j = 1; j < m.cols; ++j) {
      if (r[j] > r[best]) {
        best = static_cast<int>(j);
      }
    }
    idx[i] = best;
  }
  return idx;
}

}  // namespace grain::kernels
