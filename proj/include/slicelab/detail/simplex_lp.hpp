#pragma once

// Dense tableau simplex for the small LPs behind polytope support values:
//   maximize c^T x  subject to  A x <= b,  b >= 0,  x free.
// Free variables are split x = u - v; the all-slack basis is feasible because
// b >= 0 (the polytope contains the origin).  Bland's rule prevents cycling.
// Problem sizes here are tiny (tens of rows), so no effort is spent on
// sparsity or revised-form updates.

#include <vector>

#include "slicelab/common.hpp"

namespace slicelab::detail {

inline double lp_max(const Mat& A, const Vec& b, const Vec& c,
                     int max_iter = 20000) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  require(b.size() == m, "lp_max: b size mismatch");
  require(c.size() == n, "lp_max: c size mismatch");
  require(b.minCoeff() >= 0.0, "lp_max: requires b >= 0 (origin feasible)");

  const int cols = 2 * n + m;  // u, v, slacks
  Mat T(m, cols + 1);
  T.block(0, 0, m, n) = A;
  T.block(0, n, m, n) = -A;
  T.block(0, 2 * n, m, m) = Mat::Identity(m, m);
  T.col(cols) = b;

  Eigen::RowVectorXd z(cols + 1);
  z.setZero();
  z.segment(0, n) = c.transpose();
  z.segment(n, n) = -c.transpose();

  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) basis[i] = 2 * n + i;

  const double tol = 1e-9;
  for (int iter = 0; iter < max_iter; ++iter) {
    // Entering column: Bland's rule (lowest index with positive reduced cost).
    int e = -1;
    for (int j = 0; j < cols; ++j) {
      if (z[j] > tol) {
        e = j;
        break;
      }
    }
    if (e < 0) return -z[cols];  // optimal

    // Ratio test; ties broken toward the smallest basis index.
    int l = -1;
    double best = 0.0;
    for (int i = 0; i < m; ++i) {
      if (T(i, e) > tol) {
        double ratio = T(i, cols) / T(i, e);
        if (l < 0 || ratio < best - tol ||
            (ratio < best + tol && basis[i] < basis[l])) {
          l = i;
          best = ratio;
        }
      }
    }
    if (l < 0)
      throw GeometryError(
          "lp_max: objective unbounded (polytope not bounded along requested "
          "direction)");

    // Pivot on (l, e).
    T.row(l) /= T(l, e);
    for (int i = 0; i < m; ++i) {
      if (i != l && std::abs(T(i, e)) > 0.0) T.row(i) -= T(i, e) * T.row(l);
    }
    z -= z[e] * T.row(l);
    basis[l] = e;
  }
  throw GeometryError("lp_max: iteration limit exceeded");
}

}  // namespace slicelab::detail
