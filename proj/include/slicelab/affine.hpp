#pragma once

// Invertible affine maps x -> M x + t with cached inverse and |det|.

#include <cmath>

#include "slicelab/common.hpp"

namespace slicelab {

class AffineMap {
 public:
  AffineMap(Mat matrix, Vec translation)
      : matrix_(std::move(matrix)), translation_(std::move(translation)) {
    require(matrix_.rows() == matrix_.cols(),
            "AffineMap: matrix must be square");
    require(matrix_.rows() == translation_.size(),
            "AffineMap: translation dimension mismatch");
    Eigen::PartialPivLU<Mat> lu(matrix_);
    double det = lu.determinant();
    det_abs_ = std::abs(det);
    require(std::isfinite(det_abs_) && det_abs_ > 1e-14,
            "AffineMap: matrix is singular (|det| = " +
                format_double(det_abs_) + ")");
    inverse_ = lu.inverse();
  }

  static AffineMap identity(int n) {
    return AffineMap(Mat::Identity(n, n), Vec::Zero(n));
  }

  static AffineMap scaling(int n, double s) {
    require(s != 0.0, "AffineMap: zero scaling");
    return AffineMap(s * Mat::Identity(n, n), Vec::Zero(n));
  }

  static AffineMap translation_map(const Vec& t) {
    return AffineMap(Mat::Identity(t.size(), t.size()), t);
  }

  int dim() const { return static_cast<int>(matrix_.rows()); }
  const Mat& matrix() const { return matrix_; }
  const Vec& translation() const { return translation_; }
  const Mat& inverse_matrix() const { return inverse_; }
  double det_abs() const { return det_abs_; }

  Vec apply(const Vec& x) const { return matrix_ * x + translation_; }
  Vec apply_inverse(const Vec& y) const {
    return inverse_ * (y - translation_);
  }

  // this ∘ other: x -> M_this (M_other x + t_other) + t_this.
  AffineMap compose(const AffineMap& other) const {
    return AffineMap(matrix_ * other.matrix_,
                     matrix_ * other.translation_ + translation_);
  }

  AffineMap inverse() const {
    return AffineMap(inverse_, -(inverse_ * translation_));
  }

  bool is_similarity(double tol = 1e-10) const {
    // M = s Q with Q orthogonal  <=>  M^T M = s^2 I.
    Mat g = matrix_.transpose() * matrix_;
    double s2 = g.trace() / dim();
    return (g - s2 * Mat::Identity(dim(), dim())).cwiseAbs().maxCoeff() <=
           tol * std::max(1.0, s2);
  }

  // For similarity maps: the scale factor s = |det|^{1/n}.
  double similarity_scale() const {
    return std::pow(det_abs_, 1.0 / dim());
  }

  double operator_norm() const {
    return matrix_.jacobiSvd().singularValues()(0);
  }

 private:
  Mat matrix_;
  Vec translation_;
  Mat inverse_;
  double det_abs_ = 0.0;
};

}  // namespace slicelab
