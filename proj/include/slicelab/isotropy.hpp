#pragma once

// Centering, covariance, and the isotropic normalization
//   |K| = 1,  barycenter 0,  int_K <x,theta>^2 dx = L^2 for all unit theta.
//
// The isotropic constant L is read off as sqrt(trace(Sigma)/n); the isotropy
// defect lambda_max/lambda_min of the sample covariance measures how far a
// body is from isotropic position.

#include <cstdint>
#include <tuple>

#include "slicelab/body.hpp"
#include "slicelab/estimate.hpp"
#include "slicelab/sampling.hpp"

namespace slicelab {

struct MeanEstimate {
  Vec mean;
  Vec std_errors;  // per coordinate
  std::int64_t sample_count = 0;
};

inline MeanEstimate center_of_mass(const PointSample& sample) {
  require(sample.count() > 1, "center_of_mass: need at least two points");
  MeanEstimate out;
  out.mean = sample.points.colwise().mean().transpose();
  Mat centered = sample.points.rowwise() - out.mean.transpose();
  Vec var = centered.array().square().colwise().sum().transpose() /
            double(sample.count() - 1);
  out.std_errors = (var / double(sample.count())).cwiseSqrt();
  out.sample_count = sample.count();
  return out;
}

// Sample covariance about the given center.
inline Mat covariance(const PointSample& sample, const Vec& center) {
  require(sample.count() > 1, "covariance: need at least two points");
  require(center.size() == sample.dim(), "covariance: center dim mismatch");
  Mat c = sample.points.rowwise() - center.transpose();
  return (c.transpose() * c) / double(sample.count() - 1);
}

struct IsotropyReport {
  Vec center;
  Mat covariance;
  Estimate L;     // sqrt(trace(covariance)/n), SE by the delta method
  double defect;  // lambda_max / lambda_min of the covariance
  std::int64_t budget = 0;
  std::uint64_t seed = 0;
};

namespace detail {

inline IsotropyReport report_from_sample(const PointSample& s,
                                         std::uint64_t seed) {
  IsotropyReport rep;
  MeanEstimate me = center_of_mass(s);
  rep.center = me.mean;
  rep.covariance = covariance(s, me.mean);
  Eigen::SelfAdjointEigenSolver<Mat> eig(rep.covariance);
  double lmin = eig.eigenvalues().minCoeff();
  double lmax = eig.eigenvalues().maxCoeff();
  if (!(lmin > 0.0))
    throw InsufficientBudgetError(
        "isotropy: sample covariance not positive definite (min eigenvalue " +
        format_double(lmin) + "); raise the budget");
  rep.defect = lmax / lmin;
  // L^2 = mean ||x - c||^2 / n; SE via the delta method.
  RunningStat r2;
  Mat centered = s.points.rowwise() - me.mean.transpose();
  for (std::int64_t i = 0; i < s.count(); ++i)
    r2.add(centered.row(i).squaredNorm());
  double n = double(s.dim());
  rep.L.value = std::sqrt(r2.mean() / n);
  rep.L.std_error = r2.std_error_of_mean() / (2.0 * std::sqrt(r2.mean() * n));
  rep.L.sample_count = s.count();
  rep.L.seed = seed;
  rep.budget = s.count();
  rep.seed = seed;
  return rep;
}

}  // namespace detail

// Diagnose the body in its current position.
inline IsotropyReport isotropy_report(const Body& b, std::int64_t budget,
                                      std::uint64_t seed) {
  PointSample s = sample_uniform(b, budget, substream(seed, "isotropy"));
  return detail::report_from_sample(s, seed);
}

struct IsotropizeResult {
  AffineMap map;          // x -> T(x - center), volume-corrected
  Body body;              // image of the input under `map`
  IsotropyReport before;  // input body diagnostics
  IsotropyReport after;   // re-estimated at the same budget
  VolumeEstimate volume;  // volume of the input body used for normalization
};

// Affine map into approximate isotropic position: whiten with the inverse
// covariance root, then rescale to volume one.  The `after` report carries
// L and the residual defect re-estimated on a fresh sample.
inline IsotropizeResult isotropic_transform(const Body& b, std::int64_t budget,
                                            std::uint64_t seed,
                                            std::int64_t volume_mc_budget = 0) {
  require(budget > 1, "isotropic_transform: budget too small");
  PointSample s1 = sample_uniform(b, budget, substream(seed, "isotropy-in"));
  IsotropyReport before = detail::report_from_sample(s1, seed);

  Eigen::SelfAdjointEigenSolver<Mat> eig(before.covariance);
  Vec inv_root = eig.eigenvalues().cwiseSqrt().cwiseInverse();
  Mat W = eig.eigenvectors() * inv_root.asDiagonal() *
          eig.eigenvectors().transpose();
  double log_det_w = -0.5 * eig.eigenvalues().array().log().sum();

  VolumeEstimate vol = estimate_volume(
      b, volume_mc_budget > 0 ? volume_mc_budget : budget,
      substream(seed, "isotropy-vol"));
  // |W(K - c)| = |K| exp(log det W); rescale that to one.
  double log_scale =
      -(std::log(vol.value) + log_det_w) / double(b.dim());
  Mat T = std::exp(log_scale) * W;
  AffineMap map(T, -(T * before.center));
  Body image = apply_affine(b, map);

  PointSample s2 =
      sample_uniform(image, budget, substream(seed, "isotropy-out"));
  IsotropyReport after = detail::report_from_sample(s2, seed);
  return IsotropizeResult{map, std::move(image), std::move(before),
                          std::move(after), vol};
}

// L_K of the body: direct if the body already sits (approximately) in
// isotropic position, otherwise computed after isotropic normalization.
inline Estimate isotropic_constant(const Body& b, std::int64_t budget,
                                   std::uint64_t seed,
                                   double defect_threshold = 1.05) {
  IsotropyReport rep = isotropy_report(b, budget, seed);
  double center_scale = rep.center.norm() /
                        std::max(1e-12, std::sqrt(rep.covariance.trace()));
  bool centered = center_scale < 0.05;
  bool normalized = b.is_volume_normalized(1e-6);
  if (rep.defect <= defect_threshold && centered && normalized) return rep.L;
  return isotropic_transform(b, budget, seed).after.L;
}

}  // namespace slicelab
