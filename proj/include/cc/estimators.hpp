#pragma once

#include <cstdint>

#include "cc/sketch.hpp"
#include "cc/stable.hpp"

namespace cc {

// A point estimate of the frequency moment F_alpha = sum_i A_i^alpha.
struct MomentEstimate {
  double value;  // >= 0
  EstimatorKind estimator;
  double alpha;
  std::uint32_t k;
  double predicted_relative_variance;  // variance_factor(estimator, alpha) / k
};

// Normalizing constant of the geometric-mean estimator:
//
//   d_gm = [cos^k(kappa pi / 2k) / cos(kappa pi / 2)]
//          * [(2/pi) sin(pi alpha / 2k) Gamma(1 - 1/k) Gamma(alpha/k)]^k
//
// so that E prod_j |x_j|^(alpha/k) = d_gm * F for x_j ~ S(alpha, 1, F).
// log_d_factored drops the cos(kappa pi / 2) division, matching sketch
// entries that carry the deferred cos(rho alpha) scale. Instances are
// cached per (alpha, k).
struct GmNormalizer {
  double alpha;
  std::uint32_t k;
  double kappa;
  double d_gm;
  double log_d_factored;
};
const GmNormalizer& gm_normalizer(double alpha, std::uint32_t k);

// Normalizer of the symmetric geometric-mean estimator (no cosine factors):
// log of [(2/pi) sin(pi alpha / 2k) Gamma(1 - 1/k) Gamma(alpha/k)]^k.
double log_sym_gm_normalizer(double alpha, std::uint32_t k);

// Geometric mean of |x_j|^(alpha/k), divided by its expectation; strictly
// unbiased. Skewed sketches only, k >= 2. Evaluated in log space.
MomentEstimate estimate_gm(const ProjectionSketch& sketch);

// Harmonic mean of |x_j|^alpha with an O(1/k) correction making the bias
// O(1/k^2). Skewed sketches with alpha < 1 only.
MomentEstimate estimate_hm(const ProjectionSketch& sketch);

// Sample quantile estimator: reads the m-th smallest |x_j| at the level
// m = ceil(q_star * k) (clamped to [1, k]), undoes the deferred scale, and
// normalizes by the reference quantile w_alpha. Skewed sketches with alpha
// on the supported grid, k >= 2.
MomentEstimate estimate_oq(const ProjectionSketch& sketch);

// Geometric-mean estimator for symmetric sketches; any alpha in (0, 2].
MomentEstimate estimate_gm_sym(const ProjectionSketch& sketch);

// Dispatch on kind; checks the sketch kind matches the estimator family.
MomentEstimate estimate(EstimatorKind kind, const ProjectionSketch& sketch);

}  // namespace cc
