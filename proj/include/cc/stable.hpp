#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include "cc/random_tape.hpp"

namespace cc {

// Parameters of a stable law S(alpha, beta, scale). The scale enters the
// characteristic exponent linearly, so for independent Z1, Z2 ~ S(alpha,1,1)
// and c1, c2 >= 0:  c1*Z1 + c2*Z2 ~ S(alpha, 1, c1^alpha + c2^alpha).
// Only beta = 0 (symmetric) and beta = 1 (maximally skewed) are supported;
// skewed laws additionally require alpha != 1.
struct StableParams {
  double alpha = 1.0;
  double beta = 0.0;
  double scale = 1.0;

  void validate() const;
};

// Rotation angle of the sampling transform: pi/2 for skewed alpha < 1,
// (pi/2)(2 - alpha)/alpha for skewed alpha > 1, 0 for symmetric laws.
struct SkewAngle {
  double rho;
};
SkewAngle skew_angle(double alpha, double beta);

// kappa(alpha) = alpha below 1 and 2 - alpha above; for skewed laws
// cos(rho * alpha) == cos(kappa * pi / 2) on both branches.
double kappa_of(double alpha);

// Sampling transform applied to u ~ uniform(-pi/2, pi/2), w ~ exp(1):
//
//   Z = sin(alpha (u + rho)) / [cos u cos(rho alpha)]^(1/alpha)
//       * [cos(u - alpha (u + rho)) / w]^((1-alpha)/alpha)
//
// The factored variant omits the cos(rho alpha)^(1/alpha) denominator, so it
// samples S(alpha, beta, cos(rho alpha)) and stays well conditioned for
// skewed laws as alpha -> 1, where cos(rho alpha) -> 0.
inline double cms_transform_factored(double alpha, double rho, double u,
                                     double w) {
  const double t = alpha * (u + rho);
  return std::sin(t) * std::pow(std::cos(u), -1.0 / alpha) *
         std::pow(std::cos(u - t) / w, (1.0 - alpha) / alpha);
}

inline double cms_transform(double alpha, double rho, double u, double w) {
  return cms_transform_factored(alpha, rho, u, w) /
         std::pow(std::cos(rho * alpha), 1.0 / alpha);
}

// Draw from S(alpha, beta, 1); requires params.scale == 1. Consumes exactly
// two tape words (angle, then exponential).
double sample_stable(const StableParams& params, RandomTape& tape);

// Draw from S(alpha, beta, cos(rho alpha)); same tape consumption.
double sample_stable_factored(const StableParams& params, RandomTape& tape);

// Constants for the optimal-quantile estimator at one supported alpha.
struct QuantileConstants {
  double alpha;
  double q_star;           // quantile level to read off
  double w_alpha;          // q_star-quantile of |S(alpha, 1, 1)|
  double variance_factor;  // k * asymptotic relative variance
};

// The supported alpha grid, ascending: ten values in [0.80, 0.989] and
// [1.011, 1.20]. Lookup is exact on the printed decimals; anything else
// throws UnsupportedAlphaError naming the nearest supported values.
std::span<const QuantileConstants> quantile_constants_table();
const QuantileConstants& quantile_constants(double alpha);

enum class EstimatorKind { gm, hm, oq, sym_gm };

std::string_view to_string(EstimatorKind kind);
std::optional<EstimatorKind> estimator_from_string(std::string_view name);

// k times the asymptotic relative variance of the named estimator:
//   gm      (pi^2/6)(1 - alpha^2)         for alpha < 1
//           (pi^2/6)(alpha - 1)(5 - alpha) for alpha > 1
//   hm      2 Gamma^2(1+alpha)/Gamma(1+2 alpha) - 1   (alpha < 1 only)
//   oq      table column
//   sym-gm  (pi^2/12)(2 + alpha^2)
double variance_factor(EstimatorKind kind, double alpha);

}  // namespace cc
