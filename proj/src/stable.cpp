#include "cc/stable.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "cc/errors.hpp"

namespace cc {

namespace {

constexpr double kPi = std::numbers::pi;

std::string format_alpha(double alpha) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", alpha);
  return buf;
}

}  // namespace

void StableParams::validate() const {
  if (!(alpha > 0.0) || !(alpha <= 2.0)) {
    throw ParameterError("alpha must be in (0, 2], got " + format_alpha(alpha));
  }
  if (beta != 0.0 && beta != 1.0) {
    throw ParameterError("beta must be 0 (symmetric) or 1 (maximally skewed)");
  }
  if (beta == 1.0 && alpha == 1.0) {
    throw ParameterError(
        "alpha = 1 is not supported for maximally skewed laws");
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw ParameterError("scale must be positive and finite");
  }
}

SkewAngle skew_angle(double alpha, double beta) {
  if (beta == 0.0) return {0.0};
  if (beta != 1.0) {
    throw ParameterError("beta must be 0 or 1");
  }
  if (alpha < 1.0) return {kPi / 2.0};
  if (alpha > 1.0) return {(kPi / 2.0) * (2.0 - alpha) / alpha};
  throw ParameterError("alpha = 1 is not supported for maximally skewed laws");
}

double kappa_of(double alpha) { return alpha < 1.0 ? alpha : 2.0 - alpha; }

double sample_stable(const StableParams& params, RandomTape& tape) {
  params.validate();
  if (params.scale != 1.0) {
    throw ParameterError("sample_stable requires scale = 1");
  }
  const double rho = skew_angle(params.alpha, params.beta).rho;
  const double u = tape.next_angle();
  const double w = tape.next_exponential();
  return cms_transform(params.alpha, rho, u, w);
}

double sample_stable_factored(const StableParams& params, RandomTape& tape) {
  params.validate();
  if (params.scale != 1.0) {
    throw ParameterError("sample_stable_factored requires scale = 1");
  }
  const double rho = skew_angle(params.alpha, params.beta).rho;
  const double u = tape.next_angle();
  const double w = tape.next_exponential();
  return cms_transform_factored(params.alpha, rho, u, w);
}

namespace {

constexpr std::array<QuantileConstants, 10> kQuantileTable = {{
    {0.80, 0.108, 2.256365, 0.15465894},
    {0.90, 0.101, 5.400842, 0.04116676},
    {0.95, 0.098, 11.74773, 0.01059831},
    {0.98, 0.0944, 30.82616, 0.001724739},
    {0.989, 0.0941, 56.86694, 0.0005243589},
    {1.011, 0.8904, 58.83961, 0.0005554749},
    {1.02, 0.8799, 32.76892, 0.001901498},
    {1.05, 0.855, 13.61799, 0.01298757},
    {1.10, 0.827, 7.206345, 0.05717725},
    {1.20, 0.799, 4.011459, 0.2516604},
}};

// Printed table values have at most 4 decimal places; match within half of
// the last printed digit.
constexpr double kAlphaMatchTolerance = 5e-5;

}  // namespace

std::span<const QuantileConstants> quantile_constants_table() {
  return kQuantileTable;
}

const QuantileConstants& quantile_constants(double alpha) {
  const QuantileConstants* below = nullptr;
  const QuantileConstants* above = nullptr;
  for (const auto& row : kQuantileTable) {
    if (std::abs(row.alpha - alpha) < kAlphaMatchTolerance) return row;
    if (row.alpha < alpha) below = &row;
    if (row.alpha > alpha && above == nullptr) above = &row;
  }
  std::string nearest;
  if (below && above) {
    nearest = format_alpha(below->alpha) + " and " + format_alpha(above->alpha);
  } else if (below) {
    nearest = format_alpha(below->alpha);
  } else if (above) {
    nearest = format_alpha(above->alpha);
  }
  throw UnsupportedAlphaError(
      "no optimal-quantile constants for alpha = " + format_alpha(alpha) +
      "; nearest supported: " + nearest);
}

std::string_view to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::gm: return "gm";
    case EstimatorKind::hm: return "hm";
    case EstimatorKind::oq: return "oq";
    case EstimatorKind::sym_gm: return "sym-gm";
  }
  return "?";
}

std::optional<EstimatorKind> estimator_from_string(std::string_view name) {
  if (name == "gm") return EstimatorKind::gm;
  if (name == "hm") return EstimatorKind::hm;
  if (name == "oq") return EstimatorKind::oq;
  if (name == "sym-gm") return EstimatorKind::sym_gm;
  return std::nullopt;
}

double variance_factor(EstimatorKind kind, double alpha) {
  if (!(alpha > 0.0) || !(alpha <= 2.0)) {
    throw ParameterError("alpha must be in (0, 2], got " + format_alpha(alpha));
  }
  switch (kind) {
    case EstimatorKind::gm:
      if (alpha == 1.0) {
        throw ParameterError("gm variance is undefined at alpha = 1");
      }
      if (alpha < 1.0) return (kPi * kPi / 6.0) * (1.0 - alpha * alpha);
      return (kPi * kPi / 6.0) * (alpha - 1.0) * (5.0 - alpha);
    case EstimatorKind::hm: {
      if (alpha >= 1.0) {
        throw DomainError("hm requires alpha < 1, got " + format_alpha(alpha));
      }
      const double g1 = std::tgamma(1.0 + alpha);
      return 2.0 * g1 * g1 / std::tgamma(1.0 + 2.0 * alpha) - 1.0;
    }
    case EstimatorKind::oq:
      return quantile_constants(alpha).variance_factor;
    case EstimatorKind::sym_gm:
      return (kPi * kPi / 12.0) * (2.0 + alpha * alpha);
  }
  throw ParameterError("unknown estimator kind");
}

}  // namespace cc
