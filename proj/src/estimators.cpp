#include "cc/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <vector>

#include "cc/errors.hpp"

namespace cc {

namespace {

constexpr double kPi = std::numbers::pi;

// log of [(2/pi) sin(pi alpha / 2k) Gamma(1 - 1/k) Gamma(alpha/k)]^k, the
// part of the geometric-mean normalizer shared by both sketch kinds.
double log_gm_bracket(double alpha, std::uint32_t k) {
  const double kk = static_cast<double>(k);
  return kk * (std::log(2.0 / kPi) + std::log(std::sin(kPi * alpha / (2.0 * kk))) +
               std::lgamma(1.0 - 1.0 / kk) + std::lgamma(alpha / kk));
}

void require_kind(const ProjectionSketch& sketch, SketchKind kind,
                  std::string_view estimator) {
  if (sketch.kind() != kind) {
    throw ParameterError(std::string(estimator) + " requires a " +
                         std::string(to_string(kind)) + " sketch");
  }
}

MomentEstimate make_estimate(double value, EstimatorKind est,
                             const ProjectionSketch& sketch) {
  return {value, est, sketch.alpha(), sketch.k(),
          variance_factor(est, sketch.alpha()) / sketch.k()};
}

}  // namespace

const GmNormalizer& gm_normalizer(double alpha, std::uint32_t k) {
  if (k < 2) throw ParameterError("gm normalizer requires k >= 2");
  static std::mutex mutex;
  static std::map<std::pair<double, std::uint32_t>, GmNormalizer> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto [it, inserted] = cache.try_emplace({alpha, k});
  if (inserted) {
    const double kappa = kappa_of(alpha);
    const double kk = static_cast<double>(k);
    const double log_factored =
        kk * std::log(std::cos(kappa * kPi / (2.0 * kk))) +
        log_gm_bracket(alpha, k);
    it->second = {alpha, k, kappa,
                  std::exp(log_factored - std::log(std::cos(kappa * kPi / 2.0))),
                  log_factored};
  }
  return it->second;
}

double log_sym_gm_normalizer(double alpha, std::uint32_t k) {
  if (k < 2) throw ParameterError("sym-gm normalizer requires k >= 2");
  return log_gm_bracket(alpha, k);
}

MomentEstimate estimate_gm(const ProjectionSketch& sketch) {
  require_kind(sketch, SketchKind::skewed, "gm");
  if (sketch.k() < 2) throw ParameterError("gm requires k >= 2");
  const auto& norm = gm_normalizer(sketch.alpha(), sketch.k());
  double log_sum = 0.0;
  for (double x : sketch.entries()) {
    if (x == 0.0) {
      throw DegenerateSketchError("gm is undefined on zero sketch entries");
    }
    log_sum += std::log(std::abs(x));
  }
  const double value = std::exp(
      (sketch.alpha() / sketch.k()) * log_sum - norm.log_d_factored);
  return make_estimate(value, EstimatorKind::gm, sketch);
}

MomentEstimate estimate_hm(const ProjectionSketch& sketch) {
  require_kind(sketch, SketchKind::skewed, "hm");
  if (sketch.alpha() >= 1.0) {
    throw DomainError("hm requires alpha < 1");
  }
  const double alpha = sketch.alpha();
  const double k = sketch.k();
  double denom = 0.0;
  for (double x : sketch.entries()) {
    if (x == 0.0) {
      throw DegenerateSketchError("hm is undefined on zero sketch entries");
    }
    denom += std::pow(std::abs(x), -alpha);
  }
  // Entries carry the deferred cos(rho alpha) scale, which cancels the
  // cos(alpha pi / 2) factor of the unfactored formula.
  const double correction =
      1.0 - variance_factor(EstimatorKind::hm, alpha) / k;
  const double value = (k / std::tgamma(1.0 + alpha)) / denom * correction;
  return make_estimate(value, EstimatorKind::hm, sketch);
}

MomentEstimate estimate_oq(const ProjectionSketch& sketch) {
  require_kind(sketch, SketchKind::skewed, "oq");
  if (sketch.k() < 2) throw ParameterError("oq requires k >= 2");
  const auto& qc = quantile_constants(sketch.alpha());
  const std::uint32_t k = sketch.k();
  const auto m = static_cast<std::uint32_t>(std::clamp<double>(
      std::ceil(qc.q_star * k), 1.0, static_cast<double>(k)));
  std::vector<double> mags(sketch.entries().begin(), sketch.entries().end());
  for (double& x : mags) x = std::abs(x);
  std::nth_element(mags.begin(), mags.begin() + (m - 1), mags.end());
  const double q_factored = mags[m - 1];
  // Undo the deferred scale so the quantile refers to S(alpha, 1, F).
  const double q = q_factored /
                   std::pow(sketch.deferred_scale(), 1.0 / sketch.alpha());
  const double value = std::pow(q / qc.w_alpha, sketch.alpha());
  return make_estimate(value, EstimatorKind::oq, sketch);
}

MomentEstimate estimate_gm_sym(const ProjectionSketch& sketch) {
  require_kind(sketch, SketchKind::symmetric, "sym-gm");
  if (sketch.k() < 2) throw ParameterError("sym-gm requires k >= 2");
  double log_sum = 0.0;
  for (double x : sketch.entries()) {
    if (x == 0.0) {
      throw DegenerateSketchError("sym-gm is undefined on zero sketch entries");
    }
    log_sum += std::log(std::abs(x));
  }
  const double value =
      std::exp((sketch.alpha() / sketch.k()) * log_sum -
               log_sym_gm_normalizer(sketch.alpha(), sketch.k()));
  return make_estimate(value, EstimatorKind::sym_gm, sketch);
}

MomentEstimate estimate(EstimatorKind kind, const ProjectionSketch& sketch) {
  switch (kind) {
    case EstimatorKind::gm: return estimate_gm(sketch);
    case EstimatorKind::hm: return estimate_hm(sketch);
    case EstimatorKind::oq: return estimate_oq(sketch);
    case EstimatorKind::sym_gm: return estimate_gm_sym(sketch);
  }
  throw ParameterError("unknown estimator kind");
}

}  // namespace cc
