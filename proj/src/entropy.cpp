#include "cc/entropy.hpp"

#include <algorithm>
#include <cmath>

#include "cc/detail/hash.hpp"
#include "cc/detail/parallel.hpp"
#include "cc/detail/sketch_of.hpp"
#include "cc/errors.hpp"

namespace cc {

namespace {

void require_order(double alpha) {
  if (!(alpha > 0.0)) throw ParameterError("entropy order must be positive");
  if (alpha == 1.0) {
    throw DomainError(
        "order 1 is the Shannon limit; use shannon_via with alpha near 1");
  }
}

// log(F_alpha / F_1^alpha), the common core of both entropy formulas.
double log_moment_ratio(double f_alpha, double f1, double alpha) {
  if (!(f1 > 0.0)) throw ParameterError("f1 must be positive");
  if (!(f_alpha > 0.0)) {
    throw ParameterError("moment estimate must be positive");
  }
  return std::log(f_alpha) - alpha * std::log(f1);
}

}  // namespace

SparseVector::SparseVector(std::uint64_t dimension) : dimension_(dimension) {
  if (dimension < 1) throw ParameterError("dimension must be >= 1");
}

void SparseVector::set(std::uint64_t index, double value) {
  if (index >= dimension_) {
    throw BoundsError("index " + std::to_string(index) +
                      " outside dimension " + std::to_string(dimension_));
  }
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw ValidationError("entries must be nonnegative and finite");
  }
  auto it = entries_.find(index);
  const double old = it == entries_.end() ? 0.0 : it->second;
  f1_ += value - old;
  if (value == 0.0) {
    if (it != entries_.end()) entries_.erase(it);
  } else if (it != entries_.end()) {
    it->second = value;
  } else {
    entries_.emplace(index, value);
  }
}

void SparseVector::add(std::uint64_t index, double value) {
  set(index, at(index) + value);
}

double SparseVector::at(std::uint64_t index) const {
  if (index >= dimension_) {
    throw BoundsError("index " + std::to_string(index) +
                      " outside dimension " + std::to_string(dimension_));
  }
  auto it = entries_.find(index);
  return it == entries_.end() ? 0.0 : it->second;
}

double exact_moment(const SparseVector& v, double alpha) {
  if (!(alpha > 0.0)) throw ParameterError("alpha must be positive");
  double sum = 0.0;
  for (const auto& [index, value] : v.entries()) {
    sum += std::pow(value, alpha);
  }
  return sum;
}

double exact_shannon(const SparseVector& v) {
  const double f1 = v.f1();
  if (!(f1 > 0.0)) throw DomainError("entropy of an all-zero vector");
  double sum = 0.0;  // sum of value * log(value)
  for (const auto& [index, value] : v.entries()) {
    sum += value * std::log(value);
  }
  return std::log(f1) - sum / f1;
}

double exact_renyi(const SparseVector& v, double alpha) {
  require_order(alpha);
  if (!(v.f1() > 0.0)) throw DomainError("entropy of an all-zero vector");
  return log_moment_ratio(exact_moment(v, alpha), v.f1(), alpha) /
         (1.0 - alpha);
}

double exact_tsallis(const SparseVector& v, double alpha) {
  require_order(alpha);
  if (!(v.f1() > 0.0)) throw DomainError("entropy of an all-zero vector");
  const double ratio =
      std::exp(log_moment_ratio(exact_moment(v, alpha), v.f1(), alpha));
  return (1.0 - ratio) / (alpha - 1.0);
}

std::string_view to_string(Route route) {
  return route == Route::renyi ? "renyi" : "tsallis";
}

std::optional<Route> route_from_string(std::string_view name) {
  if (name == "renyi") return Route::renyi;
  if (name == "tsallis") return Route::tsallis;
  return std::nullopt;
}

EntropyEstimate renyi_from_moment(const MomentEstimate& moment, double f1) {
  require_order(moment.alpha);
  const double one_minus = 1.0 - moment.alpha;
  const double value =
      log_moment_ratio(moment.value, f1, moment.alpha) / one_minus;
  return {value, EntropyTarget::renyi, moment.alpha,
          moment.predicted_relative_variance / (one_minus * one_minus),
          std::nullopt};
}

EntropyEstimate tsallis_from_moment(const MomentEstimate& moment, double f1) {
  require_order(moment.alpha);
  const double ratio =
      std::exp(log_moment_ratio(moment.value, f1, moment.alpha));
  const double am1 = moment.alpha - 1.0;
  return {(1.0 - ratio) / am1, EntropyTarget::tsallis, moment.alpha,
          moment.predicted_relative_variance * ratio * ratio / (am1 * am1),
          std::nullopt};
}

EntropyEstimate shannon_via(const MomentEstimate& moment, double f1,
                            Route route, const SparseVector* oracle) {
  EntropyEstimate est = route == Route::renyi
                            ? renyi_from_moment(moment, f1)
                            : tsallis_from_moment(moment, f1);
  est.target = route == Route::renyi ? EntropyTarget::shannon_via_renyi
                                     : EntropyTarget::shannon_via_tsallis;
  if (oracle != nullptr) {
    const double limit = route == Route::renyi
                             ? exact_renyi(*oracle, moment.alpha)
                             : exact_tsallis(*oracle, moment.alpha);
    est.predicted_intrinsic_bias = limit - exact_shannon(*oracle);
  }
  return est;
}

AlphaSelection select_optimal_alpha(const SparseVector& v, std::uint32_t k,
                                    EstimatorKind estimator, Route route,
                                    std::span<const double> alpha_grid,
                                    std::uint32_t repetitions,
                                    std::uint64_t seed) {
  if (alpha_grid.empty()) throw ParameterError("alpha grid is empty");
  if (repetitions < 100) throw ParameterError("repetitions must be >= 100");
  if (k < 2) throw ParameterError("k must be >= 2");
  if (!(v.f1() > 0.0)) throw ValidationError("vector has no mass");
  for (double alpha : alpha_grid) {
    // Every grid point must be usable: hm above 1, oq off the supported
    // grid, order 1, or alpha outside (0, 2] all reject the whole grid.
    try {
      variance_factor(estimator, alpha);
      require_order(alpha);
    } catch (const Error& e) {
      throw ParameterError("alpha grid incompatible with estimator: " +
                           std::string(e.what()));
    }
  }
  const SketchKind kind = estimator == EstimatorKind::sym_gm
                              ? SketchKind::symmetric
                              : SketchKind::skewed;
  const double shannon = exact_shannon(v);
  const std::size_t n_alpha = alpha_grid.size();

  std::vector<double> values(static_cast<std::size_t>(repetitions) * n_alpha);
  detail::parallel_for(
      repetitions, 0, [&](std::size_t rep) {
        // One seed per repetition, shared across the grid, so grid points
        // are compared on common random numbers.
        const std::uint64_t rep_seed =
            detail::Fnv1a{}.u64(seed).u32(static_cast<std::uint32_t>(rep))
                .digest();
        for (std::size_t a = 0; a < n_alpha; ++a) {
          ProjectionSketch sketch =
              detail::sketch_of(v, alpha_grid[a], kind, k, rep_seed);
          const MomentEstimate moment = estimate(estimator, sketch);
          values[rep * n_alpha + a] =
              shannon_via(moment, sketch.f1(), route).value;
        }
      });

  AlphaMseCurve curve;
  curve.alpha.assign(alpha_grid.begin(), alpha_grid.end());
  curve.mse.assign(n_alpha, 0.0);
  for (std::size_t rep = 0; rep < repetitions; ++rep) {
    for (std::size_t a = 0; a < n_alpha; ++a) {
      const double d = (values[rep * n_alpha + a] - shannon) / shannon;
      curve.mse[a] += d * d;
    }
  }
  for (double& m : curve.mse) m /= repetitions;

  const std::size_t best = static_cast<std::size_t>(
      std::min_element(curve.mse.begin(), curve.mse.end()) -
      curve.mse.begin());
  return {curve.alpha[best], std::move(curve)};
}

}  // namespace cc
