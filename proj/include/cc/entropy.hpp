#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "cc/estimators.hpp"

namespace cc {

// Dense-semantics sparse vector with nonnegative entries; the ground truth
// that exact moments and entropies are computed from.
class SparseVector {
 public:
  explicit SparseVector(std::uint64_t dimension);

  void set(std::uint64_t index, double value);  // value >= 0; 0 erases
  void add(std::uint64_t index, double value);  // result must stay >= 0
  double at(std::uint64_t index) const;

  std::uint64_t dimension() const noexcept { return dimension_; }
  std::size_t nnz() const noexcept { return entries_.size(); }
  double f1() const noexcept { return f1_; }  // running sum of entries
  const std::map<std::uint64_t, double>& entries() const noexcept {
    return entries_;
  }

 private:
  std::uint64_t dimension_;
  double f1_ = 0.0;
  std::map<std::uint64_t, double> entries_;
};

// sum_i A_i^alpha over nonzero entries; alpha > 0.
double exact_moment(const SparseVector& v, double alpha);

// Shannon entropy -sum p_i log p_i, natural log; requires f1 > 0.
double exact_shannon(const SparseVector& v);

// Renyi entropy (1/(1-alpha)) log(F_alpha / F_1^alpha); alpha > 0, != 1.
double exact_renyi(const SparseVector& v, double alpha);

// Tsallis entropy (1/(alpha-1)) (1 - F_alpha / F_1^alpha); alpha > 0, != 1.
double exact_tsallis(const SparseVector& v, double alpha);

enum class Route { renyi, tsallis };
enum class EntropyTarget { renyi, tsallis, shannon_via_renyi, shannon_via_tsallis };

std::string_view to_string(Route route);
std::optional<Route> route_from_string(std::string_view name);

struct EntropyEstimate {
  double value;
  EntropyTarget target;
  double alpha;
  // Delta-method absolute variance propagated from the moment estimate.
  double predicted_variance;
  // For the Shannon targets: the exact limit offset (H_alpha - H or
  // T_alpha - H), available when an oracle vector is supplied.
  std::optional<double> predicted_intrinsic_bias;
};

// Plug a moment estimate into the entropy formulas. f1 is the exact first
// moment (from the sketch counter or the oracle); f1 > 0, alpha != 1.
EntropyEstimate renyi_from_moment(const MomentEstimate& moment, double f1);
EntropyEstimate tsallis_from_moment(const MomentEstimate& moment, double f1);

// Shannon entropy through a near-1 alpha: evaluates the routed entropy at
// moment.alpha as the Shannon estimate. With an oracle vector the exact
// intrinsic bias of the route is attached.
EntropyEstimate shannon_via(const MomentEstimate& moment, double f1,
                            Route route,
                            const SparseVector* oracle = nullptr);

struct AlphaMseCurve {
  std::vector<double> alpha;
  std::vector<double> mse;  // normalized empirical MSE of the Shannon estimate
};

struct AlphaSelection {
  double alpha_star;
  AlphaMseCurve curve;
};

// Monte-Carlo sweep over alpha_grid: for each repetition one sketch seed is
// shared across the whole grid (common random numbers), the Shannon
// estimate is computed through `route`, and the alpha minimizing empirical
// normalized MSE against exact_shannon(v) is returned. Every grid alpha
// must be valid for the estimator; repetitions >= 100.
AlphaSelection select_optimal_alpha(const SparseVector& v, std::uint32_t k,
                                    EstimatorKind estimator, Route route,
                                    std::span<const double> alpha_grid,
                                    std::uint32_t repetitions,
                                    std::uint64_t seed);

}  // namespace cc
