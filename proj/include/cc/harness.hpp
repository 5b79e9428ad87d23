#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cc/entropy.hpp"

namespace cc::harness {

enum class Target {
  moment,
  renyi,
  tsallis,
  shannon_via_renyi,
  shannon_via_tsallis,
};

std::string_view to_string(Target target);
std::optional<Target> target_from_string(std::string_view name);

struct NamedVector {
  std::string name;  // [A-Za-z0-9_.-]+
  SparseVector vec;
};

// Text format: one or more blocks, each headed by "name:" followed by
// "index count" lines (whitespace-separated, count >= 0); the first entry
// may share the header line. Duplicate indices accumulate. Dimension is
// max index + 1.
std::vector<NamedVector> load_sparse_vectors(const std::filesystem::path& path);
void write_sparse_vectors(const std::vector<NamedVector>& vectors,
                          const std::filesystem::path& path);

// A[i] = round-to-mass of M * (i+1)^-s / sum_j (j+1)^-s, i in [0, dimension):
// floors plus largest-remainder top-up (ties to the smaller index), so the
// entries are integers summing to round(M) exactly. Fully deterministic;
// `seed` is accepted for interface stability but does not affect the result.
SparseVector synthesize_zipf(std::uint64_t dimension, double s, double mass,
                             std::uint64_t seed);

struct ExperimentConfig {
  std::vector<NamedVector> vectors;
  std::vector<double> alpha_grid;
  std::vector<std::uint32_t> k_grid;
  std::vector<EstimatorKind> estimators;
  std::vector<Target> targets;
  std::uint32_t repetitions = 1000;
  std::uint64_t master_seed = 0;
  unsigned workers = 0;  // 0 = one per hardware thread
};

struct MseRow {
  std::string vector_id;
  Target target;
  EstimatorKind estimator;
  double alpha;
  std::uint32_t k;
  std::uint32_t repetitions;
  double mse_norm;    // mean((est - truth)^2) / truth^2
  double bias;        // mean(est - truth) / truth
  double theory_var;  // asymptotic variance / truth^2, for curve overlays
};

struct MseReport {
  std::vector<MseRow> rows;  // sorted by (vector, target, estimator, alpha, k)
  std::vector<std::string> warnings;
};

// Monte-Carlo accuracy sweep. For every (vector, alpha, k) cell and
// repetition r, a per-repetition seed is derived by hashing (master_seed,
// vector id, alpha index, k index, r). One skewed sketch is built per
// repetition and shared by gm/hm/oq; sym-gm uses a symmetric sketch built
// from a paired seed. Estimator/alpha combinations that are undefined
// (hm above 1, oq off-grid, skewed kinds at alpha = 1, entropy targets at
// alpha = 1) are skipped and recorded in warnings. Row order and float
// accumulation order are fixed, so equal seeds give identical reports.
MseReport run_mse_experiment(const ExperimentConfig& config);

// Per (vector, target, estimator, k): the row with minimum mse_norm across
// alpha. Requires at least two alpha values in every group.
MseReport min_mse_curves(const MseReport& report);

// CSV with header "vector,target,estimator,alpha,k,reps,mse_norm,bias,
// theory_var"; floats printed with 17 significant digits (round-trip safe).
void emit_csv(const MseReport& report, const std::filesystem::path& path);
MseReport read_csv(const std::filesystem::path& path);

}  // namespace cc::harness
