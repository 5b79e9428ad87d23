#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "cc/stable.hpp"

namespace cc {

enum class SketchKind : std::uint8_t { skewed = 0, symmetric = 1 };

std::string_view to_string(SketchKind kind);
std::optional<SketchKind> sketch_kind_from_string(std::string_view name);

// Linear sketch of a turnstile stream: k projections of the input vector
// onto pseudo-random stable directions, plus an exact running sum of all
// increments (the first-moment counter). Projection entries are generated
// on demand from (seed, index) so the memory footprint is O(k), independent
// of the dimension.
//
// Entries are kept in the factored scale: a sketch of a nonnegative vector
// A has x_j distributed as S(alpha, beta, deferred_scale() * F_alpha(A))
// where F_alpha(A) = sum_i A_i^alpha. For symmetric sketches the deferred
// scale is 1; for skewed ones it is cos(rho * alpha), left for the
// estimators to fold into their normalizers.
class ProjectionSketch {
 public:
  // kind=skewed requires alpha in (0,2] with alpha != 1; kind=symmetric
  // accepts any alpha in (0,2]. k >= 1, dimension >= 1.
  ProjectionSketch(double alpha, SketchKind kind, std::uint32_t k,
                   std::uint64_t seed, std::uint64_t dimension);

  // Rebuild a sketch from stored state; entries are in the factored scale.
  static ProjectionSketch from_raw(double alpha, SketchKind kind,
                                   std::uint32_t k, std::uint64_t seed,
                                   std::uint64_t dimension,
                                   std::uint64_t update_count, double f1,
                                   std::vector<double> entries);

  // Process one stream item: coordinate `index` changes by `increment`.
  // Increments may be negative; cancellation is exact because the same
  // projection entries are replayed from the tape.
  void update(std::uint64_t index, double increment);

  // Pointwise sum of entries and counters. Throws IncompatibleSketchError
  // unless alpha, kind, k, seed and dimension all match.
  void merge_in_place(const ProjectionSketch& other);

  double alpha() const noexcept { return alpha_; }
  SketchKind kind() const noexcept { return kind_; }
  std::uint32_t k() const noexcept { return k_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t dimension() const noexcept { return dimension_; }
  std::uint64_t update_count() const noexcept { return update_count_; }
  double f1() const noexcept { return f1_; }
  std::span<const double> entries() const noexcept { return entries_; }

  // cos(rho * alpha): the scale factor pending in the stored entries.
  double deferred_scale() const noexcept { return deferred_scale_; }

  bool compatible_with(const ProjectionSketch& other) const noexcept;

  // Byte layout (little-endian):
  //   magic "CCSK" | u16 version=1 | u8 kind | f64 alpha | u32 k |
  //   u64 seed | u64 dimension | u64 update_count | f64 f1 | k * f64 entries
  std::vector<std::uint8_t> serialize() const;
  static ProjectionSketch deserialize(std::span<const std::uint8_t> bytes);

 private:
  double alpha_;
  SketchKind kind_;
  std::uint32_t k_;
  std::uint64_t seed_;
  std::uint64_t dimension_;
  std::uint64_t update_count_;
  double f1_;
  double rho_;
  double deferred_scale_;
  std::vector<double> entries_;
};

// The projection entry r_{i,j} for coordinate i and sketch slot j: a
// factored stable draw read from tape positions 2*(i*k + j) and the word
// after it. Pure function of its arguments.
double projection_entry(std::uint64_t seed, std::uint64_t i, std::uint32_t j,
                        std::uint32_t k, double alpha, SketchKind kind);

ProjectionSketch merge(const ProjectionSketch& a, const ProjectionSketch& b);

void write_sketch_file(const ProjectionSketch& sketch,
                       const std::filesystem::path& path);
ProjectionSketch read_sketch_file(const std::filesystem::path& path);

}  // namespace cc
