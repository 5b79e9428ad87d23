#pragma once

#include "cc/entropy.hpp"
#include "cc/sketch.hpp"

namespace cc::detail {

// Sketch a static vector by replaying its entries as one update each.
inline ProjectionSketch sketch_of(const SparseVector& v, double alpha,
                                  SketchKind kind, std::uint32_t k,
                                  std::uint64_t seed) {
  ProjectionSketch sketch(alpha, kind, k, seed, v.dimension());
  for (const auto& [index, value] : v.entries()) {
    sketch.update(index, value);
  }
  return sketch;
}

}  // namespace cc::detail
