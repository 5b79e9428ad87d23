#include "cc/sketch.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "cc/errors.hpp"

namespace cc {

namespace {

constexpr char kMagic[4] = {'C', 'C', 'S', 'K'};
constexpr std::uint16_t kVersion = 1;
constexpr std::size_t kHeaderSize = 4 + 2 + 1 + 8 + 4 + 8 + 8 + 8 + 8;

void validate_params(double alpha, SketchKind kind, std::uint32_t k,
                     std::uint64_t dimension) {
  StableParams params{alpha, kind == SketchKind::skewed ? 1.0 : 0.0, 1.0};
  params.validate();
  if (k < 1) throw ParameterError("k must be >= 1");
  if (dimension < 1) throw ParameterError("dimension must be >= 1");
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  put_u64(out, std::bit_cast<std::uint64_t>(v));
}

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint16_t u16() { return static_cast<std::uint16_t>(u(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(u(4)); }
  std::uint64_t u64() { return u(8); }
  std::uint8_t u8() { return static_cast<std::uint8_t>(u(1)); }
  double f64() { return std::bit_cast<double>(u(8)); }

 private:
  std::uint64_t u(int n) {
    if (pos_ + n > bytes_.size()) {
      throw FormatError("sketch data truncated");
    }
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    }
    pos_ += n;
    return v;
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string_view to_string(SketchKind kind) {
  return kind == SketchKind::skewed ? "skewed" : "symmetric";
}

std::optional<SketchKind> sketch_kind_from_string(std::string_view name) {
  if (name == "skewed") return SketchKind::skewed;
  if (name == "symmetric") return SketchKind::symmetric;
  return std::nullopt;
}

ProjectionSketch::ProjectionSketch(double alpha, SketchKind kind,
                                   std::uint32_t k, std::uint64_t seed,
                                   std::uint64_t dimension)
    : alpha_(alpha),
      kind_(kind),
      k_(k),
      seed_(seed),
      dimension_(dimension),
      update_count_(0),
      f1_(0.0) {
  validate_params(alpha, kind, k, dimension);
  rho_ = skew_angle(alpha, kind == SketchKind::skewed ? 1.0 : 0.0).rho;
  deferred_scale_ = std::cos(rho_ * alpha_);
  entries_.assign(k_, 0.0);
}

ProjectionSketch ProjectionSketch::from_raw(double alpha, SketchKind kind,
                                            std::uint32_t k,
                                            std::uint64_t seed,
                                            std::uint64_t dimension,
                                            std::uint64_t update_count,
                                            double f1,
                                            std::vector<double> entries) {
  if (entries.size() != k) {
    throw ParameterError("entry count does not match k");
  }
  ProjectionSketch sketch(alpha, kind, k, seed, dimension);
  sketch.update_count_ = update_count;
  sketch.f1_ = f1;
  sketch.entries_ = std::move(entries);
  return sketch;
}

void ProjectionSketch::update(std::uint64_t index, double increment) {
  if (index >= dimension_) {
    throw BoundsError("index " + std::to_string(index) +
                      " outside dimension " + std::to_string(dimension_));
  }
  if (!std::isfinite(increment)) {
    throw ParameterError("increment must be finite");
  }
  RandomTape tape(seed_, 2 * (index * k_));
  const double alpha = alpha_;
  const double rho = rho_;
  for (std::uint32_t j = 0; j < k_; ++j) {
    const double u = tape.next_angle();
    const double w = tape.next_exponential();
    entries_[j] += cms_transform_factored(alpha, rho, u, w) * increment;
  }
  f1_ += increment;
  ++update_count_;
}

void ProjectionSketch::merge_in_place(const ProjectionSketch& other) {
  if (!compatible_with(other)) {
    throw IncompatibleSketchError(
        "sketches differ in alpha, kind, k, seed, or dimension");
  }
  for (std::uint32_t j = 0; j < k_; ++j) entries_[j] += other.entries_[j];
  f1_ += other.f1_;
  update_count_ += other.update_count_;
}

bool ProjectionSketch::compatible_with(
    const ProjectionSketch& other) const noexcept {
  return alpha_ == other.alpha_ && kind_ == other.kind_ && k_ == other.k_ &&
         seed_ == other.seed_ && dimension_ == other.dimension_;
}

std::vector<std::uint8_t> ProjectionSketch::serialize() const {
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderSize + 8 * entries_.size());
  out.insert(out.end(), kMagic, kMagic + 4);
  put_u16(out, kVersion);
  out.push_back(static_cast<std::uint8_t>(kind_));
  put_f64(out, alpha_);
  put_u32(out, k_);
  put_u64(out, seed_);
  put_u64(out, dimension_);
  put_u64(out, update_count_);
  put_f64(out, f1_);
  for (double x : entries_) put_f64(out, x);
  return out;
}

ProjectionSketch ProjectionSketch::deserialize(
    std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderSize ||
      std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FormatError("not a sketch file (bad magic)");
  }
  ByteReader r(bytes.subspan(4));
  const std::uint16_t version = r.u16();
  if (version != kVersion) {
    throw FormatError("unsupported sketch version " + std::to_string(version));
  }
  const std::uint8_t kind_byte = r.u8();
  if (kind_byte > 1) {
    throw FormatError("unknown sketch kind " + std::to_string(kind_byte));
  }
  const SketchKind kind = static_cast<SketchKind>(kind_byte);
  const double alpha = r.f64();
  const std::uint32_t k = r.u32();
  const std::uint64_t seed = r.u64();
  const std::uint64_t dimension = r.u64();
  const std::uint64_t update_count = r.u64();
  const double f1 = r.f64();
  if (bytes.size() != kHeaderSize + 8 * static_cast<std::size_t>(k)) {
    throw FormatError("sketch payload size mismatch");
  }
  std::vector<double> entries(k);
  for (std::uint32_t j = 0; j < k; ++j) entries[j] = r.f64();
  for (double x : entries) {
    if (!std::isfinite(x)) throw FormatError("non-finite sketch entry");
  }
  try {
    return from_raw(alpha, kind, k, seed, dimension, update_count, f1,
                    std::move(entries));
  } catch (const ParameterError& e) {
    throw FormatError(std::string("invalid sketch header: ") + e.what());
  }
}

double projection_entry(std::uint64_t seed, std::uint64_t i, std::uint32_t j,
                        std::uint32_t k, double alpha, SketchKind kind) {
  validate_params(alpha, kind, k, i + 1);
  if (j >= k) throw BoundsError("slot index outside k");
  const double rho =
      skew_angle(alpha, kind == SketchKind::skewed ? 1.0 : 0.0).rho;
  RandomTape tape(seed, 2 * (i * k + j));
  const double u = tape.next_angle();
  const double w = tape.next_exponential();
  return cms_transform_factored(alpha, rho, u, w);
}

ProjectionSketch merge(const ProjectionSketch& a, const ProjectionSketch& b) {
  ProjectionSketch out = a;
  out.merge_in_place(b);
  return out;
}

void write_sketch_file(const ProjectionSketch& sketch,
                       const std::filesystem::path& path) {
  const auto bytes = sketch.serialize();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

ProjectionSketch read_sketch_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  return ProjectionSketch::deserialize(bytes);
}

}  // namespace cc
