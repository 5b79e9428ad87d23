#include "cc/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <tuple>
#include <utility>

#include "cc/detail/hash.hpp"
#include "cc/detail/parallel.hpp"
#include "cc/detail/sketch_of.hpp"
#include "cc/errors.hpp"

namespace cc::harness {
namespace {

constexpr std::uint64_t kMaxSynthDimension = 1ull << 22;
constexpr double kMaxExactMass = 9007199254740992.0;  // 2^53

std::string fmt_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

bool valid_name(std::string_view name) {
  if (name.empty()) return false;
  for (char c : name) {
    bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
              (c >= '0' && c <= '9') || c == '_' || c == '.' || c == '-';
    if (!ok) return false;
  }
  return true;
}

std::vector<std::string> split_tokens(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream stream(line);
  std::string token;
  while (stream >> token) tokens.push_back(std::move(token));
  return tokens;
}

std::uint64_t parse_index(const std::string& token, std::size_t line_no) {
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size()) {
    throw ParseError("expected a nonnegative integer index, got '" + token + "'",
                     line_no);
  }
  return value;
}

double parse_double(const std::string& token, std::size_t line_no) {
  double value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size()) {
    throw ParseError("expected a number, got '" + token + "'", line_no);
  }
  return value;
}

struct RawVector {
  std::string name;
  std::vector<std::pair<std::uint64_t, double>> entries;
  std::uint64_t max_index = 0;
};

}  // namespace

std::string_view to_string(Target target) {
  switch (target) {
    case Target::moment: return "moment";
    case Target::renyi: return "renyi";
    case Target::tsallis: return "tsallis";
    case Target::shannon_via_renyi: return "shannon_via_renyi";
    case Target::shannon_via_tsallis: return "shannon_via_tsallis";
  }
  throw ParameterError("unknown target");
}

std::optional<Target> target_from_string(std::string_view name) {
  if (name == "moment") return Target::moment;
  if (name == "renyi") return Target::renyi;
  if (name == "tsallis") return Target::tsallis;
  if (name == "shannon_via_renyi") return Target::shannon_via_renyi;
  if (name == "shannon_via_tsallis") return Target::shannon_via_tsallis;
  return std::nullopt;
}

std::vector<NamedVector> load_sparse_vectors(const std::filesystem::path& path) {
  std::ifstream input(path);
  if (!input) throw IoError("cannot open '" + path.string() + "' for reading");

  std::vector<RawVector> raw;
  std::string line;
  std::size_t line_no = 0;

  auto append_entry = [&](const std::string& index_token,
                          const std::string& value_token) {
    if (raw.empty()) {
      throw ParseError("entry before any 'name:' header", line_no);
    }
    std::uint64_t index = parse_index(index_token, line_no);
    double value = parse_double(value_token, line_no);
    if (!std::isfinite(value) || value < 0) {
      throw ValidationError("count must be finite and nonnegative, got " +
                                value_token,
                            line_no);
    }
    raw.back().entries.emplace_back(index, value);
    raw.back().max_index = std::max(raw.back().max_index, index);
  };

  while (std::getline(input, line)) {
    ++line_no;
    std::vector<std::string> tokens = split_tokens(line);
    if (tokens.empty()) continue;
    if (tokens[0].back() == ':') {
      std::string name = tokens[0].substr(0, tokens[0].size() - 1);
      if (!valid_name(name)) {
        throw ParseError("invalid vector name '" + name + "'", line_no);
      }
      for (const RawVector& existing : raw) {
        if (existing.name == name) {
          throw ValidationError("duplicate vector name '" + name + "'", line_no);
        }
      }
      raw.push_back(RawVector{std::move(name), {}, 0});
      if (tokens.size() == 3) {
        append_entry(tokens[1], tokens[2]);
      } else if (tokens.size() != 1) {
        throw ParseError("header line must be 'name:' or 'name: index count'",
                         line_no);
      }
    } else if (tokens.size() == 2) {
      append_entry(tokens[0], tokens[1]);
    } else {
      throw ParseError("expected 'index count', got " +
                           std::to_string(tokens.size()) + " fields",
                       line_no);
    }
  }
  if (input.bad()) throw IoError("read failure on '" + path.string() + "'");

  std::vector<NamedVector> result;
  result.reserve(raw.size());
  for (RawVector& block : raw) {
    std::uint64_t dimension = block.entries.empty() ? 1 : block.max_index + 1;
    SparseVector vec(dimension);
    for (const auto& [index, value] : block.entries) vec.add(index, value);
    result.push_back(NamedVector{std::move(block.name), std::move(vec)});
  }
  return result;
}

void write_sparse_vectors(const std::vector<NamedVector>& vectors,
                          const std::filesystem::path& path) {
  std::ofstream output(path);
  if (!output) throw IoError("cannot open '" + path.string() + "' for writing");
  for (const NamedVector& named : vectors) {
    if (!valid_name(named.name)) {
      throw ValidationError("invalid vector name '" + named.name + "'");
    }
    output << named.name << ":\n";
    for (const auto& [index, value] : named.vec.entries()) {
      output << index << ' ' << fmt_double(value) << '\n';
    }
  }
  output.flush();
  if (!output) throw IoError("write failure on '" + path.string() + "'");
}

SparseVector synthesize_zipf(std::uint64_t dimension, double s, double mass,
                             std::uint64_t seed) {
  (void)seed;
  if (dimension < 1) throw ParameterError("zipf dimension must be >= 1");
  if (dimension > kMaxSynthDimension) {
    throw ParameterError("zipf dimension must be <= 2^22");
  }
  if (!std::isfinite(s) || s < 0) {
    throw ParameterError("zipf exponent must be finite and >= 0");
  }
  if (!std::isfinite(mass) || mass <= 0 || mass > kMaxExactMass) {
    throw ParameterError("zipf mass must be in (0, 2^53]");
  }

  const std::size_t n = static_cast<std::size_t>(dimension);
  std::vector<double> weight(n);
  for (std::size_t i = 0; i < n; ++i) {
    weight[i] = std::pow(static_cast<double>(i + 1), -s);
  }
  double total = 0.0;
  for (std::size_t i = n; i-- > 0;) total += weight[i];  // small terms first

  const double scale = mass / total;
  std::vector<double> frac(n);
  std::vector<double> floor_part(n);
  double floor_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double x = scale * weight[i];
    floor_part[i] = std::floor(x);
    frac[i] = x - floor_part[i];
    floor_sum += floor_part[i];
  }

  const long long target = std::llround(mass);
  long long leftover = target - static_cast<long long>(floor_sum);
  if (leftover < 0) leftover = 0;
  if (leftover > static_cast<long long>(n)) leftover = static_cast<long long>(n);

  std::vector<std::uint32_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<std::uint32_t>(i);
  auto by_remainder = [&](std::uint32_t a, std::uint32_t b) {
    if (frac[a] != frac[b]) return frac[a] > frac[b];
    return a < b;
  };
  if (leftover > 0 && static_cast<std::size_t>(leftover) < n) {
    std::nth_element(order.begin(), order.begin() + leftover, order.end(),
                     by_remainder);
    std::sort(order.begin(), order.begin() + leftover, by_remainder);
  }
  for (long long j = 0; j < leftover; ++j) floor_part[order[j]] += 1.0;

  SparseVector result(dimension);
  for (std::size_t i = 0; i < n; ++i) {
    if (floor_part[i] > 0) result.set(i, floor_part[i]);
  }
  return result;
}

namespace {

// Exact per-(vector, alpha) reference values; entropy slots are filled only
// where the order is not 1.
struct TruthCell {
  double f_alpha = 0.0;
  double f1 = 0.0;
  double shannon = 0.0;
  double moment_ratio = 0.0;  // F_alpha / F_1^alpha
  std::optional<double> renyi;
  std::optional<double> tsallis;
};

double truth_for(const TruthCell& truth, Target target) {
  switch (target) {
    case Target::moment: return truth.f_alpha;
    case Target::renyi: return *truth.renyi;
    case Target::tsallis: return *truth.tsallis;
    case Target::shannon_via_renyi:
    case Target::shannon_via_tsallis: return truth.shannon;
  }
  throw ParameterError("unknown target");
}

bool target_needs_order_away_from_one(Target target) {
  return target != Target::moment;
}

// Reason string when (estimator, alpha) cannot run, empty when it can.
std::string estimator_skip_reason(EstimatorKind estimator, double alpha) {
  try {
    variance_factor(estimator, alpha);
  } catch (const Error& e) {
    return e.what();
  }
  if (estimator != EstimatorKind::sym_gm && alpha == 1.0) {
    return "the skewed projection is undefined at alpha = 1";
  }
  return {};
}

double theory_variance(EstimatorKind estimator, Target target, double alpha,
                       std::uint32_t k, const TruthCell& truth) {
  const double relvar = variance_factor(estimator, alpha) / k;
  switch (target) {
    case Target::moment:
      return relvar;
    case Target::renyi: {
      const double h = *truth.renyi;
      return relvar / ((1.0 - alpha) * (1.0 - alpha) * h * h);
    }
    case Target::tsallis: {
      const double t = *truth.tsallis;
      const double r = truth.moment_ratio;
      return relvar * r * r / ((alpha - 1.0) * (alpha - 1.0) * t * t);
    }
    case Target::shannon_via_renyi: {
      const double h = truth.shannon;
      return relvar / ((1.0 - alpha) * (1.0 - alpha) * h * h);
    }
    case Target::shannon_via_tsallis: {
      const double h = truth.shannon;
      const double r = truth.moment_ratio;
      return relvar * r * r / ((alpha - 1.0) * (alpha - 1.0) * h * h);
    }
  }
  throw ParameterError("unknown target");
}

double estimate_target(const MomentEstimate& moment, double f1,
                       Target target) {
  switch (target) {
    case Target::moment:
      return moment.value;
    case Target::renyi:
      return renyi_from_moment(moment, f1).value;
    case Target::tsallis:
      return tsallis_from_moment(moment, f1).value;
    case Target::shannon_via_renyi:
      return shannon_via(moment, f1, Route::renyi).value;
    case Target::shannon_via_tsallis:
      return shannon_via(moment, f1, Route::tsallis).value;
  }
  throw ParameterError("unknown target");
}

struct RowKey {
  std::tuple<std::string_view, int, int, double, std::uint32_t> key;
  explicit RowKey(const MseRow& row)
      : key(row.vector_id, static_cast<int>(row.target),
            static_cast<int>(row.estimator), row.alpha, row.k) {}
  bool operator<(const RowKey& other) const { return key < other.key; }
};

}  // namespace

MseReport run_mse_experiment(const ExperimentConfig& config) {
  if (config.vectors.empty()) throw ParameterError("no input vectors");
  if (config.alpha_grid.empty()) throw ParameterError("empty alpha grid");
  if (config.k_grid.empty()) throw ParameterError("empty k grid");
  if (config.estimators.empty()) throw ParameterError("no estimators selected");
  if (config.targets.empty()) throw ParameterError("no targets selected");
  if (config.repetitions < 1) throw ParameterError("repetitions must be >= 1");
  for (std::uint32_t k : config.k_grid) {
    if (k < 2) throw ParameterError("sketch size k must be >= 2");
  }
  for (std::size_t i = 0; i < config.vectors.size(); ++i) {
    const NamedVector& named = config.vectors[i];
    if (!valid_name(named.name)) {
      throw ValidationError("invalid vector name '" + named.name + "'");
    }
    if (!(named.vec.f1() > 0)) {
      throw ValidationError("vector '" + named.name + "' has zero mass");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (config.vectors[j].name == named.name) {
        throw ValidationError("duplicate vector name '" + named.name + "'");
      }
    }
  }

  MseReport report;

  // Per grid alpha: which estimators and targets run, with one warning per
  // skipped combination.
  const std::size_t n_alpha = config.alpha_grid.size();
  std::vector<std::vector<EstimatorKind>> live_estimators(n_alpha);
  std::vector<std::vector<Target>> live_targets(n_alpha);
  for (std::size_t ai = 0; ai < n_alpha; ++ai) {
    const double alpha = config.alpha_grid[ai];
    for (EstimatorKind estimator : config.estimators) {
      std::string reason = estimator_skip_reason(estimator, alpha);
      if (reason.empty()) {
        live_estimators[ai].push_back(estimator);
      } else {
        report.warnings.push_back(
            "skipping estimator " + std::string(to_string(estimator)) +
            " at alpha=" + fmt_double(alpha) + ": " + reason);
      }
    }
    for (Target target : config.targets) {
      if (target_needs_order_away_from_one(target) && alpha == 1.0) {
        report.warnings.push_back(
            "skipping target " + std::string(to_string(target)) +
            " at alpha=1: entropy of order 1 is the Shannon limit");
      } else {
        live_targets[ai].push_back(target);
      }
    }
  }

  // Exact references, indexed [vector][alpha].
  std::vector<std::vector<TruthCell>> truth(config.vectors.size());
  for (std::size_t vi = 0; vi < config.vectors.size(); ++vi) {
    truth[vi].resize(n_alpha);
    const SparseVector& vec = config.vectors[vi].vec;
    for (std::size_t ai = 0; ai < n_alpha; ++ai) {
      const double alpha = config.alpha_grid[ai];
      TruthCell& cell = truth[vi][ai];
      cell.f_alpha = exact_moment(vec, alpha);
      cell.f1 = vec.f1();
      cell.shannon = exact_shannon(vec);
      cell.moment_ratio = cell.f_alpha / std::pow(cell.f1, alpha);
      if (alpha != 1.0) {
        cell.renyi = exact_renyi(vec, alpha);
        cell.tsallis = exact_tsallis(vec, alpha);
      }
      for (Target target : live_targets[ai]) {
        if (truth_for(cell, target) == 0.0) {
          throw ValidationError("vector '" + config.vectors[vi].name +
                                "': target " + std::string(to_string(target)) +
                                " is zero at alpha=" + fmt_double(alpha) +
                                ", normalized error is undefined");
        }
      }
    }
  }

  struct Cell {
    std::uint32_t vector_index;
    std::uint32_t alpha_index;
    std::uint32_t k_index;
  };
  std::vector<Cell> cells;
  for (std::uint32_t vi = 0; vi < config.vectors.size(); ++vi) {
    for (std::uint32_t ai = 0; ai < n_alpha; ++ai) {
      if (live_estimators[ai].empty() || live_targets[ai].empty()) continue;
      for (std::uint32_t ki = 0; ki < config.k_grid.size(); ++ki) {
        cells.push_back(Cell{vi, ai, ki});
      }
    }
  }

  std::vector<std::vector<MseRow>> cell_rows(cells.size());
  detail::parallel_for(cells.size(), config.workers, [&](std::size_t ci) {
    const Cell& cell = cells[ci];
    const NamedVector& named = config.vectors[cell.vector_index];
    const double alpha = config.alpha_grid[cell.alpha_index];
    const std::uint32_t k = config.k_grid[cell.k_index];
    const TruthCell& exact = truth[cell.vector_index][cell.alpha_index];
    const auto& estimators = live_estimators[cell.alpha_index];
    const auto& targets = live_targets[cell.alpha_index];

    bool needs_skewed = false;
    bool needs_symmetric = false;
    for (EstimatorKind estimator : estimators) {
      (estimator == EstimatorKind::sym_gm ? needs_symmetric : needs_skewed) =
          true;
    }

    const std::size_t n_pairs = estimators.size() * targets.size();
    std::vector<double> err_sum(n_pairs, 0.0);
    std::vector<double> err_sq_sum(n_pairs, 0.0);

    for (std::uint32_t rep = 0; rep < config.repetitions; ++rep) {
      const std::uint64_t seed =
          detail::rep_seed(config.master_seed, named.name, cell.alpha_index,
                           cell.k_index, rep);
      std::optional<ProjectionSketch> skewed;
      std::optional<ProjectionSketch> symmetric;
      if (needs_skewed) {
        skewed = detail::sketch_of(named.vec, alpha, SketchKind::skewed, k,
                                   seed);
      }
      if (needs_symmetric) {
        symmetric = detail::sketch_of(named.vec, alpha, SketchKind::symmetric,
                                      k, detail::paired_symmetric_seed(seed));
      }
      for (std::size_t ei = 0; ei < estimators.size(); ++ei) {
        const ProjectionSketch& sketch =
            estimators[ei] == EstimatorKind::sym_gm ? *symmetric : *skewed;
        const MomentEstimate moment = estimate(estimators[ei], sketch);
        for (std::size_t ti = 0; ti < targets.size(); ++ti) {
          const double value = estimate_target(moment, sketch.f1(), targets[ti]);
          const double truth_value = truth_for(exact, targets[ti]);
          const double rel = value / truth_value - 1.0;
          err_sum[ei * targets.size() + ti] += rel;
          err_sq_sum[ei * targets.size() + ti] += rel * rel;
        }
      }
    }

    for (std::size_t ei = 0; ei < estimators.size(); ++ei) {
      for (std::size_t ti = 0; ti < targets.size(); ++ti) {
        const std::size_t slot = ei * targets.size() + ti;
        MseRow row;
        row.vector_id = named.name;
        row.target = targets[ti];
        row.estimator = estimators[ei];
        row.alpha = alpha;
        row.k = k;
        row.repetitions = config.repetitions;
        row.mse_norm = err_sq_sum[slot] / config.repetitions;
        row.bias = err_sum[slot] / config.repetitions;
        row.theory_var = theory_variance(estimators[ei], targets[ti], alpha, k,
                                         exact);
        cell_rows[ci].push_back(std::move(row));
      }
    }
  });

  for (std::vector<MseRow>& rows : cell_rows) {
    for (MseRow& row : rows) report.rows.push_back(std::move(row));
  }
  std::stable_sort(report.rows.begin(), report.rows.end(),
                   [](const MseRow& a, const MseRow& b) {
                     return RowKey(a) < RowKey(b);
                   });
  return report;
}

MseReport min_mse_curves(const MseReport& report) {
  std::vector<const MseRow*> rows;
  rows.reserve(report.rows.size());
  for (const MseRow& row : report.rows) rows.push_back(&row);
  std::stable_sort(rows.begin(), rows.end(),
                   [](const MseRow* a, const MseRow* b) {
                     auto key = [](const MseRow* r) {
                       return std::make_tuple(std::string_view(r->vector_id),
                                              static_cast<int>(r->target),
                                              static_cast<int>(r->estimator),
                                              r->k, r->alpha);
                     };
                     return key(a) < key(b);
                   });

  MseReport result;
  result.warnings = report.warnings;
  std::size_t i = 0;
  while (i < rows.size()) {
    std::size_t j = i;
    auto same_group = [&](const MseRow* a, const MseRow* b) {
      return a->vector_id == b->vector_id && a->target == b->target &&
             a->estimator == b->estimator && a->k == b->k;
    };
    const MseRow* best = rows[i];
    std::size_t distinct_alpha = 1;
    while (++j < rows.size() && same_group(rows[i], rows[j])) {
      if (rows[j]->alpha != rows[j - 1]->alpha) ++distinct_alpha;
      if (rows[j]->mse_norm < best->mse_norm) best = rows[j];
    }
    if (distinct_alpha < 2) {
      throw ParameterError(
          "min-MSE curves need at least two alpha values per "
          "(vector, target, estimator, k) group; '" +
          rows[i]->vector_id + "' " + std::string(to_string(rows[i]->target)) +
          " " + std::string(to_string(rows[i]->estimator)) + " k=" +
          std::to_string(rows[i]->k) + " has one");
    }
    result.rows.push_back(*best);
    i = j;
  }
  std::stable_sort(result.rows.begin(), result.rows.end(),
                   [](const MseRow& a, const MseRow& b) {
                     return RowKey(a) < RowKey(b);
                   });
  return result;
}

namespace {
constexpr std::string_view kCsvHeader =
    "vector,target,estimator,alpha,k,reps,mse_norm,bias,theory_var";
}  // namespace

void emit_csv(const MseReport& report, const std::filesystem::path& path) {
  std::ofstream output(path);
  if (!output) throw IoError("cannot open '" + path.string() + "' for writing");
  output << kCsvHeader << '\n';
  for (const MseRow& row : report.rows) {
    output << row.vector_id << ',' << to_string(row.target) << ','
           << to_string(row.estimator) << ',' << fmt_double(row.alpha) << ','
           << row.k << ',' << row.repetitions << ',' << fmt_double(row.mse_norm)
           << ',' << fmt_double(row.bias) << ',' << fmt_double(row.theory_var)
           << '\n';
  }
  output.flush();
  if (!output) throw IoError("write failure on '" + path.string() + "'");
}

MseReport read_csv(const std::filesystem::path& path) {
  std::ifstream input(path);
  if (!input) throw IoError("cannot open '" + path.string() + "' for reading");
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(input, line)) {
    throw ParseError("missing CSV header", 1);
  }
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) {
    throw ParseError("unexpected CSV header '" + line + "'", line_no);
  }

  MseReport report;
  while (std::getline(input, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      std::size_t comma = line.find(',', start);
      if (comma == std::string::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, comma - start));
      start = comma + 1;
    }
    if (fields.size() != 9) {
      throw ParseError("expected 9 comma-separated fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    }
    MseRow row;
    if (!valid_name(fields[0])) {
      throw ParseError("invalid vector name '" + fields[0] + "'", line_no);
    }
    row.vector_id = fields[0];
    std::optional<Target> target = target_from_string(fields[1]);
    if (!target) throw ParseError("unknown target '" + fields[1] + "'", line_no);
    row.target = *target;
    std::optional<EstimatorKind> estimator = estimator_from_string(fields[2]);
    if (!estimator) {
      throw ParseError("unknown estimator '" + fields[2] + "'", line_no);
    }
    row.estimator = *estimator;
    row.alpha = parse_double(fields[3], line_no);
    std::uint64_t k64 = parse_index(fields[4], line_no);
    std::uint64_t reps64 = parse_index(fields[5], line_no);
    if (k64 > 0xFFFFFFFFull || reps64 > 0xFFFFFFFFull) {
      throw ParseError("k/reps field out of range", line_no);
    }
    row.k = static_cast<std::uint32_t>(k64);
    row.repetitions = static_cast<std::uint32_t>(reps64);
    row.mse_norm = parse_double(fields[6], line_no);
    row.bias = parse_double(fields[7], line_no);
    row.theory_var = parse_double(fields[8], line_no);
    report.rows.push_back(std::move(row));
  }
  if (input.bad()) throw IoError("read failure on '" + path.string() + "'");
  return report;
}

}  // namespace cc::harness
