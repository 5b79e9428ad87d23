#include <cstdint>
#include <cstdio>
#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cc/entropy.hpp"
#include "cc/errors.hpp"
#include "cc/estimators.hpp"
#include "cc/harness.hpp"
#include "cc/sketch.hpp"
#include "cc/stable.hpp"

namespace {

std::string fmt_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct ZipfSpec {
  std::uint64_t dimension;
  double s;
  double mass;
};

ZipfSpec parse_zipf_spec(const std::string& text) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string::npos) {
      parts.push_back(text.substr(start));
      break;
    }
    parts.push_back(text.substr(start, comma - start));
    start = comma + 1;
  }
  if (parts.size() != 3) {
    throw cc::ParameterError("--zipf expects D,s,M (e.g. 65536,1.0,10000)");
  }
  ZipfSpec spec{};
  auto [p, ec] = std::from_chars(parts[0].data(),
                                 parts[0].data() + parts[0].size(),
                                 spec.dimension);
  if (ec != std::errc{} || p != parts[0].data() + parts[0].size()) {
    throw cc::ParameterError("--zipf dimension must be a positive integer");
  }
  try {
    spec.s = std::stod(parts[1]);
    spec.mass = std::stod(parts[2]);
  } catch (const std::exception&) {
    throw cc::ParameterError("--zipf exponent and mass must be numbers");
  }
  return spec;
}

std::string zipf_vector_name(const ZipfSpec& spec) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "zipf-%llu-%g-%g",
                static_cast<unsigned long long>(spec.dimension), spec.s,
                spec.mass);
  std::string name(buf);
  for (char& c : name) {
    bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
              (c >= '0' && c <= '9') || c == '_' || c == '.' || c == '-';
    if (!ok) c = '_';
  }
  return name;
}

// Turnstile stream file: one "index increment" pair per line, whitespace
// separated; increments may be negative; blank lines are skipped.
std::vector<std::pair<std::uint64_t, double>> read_stream(
    const std::string& path) {
  std::ifstream input(path);
  if (!input) throw cc::IoError("cannot open '" + path + "' for reading");
  std::vector<std::pair<std::uint64_t, double>> items;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(input, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string index_token, value_token, extra;
    if (!(fields >> index_token)) continue;
    if (!(fields >> value_token) || (fields >> extra)) {
      throw cc::ParseError("expected 'index increment'", line_no);
    }
    std::uint64_t index = 0;
    auto [p, ec] = std::from_chars(
        index_token.data(), index_token.data() + index_token.size(), index);
    if (ec != std::errc{} || p != index_token.data() + index_token.size()) {
      throw cc::ParseError("bad index '" + index_token + "'", line_no);
    }
    double increment = 0;
    auto [p2, ec2] = std::from_chars(
        value_token.data(), value_token.data() + value_token.size(), increment);
    if (ec2 != std::errc{} || p2 != value_token.data() + value_token.size()) {
      throw cc::ParseError("bad increment '" + value_token + "'", line_no);
    }
    if (!std::isfinite(increment)) {
      throw cc::ValidationError("increment must be finite", line_no);
    }
    items.emplace_back(index, increment);
  }
  if (input.bad()) throw cc::IoError("read failure on '" + path + "'");
  return items;
}

void print_moment_estimate(const cc::MomentEstimate& estimate, double f1) {
  std::printf("estimator %s\n",
              std::string(cc::to_string(estimate.estimator)).c_str());
  std::printf("alpha %s\n", fmt_double(estimate.alpha).c_str());
  std::printf("k %u\n", estimate.k);
  std::printf("f1 %s\n", fmt_double(f1).c_str());
  std::printf("estimate %s\n", fmt_double(estimate.value).c_str());
  std::printf("predicted_relative_variance %s\n",
              fmt_double(estimate.predicted_relative_variance).c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frequency-moment and entropy estimation from streaming "
               "stable-projection sketches"};
  app.require_subcommand(1);

  // sketch build / sketch merge
  CLI::App* sketch_cmd = app.add_subcommand("sketch", "Build or merge sketches");
  sketch_cmd->require_subcommand(1);

  struct {
    double alpha = 0;
    std::uint32_t k = 0;
    std::string kind = "skewed";
    std::uint64_t dimension = 0;  // 0 = max stream index + 1
    std::uint64_t seed = 0;
    std::string input, output;
  } build_args;
  CLI::App* build = sketch_cmd->add_subcommand("build",
                                               "Sketch a turnstile stream");
  build->add_option("--alpha", build_args.alpha, "Moment order in (0, 2]")
      ->required();
  build->add_option("--k", build_args.k, "Number of projections")->required();
  build->add_option("--kind", build_args.kind, "Projection family")
      ->check(CLI::IsMember({"skewed", "symmetric"}));
  build->add_option("--dimension", build_args.dimension,
                    "Signal dimension (default: max index + 1)");
  build->add_option("--seed", build_args.seed, "Projection seed");
  build->add_option("--input", build_args.input,
                    "Stream file: 'index increment' per line")
      ->required();
  build->add_option("--output", build_args.output, "Sketch file to write")
      ->required();
  build->callback([&] {
    auto items = read_stream(build_args.input);
    std::uint64_t dimension = build_args.dimension;
    if (dimension == 0) {
      dimension = 1;
      for (const auto& [index, value] : items) {
        dimension = std::max(dimension, index + 1);
      }
    }
    cc::SketchKind kind = build_args.kind == "skewed"
                              ? cc::SketchKind::skewed
                              : cc::SketchKind::symmetric;
    cc::ProjectionSketch sketch(build_args.alpha, kind, build_args.k,
                                build_args.seed, dimension);
    for (const auto& [index, value] : items) sketch.update(index, value);
    cc::write_sketch_file(sketch, build_args.output);
    std::printf("wrote %s (k=%u, updates=%llu, f1=%s)\n",
                build_args.output.c_str(), sketch.k(),
                static_cast<unsigned long long>(sketch.update_count()),
                fmt_double(sketch.f1()).c_str());
  });

  struct {
    std::string output;
    std::vector<std::string> inputs;
  } merge_args;
  CLI::App* merge_cmd =
      sketch_cmd->add_subcommand("merge", "Sum compatible sketches");
  merge_cmd->add_option("--output", merge_args.output, "Sketch file to write")
      ->required();
  merge_cmd
      ->add_option("inputs", merge_args.inputs, "Sketch files to merge")
      ->expected(2, -1);
  merge_cmd->callback([&] {
    cc::ProjectionSketch merged = cc::read_sketch_file(merge_args.inputs[0]);
    for (std::size_t i = 1; i < merge_args.inputs.size(); ++i) {
      merged.merge_in_place(cc::read_sketch_file(merge_args.inputs[i]));
    }
    cc::write_sketch_file(merged, merge_args.output);
    std::printf("wrote %s (merged %zu sketches)\n", merge_args.output.c_str(),
                merge_args.inputs.size());
  });

  // estimate
  struct {
    std::string estimator;
    std::string input;
  } estimate_args;
  CLI::App* estimate_cmd =
      app.add_subcommand("estimate", "Estimate the frequency moment");
  estimate_cmd
      ->add_option("--estimator", estimate_args.estimator, "Estimator")
      ->check(CLI::IsMember({"gm", "hm", "oq", "sym-gm"}))
      ->required();
  estimate_cmd->add_option("--input", estimate_args.input, "Sketch file")
      ->required();
  estimate_cmd->callback([&] {
    cc::ProjectionSketch sketch = cc::read_sketch_file(estimate_args.input);
    cc::EstimatorKind kind =
        *cc::estimator_from_string(estimate_args.estimator);
    cc::MomentEstimate estimate = cc::estimate(kind, sketch);
    print_moment_estimate(estimate, sketch.f1());
  });

  // entropy
  struct {
    std::string estimator;
    std::string route = "renyi";
    std::string input;
  } entropy_args;
  CLI::App* entropy_cmd = app.add_subcommand(
      "entropy", "Estimate entropy at the sketch order and the Shannon limit");
  entropy_cmd
      ->add_option("--estimator", entropy_args.estimator, "Moment estimator")
      ->check(CLI::IsMember({"gm", "hm", "oq", "sym-gm"}))
      ->required();
  entropy_cmd->add_option("--route", entropy_args.route, "Entropy family")
      ->check(CLI::IsMember({"renyi", "tsallis"}));
  entropy_cmd->add_option("--input", entropy_args.input, "Sketch file")
      ->required();
  entropy_cmd->callback([&] {
    cc::ProjectionSketch sketch = cc::read_sketch_file(entropy_args.input);
    cc::EstimatorKind kind = *cc::estimator_from_string(entropy_args.estimator);
    cc::Route route = *cc::route_from_string(entropy_args.route);
    cc::MomentEstimate moment = cc::estimate(kind, sketch);
    cc::EntropyEstimate routed =
        route == cc::Route::renyi
            ? cc::renyi_from_moment(moment, sketch.f1())
            : cc::tsallis_from_moment(moment, sketch.f1());
    cc::EntropyEstimate shannon = cc::shannon_via(moment, sketch.f1(), route);
    std::printf("estimator %s\n", entropy_args.estimator.c_str());
    std::printf("route %s\n", entropy_args.route.c_str());
    std::printf("alpha %s\n", fmt_double(moment.alpha).c_str());
    std::printf("k %u\n", moment.k);
    std::printf("%s_entropy %s\n", entropy_args.route.c_str(),
                fmt_double(routed.value).c_str());
    std::printf("%s_predicted_variance %s\n", entropy_args.route.c_str(),
                fmt_double(routed.predicted_variance).c_str());
    std::printf("shannon_estimate %s\n", fmt_double(shannon.value).c_str());
    std::printf("shannon_predicted_variance %s\n",
                fmt_double(shannon.predicted_variance).c_str());
  });

  // experiment run / experiment min-curves
  CLI::App* experiment_cmd =
      app.add_subcommand("experiment", "Monte-Carlo accuracy experiments");
  experiment_cmd->require_subcommand(1);

  struct {
    std::string input;
    std::string zipf;
    std::vector<double> alphas;
    std::vector<std::uint32_t> ks;
    std::vector<std::string> estimators;
    std::vector<std::string> routes;
    std::uint32_t reps = 1000;
    std::uint64_t seed = 0;
    std::string output;
  } run_args;
  CLI::App* run_cmd = experiment_cmd->add_subcommand(
      "run", "Sweep (vector, alpha, k, estimator, target) cells");
  run_cmd->add_option("--input", run_args.input, "Sparse-vector text file");
  run_cmd->add_option("--zipf", run_args.zipf, "Synthetic vector D,s,M");
  run_cmd->add_option("--alpha", run_args.alphas,
                      "Moment orders (default: supported oq grid)");
  run_cmd->add_option("--k", run_args.ks,
                      "Sketch sizes (default: 20 50 100 1000)");
  run_cmd
      ->add_option("--estimator", run_args.estimators,
                   "Estimators (default: all)")
      ->check(CLI::IsMember({"gm", "hm", "oq", "sym-gm"}));
  run_cmd
      ->add_option("--route", run_args.routes,
                   "Entropy routes (default: renyi and tsallis)")
      ->check(CLI::IsMember({"renyi", "tsallis"}));
  run_cmd->add_option("--reps", run_args.reps, "Repetitions per cell");
  run_cmd->add_option("--seed", run_args.seed, "Master seed");
  run_cmd->add_option("--output", run_args.output, "CSV file to write")
      ->required();
  run_cmd->callback([&] {
    if (run_args.input.empty() == run_args.zipf.empty()) {
      throw cc::ParameterError("pass exactly one of --input or --zipf");
    }
    cc::harness::ExperimentConfig config;
    if (!run_args.input.empty()) {
      config.vectors = cc::harness::load_sparse_vectors(run_args.input);
    } else {
      ZipfSpec spec = parse_zipf_spec(run_args.zipf);
      config.vectors.push_back(cc::harness::NamedVector{
          zipf_vector_name(spec),
          cc::harness::synthesize_zipf(spec.dimension, spec.s, spec.mass,
                                       run_args.seed)});
    }
    if (run_args.alphas.empty()) {
      for (const cc::QuantileConstants& row : cc::quantile_constants_table()) {
        config.alpha_grid.push_back(row.alpha);
      }
    } else {
      config.alpha_grid = run_args.alphas;
    }
    config.k_grid = run_args.ks.empty()
                        ? std::vector<std::uint32_t>{20, 50, 100, 1000}
                        : run_args.ks;
    if (run_args.estimators.empty()) {
      config.estimators = {cc::EstimatorKind::gm, cc::EstimatorKind::hm,
                           cc::EstimatorKind::oq, cc::EstimatorKind::sym_gm};
    } else {
      for (const std::string& name : run_args.estimators) {
        config.estimators.push_back(*cc::estimator_from_string(name));
      }
    }
    std::vector<std::string> routes = run_args.routes;
    if (routes.empty()) routes = {"renyi", "tsallis"};
    config.targets = {cc::harness::Target::moment};
    for (const std::string& route : routes) {
      if (route == "renyi") {
        config.targets.push_back(cc::harness::Target::renyi);
        config.targets.push_back(cc::harness::Target::shannon_via_renyi);
      } else {
        config.targets.push_back(cc::harness::Target::tsallis);
        config.targets.push_back(cc::harness::Target::shannon_via_tsallis);
      }
    }
    config.repetitions = run_args.reps;
    config.master_seed = run_args.seed;
    cc::harness::MseReport report = cc::harness::run_mse_experiment(config);
    for (const std::string& warning : report.warnings) {
      std::fprintf(stderr, "warning: %s\n", warning.c_str());
    }
    cc::harness::emit_csv(report, run_args.output);
    std::printf("wrote %s (%zu rows)\n", run_args.output.c_str(),
                report.rows.size());
  });

  struct {
    std::string input;
    std::string output;
  } min_args;
  CLI::App* min_cmd = experiment_cmd->add_subcommand(
      "min-curves", "Minimum MSE over alpha per (vector, target, estimator, k)");
  min_cmd->add_option("--input", min_args.input, "CSV from 'experiment run'")
      ->required();
  min_cmd->add_option("--output", min_args.output, "CSV file to write")
      ->required();
  min_cmd->callback([&] {
    cc::harness::MseReport report = cc::harness::read_csv(min_args.input);
    cc::harness::MseReport curves = cc::harness::min_mse_curves(report);
    cc::harness::emit_csv(curves, min_args.output);
    std::printf("wrote %s (%zu rows)\n", min_args.output.c_str(),
                curves.rows.size());
  });

  // synth zipf
  CLI::App* synth_cmd = app.add_subcommand("synth", "Generate test vectors");
  synth_cmd->require_subcommand(1);
  struct {
    std::string zipf;
    std::uint64_t seed = 0;
    std::string output;
  } zipf_args;
  CLI::App* zipf_cmd =
      synth_cmd->add_subcommand("zipf", "Power-law vector with exact mass");
  zipf_cmd->add_option("--zipf", zipf_args.zipf, "Vector spec D,s,M")
      ->required();
  zipf_cmd->add_option("--seed", zipf_args.seed, "Seed (reserved)");
  zipf_cmd->add_option("--output", zipf_args.output, "Vector text file")
      ->required();
  zipf_cmd->callback([&] {
    ZipfSpec spec = parse_zipf_spec(zipf_args.zipf);
    cc::SparseVector vec = cc::harness::synthesize_zipf(
        spec.dimension, spec.s, spec.mass, zipf_args.seed);
    std::vector<cc::harness::NamedVector> vectors;
    vectors.push_back(
        cc::harness::NamedVector{zipf_vector_name(spec), std::move(vec)});
    cc::harness::write_sparse_vectors(vectors, zipf_args.output);
    std::printf("wrote %s (nnz=%zu, f1=%s)\n", zipf_args.output.c_str(),
                vectors[0].vec.nnz(), fmt_double(vectors[0].vec.f1()).c_str());
  });

  try {
    app.parse(argc, argv);
    return 0;
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  } catch (const cc::ParameterError& e) {  // covers UnsupportedAlphaError
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const cc::DomainError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const cc::BoundsError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const cc::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
