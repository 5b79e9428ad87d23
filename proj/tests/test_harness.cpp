#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cc/errors.hpp"
#include "cc/harness.hpp"
#include "doctest.h"

using namespace cc;
using namespace cc::harness;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const char* name) {
  return fs::temp_directory_path() / name;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  REQUIRE(static_cast<bool>(out));
}

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(static_cast<bool>(in));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

NamedVector named123(const std::string& name) {
  SparseVector v(3);
  v.set(0, 1.0);
  v.set(1, 2.0);
  v.set(2, 3.0);
  return {name, std::move(v)};
}

bool rows_equal(const MseRow& a, const MseRow& b) {
  return a.vector_id == b.vector_id && a.target == b.target &&
         a.estimator == b.estimator && a.alpha == b.alpha && a.k == b.k &&
         a.repetitions == b.repetitions && a.mse_norm == b.mse_norm &&
         a.bias == b.bias && a.theory_var == b.theory_var;
}

}  // namespace

TEST_CASE("target strings round-trip") {
  const Target targets[] = {Target::moment, Target::renyi, Target::tsallis,
                            Target::shannon_via_renyi,
                            Target::shannon_via_tsallis};
  for (Target t : targets) {
    auto back = target_from_string(to_string(t));
    REQUIRE(back.has_value());
    CHECK(*back == t);
  }
  CHECK(to_string(Target::shannon_via_renyi) == "shannon_via_renyi");
  CHECK(!target_from_string("entropy").has_value());
}

TEST_CASE("load_sparse_vectors parses headers, entries, and blocks") {
  const fs::path path = temp_file("cc_harness_vectors.txt");

  SUBCASE("entry on the header line") {
    write_text(path, "w: 0 1\n1 2\n2 3\n");
    auto loaded = load_sparse_vectors(path);
    REQUIRE(loaded.size() == 1);
    CHECK(loaded[0].name == "w");
    CHECK(loaded[0].vec.dimension() == 3);
    CHECK(loaded[0].vec.at(0) == 1.0);
    CHECK(loaded[0].vec.at(1) == 2.0);
    CHECK(loaded[0].vec.at(2) == 3.0);
    CHECK(loaded[0].vec.f1() == 6.0);
  }

  SUBCASE("bare header, several blocks, comments-free format") {
    write_text(path, "a:\n5 2.5\n\nb: 0 1\n");
    auto loaded = load_sparse_vectors(path);
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].name == "a");
    CHECK(loaded[0].vec.dimension() == 6);
    CHECK(loaded[0].vec.at(5) == 2.5);
    CHECK(loaded[1].name == "b");
    CHECK(loaded[1].vec.dimension() == 1);
  }

  SUBCASE("duplicate indices accumulate") {
    write_text(path, "a:\n0 1\n0 2\n");
    auto loaded = load_sparse_vectors(path);
    REQUIRE(loaded.size() == 1);
    CHECK(loaded[0].vec.at(0) == 3.0);
    CHECK(loaded[0].vec.nnz() == 1);
  }

  SUBCASE("empty file loads as empty list") {
    write_text(path, "");
    CHECK(load_sparse_vectors(path).empty());
  }

  SUBCASE("zero counts are allowed and leave no entry") {
    write_text(path, "a:\n4 0\n");
    auto loaded = load_sparse_vectors(path);
    REQUIRE(loaded.size() == 1);
    CHECK(loaded[0].vec.nnz() == 0);
    CHECK(loaded[0].vec.dimension() == 5);
  }

  SUBCASE("negative counts are rejected") {
    write_text(path, "a:\n3 -1\n");
    CHECK_THROWS_AS(load_sparse_vectors(path), ValidationError);
  }

  SUBCASE("malformed lines carry parse errors") {
    write_text(path, "0 1\n");
    CHECK_THROWS_AS(load_sparse_vectors(path), ParseError);
    write_text(path, "a:\nx 1\n");
    CHECK_THROWS_AS(load_sparse_vectors(path), ParseError);
    write_text(path, "a:\n0 1 2\n");
    CHECK_THROWS_AS(load_sparse_vectors(path), ParseError);
    write_text(path, "a: 0\n");
    CHECK_THROWS_AS(load_sparse_vectors(path), ParseError);
    write_text(path, "a/b: 0 1\n");
    CHECK_THROWS_AS(load_sparse_vectors(path), ParseError);
  }

  SUBCASE("duplicate names are rejected") {
    write_text(path, "a: 0 1\na: 1 1\n");
    CHECK_THROWS_AS(load_sparse_vectors(path), ValidationError);
  }

  SUBCASE("missing file raises IoError") {
    CHECK_THROWS_AS(load_sparse_vectors(temp_file("cc_harness_nope.txt")),
                    IoError);
  }

  fs::remove(path);
}

TEST_CASE("write_sparse_vectors round-trips through load") {
  const fs::path path = temp_file("cc_harness_roundtrip.txt");
  std::vector<NamedVector> vectors;
  vectors.push_back(named123("first"));
  SparseVector sparse(100);
  sparse.set(10, 0.125);
  sparse.set(99, 7.0);
  vectors.push_back({"second.v-2_x", std::move(sparse)});

  write_sparse_vectors(vectors, path);
  auto loaded = load_sparse_vectors(path);
  REQUIRE(loaded.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(loaded[i].name == vectors[i].name);
    CHECK(loaded[i].vec.dimension() == vectors[i].vec.dimension());
    CHECK(loaded[i].vec.f1() == vectors[i].vec.f1());
    CHECK(loaded[i].vec.entries() == vectors[i].vec.entries());
  }
  fs::remove(path);
}

TEST_CASE("synthesize_zipf splits mass deterministically") {
  SUBCASE("flat exponent splits evenly") {
    SparseVector v = synthesize_zipf(4, 0.0, 100.0, 0);
    CHECK(v.dimension() == 4);
    CHECK(v.nnz() == 4);
    for (int i = 0; i < 4; ++i) CHECK(v.at(i) == 25.0);
    CHECK(v.f1() == 100.0);
  }

  SUBCASE("mass is conserved to the nearest integer") {
    SparseVector v = synthesize_zipf(7, 1.3, 1000.7, 0);
    CHECK(v.f1() == 1001.0);
    for (const auto& [index, value] : v.entries()) {
      CHECK(value == std::floor(value));
    }
  }

  SUBCASE("seed does not change the result") {
    SparseVector a = synthesize_zipf(100, 1.0, 5000.0, 1);
    SparseVector b = synthesize_zipf(100, 1.0, 5000.0, 999);
    CHECK(a.entries() == b.entries());
  }

  SUBCASE("heavier exponents concentrate mass on low indices") {
    SparseVector v = synthesize_zipf(65536, 1.0, 100000.0, 0);
    CHECK(v.f1() == 100000.0);
    CHECK(v.at(0) > v.at(1));
    CHECK(v.at(0) > 8000.0);
    CHECK(v.nnz() < 65536);
    const double h = exact_shannon(v);
    CHECK(h > 5.0);
    CHECK(h < 11.0);
  }

  SUBCASE("parameters are validated") {
    CHECK_THROWS_AS(synthesize_zipf(0, 1.0, 100.0, 0), ParameterError);
    CHECK_THROWS_AS(synthesize_zipf(1ull << 23, 1.0, 100.0, 0),
                    ParameterError);
    CHECK_THROWS_AS(synthesize_zipf(10, -0.5, 100.0, 0), ParameterError);
    CHECK_THROWS_AS(synthesize_zipf(10, 1.0, 0.0, 0), ParameterError);
    CHECK_THROWS_AS(synthesize_zipf(10, 1.0, 1e16, 0), ParameterError);
  }
}

TEST_CASE("run_mse_experiment accounts for rows and skips invalid cells") {
  ExperimentConfig config;
  config.vectors.push_back(named123("w"));
  config.alpha_grid = {0.9, 1.0};
  config.k_grid = {20};
  config.estimators = {EstimatorKind::gm, EstimatorKind::sym_gm};
  config.targets = {Target::moment, Target::renyi};
  config.repetitions = 200;
  config.master_seed = 7;

  MseReport report = run_mse_experiment(config);
  // alpha 0.9: {gm, sym-gm} x {moment, renyi} = 4 rows.
  // alpha 1.0: gm and the renyi target are skipped, leaving sym-gm x moment.
  CHECK(report.rows.size() == 5);
  CHECK(report.warnings.size() == 2);

  for (const MseRow& row : report.rows) {
    CHECK(row.vector_id == "w");
    CHECK(row.repetitions == 200);
    CHECK(row.k == 20);
    CHECK(row.mse_norm >= 0.0);
    CHECK(row.mse_norm + 1e-12 >= row.bias * row.bias);
    if (row.alpha == 1.0) {
      CHECK(row.estimator == EstimatorKind::sym_gm);
      CHECK(row.target == Target::moment);
    }
    if (row.target == Target::moment) {
      CHECK(row.theory_var ==
            doctest::Approx(variance_factor(row.estimator, row.alpha) / 20)
                .epsilon(1e-15));
    }
  }

  CHECK(std::is_sorted(
      report.rows.begin(), report.rows.end(),
      [](const MseRow& a, const MseRow& b) {
        auto key = [](const MseRow& r) {
          return std::make_tuple(r.vector_id, static_cast<int>(r.target),
                                 static_cast<int>(r.estimator), r.alpha, r.k);
        };
        return key(a) < key(b);
      }));
}

TEST_CASE("run_mse_experiment with one repetition reports mse == bias^2") {
  ExperimentConfig config;
  config.vectors.push_back(named123("w"));
  config.alpha_grid = {0.95};
  config.k_grid = {20};
  config.estimators = {EstimatorKind::gm};
  config.targets = {Target::moment};
  config.repetitions = 1;

  MseReport report = run_mse_experiment(config);
  REQUIRE(report.rows.size() == 1);
  CHECK(report.rows[0].mse_norm == report.rows[0].bias * report.rows[0].bias);
}

TEST_CASE("run_mse_experiment is deterministic, and so is its CSV") {
  ExperimentConfig config;
  config.vectors.push_back(named123("w"));
  config.alpha_grid = {0.9, 0.95};
  config.k_grid = {20, 50};
  config.estimators = {EstimatorKind::gm, EstimatorKind::oq};
  config.targets = {Target::moment, Target::shannon_via_renyi};
  config.repetitions = 100;
  config.master_seed = 11;

  MseReport a = run_mse_experiment(config);
  config.workers = 3;  // worker count must not change results
  MseReport b = run_mse_experiment(config);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(rows_equal(a.rows[i], b.rows[i]));
  }

  const fs::path p1 = temp_file("cc_harness_a.csv");
  const fs::path p2 = temp_file("cc_harness_b.csv");
  emit_csv(a, p1);
  emit_csv(b, p2);
  CHECK(read_bytes(p1) == read_bytes(p2));
  fs::remove(p1);
  fs::remove(p2);
}

TEST_CASE("estimation error shrinks with sketch size") {
  ExperimentConfig config;
  config.vectors.push_back(named123("w"));
  config.alpha_grid = {0.95};
  config.k_grid = {100, 1000};
  config.estimators = {EstimatorKind::oq, EstimatorKind::sym_gm};
  config.targets = {Target::moment};
  config.repetitions = 1000;
  config.master_seed = 3;

  MseReport report = run_mse_experiment(config);
  REQUIRE(report.rows.size() == 4);
  for (EstimatorKind kind : {EstimatorKind::oq, EstimatorKind::sym_gm}) {
    double small_k = -1, large_k = -1;
    for (const MseRow& row : report.rows) {
      if (row.estimator != kind) continue;
      (row.k == 100 ? small_k : large_k) = row.mse_norm;
    }
    CHECK(small_k > 0.0);
    CHECK(large_k > 0.0);
    CHECK(large_k < small_k);
    // and the theory curve should be predictive at these sizes
    for (const MseRow& row : report.rows) {
      if (row.estimator != kind) continue;
      CHECK(row.mse_norm / row.theory_var > 0.7);
      CHECK(row.mse_norm / row.theory_var < 1.45);
    }
  }
}

TEST_CASE("run_mse_experiment validates its configuration") {
  ExperimentConfig base;
  base.vectors.push_back(named123("w"));
  base.alpha_grid = {0.9};
  base.k_grid = {20};
  base.estimators = {EstimatorKind::gm};
  base.targets = {Target::moment};
  base.repetitions = 10;

  {
    ExperimentConfig c = base;
    c.vectors.clear();
    CHECK_THROWS_AS(run_mse_experiment(c), ParameterError);
  }
  {
    ExperimentConfig c = base;
    c.alpha_grid.clear();
    CHECK_THROWS_AS(run_mse_experiment(c), ParameterError);
  }
  {
    ExperimentConfig c = base;
    c.k_grid = {1};
    CHECK_THROWS_AS(run_mse_experiment(c), ParameterError);
  }
  {
    ExperimentConfig c = base;
    c.repetitions = 0;
    CHECK_THROWS_AS(run_mse_experiment(c), ParameterError);
  }
  {
    ExperimentConfig c = base;
    c.vectors.push_back(named123("w"));
    CHECK_THROWS_AS(run_mse_experiment(c), ValidationError);
  }
  {
    ExperimentConfig c = base;
    c.vectors[0].name = "bad name";
    CHECK_THROWS_AS(run_mse_experiment(c), ValidationError);
  }
  {
    ExperimentConfig c = base;
    SparseVector zero(4);
    c.vectors[0] = {"z", std::move(zero)};
    CHECK_THROWS_AS(run_mse_experiment(c), ValidationError);
  }
  {
    // a point mass has zero entropy, so entropy targets cannot be normalized
    ExperimentConfig c = base;
    SparseVector point(4);
    point.set(2, 5.0);
    c.vectors[0] = {"point", std::move(point)};
    c.targets = {Target::renyi};
    CHECK_THROWS_AS(run_mse_experiment(c), ValidationError);
  }
}

TEST_CASE("min_mse_curves keeps the best alpha per group") {
  ExperimentConfig config;
  config.vectors.push_back(named123("w"));
  config.alpha_grid = {0.9, 0.95};
  config.k_grid = {20};
  config.estimators = {EstimatorKind::gm};
  config.targets = {Target::moment, Target::renyi};
  config.repetitions = 300;
  config.master_seed = 13;

  MseReport report = run_mse_experiment(config);
  REQUIRE(report.rows.size() == 4);
  MseReport curves = min_mse_curves(report);
  REQUIRE(curves.rows.size() == 2);
  for (const MseRow& row : curves.rows) {
    for (const MseRow& full : report.rows) {
      if (full.target == row.target && full.estimator == row.estimator &&
          full.k == row.k) {
        CHECK(row.mse_norm <= full.mse_norm);
      }
    }
    CHECK((row.alpha == 0.9 || row.alpha == 0.95));
  }

  MseReport single;
  single.rows.push_back(report.rows[0]);
  CHECK_THROWS_AS(min_mse_curves(single), ParameterError);
}

TEST_CASE("CSV emit and read round-trip exactly") {
  ExperimentConfig config;
  config.vectors.push_back(named123("w"));
  config.alpha_grid = {0.9};
  config.k_grid = {20};
  config.estimators = {EstimatorKind::gm, EstimatorKind::oq};
  config.targets = {Target::moment, Target::tsallis};
  config.repetitions = 50;

  MseReport report = run_mse_experiment(config);
  const fs::path path = temp_file("cc_harness_io.csv");
  emit_csv(report, path);

  MseReport back = read_csv(path);
  REQUIRE(back.rows.size() == report.rows.size());
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    CHECK(rows_equal(back.rows[i], report.rows[i]));
  }
  CHECK(back.warnings.empty());

  const std::string bytes = read_bytes(path);
  CHECK(bytes.rfind("vector,target,estimator,alpha,k,reps,mse_norm,bias,"
                    "theory_var\n",
                    0) == 0);
  fs::remove(path);
}

TEST_CASE("CSV reader rejects malformed input") {
  const fs::path path = temp_file("cc_harness_bad.csv");

  write_text(path, "vector,target,estimator\nw,moment,gm\n");
  CHECK_THROWS_AS(read_csv(path), ParseError);

  const std::string header =
      "vector,target,estimator,alpha,k,reps,mse_norm,bias,theory_var\n";
  write_text(path, header + "w,moment,gm,0.9,20,100,0,0\n");
  CHECK_THROWS_AS(read_csv(path), ParseError);

  write_text(path, header + "w,moment,nope,0.9,20,100,0,0,0\n");
  CHECK_THROWS_AS(read_csv(path), ParseError);

  write_text(path, header + "w,nope,gm,0.9,20,100,0,0,0\n");
  CHECK_THROWS_AS(read_csv(path), ParseError);

  write_text(path, header + "w,moment,gm,zzz,20,100,0,0,0\n");
  CHECK_THROWS_AS(read_csv(path), ParseError);

  write_text(path, header + "w,moment,gm,0.9,5000000000,100,0,0,0\n");
  CHECK_THROWS_AS(read_csv(path), ParseError);

  write_text(path, header);
  CHECK(read_csv(path).rows.empty());

  fs::remove(path);
}
