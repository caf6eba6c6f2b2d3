#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "polynl/kernels.hpp"

namespace polynl {

enum class Method { NL, ENL, PolyNL, LatentGNN, Conv1x1 };

const char* method_name(Method m);
Method parse_method(const std::string& name);  // throws std::invalid_argument
std::vector<Method> all_methods();

enum class Dtype { f32, f64 };

// One benchmark cell. d is the latent dimension, 0 for methods that have none.
struct GridCell {
  Method method;
  std::size_t n = 0;
  std::size_t c = 0;
  std::size_t d = 0;
};

struct BenchRecord {
  Method method;
  std::size_t n = 0;
  std::size_t c = 0;
  std::size_t d = 0;
  std::size_t trials = 0;
  std::uint64_t median_ns = 0;
  std::uint64_t flops = 0;
  std::uint64_t peak_elems = 0;
};

struct SkippedCell {
  GridCell cell;
  std::string reason;
};

struct BenchRun {
  std::vector<BenchRecord> records;
  std::vector<SkippedCell> skipped;
};

struct BenchOptions {
  std::size_t trials = 20;
  std::size_t warmup = 2;
  std::uint64_t byte_budget = 128ULL << 20;  // NL similarity-matrix cap
  Dtype dtype = Dtype::f32;
  std::uint64_t seed = 42;
  int threads = 1;  // > 1 selects the parallel kernel lane
};

// Closed-form multiply-add count of each forward pass (a multiply or an add
// is one FLOP); equals the instrumented kernel counters exactly.
std::uint64_t flop_model(Method m, std::size_t n, std::size_t c, std::size_t d);

// Largest single intermediate buffer (in scalar elements) of each forward
// pass; equals the instrumented allocation registry exactly.
std::uint64_t peak_model(Method m, std::size_t n, std::size_t c, std::size_t d);

// Per cell: seeded inputs, one instrumented pass cross-checked against the
// models, `warmup` discarded runs, `trials` timed runs, median reported.
// NL cells whose N*N similarity matrix exceeds the byte budget are skipped,
// as are cells that fail to allocate. Stateless: duplicate cells run twice.
BenchRun run_bench(const std::vector<GridCell>& grid, const BenchOptions& opts);

struct ScalingFit {
  Method method;
  std::size_t c = 0;
  double exponent = 0.0;  // least-squares slope of log median time vs log N
  double r2 = 0.0;
  std::size_t points = 0;
};

// Records must share one method and one c and cover >= 4 distinct N.
ScalingFit fit_slope(const std::vector<BenchRecord>& records);

// All (method, c) groups with enough points.
std::vector<ScalingFit> fit_all(const std::vector<BenchRecord>& records);

std::vector<GridCell> make_grid(const std::vector<Method>& methods,
                                const std::vector<std::size_t>& ns,
                                const std::vector<std::size_t>& cs,
                                std::size_t latent_d);
std::vector<GridCell> default_grid(const std::vector<Method>& methods);
std::vector<GridCell> tiny_grid(const std::vector<Method>& methods);

// CSV columns exactly: method,n,c,d,trials,median_ns,flops,peak_elems
std::string emit_csv(const std::vector<BenchRecord>& records);
std::vector<BenchRecord> parse_csv(const std::string& text);

// Self-contained log-log scatter with fitted lines.
std::string emit_svg(const std::vector<BenchRecord>& records,
                     const std::vector<ScalingFit>& fits);

}  // namespace polynl
