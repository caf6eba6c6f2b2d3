// Compares the serial and OpenMP kernel lanes on the dense kernels and the
// block forwards. The parallel lane only splits independent output elements,
// so besides the speedup column this also asserts the results are bitwise
// identical.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <iostream>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "polynl/blocks.hpp"
#include "polynl/io.hpp"
#include "polynl/kernels.hpp"
#include "polynl/rng.hpp"

namespace {

using polynl::Exec;
using polynl::Matrix;

inline void escape(const void* p) { asm volatile("" : : "g"(p) : "memory"); }

template <typename F>
double median_ms(F&& f, std::size_t trials) {
  std::vector<double> t;
  for (std::size_t i = 0; i < trials + 1; ++i) {  // first run warms up
    const auto t0 = std::chrono::steady_clock::now();
    auto y = f();
    escape(y.data());
    const auto t1 = std::chrono::steady_clock::now();
    if (i > 0) t.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  std::sort(t.begin(), t.end());
  return t[t.size() / 2];
}

template <typename F>
bool row(const char* name, const char* dims, std::size_t trials, F&& f) {
  const double serial = median_ms([&] { return f(Exec::serial); }, trials);
  const double parallel = median_ms([&] { return f(Exec::parallel); }, trials);
  const bool equal =
      polynl::max_abs_diff(f(Exec::serial), f(Exec::parallel)) == 0.0;
  std::cout << polynl::strprintf(
      "%-16s %-22s serial=%9.3f ms  parallel=%9.3f ms  speedup=%5.2fx  "
      "bitwise_equal=%s\n",
      name, dims, serial, parallel, serial / parallel, equal ? "yes" : "NO");
  return equal;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"serial vs OpenMP kernel lane comparison"};
  int threads = 0;  // 0 = OpenMP default
  std::size_t trials = 5;
  std::uint64_t seed = 42;
  app.add_option("--threads", threads, "threads for the parallel lane");
  app.add_option("--trials", trials, "timed runs per row");
  app.add_option("--seed", seed, "input seed");
  CLI11_PARSE(app, argc, argv);

#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
  std::cout << "openmp max threads: " << omp_get_max_threads() << "\n";
#else
  std::cout << "built without OpenMP; both lanes run serially\n";
#endif

  polynl::Rng rng(seed);
  bool all_equal = true;

  {
    const std::size_t m = 1024, k = 256, p = 1024;
    Matrix<float> a = polynl::random_matrix<float>(rng, m, k, -1.0, 1.0);
    Matrix<float> b = polynl::random_matrix<float>(rng, k, p, -1.0, 1.0);
    all_equal &= row("matmul", "1024x256 * 256x1024", trials,
                     [&](Exec ex) { return polynl::matmul(a, b, ex); });
  }
  {
    const std::size_t n = 1 << 20;
    Matrix<float> a = polynl::random_matrix<float>(rng, n, 1, -1.0, 1.0);
    Matrix<float> b = polynl::random_matrix<float>(rng, n, 1, -1.0, 1.0);
    all_equal &= row("hadamard", "1048576x1", trials,
                     [&](Exec ex) { return polynl::hadamard(a, b, ex); });
  }
  {
    const std::size_t n = 8192, c = 64;
    Matrix<float> x = polynl::random_feature_map<float>(rng, n, c);
    all_equal &= row("pool_expand", "8192x64", trials,
                     [&](Exec ex) { return polynl::pool_expand(x, ex); });
  }
  {
    const std::size_t n = 2048, c = 64;
    Matrix<float> x = polynl::random_feature_map<float>(rng, n, c);
    auto p = polynl::init_nl_params<float>(rng, c);
    all_equal &= row("nl_forward", "n=2048 c=64", trials,
                     [&](Exec ex) { return polynl::nl_forward(p, x, ex); });
    all_equal &= row("efficient_nl", "n=2048 c=64", trials, [&](Exec ex) {
      return polynl::efficient_nl_forward(p, x, ex);
    });
  }
  {
    const std::size_t n = 8192, c = 64;
    Matrix<float> x = polynl::random_feature_map<float>(rng, n, c);
    auto p = polynl::init_polynl_params<float>(rng, c);
    all_equal &= row("polynl_core", "n=8192 c=64", trials, [&](Exec ex) {
      return polynl::polynl_core_forward(p, x, ex);
    });
  }
  {
    const std::size_t n = 8192, c = 64, d = 64;
    Matrix<float> x = polynl::random_feature_map<float>(rng, n, c);
    auto p = polynl::init_latentgnn_params<float>(rng, c, d);
    all_equal &= row("latentgnn", "n=8192 c=64 d=64", trials, [&](Exec ex) {
      return polynl::latentgnn_forward(p, x, ex);
    });
  }

  if (!all_equal) {
    std::cout << "lane mismatch detected\n";
    return 1;
  }
  return 0;
}
