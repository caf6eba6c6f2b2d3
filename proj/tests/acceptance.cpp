// Acceptance suite: runs every gating criterion at its stated tolerance and
// prints one [PASS]/[FAIL] line per criterion. Exits nonzero on any failure.
//
// argv[1] (optional): path to the polynl CLI binary, used by the determinism
// criterion; that check is skipped with a failure if the path is missing.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "polynl/bench.hpp"
#include "polynl/gradcheck.hpp"
#include "polynl/io.hpp"
#include "polynl/rng.hpp"
#include "polynl/verify.hpp"

using namespace polynl;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

bool report(int index, const std::string& name, bool pass,
            const std::string& detail) {
  std::printf("[%s] criterion %d: %s — %s\n", pass ? "PASS" : "FAIL", index,
              name.c_str(), detail.c_str());
  std::fflush(stdout);
  return pass;
}

// ---- criterion 1: oracle triangle ----------------------------------------

bool criterion_triangle() {
  const auto t0 = std::chrono::steady_clock::now();
  VerifyOptions opts;  // 100 instances, N*C <= 8
  SuiteResult res = run_triangle_suite(opts);
  const double secs = seconds_since(t0);
  const bool pass = res.pass && res.tolerance == 1e-10 && secs < 10.0;
  return report(1, "oracle triangle (both blocks, 3 paths each)", pass,
                strprintf("instances=%zu max_err=%.3e tol=1e-10 time=%.2fs "
                          "(budget 10s)",
                          res.instances, res.max_err, secs));
}

// ---- criterion 2: reassociation -------------------------------------------

bool criterion_reassociation() {
  const auto t0 = std::chrono::steady_clock::now();
  VerifyOptions opts;  // 50 instances up to N=256, C=32
  SuiteResult res = run_reassociation_suite(opts);
  const double secs = seconds_since(t0);
  const bool pass = res.pass && res.tolerance == 1e-10 && secs < 30.0;
  return report(2, "efficient-NL reassociation equals NL", pass,
                strprintf("instances=%zu max_err=%.3e tol=1e-10 time=%.2fs "
                          "(budget 30s)",
                          res.instances, res.max_err, secs));
}

// ---- criterion 3: gradient checks -----------------------------------------

bool criterion_gradcheck() {
  const auto t0 = std::chrono::steady_clock::now();
  CheckOptions opt;  // h=1e-5, tol=1e-6, floor=1e-8
  double worst = 0.0;
  bool pass = true;
  const std::pair<std::size_t, std::size_t> sizes[] = {{5, 3}, {8, 4}};
  for (const auto& [n, c] : sizes) {
    for (std::uint64_t s = 0; s < 20; ++s) {
      const std::uint64_t seed = derive_seed(42, s);
      for (const GradCheckReport& rep :
           {check_nl_gradients(n, c, seed, opt),
            check_polynl_gradients(n, c, seed, opt)}) {
        pass = pass && rep.pass;
        for (const ParamCheck& pc : rep.params)
          worst = std::max(worst, pc.max_rel);
      }
    }
  }
  const double secs = seconds_since(t0);
  pass = pass && secs < 60.0;
  return report(3, "analytic gradients vs central differences", pass,
                strprintf("sizes=5x3,8x4 seeds=20 each max_rel=%.3e tol=1e-6 "
                          "floor=1e-8 time=%.2fs (budget 60s)",
                          worst, secs));
}

// ---- criterion 4: homogeneity + permutation --------------------------------

bool criterion_identities() {
  VerifyOptions opts;  // 50 instances per block
  SuiteResult hom = run_homogeneity_suite(opts);
  SuiteResult perm = run_permutation_suite(opts);
  const bool pass = hom.pass && perm.pass && hom.tolerance == 1e-12 &&
                    perm.tolerance == 1e-12;
  return report(4, "degree-3 homogeneity and permutation equivariance", pass,
                strprintf("homogeneity max_err=%.3e permutation max_err=%.3e "
                          "tol=1e-12 (%zu + %zu instances)",
                          hom.max_err, perm.max_err, hom.instances,
                          perm.instances));
}

// ---- criterion 5: complexity separation ------------------------------------

struct SweepState {
  std::vector<BenchRecord> records;
};

bool criterion_complexity(SweepState& state) {
  const auto t0 = std::chrono::steady_clock::now();
  BenchOptions opts;  // trials=20, f32, 128 MiB budget, serial lane
  const auto grid = make_grid(all_methods(),
                              {256, 512, 1024, 2048, 4096, 8192, 16384}, {64},
                              64);
  BenchRun run = run_bench(grid, opts);
  const double secs = seconds_since(t0);
  state.records = run.records;

  std::string detail;
  bool pass = secs < 600.0;
  detail += strprintf("time=%.1fs (budget 600s); ", secs);

  // fitted exponents
  const struct {
    Method m;
    double lo, hi;
  } ranges[] = {{Method::NL, 1.7, 2.3},
                {Method::ENL, 0.8, 1.3},
                {Method::PolyNL, 0.8, 1.3},
                {Method::LatentGNN, 0.8, 1.3}};
  for (const auto& rr : ranges) {
    std::vector<BenchRecord> group;
    for (const BenchRecord& r : run.records)
      if (r.method == rr.m) group.push_back(r);
    try {
      const ScalingFit fit = fit_slope(group);
      const bool ok = fit.exponent >= rr.lo && fit.exponent <= rr.hi;
      pass = pass && ok;
      detail += strprintf("%s slope=%.2f%s ", method_name(rr.m), fit.exponent,
                          ok ? "" : "(!)");
    } catch (const std::exception& e) {
      pass = false;
      detail += strprintf("%s fit failed (%s) ", method_name(rr.m), e.what());
    }
  }

  // instrumented peaks equal the model: NL = N^2, PolyNL = N*C at C=64
  bool peaks_ok = true;
  for (const BenchRecord& r : run.records) {
    if (r.method == Method::NL) peaks_ok &= r.peak_elems == r.n * r.n;
    if (r.method == Method::PolyNL) peaks_ok &= r.peak_elems == r.n * r.c;
    peaks_ok &= r.peak_elems == peak_model(r.method, r.n, r.c, r.d);
  }
  pass = pass && peaks_ok;
  detail += strprintf("peaks=%s; ", peaks_ok ? "exact" : "MISMATCH");

  // separation at the largest N common to NL and PolyNL
  std::map<std::size_t, std::uint64_t> nl_times, poly_times;
  for (const BenchRecord& r : run.records) {
    if (r.method == Method::NL) nl_times[r.n] = r.median_ns;
    if (r.method == Method::PolyNL) poly_times[r.n] = r.median_ns;
  }
  std::size_t common = 0;
  for (const auto& [n, t] : nl_times)
    if (poly_times.count(n)) common = std::max(common, n);
  if (common) {
    const double ratio = static_cast<double>(nl_times[common]) /
                         static_cast<double>(poly_times[common]);
    const bool ok = ratio > 4.0;
    pass = pass && ok;
    detail += strprintf("NL/PolyNL ratio at N=%zu: %.1fx%s; ", common, ratio,
                        ok ? "" : "(!)");
  } else {
    pass = false;
    detail += "no common N for the separation check; ";
  }

  // monotonicity in N per method, one inversion allowed for timer noise
  std::map<int, std::vector<BenchRecord>> by_method;
  for (const BenchRecord& r : run.records)
    by_method[static_cast<int>(r.method)].push_back(r);
  std::size_t worst_inversions = 0;
  for (auto& [m, group] : by_method) {
    std::sort(group.begin(), group.end(),
              [](const BenchRecord& a, const BenchRecord& b) { return a.n < b.n; });
    std::size_t inv = 0;
    for (std::size_t i = 1; i < group.size(); ++i)
      if (group[i].median_ns < group[i - 1].median_ns) ++inv;
    worst_inversions = std::max(worst_inversions, inv);
  }
  pass = pass && worst_inversions <= 1;
  detail += strprintf("max inversions=%zu; skipped NL cells=%zu",
                      worst_inversions, run.skipped.size());

  return report(5, "complexity separation on the default C=64 sweep", pass,
                detail);
}

// ---- criterion 6: FLOP-model exactness -------------------------------------

bool criterion_flops() {
  BenchOptions opts;
  opts.trials = 1;
  opts.warmup = 0;
  const auto grid = make_grid(all_methods(), {256, 512, 1024},
                              {64, 256, 1024}, 64);
  bool pass = true;
  std::string detail;
  try {
    // run_bench itself asserts instrumented counters == models per cell
    BenchRun run = run_bench(grid, opts);
    std::size_t cells = 0;
    for (const BenchRecord& r : run.records) {
      pass = pass && r.flops == flop_model(r.method, r.n, r.c, r.d);
      ++cells;
    }
    detail = strprintf("%zu cells (N<=1024, all channel counts), "
                       "instrumented==model exactly",
                       cells);
  } catch (const std::exception& e) {
    pass = false;
    detail = e.what();
  }
  return report(6, "FLOP-model integer exactness on the reduced sweep", pass,
                detail);
}

// ---- criterion 7: determinism ----------------------------------------------

std::string run_capture(const std::string& cmd, int* exit_code) {
  std::string out;
  FILE* pipe = popen((cmd + " 2>&1").c_str(), "r");
  if (!pipe) {
    *exit_code = -1;
    return out;
  }
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof(buf), pipe)) > 0) out.append(buf, got);
  const int rc = pclose(pipe);
  *exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  return out;
}

bool criterion_determinism(const std::string& cli, const SweepState& state) {
  if (cli.empty())
    return report(7, "determinism", false, "no CLI path supplied");

  bool pass = true;
  std::string detail;
  for (const char* sub : {"verify --seed 42", "gradcheck --seed 42"}) {
    int rc1 = 0, rc2 = 0;
    const std::string a = run_capture(cli + " " + sub, &rc1);
    const std::string b = run_capture(cli + " " + sub, &rc2);
    const bool ok = rc1 == 0 && rc2 == 0 && !a.empty() && a == b;
    pass = pass && ok;
    detail += strprintf("%s: %s (%zu bytes); ", sub,
                        ok ? "byte-identical" : "DIFFERS", a.size());
  }

  // CSV round-trip on the measured sweep
  const std::string csv = emit_csv(state.records);
  const bool csv_ok = emit_csv(parse_csv(csv)) == csv && !state.records.empty();
  pass = pass && csv_ok;
  detail += strprintf("csv round-trip: %s (%zu records)",
                      csv_ok ? "lossless" : "LOSSY", state.records.size());
  return report(7, "determinism of verify/gradcheck and CSV round-trip", pass,
                detail);
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  SweepState sweep;
  bool all = true;
  all &= criterion_triangle();
  all &= criterion_reassociation();
  all &= criterion_gradcheck();
  all &= criterion_identities();
  all &= criterion_complexity(sweep);
  all &= criterion_flops();
  all &= criterion_determinism(cli, sweep);
  std::printf("acceptance: %s\n", all ? "PASS" : "FAIL");
  return all ? 0 : 1;
}
