#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace polynl {

struct SuiteResult {
  std::string name;
  std::size_t instances = 0;
  double tolerance = 0.0;
  double max_err = 0.0;
  bool pass = false;
  // worst instance, for replay
  std::uint64_t worst_seed = 0;
  std::size_t worst_n = 0;
  std::size_t worst_c = 0;
  std::string worst_detail;
};

struct VerifyOptions {
  std::uint64_t seed = 42;
  double tolerance_override = -1.0;  // < 0 keeps per-suite defaults
  std::size_t triangle_instances = 100;
  std::size_t reassoc_instances = 50;
  std::size_t homogeneity_instances = 50;  // per block
  std::size_t permutation_instances = 50;  // per block
  bool replay = false;          // run exactly one instance ...
  std::uint64_t replay_seed = 0;  // ... with this instance seed
};

// Equivalence of the three computation paths per block at N*C <= 8:
// fast forward, element-wise loop transcription, and the dense order-8
// interaction tensor fed to the brute-force polynomial evaluators.
SuiteResult run_triangle_suite(const VerifyOptions& opts);

// efficient_nl_forward == nl_forward on sizes up to N=256, C=32.
SuiteResult run_reassociation_suite(const VerifyOptions& opts);

// forward(s*X) == s^3 * forward(X) for every core forward.
SuiteResult run_homogeneity_suite(const VerifyOptions& opts);

// forward(P*X) == P * forward(X) for every core forward.
SuiteResult run_permutation_suite(const VerifyOptions& opts);

// Suites selected by filter ("" = all; otherwise one of oracle-triangle,
// reassociation, homogeneity, permutation).
std::vector<SuiteResult> run_verify_suites(const VerifyOptions& opts,
                                           const std::string& suite_filter);

// Deterministic report: one line per suite plus a verdict. Returns overall
// pass. Failure lines carry the failing instance seed and a replay command.
bool print_verify_report(std::ostream& os, const std::vector<SuiteResult>& results);

}  // namespace polynl
