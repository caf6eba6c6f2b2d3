#include "polynl/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <utility>

#include "polynl/blocks.hpp"
#include "polynl/io.hpp"
#include "polynl/oracle.hpp"
#include "polynl/rng.hpp"

namespace polynl {

namespace {

// Distinct derivation streams per suite so instance seeds never collide.
constexpr std::uint64_t kTriangleSalt = 0x0100000000ULL;
constexpr std::uint64_t kReassocSalt = 0x0200000000ULL;
constexpr std::uint64_t kHomogSalt = 0x0300000000ULL;
constexpr std::uint64_t kPermSalt = 0x0400000000ULL;

struct InstanceOutcome {
  double err = 0.0;
  std::size_t n = 0;
  std::size_t c = 0;
  std::string detail;
};

// Runs `count` seeded instances (or the single replay instance) and keeps
// the worst outcome. Instances are independent pure computations; the loop
// fans out across threads and reduces deterministically afterwards.
template <typename F>
SuiteResult drive_suite(const std::string& name, std::size_t count,
                        double tolerance, std::uint64_t base_seed,
                        std::uint64_t salt, const VerifyOptions& opts, F&& f) {
  SuiteResult res;
  res.name = name;
  res.tolerance = opts.tolerance_override >= 0.0 ? opts.tolerance_override
                                                 : tolerance;
  const std::size_t total = opts.replay ? 1 : count;
  res.instances = total;
  if (total == 0) {
    res.pass = true;
    return res;
  }
  std::vector<InstanceOutcome> outcomes(total);
  std::vector<std::uint64_t> seeds(total);
  for (std::size_t i = 0; i < total; ++i)
    seeds[i] = opts.replay ? opts.replay_seed
                           : derive_seed(base_seed, salt + i);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(total); ++i) {
    try {
      outcomes[i] = f(seeds[i]);
    } catch (const std::exception& e) {
      outcomes[i].err = std::numeric_limits<double>::infinity();
      outcomes[i].detail = e.what();
    }
  }
  std::size_t worst = 0;
  for (std::size_t i = 0; i < total; ++i)
    if (outcomes[i].err > outcomes[worst].err) worst = i;
  res.max_err = outcomes[worst].err;
  res.worst_seed = seeds[worst];
  res.worst_n = outcomes[worst].n;
  res.worst_c = outcomes[worst].c;
  res.worst_detail = outcomes[worst].detail;
  res.pass = res.max_err <= res.tolerance;
  return res;
}

const std::vector<std::pair<std::size_t, std::size_t>>& small_dims() {
  static const std::vector<std::pair<std::size_t, std::size_t>> dims = [] {
    std::vector<std::pair<std::size_t, std::size_t>> v;
    for (std::size_t n = 1; n <= 8; ++n)
      for (std::size_t c = 1; c <= 8; ++c)
        if (n * c <= InteractionTensor3::kDefaultCap) v.emplace_back(n, c);
    return v;
  }();
  return dims;
}

InstanceOutcome triangle_instance(std::uint64_t seed) {
  Rng rng(seed);
  const auto [n, c] = small_dims()[rng.index(small_dims().size())];
  InstanceOutcome out;
  out.n = n;
  out.c = c;
  Matrix<double> x = random_feature_map<double>(rng, n, c);

  // non-local triangle
  {
    Matrix<double> wf = random_weights<double>(rng, c);
    Matrix<double> wg = random_weights<double>(rng, c);
    Matrix<double> y_fast = nl_forward(NlParams<double>(wf, wg), x);
    Matrix<double> y_loops = nl_elementwise(wf, wg, x);
    InteractionTensor3 w3 = build_w3_nl(wf, wg, n);
    Matrix<double> y_poly = poly3_elementwise(w3, x);
    Matrix<double> y_contract = poly3_forward(w3, x);
    double err = rel_fro_diff(y_loops, y_fast);
    err = std::max(err, rel_fro_diff(y_poly, y_fast));
    err = std::max(err, rel_fro_diff(y_poly, y_loops));
    err = std::max(err, rel_fro_diff(y_contract, y_poly));
    if (err > out.err) {
      out.err = err;
      out.detail = "block=nl";
    }
  }
  // poly-nl triangle
  {
    Matrix<double> w1 = random_weights<double>(rng, c);
    Matrix<double> w2 = random_weights<double>(rng, c);
    Matrix<double> w3m = random_weights<double>(rng, c);
    PolyNlParams<double> p(w1, w2, w3m, 1.0, 1.0);
    Matrix<double> y_fast = polynl_core_forward(p, x);
    Matrix<double> y_loops = polynl_elementwise(w1, w2, w3m, x);
    InteractionTensor3 w3 = build_w3_polynl(w1, w2, w3m, n);
    Matrix<double> y_poly = poly3_elementwise(w3, x);
    Matrix<double> y_contract = poly3_forward(w3, x);
    double err = rel_fro_diff(y_loops, y_fast);
    err = std::max(err, rel_fro_diff(y_poly, y_fast));
    err = std::max(err, rel_fro_diff(y_poly, y_loops));
    err = std::max(err, rel_fro_diff(y_contract, y_poly));
    if (err > out.err) {
      out.err = err;
      out.detail = "block=polynl";
    }
  }
  return out;
}

InstanceOutcome reassociation_instance(std::uint64_t seed) {
  Rng rng(seed);
  InstanceOutcome out;
  out.n = 1 + rng.index(256);
  out.c = 1 + rng.index(32);
  Matrix<double> x = random_feature_map<double>(rng, out.n, out.c);
  NlParams<double> p = init_nl_params<double>(rng, out.c);
  out.err = rel_fro_diff(efficient_nl_forward(p, x), nl_forward(p, x));
  out.detail = "block=nl";
  return out;
}

enum class Block { nl, enl, polynl, latentgnn };

const char* block_name(Block b) {
  switch (b) {
    case Block::nl: return "nl";
    case Block::enl: return "enl";
    case Block::polynl: return "polynl";
    case Block::latentgnn: return "latentgnn";
  }
  return "?";
}

// Draws one block instance and applies `fwd` to both an original and a
// transformed input, comparing against the transformed output.
template <typename MakeRef>
InstanceOutcome block_identity_instance(std::uint64_t seed, Block block,
                                        MakeRef&& make_ref) {
  Rng rng(seed);
  InstanceOutcome out;
  out.n = 1 + rng.index(64);
  out.c = 1 + rng.index(16);
  const std::size_t d = 1 + rng.index(8);
  out.detail = strprintf("block=%s", block_name(block));
  Matrix<double> x = random_feature_map<double>(rng, out.n, out.c);

  auto fwd = [&](const Matrix<double>& input) -> Matrix<double> {
    switch (block) {
      case Block::nl: {
        Rng r2(seed + 1);
        return nl_forward(init_nl_params<double>(r2, out.c), input);
      }
      case Block::enl: {
        Rng r2(seed + 1);
        return efficient_nl_forward(init_nl_params<double>(r2, out.c), input);
      }
      case Block::polynl: {
        Rng r2(seed + 1);
        PolyNlParams<double> p = init_polynl_params<double>(r2, out.c);
        return polynl_core_forward(p, input);
      }
      case Block::latentgnn: {
        Rng r2(seed + 1);
        return latentgnn_forward(init_latentgnn_params<double>(r2, out.c, d),
                                 input);
      }
    }
    throw std::logic_error("unreachable");
  };
  out.err = make_ref(rng, x, fwd);
  return out;
}

}  // namespace

SuiteResult run_triangle_suite(const VerifyOptions& opts) {
  return drive_suite("oracle-triangle", opts.triangle_instances, 1e-10,
                     opts.seed, kTriangleSalt, opts, triangle_instance);
}

SuiteResult run_reassociation_suite(const VerifyOptions& opts) {
  return drive_suite("reassociation", opts.reassoc_instances, 1e-10, opts.seed,
                     kReassocSalt, opts, reassociation_instance);
}

// Runs one identity check per block (all four core forwards) and merges the
// per-block results into a single suite line.
template <typename Check>
static SuiteResult run_per_block_suite(const char* name, std::size_t per_block,
                                       std::uint64_t salt,
                                       const VerifyOptions& opts,
                                       Check&& check) {
  const Block blocks[] = {Block::nl, Block::enl, Block::polynl,
                          Block::latentgnn};
  SuiteResult res;
  res.name = name;
  for (std::size_t bi = 0; bi < 4; ++bi) {
    const Block block = blocks[bi];
    SuiteResult sub = drive_suite(
        name, per_block, 1e-12, opts.seed, salt + bi * 0x01000000ULL, opts,
        [&](std::uint64_t s) {
          return block_identity_instance(s, block, check);
        });
    if (bi == 0 || sub.max_err > res.max_err) {
      sub.instances = res.instances;
      res = sub;
    }
    res.instances += opts.replay ? 1 : per_block;
  }
  res.pass = res.max_err <= res.tolerance;
  return res;
}

SuiteResult run_homogeneity_suite(const VerifyOptions& opts) {
  return run_per_block_suite(
      "homogeneity", opts.homogeneity_instances, kHomogSalt, opts,
      [](Rng& rng, const Matrix<double>& x, auto&& fwd) {
        const double scale = rng.uniform(0.5, 2.0);
        Matrix<double> xs(x.rows(), x.cols());
        for (std::size_t i = 0; i < x.size(); ++i)
          xs.data()[i] = scale * x.data()[i];
        Matrix<double> lhs = fwd(xs);
        Matrix<double> y = fwd(x);
        const double s3 = scale * scale * scale;
        for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] *= s3;
        return rel_fro_diff(lhs, y);
      });
}

SuiteResult run_permutation_suite(const VerifyOptions& opts) {
  return run_per_block_suite(
      "permutation", opts.permutation_instances, kPermSalt, opts,
      [](Rng& rng, const Matrix<double>& x, auto&& fwd) {
        std::vector<std::size_t> perm(x.rows());
        for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
        for (std::size_t i = perm.size(); i > 1; --i)
          std::swap(perm[i - 1], perm[rng.index(i)]);
        Matrix<double> lhs = fwd(permute_rows(x, perm));
        Matrix<double> rhs = permute_rows(fwd(x), perm);
        return rel_fro_diff(lhs, rhs);
      });
}

std::vector<SuiteResult> run_verify_suites(const VerifyOptions& opts,
                                           const std::string& suite_filter) {
  std::vector<SuiteResult> out;
  auto want = [&](const char* name) {
    return suite_filter.empty() || suite_filter == name;
  };
  if (want("oracle-triangle")) out.push_back(run_triangle_suite(opts));
  if (want("reassociation")) out.push_back(run_reassociation_suite(opts));
  if (want("homogeneity")) out.push_back(run_homogeneity_suite(opts));
  if (want("permutation")) out.push_back(run_permutation_suite(opts));
  if (out.empty())
    throw std::invalid_argument("unknown suite: " + suite_filter);
  return out;
}

bool print_verify_report(std::ostream& os,
                         const std::vector<SuiteResult>& results) {
  bool all = true;
  std::size_t passed = 0;
  for (const SuiteResult& r : results) {
    os << strprintf("suite=%-16s instances=%-4zu tolerance=%.1e max_err=%.6e %s\n",
                    r.name.c_str(), r.instances, r.tolerance, r.max_err,
                    r.pass ? "pass" : "FAIL");
    if (r.pass) {
      ++passed;
    } else {
      all = false;
      os << strprintf("  worst instance: seed=%llu n=%zu c=%zu %s err=%.6e\n",
                      static_cast<unsigned long long>(r.worst_seed), r.worst_n,
                      r.worst_c, r.worst_detail.c_str(), r.max_err);
      os << strprintf("  replay: polynl verify --suite %s --replay %llu\n",
                      r.name.c_str(),
                      static_cast<unsigned long long>(r.worst_seed));
    }
  }
  os << strprintf("verify: %s (%zu/%zu suites)\n", all ? "PASS" : "FAIL",
                  passed, results.size());
  return all;
}

}  // namespace polynl
