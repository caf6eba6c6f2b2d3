// Command-line front end: verification suites, gradient checks, interaction
// tensor dumps and the complexity benchmark.
//
// Exit codes: 0 success, 1 check failure, 2 usage/config error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "polynl/bench.hpp"
#include "polynl/blocks.hpp"
#include "polynl/errors.hpp"
#include "polynl/gradcheck.hpp"
#include "polynl/io.hpp"
#include "polynl/oracle.hpp"
#include "polynl/rng.hpp"
#include "polynl/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

std::vector<std::pair<std::size_t, std::size_t>> parse_sizes(
    const std::string& spec) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::string cur;
  auto flush = [&] {
    if (cur.empty()) return;
    const auto x = cur.find('x');
    if (x == std::string::npos)
      throw std::invalid_argument("bad size (want NxC): " + cur);
    out.emplace_back(std::stoull(cur.substr(0, x)),
                     std::stoull(cur.substr(x + 1)));
    cur.clear();
  };
  for (char ch : spec) {
    if (ch == ',')
      flush();
    else
      cur.push_back(ch);
  }
  flush();
  if (out.empty()) throw std::invalid_argument("empty size list");
  return out;
}

int cmd_verify(std::uint64_t seed, double tolerance, std::int64_t instances,
               const std::string& suite, std::int64_t replay) {
  polynl::VerifyOptions opts;
  opts.seed = seed;
  opts.tolerance_override = tolerance;
  if (instances >= 0) {
    opts.triangle_instances = static_cast<std::size_t>(instances);
    opts.reassoc_instances = static_cast<std::size_t>(instances);
    opts.homogeneity_instances = static_cast<std::size_t>(instances);
    opts.permutation_instances = static_cast<std::size_t>(instances);
  }
  if (replay >= 0) {
    if (suite.empty())
      throw std::invalid_argument("--replay requires --suite");
    opts.replay = true;
    opts.replay_seed = static_cast<std::uint64_t>(replay);
  }
  std::cout << polynl::strprintf("verify seed=%llu\n",
                                 static_cast<unsigned long long>(seed));
  const auto results = polynl::run_verify_suites(opts, suite);
  return polynl::print_verify_report(std::cout, results) ? kExitOk
                                                         : kExitCheckFailed;
}

int cmd_gradcheck(std::uint64_t seed, const std::string& sizes_spec,
                  std::size_t seeds_per_size, double step, double tolerance,
                  double abs_floor, double perturb) {
  const auto sizes = parse_sizes(sizes_spec);
  polynl::CheckOptions opt;
  opt.step = step;
  opt.tolerance = tolerance;
  opt.abs_floor = abs_floor;
  opt.perturb = perturb;

  std::cout << polynl::strprintf(
      "gradcheck seed=%llu step=%.1e tolerance=%.1e abs_floor=%.1e "
      "seeds_per_size=%zu\n",
      static_cast<unsigned long long>(seed), opt.step, opt.tolerance,
      opt.abs_floor, seeds_per_size);

  bool all_pass = true;
  for (const char* block : {"nl", "polynl"}) {
    for (const auto& [n, c] : sizes) {
      // worst case over seeds, per parameter
      std::map<std::string, polynl::ParamCheck> agg;
      for (std::size_t s = 0; s < seeds_per_size; ++s) {
        const std::uint64_t inst = polynl::derive_seed(seed, s);
        polynl::GradCheckReport rep =
            std::string(block) == "nl"
                ? polynl::check_nl_gradients(n, c, inst, opt)
                : polynl::check_polynl_gradients(n, c, inst, opt);
        for (const polynl::ParamCheck& pc : rep.params) {
          auto& slot = agg.emplace(pc.name, pc).first->second;
          slot.max_rel = std::max(slot.max_rel, pc.max_rel);
          slot.max_abs = std::max(slot.max_abs, pc.max_abs);
          slot.pass = slot.pass && pc.pass;
          if (!pc.pass)
            std::cout << polynl::strprintf(
                "  FAIL block=%s size=%zux%zu seed=%llu param=%s "
                "max_rel=%.6e\n",
                block, n, c, static_cast<unsigned long long>(inst),
                pc.name.c_str(), pc.max_rel);
        }
      }
      for (const auto& [name, pc] : agg) {
        std::cout << polynl::strprintf(
            "block=%-6s size=%zux%zu param=%-5s max_rel=%.6e max_abs=%.6e %s\n",
            block, n, c, name.c_str(), pc.max_rel, pc.max_abs,
            pc.pass ? "pass" : "FAIL");
        all_pass = all_pass && pc.pass;
      }
    }
  }
  std::cout << (all_pass ? "gradcheck: PASS\n" : "gradcheck: FAIL\n");
  return all_pass ? kExitOk : kExitCheckFailed;
}

int cmd_bench(std::uint64_t seed, const std::string& grid_name,
              std::vector<std::size_t> n_list, std::vector<std::size_t> c_list,
              std::size_t latent_d, const std::vector<std::string>& method_names,
              std::size_t trials, std::size_t warmup, std::size_t budget_mb,
              const std::string& dtype, int threads, const std::string& out_prefix) {
  std::vector<polynl::Method> methods;
  if (method_names.empty()) {
    methods = polynl::all_methods();
  } else {
    for (const std::string& name : method_names)
      methods.push_back(polynl::parse_method(name));
  }

  std::vector<polynl::GridCell> grid;
  if (!n_list.empty() || !c_list.empty()) {
    if (n_list.empty() || c_list.empty())
      throw std::invalid_argument("--n-list and --c-list must be given together");
    grid = polynl::make_grid(methods, n_list, c_list, latent_d);
  } else if (grid_name == "tiny") {
    grid = polynl::tiny_grid(methods);
  } else if (grid_name == "default") {
    grid = polynl::default_grid(methods);
  } else {
    throw std::invalid_argument("unknown grid: " + grid_name);
  }

  polynl::BenchOptions opts;
  opts.trials = trials;
  opts.warmup = warmup;
  opts.byte_budget = static_cast<std::uint64_t>(budget_mb) << 20;
  opts.seed = seed;
  opts.threads = threads;
  if (dtype == "f32")
    opts.dtype = polynl::Dtype::f32;
  else if (dtype == "f64")
    opts.dtype = polynl::Dtype::f64;
  else
    throw std::invalid_argument("unknown dtype: " + dtype);

  std::cout << polynl::strprintf(
      "bench grid=%s dtype=%s trials=%zu warmup=%zu threads=%d "
      "byte_budget_mb=%zu seed=%llu\n",
      grid_name.c_str(), dtype.c_str(), trials, warmup, threads, budget_mb,
      static_cast<unsigned long long>(seed));

  const polynl::BenchRun run = polynl::run_bench(grid, opts);
  for (const polynl::SkippedCell& s : run.skipped)
    std::cout << polynl::strprintf("skip method=%s n=%zu c=%zu: %s\n",
                                   polynl::method_name(s.cell.method),
                                   s.cell.n, s.cell.c, s.reason.c_str());

  const auto fits = polynl::fit_all(run.records);
  const std::string csv = polynl::emit_csv(run.records);
  const std::string svg = polynl::emit_svg(run.records, fits);
  {
    std::ofstream f(out_prefix + ".csv");
    if (!f) throw std::runtime_error("cannot write " + out_prefix + ".csv");
    f << csv;
  }
  {
    std::ofstream f(out_prefix + ".svg");
    if (!f) throw std::runtime_error("cannot write " + out_prefix + ".svg");
    f << svg;
  }
  std::cout << polynl::strprintf("wrote %s.csv (%zu records, %zu skipped)\n",
                                 out_prefix.c_str(), run.records.size(),
                                 run.skipped.size());
  std::cout << polynl::strprintf("wrote %s.svg\n", out_prefix.c_str());
  for (const polynl::ScalingFit& f : fits)
    std::cout << polynl::strprintf(
        "fit method=%-9s c=%-5zu points=%zu exponent=%.3f r2=%.4f\n",
        polynl::method_name(f.method), f.c, f.points, f.exponent, f.r2);
  return kExitOk;
}

int cmd_oracle(std::uint64_t seed, const std::string& block, std::size_t n,
               std::size_t c, std::size_t cap, bool unit_weights,
               const std::string& out_path) {
  polynl::Rng rng(seed);
  auto make_weights = [&] {
    if (unit_weights) {
      polynl::Matrix<double> w(c, c);
      for (std::size_t i = 0; i < w.size(); ++i) w.data()[i] = 1.0;
      return w;
    }
    return polynl::random_weights<double>(rng, c);
  };

  polynl::InteractionTensor3 w3(1, 1);
  if (block == "nl") {
    const auto wf = make_weights();
    const auto wg = make_weights();
    w3 = polynl::build_w3_nl(wf, wg, n, cap);
  } else if (block == "polynl") {
    const auto w1 = make_weights();
    const auto w2 = make_weights();
    const auto w3m = make_weights();
    w3 = polynl::build_w3_polynl(w1, w2, w3m, n, cap);
  } else {
    throw std::invalid_argument("unknown block: " + block);
  }

  std::ofstream f(out_path);
  if (!f) throw std::runtime_error("cannot write " + out_path);
  polynl::dump_w3(f, w3);
  std::cout << polynl::strprintf(
      "wrote %s block=%s n=%zu c=%zu entries=%zu nonzeros=%zu\n",
      out_path.c_str(), block.c_str(), n, c, w3.data.size(),
      w3.nonzero_count());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Non-local attention blocks (NL, Poly-NL, Efficient-NL, Latent-GNN): "
      "equivalence verification against brute-force polynomial oracles, "
      "gradient checks, interaction-tensor dumps and complexity benchmarks"};
  app.require_subcommand(1);

  // verify
  auto* verify = app.add_subcommand(
      "verify", "run the oracle-triangle, reassociation, homogeneity and "
                "permutation suites");
  std::uint64_t v_seed = 42;
  double v_tol = -1.0;
  std::int64_t v_instances = -1;
  std::int64_t v_replay = -1;
  std::string v_suite;
  verify->add_option("--seed", v_seed, "base seed (default 42)");
  verify->add_option("--tolerance", v_tol,
                     "override every suite tolerance (default: per suite)");
  verify->add_option("--instances", v_instances,
                     "override instance count for every suite");
  verify->add_option("--suite", v_suite,
                     "run one suite: oracle-triangle, reassociation, "
                     "homogeneity or permutation");
  verify->add_option("--replay", v_replay,
                     "replay a single instance seed (requires --suite)");

  // gradcheck
  auto* gradcheck = app.add_subcommand(
      "gradcheck", "analytic backward vs central finite differences");
  std::uint64_t g_seed = 42;
  std::string g_sizes = "5x3,8x4";
  std::size_t g_seeds = 20;
  double g_step = 1e-5, g_tol = 1e-6, g_floor = 1e-8, g_perturb = 0.0;
  gradcheck->add_option("--seed", g_seed, "base seed (default 42)");
  gradcheck->add_option("--sizes", g_sizes, "comma list of NxC sizes");
  gradcheck->add_option("--seeds-per-size", g_seeds, "seeds per size");
  gradcheck->add_option("--step", g_step, "central-difference step");
  gradcheck->add_option("--tolerance", g_tol, "max relative error");
  gradcheck->add_option("--abs-floor", g_floor,
                        "absolute floor for near-zero entries");
  gradcheck->add_option("--perturb", g_perturb, "")->group("");  // test hook

  // bench
  auto* bench = app.add_subcommand(
      "bench", "runtime/FLOP/peak-memory sweep with slope fits (CSV + SVG)");
  std::uint64_t b_seed = 42;
  std::string b_grid = "default", b_dtype = "f32", b_out = "bench";
  std::vector<std::size_t> b_nlist, b_clist;
  std::vector<std::string> b_methods;
  std::size_t b_d = 64, b_trials = 20, b_warmup = 2, b_budget = 128;
  int b_threads = 1;
  bench->add_option("--seed", b_seed, "base seed (default 42)");
  bench->add_option("--grid", b_grid, "default or tiny");
  bench->add_option("--n-list", b_nlist, "explicit N values")->delimiter(',');
  bench->add_option("--c-list", b_clist, "explicit C values")->delimiter(',');
  bench->add_option("--d", b_d, "latent dimension for LatentGNN");
  bench->add_option("--methods", b_methods,
                    "subset of nl,enl,polynl,latentgnn,conv1x1")
      ->delimiter(',');
  bench->add_option("--trials", b_trials, "timed runs per cell (default 20)");
  bench->add_option("--warmup", b_warmup, "discarded runs per cell");
  bench->add_option("--byte-budget-mb", b_budget,
                    "skip NL cells whose N*N buffer exceeds this");
  bench->add_option("--dtype", b_dtype, "f32 or f64");
  bench->add_option("--threads", b_threads,
                    "kernel threads; >1 uses the parallel lane");
  bench->add_option("--out", b_out, "output file prefix");

  // oracle
  auto* oracle = app.add_subcommand(
      "oracle", "build W3 for a block and dump it as flat text");
  std::uint64_t o_seed = 42;
  std::string o_block = "nl", o_out = "w3.txt";
  std::size_t o_n = 2, o_c = 2, o_cap = polynl::InteractionTensor3::kDefaultCap;
  bool o_unit = false;
  oracle->add_option("--seed", o_seed, "weight seed (default 42)");
  oracle->add_option("--block", o_block, "nl or polynl");
  oracle->add_option("--n", o_n, "spatial positions");
  oracle->add_option("--c", o_c, "channels");
  oracle->add_option("--cap", o_cap, "max N*C (default 8)");
  oracle->add_flag("--unit-weights", o_unit, "all-ones weights");
  oracle->add_option("--out", o_out, "dump path");

  // key=value lines, keys prefixed by the subcommand (e.g. bench.trials=5);
  // explicit flags override config values
  app.set_config("--config", "", "key=value config file; flags override");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (verify->parsed())
      return cmd_verify(v_seed, v_tol, v_instances, v_suite, v_replay);
    if (gradcheck->parsed())
      return cmd_gradcheck(g_seed, g_sizes, g_seeds, g_step, g_tol, g_floor,
                           g_perturb);
    if (bench->parsed())
      return cmd_bench(b_seed, b_grid, b_nlist, b_clist, b_d, b_methods,
                       b_trials, b_warmup, b_budget, b_dtype, b_threads, b_out);
    if (oracle->parsed())
      return cmd_oracle(o_seed, o_block, o_n, o_c, o_cap, o_unit, o_out);
  } catch (const polynl::CapacityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const polynl::ShapeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCheckFailed;
  }
  return kExitUsage;
}
