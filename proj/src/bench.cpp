#include "polynl/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <new>
#include <sstream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "polynl/blocks.hpp"
#include "polynl/instrument.hpp"
#include "polynl/io.hpp"
#include "polynl/rng.hpp"

namespace polynl {

const char* method_name(Method m) {
  switch (m) {
    case Method::NL: return "NL";
    case Method::ENL: return "ENL";
    case Method::PolyNL: return "PolyNL";
    case Method::LatentGNN: return "LatentGNN";
    case Method::Conv1x1: return "Conv1x1";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  std::string lower;
  for (char ch : name) lower.push_back(static_cast<char>(std::tolower(ch)));
  if (lower == "nl") return Method::NL;
  if (lower == "enl" || lower == "efficient-nl" || lower == "efficientnl")
    return Method::ENL;
  if (lower == "polynl" || lower == "poly-nl") return Method::PolyNL;
  if (lower == "latentgnn" || lower == "latent-gnn") return Method::LatentGNN;
  if (lower == "conv1x1" || lower == "conv") return Method::Conv1x1;
  throw std::invalid_argument("unknown method: " + name);
}

std::vector<Method> all_methods() {
  return {Method::NL, Method::ENL, Method::PolyNL, Method::LatentGNN,
          Method::Conv1x1};
}

std::uint64_t flop_model(Method m, std::size_t n, std::size_t c,
                         std::size_t d) {
  const std::uint64_t un = n, uc = c, ud = d;
  switch (m) {
    case Method::NL:
      // X*Wf, (X*Wf)*X^T, S*X, T*Wg
      return 4 * un * un * uc + 4 * un * uc * uc;
    case Method::ENL:
      // X*Wg, X^T*B, Wf*P, X*Q
      return 6 * un * uc * uc + 2 * uc * uc * uc;
    case Method::PolyNL:
      // three C x C matmuls, two Hadamards, pooling adds + expansion multiply
      return 6 * un * uc * uc + 4 * un * uc;
    case Method::LatentGNN:
      // X*w_enc, E^T*X, g*L, X*w_dec, D*L'
      return 8 * un * ud * uc + 2 * ud * ud * uc;
    case Method::Conv1x1:
      return 2 * un * uc * uc;
  }
  return 0;
}

std::uint64_t peak_model(Method m, std::size_t n, std::size_t c,
                         std::size_t d) {
  const std::uint64_t un = n, uc = c, ud = d;
  switch (m) {
    case Method::NL:
      // the N x N similarity matrix; the N x C buffers win only when N < C
      return std::max(un * un, un * uc);
    case Method::ENL:
      return std::max(un * uc, uc * uc);
    case Method::PolyNL:
      return un * uc;
    case Method::LatentGNN:
      return std::max({un * uc, un * ud, ud * uc});
    case Method::Conv1x1:
      return un * uc;
  }
  return 0;
}

namespace {

// keeps the timed forward result observable so the call is not elided
inline void escape(const void* p) { asm volatile("" : : "g"(p) : "memory"); }

std::uint64_t median_of(std::vector<std::uint64_t> v) {
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size();
  std::uint64_t med =
      (k % 2 == 1) ? v[k / 2] : (v[k / 2 - 1] + v[k / 2]) / 2;
  return med == 0 ? 1 : med;
}

template <typename T>
void run_cell(const GridCell& cell, std::size_t cell_index,
              const BenchOptions& opts, Exec ex,
              std::vector<BenchRecord>& records) {
  Rng rng(derive_seed(opts.seed, cell_index));
  const std::size_t n = cell.n, c = cell.c;
  const std::size_t d = cell.method == Method::LatentGNN ? cell.d : 0;
  Matrix<T> x = random_feature_map<T>(rng, n, c);

  NlParams<T> nlp = init_nl_params<T>(rng, c);
  PolyNlParams<T> pnp = init_polynl_params<T>(rng, c);
  LatentGnnParams<T> lgp =
      init_latentgnn_params<T>(rng, c, std::max<std::size_t>(d, 1));
  Matrix<T> conv_w = random_weights<T>(rng, c);

  auto call = [&]() -> Matrix<T> {
    switch (cell.method) {
      case Method::NL: return nl_forward(nlp, x, ex);
      case Method::ENL: return efficient_nl_forward(nlp, x, ex);
      case Method::PolyNL: return polynl_core_forward(pnp, x, ex);
      case Method::LatentGNN: return latentgnn_forward(lgp, x, ex);
      case Method::Conv1x1: return conv1x1_forward(conv_w, x, ex);
    }
    throw std::logic_error("unreachable");
  };

  const std::uint64_t flops = flop_model(cell.method, n, c, d);
  const std::uint64_t peak = peak_model(cell.method, n, c, d);
  {
    instrument::Scope scope;
    Matrix<T> y = call();
    escape(y.data());
    if (scope.counters().flops != flops ||
        scope.counters().peak_elems != peak)
      throw std::logic_error(strprintf(
          "instrumented counters diverge from model for %s n=%zu c=%zu d=%zu: "
          "flops %llu vs %llu, peak %llu vs %llu",
          method_name(cell.method), n, c, d,
          static_cast<unsigned long long>(scope.counters().flops),
          static_cast<unsigned long long>(flops),
          static_cast<unsigned long long>(scope.counters().peak_elems),
          static_cast<unsigned long long>(peak)));
  }

  for (std::size_t i = 0; i < opts.warmup; ++i) {
    Matrix<T> y = call();
    escape(y.data());
  }
  std::vector<std::uint64_t> times;
  times.reserve(opts.trials);
  for (std::size_t i = 0; i < opts.trials; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Matrix<T> y = call();
    escape(y.data());
    const auto t1 = std::chrono::steady_clock::now();
    times.push_back(static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count()));
  }

  records.push_back(BenchRecord{cell.method, n, c, d, opts.trials,
                                median_of(std::move(times)), flops, peak});
}

template <typename T>
BenchRun run_bench_t(const std::vector<GridCell>& grid,
                     const BenchOptions& opts) {
  if (opts.trials < 1) throw std::invalid_argument("run_bench: trials must be >= 1");
  const Exec ex = opts.threads > 1 ? Exec::parallel : Exec::serial;
#ifdef _OPENMP
  if (opts.threads > 0) omp_set_num_threads(opts.threads);
#endif
  BenchRun out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const GridCell& cell = grid[i];
    if (cell.n < 1 || cell.c < 1)
      throw std::invalid_argument("run_bench: n and c must be >= 1");
    if (cell.method == Method::NL) {
      const std::uint64_t bytes =
          static_cast<std::uint64_t>(cell.n) * cell.n * sizeof(T);
      if (bytes > opts.byte_budget) {
        out.skipped.push_back(
            {cell, strprintf("similarity matrix needs %llu bytes, budget %llu",
                             static_cast<unsigned long long>(bytes),
                             static_cast<unsigned long long>(opts.byte_budget))});
        continue;
      }
    }
    try {
      run_cell<T>(cell, i, opts, ex, out.records);
    } catch (const std::bad_alloc&) {
      out.skipped.push_back({cell, "allocation failure"});
    }
  }
  return out;
}

}  // namespace

BenchRun run_bench(const std::vector<GridCell>& grid, const BenchOptions& opts) {
  return opts.dtype == Dtype::f32 ? run_bench_t<float>(grid, opts)
                                  : run_bench_t<double>(grid, opts);
}

ScalingFit fit_slope(const std::vector<BenchRecord>& records) {
  if (records.empty()) throw std::invalid_argument("fit_slope: no records");
  const Method m = records.front().method;
  const std::size_t c = records.front().c;
  std::vector<double> xs, ys;
  for (const BenchRecord& r : records) {
    if (r.method != m || r.c != c)
      throw std::invalid_argument("fit_slope: records mix methods or channels");
    if (r.median_ns == 0)
      throw std::invalid_argument("fit_slope: zero median time");
    xs.push_back(std::log(static_cast<double>(r.n)));
    ys.push_back(std::log(static_cast<double>(r.median_ns)));
  }
  std::vector<double> distinct = xs;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 4)
    throw std::invalid_argument("fit_slope: need >= 4 distinct grid points");

  const std::size_t k = xs.size();
  double xm = 0, ym = 0;
  for (std::size_t i = 0; i < k; ++i) {
    xm += xs[i];
    ym += ys[i];
  }
  xm /= static_cast<double>(k);
  ym /= static_cast<double>(k);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < k; ++i) {
    sxx += (xs[i] - xm) * (xs[i] - xm);
    sxy += (xs[i] - xm) * (ys[i] - ym);
    syy += (ys[i] - ym) * (ys[i] - ym);
  }
  const double slope = sxy / sxx;
  double r2 = 1.0;
  if (syy > 0.0) {
    double ss_res = 0;
    const double intercept = ym - slope * xm;
    for (std::size_t i = 0; i < k; ++i) {
      const double e = ys[i] - (intercept + slope * xs[i]);
      ss_res += e * e;
    }
    r2 = 1.0 - ss_res / syy;
  }
  r2 = std::min(1.0, std::max(0.0, r2));
  return ScalingFit{m, c, slope, r2, distinct.size()};
}

std::vector<ScalingFit> fit_all(const std::vector<BenchRecord>& records) {
  std::map<std::pair<int, std::size_t>, std::vector<BenchRecord>> groups;
  for (const BenchRecord& r : records)
    groups[{static_cast<int>(r.method), r.c}].push_back(r);
  std::vector<ScalingFit> fits;
  for (const auto& [key, group] : groups) {
    std::vector<std::size_t> ns;
    for (const BenchRecord& r : group) ns.push_back(r.n);
    std::sort(ns.begin(), ns.end());
    ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
    if (ns.size() >= 4) fits.push_back(fit_slope(group));
  }
  return fits;
}

std::vector<GridCell> make_grid(const std::vector<Method>& methods,
                                const std::vector<std::size_t>& ns,
                                const std::vector<std::size_t>& cs,
                                std::size_t latent_d) {
  std::vector<GridCell> grid;
  for (Method m : methods)
    for (std::size_t c : cs)
      for (std::size_t n : ns)
        grid.push_back(
            {m, n, c, m == Method::LatentGNN ? latent_d : std::size_t(0)});
  return grid;
}

std::vector<GridCell> default_grid(const std::vector<Method>& methods) {
  return make_grid(methods, {256, 512, 1024, 2048, 4096, 8192, 16384},
                   {64, 256, 1024}, 64);
}

std::vector<GridCell> tiny_grid(const std::vector<Method>& methods) {
  return make_grid(methods, {64, 128, 256, 512}, {16}, 8);
}

std::string emit_csv(const std::vector<BenchRecord>& records) {
  std::string out = "method,n,c,d,trials,median_ns,flops,peak_elems\n";
  for (const BenchRecord& r : records)
    out += strprintf("%s,%zu,%zu,%zu,%zu,%llu,%llu,%llu\n",
                     method_name(r.method), r.n, r.c, r.d, r.trials,
                     static_cast<unsigned long long>(r.median_ns),
                     static_cast<unsigned long long>(r.flops),
                     static_cast<unsigned long long>(r.peak_elems));
  return out;
}

std::vector<BenchRecord> parse_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) ||
      line != "method,n,c,d,trials,median_ns,flops,peak_elems")
    throw ShapeError("parse_csv: bad header");
  std::vector<BenchRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
      if (ch == ',') {
        fields.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(ch);
      }
    }
    fields.push_back(cur);
    if (fields.size() != 8) throw ShapeError("parse_csv: bad row: " + line);
    BenchRecord r;
    try {
      r.method = parse_method(fields[0]);
      r.n = std::stoull(fields[1]);
      r.c = std::stoull(fields[2]);
      r.d = std::stoull(fields[3]);
      r.trials = std::stoull(fields[4]);
      r.median_ns = std::stoull(fields[5]);
      r.flops = std::stoull(fields[6]);
      r.peak_elems = std::stoull(fields[7]);
    } catch (const std::exception&) {
      throw ShapeError("parse_csv: bad row: " + line);
    }
    out.push_back(r);
  }
  return out;
}

namespace {

const char* method_color(Method m) {
  switch (m) {
    case Method::NL: return "#d62728";
    case Method::ENL: return "#1f77b4";
    case Method::PolyNL: return "#2ca02c";
    case Method::LatentGNN: return "#ff7f0e";
    case Method::Conv1x1: return "#7f7f7f";
  }
  return "#000000";
}

}  // namespace

std::string emit_svg(const std::vector<BenchRecord>& records,
                     const std::vector<ScalingFit>& fits) {
  const double width = 880, height = 560;
  const double ml = 80, mr = 250, mt = 40, mb = 70;
  const double pw = width - ml - mr, ph = height - mt - mb;

  std::string svg = strprintf(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
      "viewBox=\"0 0 %.0f %.0f\" font-family=\"monospace\" font-size=\"12\">\n"
      "<rect width=\"%.0f\" height=\"%.0f\" fill=\"white\"/>\n",
      width, height, width, height, width, height);

  double lx0 = 0, lx1 = 1, ly0 = 0, ly1 = 1;
  if (!records.empty()) {
    lx0 = 1e300; lx1 = -1e300; ly0 = 1e300; ly1 = -1e300;
    for (const BenchRecord& r : records) {
      const double lx = std::log10(static_cast<double>(r.n));
      const double ly = std::log10(static_cast<double>(r.median_ns));
      lx0 = std::min(lx0, lx); lx1 = std::max(lx1, lx);
      ly0 = std::min(ly0, ly); ly1 = std::max(ly1, ly);
    }
    if (lx1 - lx0 < 1e-9) { lx0 -= 0.5; lx1 += 0.5; }
    if (ly1 - ly0 < 1e-9) { ly0 -= 0.5; ly1 += 0.5; }
    const double padx = 0.04 * (lx1 - lx0), pady = 0.06 * (ly1 - ly0);
    lx0 -= padx; lx1 += padx; ly0 -= pady; ly1 += pady;
  }
  auto sx = [&](double lx) { return ml + (lx - lx0) / (lx1 - lx0) * pw; };
  auto sy = [&](double ly) { return mt + ph - (ly - ly0) / (ly1 - ly0) * ph; };

  // frame and decade grid
  svg += strprintf(
      "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" fill=\"none\" "
      "stroke=\"black\"/>\n", ml, mt, pw, ph);
  for (int e = static_cast<int>(std::ceil(lx0)); e <= static_cast<int>(std::floor(lx1)); ++e) {
    const double x = sx(e);
    svg += strprintf("<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" "
                     "stroke=\"#dddddd\"/>\n", x, mt, x, mt + ph);
    svg += strprintf("<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">1e%d</text>\n",
                     x, mt + ph + 18, e);
  }
  for (int e = static_cast<int>(std::ceil(ly0)); e <= static_cast<int>(std::floor(ly1)); ++e) {
    const double y = sy(e);
    svg += strprintf("<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" "
                     "stroke=\"#dddddd\"/>\n", ml, y, ml + pw, y);
    svg += strprintf("<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\">1e%d</text>\n",
                     ml - 6, y + 4, e);
  }
  svg += strprintf("<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">spatial positions N</text>\n",
                   ml + pw / 2, height - 20);
  svg += strprintf("<text x=\"18\" y=\"%.1f\" text-anchor=\"middle\" "
                   "transform=\"rotate(-90 18 %.1f)\">median time [ns]</text>\n",
                   mt + ph / 2, mt + ph / 2);

  // series grouped by (method, c)
  std::map<std::pair<int, std::size_t>, std::vector<BenchRecord>> series;
  for (const BenchRecord& r : records)
    series[{static_cast<int>(r.method), r.c}].push_back(r);

  double legend_y = mt + 10;
  for (auto& [key, group] : series) {
    const Method m = static_cast<Method>(key.first);
    const std::size_t c = key.second;
    std::sort(group.begin(), group.end(),
              [](const BenchRecord& a, const BenchRecord& b) { return a.n < b.n; });
    const char* color = method_color(m);

    std::string pts;
    for (const BenchRecord& r : group)
      pts += strprintf("%.1f,%.1f ", sx(std::log10(double(r.n))),
                       sy(std::log10(double(r.median_ns))));
    svg += strprintf("<polyline points=\"%s\" fill=\"none\" stroke=\"%s\" "
                     "stroke-width=\"1.5\"/>\n", pts.c_str(), color);
    for (const BenchRecord& r : group)
      svg += strprintf("<circle cx=\"%.1f\" cy=\"%.1f\" r=\"3\" fill=\"%s\"/>\n",
                       sx(std::log10(double(r.n))),
                       sy(std::log10(double(r.median_ns))), color);

    // fitted line, when a fit for this (method, c) was supplied
    const ScalingFit* fit = nullptr;
    for (const ScalingFit& f : fits)
      if (f.method == m && f.c == c) fit = &f;
    std::string label = strprintf("%s C=%zu", method_name(m), c);
    if (fit && group.size() >= 2) {
      double xm = 0, ym = 0;
      for (const BenchRecord& r : group) {
        xm += std::log10(double(r.n));
        ym += std::log10(double(r.median_ns));
      }
      xm /= double(group.size());
      ym /= double(group.size());
      const double gx0 = std::log10(double(group.front().n));
      const double gx1 = std::log10(double(group.back().n));
      const double y0 = ym + fit->exponent * (gx0 - xm);
      const double y1 = ym + fit->exponent * (gx1 - xm);
      svg += strprintf("<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" "
                       "stroke=\"%s\" stroke-dasharray=\"5,4\"/>\n",
                       sx(gx0), sy(y0), sx(gx1), sy(y1), color);
      label += strprintf(" slope=%.2f", fit->exponent);
    }
    svg += strprintf("<circle cx=\"%.1f\" cy=\"%.1f\" r=\"4\" fill=\"%s\"/>\n",
                     ml + pw + 16, legend_y - 4, color);
    svg += strprintf("<text x=\"%.1f\" y=\"%.1f\">%s</text>\n", ml + pw + 26,
                     legend_y, label.c_str());
    legend_y += 18;
  }

  svg += "</svg>\n";
  return svg;
}

}  // namespace polynl
